#include "adaptive/config.hpp"

#include "adaptive/error.hpp"

namespace adaptive {

void validate_config(const PartitionConfig& config) {
  if (config.optimum_count <= 0)
    throw Error(ErrorCode::InvalidArgument, "optimum_count must be > 0");
  if (config.optimum_age <= 0)
    throw Error(ErrorCode::InvalidArgument, "optimum_age must be > 0");
  if (config.replication_factor < 1)
    throw Error(ErrorCode::InvalidArgument, "replication_factor must be >= 1");
  if (config.location_count < 1)
    throw Error(ErrorCode::InvalidArgument, "location_count must be >= 1");
  if (config.replication_factor < config.location_count)
    throw Error(ErrorCode::InvalidArgument,
                "replication_factor must be >= location_count");
  if (config.update_lead < 1)
    throw Error(ErrorCode::InvalidArgument, "update_lead must be >= 1");
  if (config.retention < 0)
    throw Error(ErrorCode::InvalidArgument, "retention must be >= 0");
}

}  // namespace adaptive
