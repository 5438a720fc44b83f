#pragma once

#include <cstdint>

#include "adaptive/range.hpp"
#include "adaptive/types.hpp"

namespace adaptive {

// The two partition settings plus the clustering knobs.
struct PartitionConfig {
  std::int64_t optimum_count = 1000;  // C_O: records before a table splits
  Tick optimum_age = 10;              // A_O: maximum time a table stays live
  int replication_factor = 1;        // K: copies of each table
  int location_count = 1;            // L: distinct locations among the copies
  Tick update_lead = 2;              // future-dating distance for index updates
  Tick retention = 100;              // ticks a closed table stays online
  KeySpace key_space = KeySpace::Geo;
};

// Throws Error(InvalidArgument) when a field violates its bounds
// (C_O > 0, A_O > 0, K >= 1, L >= 1, K >= L, lead >= 1, retention >= 0).
void validate_config(const PartitionConfig& config);

}  // namespace adaptive
