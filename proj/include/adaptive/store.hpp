#pragma once

#include <unordered_set>
#include <vector>

#include "adaptive/range.hpp"
#include "adaptive/types.hpp"

namespace adaptive {

// Append-only record store for one table replica. Duplicate record keys are
// absorbed so at-least-once replication delivery stays idempotent.
class TableStore {
 public:
  TableStore() = default;
  explicit TableStore(TableId id) : table_id_(id) {}

  TableId table_id() const { return table_id_; }
  std::size_t size() const { return records_.size(); }

  // Returns true when the record was new.
  bool append(const TrackPoint& p);

  bool holds(const std::string& key) const { return keys_.count(key) > 0; }

  // Records matching both filters, in append order.
  std::vector<TrackPoint> scan(const Range& q_range,
                               const TimeInterval& q_time) const;

  const std::vector<TrackPoint>& records() const { return records_; }
  std::unordered_set<std::string> key_set() const { return keys_; }

 private:
  TableId table_id_ = 0;
  std::vector<TrackPoint> records_;
  std::unordered_set<std::string> keys_;
};

}  // namespace adaptive
