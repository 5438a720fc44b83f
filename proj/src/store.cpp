#include "adaptive/store.hpp"

namespace adaptive {

bool TableStore::append(const TrackPoint& p) {
  auto [it, inserted] = keys_.insert(record_key(p));
  if (!inserted) return false;
  records_.push_back(p);
  return true;
}

std::vector<TrackPoint> TableStore::scan(const Range& q_range,
                                         const TimeInterval& q_time) const {
  std::vector<TrackPoint> out;
  for (const auto& p : records_) {
    if (contains(q_range, p) && q_time.contains(p.reported_at))
      out.push_back(p);
  }
  return out;
}

}  // namespace adaptive
