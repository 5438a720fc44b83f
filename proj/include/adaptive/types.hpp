#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace adaptive {

using Tick = std::int64_t;
using TableId = std::int64_t;
using NodeId = std::string;

// One device report. Records are immutable once cataloged; dedup and
// replication idempotence key off record_key().
struct TrackPoint {
  std::string device_id;
  double lat = 0.0;
  double lon = 0.0;
  Tick reported_at = 0;
};

// Canonical fixed 6-decimal coordinate text. Record keys and archive bodies
// both use this form, so a record survives a print/parse round trip with an
// unchanged key.
std::string format_coord(double v);

// Deterministic unique key; pure function of the point's fields.
std::string record_key(const TrackPoint& p);

// Throws Error(InvalidArgument) on out-of-range coordinates, negative ticks,
// or a device id that would break the line-oriented file formats.
void validate_track_point(const TrackPoint& p);

// Half-open [start, end); a missing end means open-ended (live table).
struct TimeInterval {
  Tick start = 0;
  std::optional<Tick> end;

  bool is_open() const { return !end.has_value(); }
  bool contains(Tick t) const { return t >= start && (!end || t < *end); }

  bool operator==(const TimeInterval&) const = default;
};

bool intersects_time(const TimeInterval& a, const TimeInterval& b);

}  // namespace adaptive
