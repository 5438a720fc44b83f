#include "adaptive/types.hpp"

#include <cctype>
#include <cstdio>

#include "adaptive/error.hpp"

namespace adaptive {

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string record_key(const TrackPoint& p) {
  return p.device_id + '|' + std::to_string(p.reported_at) + '|' +
         format_coord(p.lat) + '|' + format_coord(p.lon);
}

void validate_track_point(const TrackPoint& p) {
  if (p.device_id.empty())
    throw Error(ErrorCode::InvalidArgument, "empty device id");
  for (char c : p.device_id) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '|')
      throw Error(ErrorCode::InvalidArgument,
                  "device id may not contain whitespace, ',' or '|': " +
                      p.device_id);
  }
  if (!(p.lat >= -90.0 && p.lat <= 90.0))
    throw Error(ErrorCode::InvalidArgument,
                "latitude out of [-90, 90]: " + std::to_string(p.lat));
  if (!(p.lon >= -180.0 && p.lon < 180.0))
    throw Error(ErrorCode::InvalidArgument,
                "longitude out of [-180, 180): " + std::to_string(p.lon));
  if (p.reported_at < 0)
    throw Error(ErrorCode::InvalidArgument, "negative reported_at tick");
}

bool intersects_time(const TimeInterval& a, const TimeInterval& b) {
  const bool a_before_b = a.end && *a.end <= b.start;
  const bool b_before_a = b.end && *b.end <= a.start;
  return !a_before_b && !b_before_a;
}

}  // namespace adaptive
