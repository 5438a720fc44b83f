#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "adaptive/types.hpp"

namespace adaptive {

// Sentinel slack on the global latitude upper bound so lat = 90 stays
// representable under half-open containment. Also the minimum span a box
// side must have to be splittable.
inline constexpr double kGeoEpsilon = 1e-6;

enum class KeySpace { Geo, Alpha };

// Half-open box: lat in [lat_min, lat_max), lon in [lon_min, lon_max).
struct GeoBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat < lat_max && lon >= lon_min && lon < lon_max;
  }

  bool operator==(const GeoBox&) const = default;
};

GeoBox global_geo_box();  // lat [-90, 90+eps), lon [-180, 180)

// First-letter key range [low, high); a missing high is the TOP sentinel.
struct KeyRange {
  std::string low;
  std::optional<std::string> high;

  bool contains(const std::string& key) const {
    return key >= low && (!high || key < *high);
  }

  bool operator==(const KeyRange&) const = default;
};

KeyRange global_key_range();  // [A, TOP)

using Range = std::variant<GeoBox, KeyRange>;

KeySpace range_kind(const Range& r);

// Routing key for the alphanumeric key space: uppercased first letter of the
// device id. Throws InvalidArgument when the first character is not a letter.
std::string alpha_bucket(const std::string& device_id);

bool contains(const Range& range, const TrackPoint& p);

// Throws Error(InvalidArgument) on kind mismatch.
bool intersects(const Range& a, const Range& b);

// Quadrants split at the lat/lon midpoints, ordered SW, SE, NW, NE.
// Throws Error(DegenerateSplit) when a side's span is below kGeoEpsilon.
std::array<GeoBox, 4> bisect_geo(const GeoBox& box);

// Split at the median first letter of the A-Z alphabet.
// Throws Error(DegenerateSplit) on a single-letter range.
std::array<KeyRange, 2> bisect_key(const KeyRange& range);

// Measure (area in degrees^2, or letter count) used by the coverage checks.
double range_measure(const Range& r);
double intersection_measure(const Range& a, const Range& b);
bool ranges_disjoint(const Range& a, const Range& b);
bool range_equal(const Range& a, const Range& b);

// Token form used by archives, index dumps, and state files:
//   GEO <lat_min> <lat_max> <lon_min> <lon_max>   (%.17g bounds)
//   ALPHA <low> <high|TOP>
std::string range_to_string(const Range& r);
Range range_from_stream(std::istream& in);

}  // namespace adaptive
