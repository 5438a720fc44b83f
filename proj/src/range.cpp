#include "adaptive/range.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <sstream>

#include "adaptive/error.hpp"

namespace adaptive {

namespace {

constexpr char kAlphaLow = 'A';
constexpr int kAlphabet = 26;

void check_geo(const GeoBox& b) {
  if (!(b.lat_min < b.lat_max) || !(b.lon_min < b.lon_max))
    throw Error(ErrorCode::InvalidArgument, "degenerate geo box");
}

int letter_index(const std::string& s) {
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty key");
  return s[0] - kAlphaLow;
}

// TOP maps to one past 'Z'.
int high_index(const KeyRange& r) {
  return r.high ? letter_index(*r.high) : kAlphabet;
}

std::string format_bound(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

GeoBox global_geo_box() {
  return GeoBox{-90.0, 90.0 + kGeoEpsilon, -180.0, 180.0};
}

KeyRange global_key_range() { return KeyRange{"A", std::nullopt}; }

KeySpace range_kind(const Range& r) {
  return std::holds_alternative<GeoBox>(r) ? KeySpace::Geo : KeySpace::Alpha;
}

std::string alpha_bucket(const std::string& device_id) {
  if (device_id.empty())
    throw Error(ErrorCode::InvalidArgument, "empty device id");
  const char c = static_cast<char>(
      std::toupper(static_cast<unsigned char>(device_id[0])));
  if (c < 'A' || c > 'Z')
    throw Error(ErrorCode::InvalidArgument,
                "device id does not start with a letter: " + device_id);
  return std::string(1, c);
}

bool contains(const Range& range, const TrackPoint& p) {
  if (const auto* box = std::get_if<GeoBox>(&range))
    return box->contains(p.lat, p.lon);
  return std::get<KeyRange>(range).contains(alpha_bucket(p.device_id));
}

bool intersects(const Range& a, const Range& b) {
  if (range_kind(a) != range_kind(b))
    throw Error(ErrorCode::InvalidArgument, "range kind mismatch");
  if (const auto* ba = std::get_if<GeoBox>(&a)) {
    const auto& bb = std::get<GeoBox>(b);
    return ba->lat_min < bb.lat_max && bb.lat_min < ba->lat_max &&
           ba->lon_min < bb.lon_max && bb.lon_min < ba->lon_max;
  }
  const auto& ka = std::get<KeyRange>(a);
  const auto& kb = std::get<KeyRange>(b);
  return letter_index(ka.low) < high_index(kb) &&
         letter_index(kb.low) < high_index(ka);
}

std::array<GeoBox, 4> bisect_geo(const GeoBox& box) {
  check_geo(box);
  if (box.lat_max - box.lat_min < kGeoEpsilon ||
      box.lon_max - box.lon_min < kGeoEpsilon)
    throw Error(ErrorCode::DegenerateSplit, "geo box too small to split");
  const double lat_mid = box.lat_min + (box.lat_max - box.lat_min) / 2.0;
  const double lon_mid = box.lon_min + (box.lon_max - box.lon_min) / 2.0;
  return {
      GeoBox{box.lat_min, lat_mid, box.lon_min, lon_mid},  // SW
      GeoBox{box.lat_min, lat_mid, lon_mid, box.lon_max},  // SE
      GeoBox{lat_mid, box.lat_max, box.lon_min, lon_mid},  // NW
      GeoBox{lat_mid, box.lat_max, lon_mid, box.lon_max},  // NE
  };
}

std::array<KeyRange, 2> bisect_key(const KeyRange& range) {
  const int lo = letter_index(range.low);
  const int hi = high_index(range);
  if (lo < 0 || hi > kAlphabet || lo >= hi)
    throw Error(ErrorCode::InvalidArgument, "invalid key range");
  const int mid = lo + (hi - lo) / 2;
  if (mid == lo)
    throw Error(ErrorCode::DegenerateSplit, "single-letter key range");
  const std::string split(1, static_cast<char>(kAlphaLow + mid));
  return {KeyRange{range.low, split}, KeyRange{split, range.high}};
}

double range_measure(const Range& r) {
  if (const auto* b = std::get_if<GeoBox>(&r))
    return (b->lat_max - b->lat_min) * (b->lon_max - b->lon_min);
  const auto& k = std::get<KeyRange>(r);
  return static_cast<double>(high_index(k) - letter_index(k.low));
}

double intersection_measure(const Range& a, const Range& b) {
  if (!intersects(a, b)) return 0.0;
  if (const auto* ba = std::get_if<GeoBox>(&a)) {
    const auto& bb = std::get<GeoBox>(b);
    const double lat = std::min(ba->lat_max, bb.lat_max) -
                       std::max(ba->lat_min, bb.lat_min);
    const double lon = std::min(ba->lon_max, bb.lon_max) -
                       std::max(ba->lon_min, bb.lon_min);
    return lat * lon;
  }
  const auto& ka = std::get<KeyRange>(a);
  const auto& kb = std::get<KeyRange>(b);
  const int lo = std::max(letter_index(ka.low), letter_index(kb.low));
  const int hi = std::min(high_index(ka), high_index(kb));
  return static_cast<double>(hi - lo);
}

bool ranges_disjoint(const Range& a, const Range& b) {
  return !intersects(a, b);
}

bool range_equal(const Range& a, const Range& b) {
  if (range_kind(a) != range_kind(b)) return false;
  if (const auto* ba = std::get_if<GeoBox>(&a))
    return *ba == std::get<GeoBox>(b);
  return std::get<KeyRange>(a) == std::get<KeyRange>(b);
}

std::string range_to_string(const Range& r) {
  std::ostringstream out;
  if (const auto* b = std::get_if<GeoBox>(&r)) {
    out << "GEO " << format_bound(b->lat_min) << ' ' << format_bound(b->lat_max)
        << ' ' << format_bound(b->lon_min) << ' ' << format_bound(b->lon_max);
  } else {
    const auto& k = std::get<KeyRange>(r);
    out << "ALPHA " << k.low << ' ' << (k.high ? *k.high : "TOP");
  }
  return out.str();
}

Range range_from_stream(std::istream& in) {
  std::string kind;
  if (!(in >> kind))
    throw Error(ErrorCode::Corruption, "truncated range");
  if (kind == "GEO") {
    GeoBox b;
    if (!(in >> b.lat_min >> b.lat_max >> b.lon_min >> b.lon_max))
      throw Error(ErrorCode::Corruption, "truncated geo range");
    return b;
  }
  if (kind == "ALPHA") {
    std::string low, high;
    if (!(in >> low >> high))
      throw Error(ErrorCode::Corruption, "truncated key range");
    return KeyRange{low, high == "TOP" ? std::nullopt
                                       : std::optional<std::string>(high)};
  }
  throw Error(ErrorCode::Corruption, "unknown range kind: " + kind);
}

}  // namespace adaptive
