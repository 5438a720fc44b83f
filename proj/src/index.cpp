#include "adaptive/index.hpp"

#include <cmath>
#include <sstream>

#include "adaptive/error.hpp"

namespace adaptive {

namespace {

// Tolerance for the area-conservation checks; splits are exact midpoint
// bisections so any real gap or overlap is orders of magnitude larger.
constexpr double kAreaTolerance = 1e-6;

std::string describe(TableId id) { return "table " + std::to_string(id); }

// Disjointness plus measure conservation implies an exact cover.
void check_cover(const std::vector<const Range*>& parts, double want_measure,
                 const std::string& what, ValidationReport& report) {
  double total = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    total += range_measure(*parts[i]);
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (intersects(*parts[i], *parts[j]))
        report.problems.push_back(what + ": overlapping ranges");
    }
  }
  if (std::abs(total - want_measure) > kAreaTolerance)
    report.problems.push_back(what + ": coverage gap (measure " +
                              std::to_string(total) + " vs " +
                              std::to_string(want_measure) + ")");
}

}  // namespace

std::string table_state_name(TableState s) {
  switch (s) {
    case TableState::Live: return "LIVE";
    case TableState::Closed: return "CLOSED";
    case TableState::Archived: return "ARCHIVED";
  }
  return "?";
}

TableState table_state_from_name(const std::string& name) {
  if (name == "LIVE") return TableState::Live;
  if (name == "CLOSED") return TableState::Closed;
  if (name == "ARCHIVED") return TableState::Archived;
  throw Error(ErrorCode::Corruption, "unknown table state: " + name);
}

MainIndex make_genesis_index(KeySpace space, std::vector<Replica> replicas,
                             Tick now) {
  MainIndex index;
  TableDescriptor root;
  root.id = 1;
  root.range = space == KeySpace::Geo ? Range(global_geo_box())
                                      : Range(global_key_range());
  root.state = TableState::Live;
  root.time_range = TimeInterval{now, std::nullopt};
  root.replicas = std::move(replicas);
  root.opened_at = now;
  index.descriptors.emplace(root.id, std::move(root));
  index.next_table_id = 2;
  return index;
}

ValidationReport validate_index(const MainIndex& index) {
  ValidationReport report;
  std::vector<const Range*> live_ranges;
  std::optional<KeySpace> kind;

  for (const auto& [id, desc] : index.descriptors) {
    if (desc.id != id)
      report.problems.push_back(describe(id) + ": id mismatch");
    if (!kind) kind = range_kind(desc.range);
    if (*kind != range_kind(desc.range))
      report.problems.push_back(describe(id) + ": mixed key-space kinds");
    if (desc.state == TableState::Live) {
      if (!desc.time_range.is_open())
        report.problems.push_back(describe(id) + ": live with finite end");
      live_ranges.push_back(&desc.range);
    } else if (desc.time_range.is_open()) {
      report.problems.push_back(describe(id) + ": closed with open end");
    }
    if (desc.record_count < 0)
      report.problems.push_back(describe(id) + ": negative record count");
  }

  if (!kind) return report;  // empty index: nothing to cover

  const Range full = *kind == KeySpace::Geo ? Range(global_geo_box())
                                            : Range(global_key_range());
  for (const Range* r : live_ranges) {
    if (std::abs(intersection_measure(*r, full) - range_measure(*r)) >
        kAreaTolerance)
      report.problems.push_back("live range outside the full key space");
  }
  check_cover(live_ranges, range_measure(full), "live partition", report);

  for (const auto& update : index.pending_updates) {
    double closed_measure = 0.0;
    std::vector<const Range*> closes;
    for (TableId id : update.closes) {
      auto it = index.descriptors.find(id);
      if (it == index.descriptors.end()) {
        report.problems.push_back("pending update closes unknown " +
                                  describe(id));
        continue;
      }
      closed_measure += range_measure(it->second.range);
      closes.push_back(&it->second.range);
    }
    std::vector<const Range*> opens;
    opens.reserve(update.opens.size());
    for (const auto& d : update.opens) opens.push_back(&d.range);
    // Each opened range must lie within the closed region; together with
    // disjointness and measure conservation that makes the swap exact.
    for (const Range* open : opens) {
      double covered = 0.0;
      for (const Range* close : closes)
        covered += intersection_measure(*open, *close);
      if (std::abs(covered - range_measure(*open)) > kAreaTolerance)
        report.problems.push_back(
            "pending update opens a range outside the closed region");
    }
    check_cover(opens, closed_measure, "pending update", report);
  }

  return report;
}

}  // namespace adaptive
