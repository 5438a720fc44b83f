#include "adaptive/placement.hpp"

#include <algorithm>
#include <set>

#include "adaptive/error.hpp"

namespace adaptive::placement {

namespace {

struct Candidate {
  double load;
  NodeId node;
  std::string location;
};

}  // namespace

double optimum_rate(const PartitionConfig& config) {
  validate_config(config);
  return static_cast<double>(config.optimum_count) /
         static_cast<double>(config.optimum_age);
}

double growth_rate(const engine::TableStats& stats, Tick now) {
  const Tick age = std::max<Tick>(now - stats.opened_at, 1);
  return static_cast<double>(stats.record_count) / static_cast<double>(age);
}

double load_factor(const engine::TableStats& stats,
                   const PartitionConfig& config, Tick now) {
  return growth_rate(stats, now) / optimum_rate(config);
}

double server_load(const NodeId& node_id, const MainIndex& index,
                   const engine::StatsMap& stats,
                   const PartitionConfig& config, Tick now) {
  double total = 0.0;
  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state != TableState::Live) continue;
    const bool on_node = std::any_of(
        desc.replicas.begin(), desc.replicas.end(), [&](const Replica& r) {
          return r.node == node_id && !r.offline_flag;
        });
    if (!on_node) continue;
    auto it = stats.find(id);
    if (it == stats.end()) continue;
    total += load_factor(it->second, config, now);
  }
  return total;
}

std::vector<std::vector<NodeId>> place_replicas(
    std::size_t new_table_count, const std::vector<ServerInfo>& servers,
    LoadMap& loads, const PartitionConfig& config) {
  validate_config(config);
  const std::size_t k = static_cast<std::size_t>(config.replication_factor);
  const std::size_t l = static_cast<std::size_t>(config.location_count);

  std::vector<Candidate> candidates;
  std::set<std::string> all_locations;
  for (const auto& s : servers) {
    if (!s.online) continue;
    candidates.push_back({loads[s.node_id], s.node_id, s.location});
    all_locations.insert(s.location);
  }
  if (candidates.size() < k)
    throw Error(ErrorCode::InsufficientServers,
                "need " + std::to_string(k) + " online servers, have " +
                    std::to_string(candidates.size()));
  if (all_locations.size() < l)
    throw Error(ErrorCode::InsufficientLocations,
                "need " + std::to_string(l) + " locations, have " +
                    std::to_string(all_locations.size()));

  std::vector<std::vector<NodeId>> placements;
  placements.reserve(new_table_count);

  for (std::size_t t = 0; t < new_table_count; ++t) {
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                return a.load != b.load ? a.load < b.load : a.node < b.node;
              });
    std::set<NodeId> chosen;
    std::set<std::string> chosen_locs;
    std::vector<NodeId> picks;
    while (picks.size() < k) {
      bool advanced = false;
      for (const auto& c : candidates) {
        if (chosen.count(c.node)) continue;
        // Taking this node must leave enough slots to still reach L
        // distinct locations from the remaining candidates.
        std::set<std::string> locs_after = chosen_locs;
        locs_after.insert(c.location);
        const std::size_t slots_left = k - picks.size() - 1;
        std::set<std::string> fresh_locs;
        for (const auto& other : candidates) {
          if (chosen.count(other.node) || other.node == c.node) continue;
          if (!locs_after.count(other.location))
            fresh_locs.insert(other.location);
        }
        if (locs_after.size() + std::min(slots_left, fresh_locs.size()) < l)
          continue;
        chosen.insert(c.node);
        chosen_locs.insert(c.location);
        picks.push_back(c.node);
        advanced = true;
        break;
      }
      if (!advanced)
        throw Error(ErrorCode::InsufficientLocations,
                    "cannot satisfy location constraint");
    }
    // A fresh table is expected to grow at the optimum rate; account one
    // unit of load per replica so sibling tables spread out.
    for (const NodeId& n : picks) {
      loads[n] += 1.0;
      for (auto& c : candidates)
        if (c.node == n) c.load += 1.0;
    }
    placements.push_back(std::move(picks));
  }
  return placements;
}

}  // namespace adaptive::placement
