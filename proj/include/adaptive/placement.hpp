#pragma once

#include <map>
#include <string>
#include <vector>

#include "adaptive/config.hpp"
#include "adaptive/engine.hpp"
#include "adaptive/index.hpp"

namespace adaptive::placement {

struct ServerInfo {
  NodeId node_id;
  std::string location;
  bool online = true;

  bool operator==(const ServerInfo&) const = default;
};

// R_O = C_O / A_O. Throws Error(InvalidArgument) on non-positive settings.
double optimum_rate(const PartitionConfig& config);

// R_A = C_A / A_A, with the divisor clamped to one tick for age zero.
double growth_rate(const engine::TableStats& stats, Tick now);

// L_T = R_A / R_O; exactly 1 when the table grows at the optimum rate.
double load_factor(const engine::TableStats& stats,
                   const PartitionConfig& config, Tick now);

// Sum of L_T over the live tables with an unflagged replica on the node.
double server_load(const NodeId& node_id, const MainIndex& index,
                   const engine::StatsMap& stats,
                   const PartitionConfig& config, Tick now);

using LoadMap = std::map<NodeId, double>;

// K distinct online nodes per new table, covering at least L distinct
// locations, preferring the lowest-loaded servers with ties broken by
// ascending node id. `loads` is accumulated in place between successive
// tables so sibling tables spread out. Throws Error(InsufficientServers) /
// Error(InsufficientLocations) when the roster cannot satisfy K or L.
std::vector<std::vector<NodeId>> place_replicas(
    std::size_t new_table_count, const std::vector<ServerInfo>& servers,
    LoadMap& loads, const PartitionConfig& config);

}  // namespace adaptive::placement
