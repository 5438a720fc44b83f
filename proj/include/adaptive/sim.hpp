#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "adaptive/config.hpp"
#include "adaptive/engine.hpp"
#include "adaptive/index.hpp"
#include "adaptive/placement.hpp"
#include "adaptive/store.hpp"

namespace adaptive {

struct SimConfig {
  PartitionConfig partition;
  Tick sync_delay = 1;      // ticks between send and delivery
  Tick evaluate_every = 1;  // evaluation cadence
  std::uint64_t seed = 0;
};

struct RecordMessage {
  NodeId to;
  TableId table_id = 0;
  TrackPoint point;
  Tick deliver_at = 0;
};

struct UpdateMessage {
  NodeId to;
  ScheduledUpdate update;
  Tick deliver_at = 0;
};

using Message = std::variant<RecordMessage, UpdateMessage>;

struct NodeState {
  placement::ServerInfo info;
  MainIndex index;
  std::map<TableId, TableStore> stores;
};

struct CatalogAck {
  TableId table_id = 0;
  int local_appends = 0;
  int messages_sent = 0;
  int skipped_replicas = 0;  // offline or flagged
};

// Deterministic logical-clock simulation of one clustered partition.
// Single-threaded by contract: identical (seed, event sequence) yields an
// identical serialized state.
class ClusterSim {
 public:
  ClusterSim(SimConfig config, std::vector<placement::ServerInfo> roster);

  Tick now() const { return now_; }
  const SimConfig& config() const { return config_; }

  // One tick: evaluate/schedule on the coordinator at the current tick,
  // advance the clock, deliver due messages, apply due updates everywhere.
  void step();

  // Like step() but without evaluation; used to drain in-flight work.
  void step_drain();

  // Drains until check_convergence() holds; returns steps taken.
  // Throws Error(Corruption) if the cluster does not quiesce within the cap.
  int quiesce(int max_steps = 100000);

  // Routes via the entry node's index, appends locally when the entry node
  // holds a replica, and enqueues replication to the other online, unflagged
  // replicas. The point's reported_at must equal the current tick.
  CatalogAck catalog(const NodeId& entry, const TrackPoint& point);

  // Fan-out over the routed tables, scanning the lowest-id online replica of
  // each; results are deduped by record key and sorted by
  // (reported_at, device_id). Throws Error(Unavailable) when every replica
  // of a routed table is offline.
  std::vector<TrackPoint> query(const NodeId& entry, const Range& q_range,
                                const TimeInterval& q_time) const;

  void fail_node(const NodeId& node_id);
  void restore_node(const NodeId& node_id);
  void add_node(const NodeId& node_id, const std::string& location);

  // Schedules a replace for every live table so new/restored servers become
  // placement candidates.
  void force_age_out();

  // No in-flight messages, no overdue pending updates, structurally
  // identical indexes on all online nodes, identical record keys across the
  // online replicas of each table.
  bool check_convergence() const;

  // Operator surface: archive an eligible closed table to a file and drop
  // its stores; restore rebuilds a single replica on the lowest online node.
  void archive_table(TableId table_id, const std::string& path);
  TableId restore_archive(const std::string& path);

  std::string dump_index() const;    // one line per descriptor, by table id
  std::string summary() const;       // counters and per-node loads

  void serialize(std::ostream& out) const;
  static ClusterSim deserialize(std::istream& in);

  using LogSink = std::function<void(const std::string&)>;
  void set_log(LogSink sink) { log_ = std::move(sink); }

  // Introspection for tests and the summary.
  const std::map<NodeId, NodeState>& nodes() const { return nodes_; }
  const std::vector<Message>& messages() const { return messages_; }
  const engine::StatsMap& stats() const { return stats_; }
  NodeId coordinator_id() const;  // lowest online node id, empty if none
  std::int64_t cataloged_records() const { return cataloged_; }
  std::int64_t split_count() const { return splits_; }
  std::int64_t replace_count() const { return replaces_; }

 private:
  ClusterSim() = default;

  NodeState& node_or_throw(const NodeId& id);
  const NodeState& node_or_throw(const NodeId& id) const;
  void evaluate_and_schedule(const std::vector<engine::Proposal>& proposals,
                             NodeState& coord);
  void broadcast_update(const ScheduledUpdate& update, const NodeId& origin);
  void apply_due_on(NodeState& node);
  placement::LoadMap current_loads(const NodeState& coord) const;
  std::vector<placement::ServerInfo> online_servers() const;
  engine::StatsMap live_stats(const MainIndex& index) const;
  void log(const std::string& line) const;

  SimConfig config_;
  Tick now_ = 0;
  std::map<NodeId, NodeState> nodes_;
  std::vector<Message> messages_;
  engine::StatsMap stats_;  // cluster-wide per-table catalog counters
  std::int64_t cataloged_ = 0;
  std::int64_t splits_ = 0;
  std::int64_t replaces_ = 0;
  LogSink log_;
};

// Runs a text event script against the cluster, appending one log line per
// observable effect. Grammar (one event per line, '#' comments):
//   TICK <n>
//   CATALOG <node> <lat> <lon> <device> <t>
//   QUERY <node> <lat_min> <lat_max> <lon_min> <lon_max> <t0> <t1>
//   FAIL <node> | RESTORE <node> | ADD <node> <location> | FORCE_AGEOUT
// Throws Error(InvalidArgument) with the line number on a parse error.
std::string run_script(ClusterSim& sim, const std::string& script);

}  // namespace adaptive
