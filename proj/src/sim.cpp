#include "adaptive/sim.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "adaptive/archive.hpp"
#include "adaptive/error.hpp"

namespace adaptive {

namespace {

std::string replicas_text(const TableDescriptor& desc) {
  std::string out;
  for (const auto& r : desc.replicas) {
    if (!out.empty()) out += ',';
    out += r.node;
    if (r.offline_flag) out += '!';
  }
  return out;
}

std::string ids_text(const std::vector<TableDescriptor>& descs) {
  std::string out;
  for (const auto& d : descs) {
    if (!out.empty()) out += ',';
    out += std::to_string(d.id);
  }
  return out;
}

void write_descriptor(std::ostream& out, const TableDescriptor& d) {
  out << "desc " << d.id << ' ' << table_state_name(d.state) << ' '
      << range_to_string(d.range) << ' ' << d.time_range.start << ' ';
  if (d.time_range.end)
    out << *d.time_range.end;
  else
    out << "OPEN";
  out << ' ' << d.record_count << ' ' << d.opened_at << ' ';
  if (d.parent_id)
    out << *d.parent_id;
  else
    out << '-';
  out << ' ' << d.replicas.size();
  for (const auto& r : d.replicas) out << ' ' << r.node << ' ' << r.offline_flag;
  out << '\n';
}

TableDescriptor read_descriptor(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "desc")
    throw Error(ErrorCode::Corruption, "expected descriptor record");
  TableDescriptor d;
  std::string state;
  if (!(in >> d.id >> state))
    throw Error(ErrorCode::Corruption, "truncated descriptor");
  d.state = table_state_from_name(state);
  d.range = range_from_stream(in);
  std::string end, parent;
  std::size_t n = 0;
  if (!(in >> d.time_range.start >> end >> d.record_count >> d.opened_at >>
        parent >> n))
    throw Error(ErrorCode::Corruption, "truncated descriptor");
  if (end != "OPEN") d.time_range.end = std::stoll(end);
  if (parent != "-") d.parent_id = std::stoll(parent);
  for (std::size_t i = 0; i < n; ++i) {
    Replica r;
    if (!(in >> r.node >> r.offline_flag))
      throw Error(ErrorCode::Corruption, "truncated replica list");
    d.replicas.push_back(std::move(r));
  }
  return d;
}

void write_update(std::ostream& out, const ScheduledUpdate& u) {
  out << "pend " << u.effective_at << ' ' << u.closes.size();
  for (TableId id : u.closes) out << ' ' << id;
  out << ' ' << u.opens.size() << '\n';
  for (const auto& d : u.opens) write_descriptor(out, d);
}

ScheduledUpdate read_update(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "pend")
    throw Error(ErrorCode::Corruption, "expected pending update record");
  ScheduledUpdate u;
  std::size_t ncloses = 0, nopens = 0;
  if (!(in >> u.effective_at >> ncloses))
    throw Error(ErrorCode::Corruption, "truncated update");
  for (std::size_t i = 0; i < ncloses; ++i) {
    TableId id;
    if (!(in >> id)) throw Error(ErrorCode::Corruption, "truncated update");
    u.closes.push_back(id);
  }
  if (!(in >> nopens)) throw Error(ErrorCode::Corruption, "truncated update");
  for (std::size_t i = 0; i < nopens; ++i)
    u.opens.push_back(read_descriptor(in));
  return u;
}

}  // namespace

ClusterSim::ClusterSim(SimConfig config,
                       std::vector<placement::ServerInfo> roster)
    : config_(std::move(config)) {
  validate_config(config_.partition);
  if (config_.sync_delay < 1)
    throw Error(ErrorCode::InvalidArgument, "sync_delay must be >= 1");
  if (config_.evaluate_every < 1)
    throw Error(ErrorCode::InvalidArgument, "evaluate_every must be >= 1");
  if (roster.empty())
    throw Error(ErrorCode::InvalidArgument, "empty node roster");
  for (auto& s : roster) {
    if (s.node_id.empty() || s.location.empty())
      throw Error(ErrorCode::InvalidArgument, "node id and location required");
    if (nodes_.count(s.node_id))
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate node id: " + s.node_id);
    nodes_.emplace(s.node_id, NodeState{s, {}, {}});
  }

  // Genesis: one live table over the full key space, placed by load (all
  // zero here, so the lexicographically smallest valid node set).
  placement::LoadMap loads;
  auto placements =
      placement::place_replicas(1, online_servers(), loads, config_.partition);
  std::vector<Replica> replicas;
  for (const NodeId& n : placements[0]) replicas.push_back({n, false});
  MainIndex genesis =
      make_genesis_index(config_.partition.key_space, replicas, 0);
  for (auto& [id, node] : nodes_) {
    node.index = genesis;
    for (const NodeId& n : placements[0])
      if (n == id) node.stores.emplace(1, TableStore(1));
  }
}

void ClusterSim::log(const std::string& line) const {
  if (log_) log_("t=" + std::to_string(now_) + ' ' + line);
}

NodeState& ClusterSim::node_or_throw(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    throw Error(ErrorCode::InvalidArgument, "unknown node: " + id);
  return it->second;
}

const NodeState& ClusterSim::node_or_throw(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    throw Error(ErrorCode::InvalidArgument, "unknown node: " + id);
  return it->second;
}

NodeId ClusterSim::coordinator_id() const {
  for (const auto& [id, node] : nodes_)
    if (node.info.online) return id;
  return {};
}

std::vector<placement::ServerInfo> ClusterSim::online_servers() const {
  std::vector<placement::ServerInfo> out;
  for (const auto& [id, node] : nodes_)
    if (node.info.online) out.push_back(node.info);
  return out;
}

engine::StatsMap ClusterSim::live_stats(const MainIndex& index) const {
  engine::StatsMap out;
  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state != TableState::Live) continue;
    auto it = stats_.find(id);
    const std::int64_t count = it == stats_.end() ? 0 : it->second.record_count;
    out.emplace(id, engine::TableStats{id, count, desc.opened_at});
  }
  return out;
}

placement::LoadMap ClusterSim::current_loads(const NodeState& coord) const {
  const auto stats = live_stats(coord.index);
  placement::LoadMap loads;
  for (const auto& [id, node] : nodes_) {
    if (!node.info.online) continue;
    loads[id] = placement::server_load(id, coord.index, stats,
                                       config_.partition, now_);
  }
  return loads;
}

void ClusterSim::broadcast_update(const ScheduledUpdate& update,
                                  const NodeId& origin) {
  for (const auto& [id, node] : nodes_) {
    if (id == origin || !node.info.online) continue;
    messages_.push_back(
        UpdateMessage{id, update, now_ + config_.sync_delay});
  }
}

void ClusterSim::evaluate_and_schedule(
    const std::vector<engine::Proposal>& proposals, NodeState& coord) {
  if (proposals.empty()) return;
  placement::LoadMap loads = current_loads(coord);
  for (const auto& proposal : proposals) {
    std::vector<std::vector<NodeId>> placements;
    try {
      placements = placement::place_replicas(
          proposal.opens.size(), online_servers(), loads, config_.partition);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientServers &&
          e.code() != ErrorCode::InsufficientLocations)
        throw;
      log("schedule-skip table=" + std::to_string(proposal.close_id) +
          " reason=" + e.what());
      continue;
    }
    const ScheduledUpdate update = engine::schedule_update(
        coord.index, proposal, placements, now_, config_.partition);
    if (proposal.kind == engine::ProposalKind::Split)
      ++splits_;
    else
      ++replaces_;
    log("schedule kind=" +
        std::string(proposal.kind == engine::ProposalKind::Split ? "split"
                                                                 : "replace") +
        " close=" + std::to_string(proposal.close_id) + " open=" +
        ids_text(update.opens) +
        " effective=" + std::to_string(update.effective_at));
    broadcast_update(update, coord.info.node_id);
  }
}

void ClusterSim::apply_due_on(NodeState& node) {
  const auto applied = engine::apply_due_updates(node.index, now_);
  for (const auto& update : applied) {
    for (TableId id : update.closes) {
      auto st = stats_.find(id);
      if (st != stats_.end())
        node.index.descriptors.at(id).record_count = st->second.record_count;
    }
    for (const auto& opened : update.opens) {
      for (const auto& r : opened.replicas) {
        if (r.node == node.info.node_id && !node.stores.count(opened.id))
          node.stores.emplace(opened.id, TableStore(opened.id));
      }
    }
    log("apply node=" + node.info.node_id + " close=" +
        std::to_string(update.closes.front()) + " open=" +
        ids_text(update.opens));
  }
}

void ClusterSim::step() {
  const NodeId coord = coordinator_id();
  if (!coord.empty() && now_ % config_.evaluate_every == 0) {
    NodeState& c = nodes_.at(coord);
    evaluate_and_schedule(
        engine::evaluate(c.index, live_stats(c.index), config_.partition,
                         now_),
        c);
  }
  step_drain();
}

void ClusterSim::step_drain() {
  ++now_;
  std::vector<Message> still_in_flight;
  for (auto& msg : messages_) {
    const Tick deliver_at = std::visit(
        [](const auto& m) { return m.deliver_at; }, msg);
    if (deliver_at > now_) {
      still_in_flight.push_back(std::move(msg));
      continue;
    }
    if (const auto* rec = std::get_if<RecordMessage>(&msg)) {
      auto& node = nodes_.at(rec->to);
      auto [it, created] = node.stores.try_emplace(rec->table_id,
                                                   TableStore(rec->table_id));
      it->second.append(rec->point);
    } else {
      const auto& upd = std::get<UpdateMessage>(msg);
      auto& index = nodes_.at(upd.to).index;
      auto pos = std::upper_bound(
          index.pending_updates.begin(), index.pending_updates.end(),
          upd.update.effective_at,
          [](Tick t, const ScheduledUpdate& u) { return t < u.effective_at; });
      index.pending_updates.insert(pos, upd.update);
      index.next_table_id = std::max(
          index.next_table_id,
          upd.update.opens.empty() ? index.next_table_id
                                   : upd.update.opens.back().id + 1);
    }
  }
  messages_ = std::move(still_in_flight);
  for (auto& [id, node] : nodes_)
    if (node.info.online) apply_due_on(node);
}

int ClusterSim::quiesce(int max_steps) {
  int steps = 0;
  while (!check_convergence()) {
    if (steps++ >= max_steps)
      throw Error(ErrorCode::Corruption, "cluster failed to quiesce");
    step_drain();
  }
  return steps;
}

CatalogAck ClusterSim::catalog(const NodeId& entry, const TrackPoint& point) {
  validate_track_point(point);
  NodeState& node = node_or_throw(entry);
  if (!node.info.online)
    throw Error(ErrorCode::Unavailable, "entry node offline: " + entry);
  if (point.reported_at != now_)
    throw Error(ErrorCode::InvalidArgument,
                "reported_at " + std::to_string(point.reported_at) +
                    " does not match current tick " + std::to_string(now_));

  CatalogAck ack;
  ack.table_id = engine::route_catalog(node.index, point, now_);
  const TableDescriptor& desc = node.index.descriptors.at(ack.table_id);
  for (const Replica& r : desc.replicas) {
    const auto& target = nodes_.at(r.node);
    if (r.offline_flag || !target.info.online) {
      ++ack.skipped_replicas;
      continue;
    }
    if (r.node == entry) {
      auto [it, created] =
          node.stores.try_emplace(ack.table_id, TableStore(ack.table_id));
      it->second.append(point);
      ++ack.local_appends;
    } else {
      messages_.push_back(RecordMessage{r.node, ack.table_id, point,
                                        now_ + config_.sync_delay});
      ++ack.messages_sent;
    }
  }
  if (ack.local_appends + ack.messages_sent == 0)
    throw Error(ErrorCode::Unavailable,
                "all replicas of table " + std::to_string(ack.table_id) +
                    " are offline");
  auto [it, created] = stats_.emplace(
      ack.table_id, engine::TableStats{ack.table_id, 0, desc.opened_at});
  ++it->second.record_count;
  ++cataloged_;
  return ack;
}

std::vector<TrackPoint> ClusterSim::query(const NodeId& entry,
                                          const Range& q_range,
                                          const TimeInterval& q_time) const {
  const NodeState& node = node_or_throw(entry);
  if (!node.info.online)
    throw Error(ErrorCode::Unavailable, "entry node offline: " + entry);

  std::vector<TrackPoint> results;
  std::unordered_set<std::string> seen;
  for (TableId id : engine::route_query(node.index, q_range, q_time)) {
    const TableDescriptor& desc = node.index.descriptors.at(id);
    // Prefer unflagged online replicas: a flagged replica missed the writes
    // sent while its node was down and may be stale even after repair.
    const NodeState* replica = nullptr;
    bool replica_flagged = true;
    for (const Replica& r : desc.replicas) {
      const auto& candidate = nodes_.at(r.node);
      if (!candidate.info.online) continue;
      if (!replica || (replica_flagged && !r.offline_flag) ||
          (replica_flagged == r.offline_flag &&
           candidate.info.node_id < replica->info.node_id)) {
        replica = &candidate;
        replica_flagged = r.offline_flag;
      }
    }
    if (!replica)
      throw Error(ErrorCode::Unavailable,
                  "all replicas of table " + std::to_string(id) +
                      " are offline");
    auto it = replica->stores.find(id);
    if (it == replica->stores.end()) continue;
    for (auto& p : it->second.scan(q_range, q_time)) {
      if (seen.insert(record_key(p)).second) results.push_back(std::move(p));
    }
  }
  std::sort(results.begin(), results.end(),
            [](const TrackPoint& a, const TrackPoint& b) {
              if (a.reported_at != b.reported_at)
                return a.reported_at < b.reported_at;
              if (a.device_id != b.device_id) return a.device_id < b.device_id;
              return record_key(a) < record_key(b);
            });
  return results;
}

void ClusterSim::fail_node(const NodeId& node_id) {
  NodeState& node = node_or_throw(node_id);
  if (!node.info.online)
    throw Error(ErrorCode::InvalidArgument, "node already offline: " + node_id);
  node.info.online = false;

  std::erase_if(messages_, [&](const Message& m) {
    return std::visit([&](const auto& msg) { return msg.to == node_id; }, m);
  });

  // The cluster flags the node's replicas everywhere: no longer valid for
  // cataloging until the operator forces an age-out.
  for (auto& [id, other] : nodes_) {
    for (auto& [tid, desc] : other.index.descriptors)
      for (auto& r : desc.replicas)
        if (r.node == node_id) r.offline_flag = true;
    for (auto& update : other.index.pending_updates)
      for (auto& opened : update.opens)
        for (auto& r : opened.replicas)
          if (r.node == node_id) r.offline_flag = true;
  }
  log("fail node=" + node_id);
}

void ClusterSim::restore_node(const NodeId& node_id) {
  NodeState& node = node_or_throw(node_id);
  if (node.info.online)
    throw Error(ErrorCode::InvalidArgument, "node already online: " + node_id);
  node.info.online = true;

  // Re-sync the index from a current node, then back-fill the records of
  // every replica this node owns (full-copy repair). Flags stay set, so the
  // replicas remain closed for cataloging until a forced age-out.
  const NodeId donor_id = [&] {
    for (const auto& [id, other] : nodes_)
      if (id != node_id && other.info.online) return id;
    return NodeId{};
  }();
  if (!donor_id.empty()) {
    node.index = nodes_.at(donor_id).index;
    for (const auto& [tid, desc] : node.index.descriptors) {
      if (desc.state == TableState::Archived) continue;
      const bool owns = std::any_of(
          desc.replicas.begin(), desc.replicas.end(),
          [&](const Replica& r) { return r.node == node_id; });
      if (!owns) continue;
      const NodeState* source = nullptr;
      for (const Replica& r : desc.replicas) {
        if (r.node == node_id) continue;
        const auto& candidate = nodes_.at(r.node);
        if (!candidate.info.online || !candidate.stores.count(tid)) continue;
        if (!source || candidate.info.node_id < source->info.node_id)
          source = &candidate;
      }
      if (source)
        node.stores.insert_or_assign(tid, source->stores.at(tid));
      else
        node.stores.try_emplace(tid, TableStore(tid));
    }
  }
  log("restore node=" + node_id);
}

void ClusterSim::add_node(const NodeId& node_id, const std::string& location) {
  if (nodes_.count(node_id))
    throw Error(ErrorCode::Conflict, "duplicate node id: " + node_id);
  if (node_id.empty() || location.empty())
    throw Error(ErrorCode::InvalidArgument, "node id and location required");
  NodeState node;
  node.info = {node_id, location, true};
  const NodeId coord = coordinator_id();
  if (!coord.empty()) node.index = nodes_.at(coord).index;
  nodes_.emplace(node_id, std::move(node));
  log("add node=" + node_id + " location=" + location);
}

void ClusterSim::force_age_out() {
  const NodeId coord = coordinator_id();
  if (coord.empty())
    throw Error(ErrorCode::Unavailable, "no online node");
  NodeState& c = nodes_.at(coord);
  log("force-ageout");
  evaluate_and_schedule(engine::age_out_proposals(c.index), c);
}

bool ClusterSim::check_convergence() const {
  if (!messages_.empty()) return false;
  const MainIndex* first = nullptr;
  for (const auto& [id, node] : nodes_) {
    if (!node.info.online) continue;
    for (const auto& update : node.index.pending_updates)
      if (update.effective_at <= now_) return false;
    if (!first)
      first = &node.index;
    else if (!(*first == node.index))
      return false;
  }
  if (!first) return true;

  for (const auto& [tid, desc] : first->descriptors) {
    std::optional<std::unordered_set<std::string>> keys;
    for (const Replica& r : desc.replicas) {
      // Flagged replicas stopped receiving writes when their node went down
      // and stay excluded until a forced age-out rotates them out.
      if (r.offline_flag) continue;
      const auto& node = nodes_.at(r.node);
      if (!node.info.online) continue;
      auto it = node.stores.find(tid);
      std::unordered_set<std::string> these =
          it == node.stores.end() ? std::unordered_set<std::string>{}
                                  : it->second.key_set();
      if (!keys)
        keys = std::move(these);
      else if (*keys != these)
        return false;
    }
  }
  return true;
}

void ClusterSim::archive_table(TableId table_id, const std::string& path) {
  const NodeId coord = coordinator_id();
  if (coord.empty()) throw Error(ErrorCode::Unavailable, "no online node");
  const MainIndex& index = nodes_.at(coord).index;
  auto it = index.descriptors.find(table_id);
  if (it == index.descriptors.end())
    throw Error(ErrorCode::InvalidArgument,
                "unknown table: " + std::to_string(table_id));
  if (!archive_eligible(it->second, config_.partition.retention, now_))
    throw Error(ErrorCode::NotEligible,
                "table " + std::to_string(table_id) +
                    " is not eligible for archiving");

  // Archive the replica a query would scan: the lowest-id online replica,
  // preferring unflagged ones.
  const NodeState* source = nullptr;
  bool source_flagged = true;
  for (const Replica& r : it->second.replicas) {
    const auto& candidate = nodes_.at(r.node);
    if (!candidate.info.online) continue;
    if (!source || (source_flagged && !r.offline_flag) ||
        (source_flagged == r.offline_flag &&
         candidate.info.node_id < source->info.node_id)) {
      source = &candidate;
      source_flagged = r.offline_flag;
    }
  }
  if (!source)
    throw Error(ErrorCode::Unavailable,
                "all replicas of table " + std::to_string(table_id) +
                    " are offline");
  auto store_it = source->stores.find(table_id);
  const TableStore store = store_it == source->stores.end()
                               ? TableStore(table_id)
                               : store_it->second;
  write_file(path, encode_archive(it->second, store));

  for (auto& [id, node] : nodes_) {
    auto d = node.index.descriptors.find(table_id);
    if (d != node.index.descriptors.end()) {
      d->second.state = TableState::Archived;
      d->second.record_count =
          static_cast<std::int64_t>(store.size());
    }
    node.stores.erase(table_id);
  }
  log("archive table=" + std::to_string(table_id) + " records=" +
      std::to_string(store.size()));
}

TableId ClusterSim::restore_archive(const std::string& path) {
  const NodeId target = coordinator_id();
  if (target.empty()) throw Error(ErrorCode::Unavailable, "no online node");
  const ArchiveData data = decode_archive(read_file(path));

  const auto existing =
      nodes_.at(target).index.descriptors.find(data.table_id);
  if (existing != nodes_.at(target).index.descriptors.end() &&
      existing->second.state != TableState::Archived)
    throw Error(ErrorCode::Conflict,
                "table " + std::to_string(data.table_id) +
                    " is already online");

  TableStore store(data.table_id);
  for (const auto& p : data.records) store.append(p);

  for (auto& [id, node] : nodes_) {
    TableDescriptor desc;
    desc.id = data.table_id;
    desc.range = data.range;
    desc.state = TableState::Closed;
    desc.time_range = data.time_range;
    desc.replicas = {{target, false}};
    desc.record_count = static_cast<std::int64_t>(store.size());
    desc.opened_at = data.time_range.start;
    node.index.descriptors.insert_or_assign(data.table_id, desc);
    node.index.next_table_id =
        std::max(node.index.next_table_id, data.table_id + 1);
  }
  nodes_.at(target).stores.insert_or_assign(data.table_id, std::move(store));
  log("restore-archive table=" + std::to_string(data.table_id));
  return data.table_id;
}

std::string ClusterSim::dump_index() const {
  NodeId view = coordinator_id();
  if (view.empty()) view = nodes_.begin()->first;
  const MainIndex& index = nodes_.at(view).index;
  std::ostringstream out;
  for (const auto& [id, desc] : index.descriptors) {
    std::int64_t count = desc.record_count;
    if (desc.state == TableState::Live) {
      auto it = stats_.find(id);
      count = it == stats_.end() ? 0 : it->second.record_count;
    }
    out << id << ' ' << table_state_name(desc.state) << ' '
        << range_to_string(desc.range) << ' ' << desc.time_range.start << ' ';
    if (desc.time_range.end)
      out << *desc.time_range.end;
    else
      out << "OPEN";
    out << ' ' << count << ' ' << replicas_text(desc) << '\n';
  }
  return out.str();
}

std::string ClusterSim::summary() const {
  std::ostringstream out;
  out << "now=" << now_ << '\n';
  out << "records=" << cataloged_ << '\n';
  NodeId view = coordinator_id();
  if (view.empty()) view = nodes_.begin()->first;
  const NodeState& coord = nodes_.at(view);
  std::int64_t live = 0, closed = 0, archived = 0;
  for (const auto& [id, desc] : coord.index.descriptors) {
    switch (desc.state) {
      case TableState::Live: ++live; break;
      case TableState::Closed: ++closed; break;
      case TableState::Archived: ++archived; break;
    }
  }
  out << "tables=" << coord.index.descriptors.size() << " live=" << live
      << " closed=" << closed << " archived=" << archived << '\n';
  out << "splits=" << splits_ << " replaces=" << replaces_ << '\n';
  const auto stats = live_stats(coord.index);
  for (const auto& [id, node] : nodes_) {
    double load = 0.0;
    if (node.info.online)
      load = placement::server_load(id, coord.index, stats, config_.partition,
                                    now_);
    std::int64_t replicas = 0;
    for (const auto& [tid, desc] : coord.index.descriptors) {
      if (desc.state != TableState::Live) continue;
      for (const auto& r : desc.replicas)
        if (r.node == id && !r.offline_flag) ++replicas;
    }
    out << "node " << id << " location=" << node.info.location
        << " online=" << node.info.online << " load=" << load
        << " live_replicas=" << replicas << '\n';
  }
  return out.str();
}

void ClusterSim::serialize(std::ostream& out) const {
  const auto& p = config_.partition;
  out << "APSTATE1\n";
  out << "config " << p.optimum_count << ' ' << p.optimum_age << ' '
      << p.replication_factor << ' ' << p.location_count << ' '
      << p.update_lead << ' ' << p.retention << ' '
      << (p.key_space == KeySpace::Geo ? "GEO" : "ALPHA") << ' '
      << config_.sync_delay << ' ' << config_.evaluate_every << ' '
      << config_.seed << '\n';
  out << "clock " << now_ << ' ' << cataloged_ << ' ' << splits_ << ' '
      << replaces_ << '\n';
  out << "stats " << stats_.size() << '\n';
  for (const auto& [id, s] : stats_)
    out << "stat " << id << ' ' << s.record_count << ' ' << s.opened_at
        << '\n';
  out << "nodes " << nodes_.size() << '\n';
  for (const auto& [id, node] : nodes_) {
    out << "node " << id << ' ' << node.info.location << ' '
        << node.info.online << '\n';
    out << "index " << node.index.next_table_id << ' '
        << node.index.descriptors.size() << ' '
        << node.index.pending_updates.size() << '\n';
    for (const auto& [tid, desc] : node.index.descriptors)
      write_descriptor(out, desc);
    for (const auto& update : node.index.pending_updates)
      write_update(out, update);
    out << "stores " << node.stores.size() << '\n';
    for (const auto& [tid, store] : node.stores) {
      out << "store " << tid << ' ' << store.size() << '\n';
      for (const auto& rec : store.records())
        out << "rec " << rec.device_id << ' ' << format_coord(rec.lat) << ' '
            << format_coord(rec.lon) << ' ' << rec.reported_at << '\n';
    }
  }
  out << "messages " << messages_.size() << '\n';
  for (const auto& msg : messages_) {
    if (const auto* rec = std::get_if<RecordMessage>(&msg)) {
      out << "mrec " << rec->to << ' ' << rec->table_id << ' '
          << rec->deliver_at << ' ' << rec->point.device_id << ' '
          << format_coord(rec->point.lat) << ' ' << format_coord(rec->point.lon)
          << ' ' << rec->point.reported_at << '\n';
    } else {
      const auto& upd = std::get<UpdateMessage>(msg);
      out << "mupd " << upd.to << ' ' << upd.deliver_at << '\n';
      write_update(out, upd.update);
    }
  }
}

ClusterSim ClusterSim::deserialize(std::istream& in) {
  auto expect = [&](const char* tag) {
    std::string got;
    if (!(in >> got) || got != tag)
      throw Error(ErrorCode::Corruption,
                  std::string("state file: expected '") + tag + "', got '" +
                      got + "'");
  };

  expect("APSTATE1");
  ClusterSim sim;
  expect("config");
  auto& p = sim.config_.partition;
  std::string space;
  if (!(in >> p.optimum_count >> p.optimum_age >> p.replication_factor >>
        p.location_count >> p.update_lead >> p.retention >> space >>
        sim.config_.sync_delay >> sim.config_.evaluate_every >>
        sim.config_.seed))
    throw Error(ErrorCode::Corruption, "state file: truncated config");
  p.key_space = space == "GEO" ? KeySpace::Geo : KeySpace::Alpha;
  validate_config(p);

  expect("clock");
  if (!(in >> sim.now_ >> sim.cataloged_ >> sim.splits_ >> sim.replaces_))
    throw Error(ErrorCode::Corruption, "state file: truncated clock");

  expect("stats");
  std::size_t nstats = 0;
  in >> nstats;
  for (std::size_t i = 0; i < nstats; ++i) {
    expect("stat");
    engine::TableStats s;
    if (!(in >> s.table_id >> s.record_count >> s.opened_at))
      throw Error(ErrorCode::Corruption, "state file: truncated stats");
    sim.stats_.emplace(s.table_id, s);
  }

  expect("nodes");
  std::size_t nnodes = 0;
  in >> nnodes;
  for (std::size_t i = 0; i < nnodes; ++i) {
    expect("node");
    NodeState node;
    if (!(in >> node.info.node_id >> node.info.location >> node.info.online))
      throw Error(ErrorCode::Corruption, "state file: truncated node");
    expect("index");
    std::size_t ndescs = 0, npending = 0;
    if (!(in >> node.index.next_table_id >> ndescs >> npending))
      throw Error(ErrorCode::Corruption, "state file: truncated index");
    for (std::size_t d = 0; d < ndescs; ++d) {
      TableDescriptor desc = read_descriptor(in);
      node.index.descriptors.emplace(desc.id, std::move(desc));
    }
    for (std::size_t u = 0; u < npending; ++u)
      node.index.pending_updates.push_back(read_update(in));
    expect("stores");
    std::size_t nstores = 0;
    in >> nstores;
    for (std::size_t s = 0; s < nstores; ++s) {
      expect("store");
      TableId tid = 0;
      std::size_t nrecords = 0;
      if (!(in >> tid >> nrecords))
        throw Error(ErrorCode::Corruption, "state file: truncated store");
      TableStore store(tid);
      for (std::size_t r = 0; r < nrecords; ++r) {
        expect("rec");
        TrackPoint rec;
        if (!(in >> rec.device_id >> rec.lat >> rec.lon >> rec.reported_at))
          throw Error(ErrorCode::Corruption, "state file: truncated record");
        store.append(rec);
      }
      node.stores.emplace(tid, std::move(store));
    }
    sim.nodes_.emplace(node.info.node_id, std::move(node));
  }

  expect("messages");
  std::size_t nmessages = 0;
  in >> nmessages;
  for (std::size_t i = 0; i < nmessages; ++i) {
    std::string tag;
    if (!(in >> tag))
      throw Error(ErrorCode::Corruption, "state file: truncated messages");
    if (tag == "mrec") {
      RecordMessage m;
      if (!(in >> m.to >> m.table_id >> m.deliver_at >> m.point.device_id >>
            m.point.lat >> m.point.lon >> m.point.reported_at))
        throw Error(ErrorCode::Corruption, "state file: truncated message");
      sim.messages_.push_back(std::move(m));
    } else if (tag == "mupd") {
      UpdateMessage m;
      if (!(in >> m.to >> m.deliver_at))
        throw Error(ErrorCode::Corruption, "state file: truncated message");
      m.update = read_update(in);
      sim.messages_.push_back(std::move(m));
    } else {
      throw Error(ErrorCode::Corruption,
                  "state file: unknown message tag " + tag);
    }
  }
  if (sim.nodes_.empty())
    throw Error(ErrorCode::Corruption, "state file: no nodes");
  return sim;
}

}  // namespace adaptive
