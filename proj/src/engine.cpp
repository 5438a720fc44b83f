#include "adaptive/engine.hpp"

#include <algorithm>
#include <set>

#include "adaptive/error.hpp"

namespace adaptive::engine {

namespace {

std::set<TableId> pending_closes(const MainIndex& index) {
  std::set<TableId> out;
  for (const auto& update : index.pending_updates)
    out.insert(update.closes.begin(), update.closes.end());
  return out;
}

std::vector<Range> split_ranges(const Range& range) {
  if (const auto* box = std::get_if<GeoBox>(&range)) {
    const auto children = bisect_geo(*box);
    return {children[0], children[1], children[2], children[3]};
  }
  const auto children = bisect_key(std::get<KeyRange>(range));
  return {children[0], children[1]};
}

}  // namespace

TableId route_catalog(const MainIndex& index, const TrackPoint& point,
                      Tick now) {
  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state != TableState::Live) continue;
    if (!contains(desc.range, point)) continue;
    if (desc.opened_at > now)
      throw Error(ErrorCode::Corruption,
                  "live table " + std::to_string(id) + " opens in the future");
    return id;
  }
  throw Error(ErrorCode::Corruption, "no live table contains the point");
}

std::vector<TableId> route_query(const MainIndex& index, const Range& q_range,
                                 const TimeInterval& q_time) {
  std::vector<TableId> out;
  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state == TableState::Archived) continue;
    if (intersects(desc.range, q_range) &&
        intersects_time(desc.time_range, q_time))
      out.push_back(id);
  }
  return out;
}

std::vector<Proposal> evaluate(const MainIndex& index, const StatsMap& stats,
                               const PartitionConfig& config, Tick now) {
  validate_config(config);
  const auto pending = pending_closes(index);
  std::vector<Proposal> proposals;

  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state != TableState::Live || pending.count(id)) continue;
    auto it = stats.find(id);
    if (it == stats.end())
      throw Error(ErrorCode::InvalidArgument,
                  "missing stats for live table " + std::to_string(id));
    const std::int64_t count = it->second.record_count;
    const Tick age = now - it->second.opened_at;

    if (count > config.optimum_count) {
      try {
        proposals.push_back({id, ProposalKind::Split,
                             split_ranges(desc.range)});
        continue;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateSplit) throw;
        // Hot micro-cells cannot split; rotate the table instead.
        proposals.push_back({id, ProposalKind::Replace, {desc.range}});
        continue;
      }
    }
    // A close scheduled now takes effect update_lead ticks later; trigger
    // early enough that the table never outlives the maximum age.
    if (age + config.update_lead >= config.optimum_age)
      proposals.push_back({id, ProposalKind::Replace, {desc.range}});
  }
  return proposals;
}

std::vector<Proposal> age_out_proposals(const MainIndex& index) {
  const auto pending = pending_closes(index);
  std::vector<Proposal> proposals;
  for (const auto& [id, desc] : index.descriptors) {
    if (desc.state != TableState::Live || pending.count(id)) continue;
    proposals.push_back({id, ProposalKind::Replace, {desc.range}});
  }
  return proposals;
}

ScheduledUpdate schedule_update(MainIndex& index, const Proposal& proposal,
                                const std::vector<std::vector<NodeId>>& placements,
                                Tick now, const PartitionConfig& config) {
  if (pending_closes(index).count(proposal.close_id))
    throw Error(ErrorCode::DuplicateClose,
                "table " + std::to_string(proposal.close_id) +
                    " already has a pending close");
  auto it = index.descriptors.find(proposal.close_id);
  if (it == index.descriptors.end() || it->second.state != TableState::Live)
    throw Error(ErrorCode::InvalidArgument,
                "proposal does not close a live table");
  if (placements.size() != proposal.opens.size())
    throw Error(ErrorCode::InvalidArgument,
                "one placement list required per opened table");

  ScheduledUpdate update;
  update.effective_at = now + config.update_lead;
  update.closes.push_back(proposal.close_id);
  for (std::size_t i = 0; i < proposal.opens.size(); ++i) {
    if (placements[i].size() !=
        static_cast<std::size_t>(config.replication_factor))
      throw Error(ErrorCode::InvalidArgument,
                  "placement must carry exactly K replicas");
    TableDescriptor child;
    child.id = index.next_table_id++;
    child.range = proposal.opens[i];
    child.state = TableState::Live;
    child.time_range = TimeInterval{update.effective_at, std::nullopt};
    for (const NodeId& node : placements[i])
      child.replicas.push_back({node, false});
    child.opened_at = update.effective_at;
    child.parent_id = proposal.close_id;
    update.opens.push_back(std::move(child));
  }

  auto pos = std::upper_bound(
      index.pending_updates.begin(), index.pending_updates.end(),
      update.effective_at,
      [](Tick t, const ScheduledUpdate& u) { return t < u.effective_at; });
  index.pending_updates.insert(pos, update);
  return update;
}

std::vector<ScheduledUpdate> apply_due_updates(MainIndex& index, Tick now) {
  std::vector<ScheduledUpdate> applied;
  while (!index.pending_updates.empty() &&
         index.pending_updates.front().effective_at <= now) {
    ScheduledUpdate update = index.pending_updates.front();
    index.pending_updates.erase(index.pending_updates.begin());
    for (TableId id : update.closes) {
      auto it = index.descriptors.find(id);
      if (it == index.descriptors.end())
        throw Error(ErrorCode::Corruption,
                    "update closes unknown table " + std::to_string(id));
      it->second.state = TableState::Closed;
      it->second.time_range.end = update.effective_at;
    }
    for (const TableDescriptor& opened : update.opens) {
      TableDescriptor d = opened;
      d.state = TableState::Live;
      d.opened_at = update.effective_at;
      d.time_range = TimeInterval{update.effective_at, std::nullopt};
      index.descriptors.emplace(d.id, std::move(d));
      index.next_table_id = std::max(index.next_table_id, opened.id + 1);
    }
    applied.push_back(std::move(update));
  }
  return applied;
}

std::vector<ScheduledUpdate> force_age_out(MainIndex& index,
                                           const PlacementProvider& placements,
                                           Tick now,
                                           const PartitionConfig& config) {
  std::vector<ScheduledUpdate> scheduled;
  for (const Proposal& p : age_out_proposals(index))
    scheduled.push_back(
        schedule_update(index, p, placements(p.opens.size()), now, config));
  return scheduled;
}

}  // namespace adaptive::engine
