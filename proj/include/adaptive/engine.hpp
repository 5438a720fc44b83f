#pragma once

#include <functional>
#include <map>
#include <vector>

#include "adaptive/config.hpp"
#include "adaptive/index.hpp"

namespace adaptive::engine {

// Observed growth of one live table: C_A cataloged records since it opened.
struct TableStats {
  TableId table_id = 0;
  std::int64_t record_count = 0;  // C_A
  Tick opened_at = 0;             // A_A = now - opened_at
};

using StatsMap = std::map<TableId, TableStats>;

enum class ProposalKind { Split, Replace };

// A close-and-reopen decision from evaluate(); carries no placements yet.
struct Proposal {
  TableId close_id = 0;
  ProposalKind kind = ProposalKind::Replace;
  std::vector<Range> opens;
};

// The unique live table containing the point's key. Throws
// Error(Corruption) when no live table contains it (invariant breach).
TableId route_catalog(const MainIndex& index, const TrackPoint& point,
                      Tick now);

// Every non-archived descriptor whose range and time range intersect the
// query. Availability of replicas is the caller's concern.
std::vector<TableId> route_query(const MainIndex& index, const Range& q_range,
                                 const TimeInterval& q_time);

// Periodic evaluation. A live table whose count exceeds C_O is split; one
// that would reach the maximum live age A_O by the time a scheduled close
// could take effect (age + update_lead >= A_O) is replaced over an identical
// range. Split wins when both hold. Un-splittable ranges fall back to
// replace. Tables with a pending close are skipped.
std::vector<Proposal> evaluate(const MainIndex& index, const StatsMap& stats,
                               const PartitionConfig& config, Tick now);

// Replace proposals for every live table regardless of age or count, e.g.
// after a node joins or is restored so new placements can reach it.
std::vector<Proposal> age_out_proposals(const MainIndex& index);

// Turns a proposal plus replica placements (one K-node list per opened
// table) into a pending update effective at now + update_lead, assigning
// fresh table ids. Throws Error(DuplicateClose) if the source table already
// has a pending close.
ScheduledUpdate schedule_update(MainIndex& index, const Proposal& proposal,
                                const std::vector<std::vector<NodeId>>& placements,
                                Tick now, const PartitionConfig& config);

// Applies every pending update with effective_at <= now, in order. Closed
// tables get a finite end; opened tables become live. Records never move.
std::vector<ScheduledUpdate> apply_due_updates(MainIndex& index, Tick now);

// Provider returns placements for `count` new tables.
using PlacementProvider =
    std::function<std::vector<std::vector<NodeId>>(std::size_t count)>;

// Schedules a replace for every live table (forced age-out).
std::vector<ScheduledUpdate> force_age_out(MainIndex& index,
                                           const PlacementProvider& placements,
                                           Tick now,
                                           const PartitionConfig& config);

}  // namespace adaptive::engine
