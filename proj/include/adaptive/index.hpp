#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptive/range.hpp"
#include "adaptive/types.hpp"

namespace adaptive {

enum class TableState { Live, Closed, Archived };

std::string table_state_name(TableState s);
TableState table_state_from_name(const std::string& name);

struct Replica {
  NodeId node;
  bool offline_flag = false;

  bool operator==(const Replica&) const = default;
};

struct TableDescriptor {
  TableId id = 0;
  Range range;
  TableState state = TableState::Live;
  TimeInterval time_range;
  std::vector<Replica> replicas;
  std::int64_t record_count = 0;
  Tick opened_at = 0;
  std::optional<TableId> parent_id;

  bool operator==(const TableDescriptor&) const = default;
};

// An index change that takes effect at a future tick, giving every node time
// to receive it before it activates.
struct ScheduledUpdate {
  Tick effective_at = 0;
  std::vector<TableId> closes;
  std::vector<TableDescriptor> opens;

  bool operator==(const ScheduledUpdate&) const = default;
};

// The main index, or map, of one partition: every table descriptor plus the
// future-dated updates not yet applied.
struct MainIndex {
  std::map<TableId, TableDescriptor> descriptors;
  std::vector<ScheduledUpdate> pending_updates;  // ordered by effective_at
  TableId next_table_id = 1;

  bool operator==(const MainIndex&) const = default;
};

// Index seeded with a single live table over the full key space.
MainIndex make_genesis_index(KeySpace space, std::vector<Replica> replicas,
                             Tick now = 0);

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

// Checks the structural invariants: live ranges form an exact partition of
// the full key space, live tables have open time ranges, closed/archived
// tables have finite ones, and pending updates conserve range coverage.
ValidationReport validate_index(const MainIndex& index);

}  // namespace adaptive
