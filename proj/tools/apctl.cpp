// apctl - operator CLI for the adaptive partition simulator.
//
// Exit codes: 0 success, 2 input error, 3 availability error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptive_partition.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnavailable = 3;

struct ClusterDeleter {
  void operator()(ap_cluster* c) const { ap_cluster_destroy(c); }
};
using ClusterPtr = std::unique_ptr<ap_cluster, ClusterDeleter>;

struct OutDeleter {
  void operator()(char* p) const { ap_free(p); }
};
using OutPtr = std::unique_ptr<char, OutDeleter>;

int fail(ap_status status, const std::string& what) {
  std::cerr << "apctl: " << what << ": " << ap_last_error() << '\n';
  return status == AP_ERR_UNAVAILABLE ? kExitUnavailable : kExitInput;
}

ClusterPtr load_state(const std::string& path) {
  return ClusterPtr(ap_cluster_load(path.c_str()));
}

int save_state(ap_cluster* c, const std::string& path) {
  const ap_status s = ap_cluster_save(c, path.c_str());
  if (s != AP_OK) return fail(s, "saving state to " + path);
  return kExitOk;
}

std::string read_text(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  ok = true;
  return buf.str();
}

struct CsvRow {
  std::string device;
  double lat = 0.0;
  double lon = 0.0;
  long long tick = 0;
};

bool parse_csv_row(const std::string& line, CsvRow& row) {
  std::istringstream in(line);
  std::string lat, lon, tick;
  if (!std::getline(in, row.device, ',') || !std::getline(in, lat, ',') ||
      !std::getline(in, lon, ',') || !std::getline(in, tick))
    return false;
  try {
    std::size_t used = 0;
    row.lat = std::stod(lat, &used);
    if (used != lat.size()) return false;
    row.lon = std::stod(lon, &used);
    if (used != lon.size()) return false;
    row.tick = std::stoll(tick, &used);
    if (used != tick.size()) return false;
  } catch (const std::exception&) {
    return false;
  }
  return !row.device.empty();
}

int cmd_ingest(const ap_config& config, const std::string& nodes,
               const std::string& input, const std::string& state,
               const std::string& entry_node) {
  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "apctl: cannot open input: " << input << '\n';
    return kExitInput;
  }
  ClusterPtr cluster(ap_cluster_create(&config, nodes.c_str()));
  if (!cluster) return fail(AP_ERR_INVALID, "creating cluster");

  std::string node = entry_node;
  if (node.empty()) node = nodes.substr(0, nodes.find('@'));

  std::string line;
  std::size_t line_no = 0;
  long long last_tick = 0;
  long long rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    CsvRow row;
    if (!parse_csv_row(line, row)) {
      std::cerr << "apctl: " << input << ":" << line_no
                << ": malformed row\n";
      return kExitInput;
    }
    if (row.tick < last_tick) {
      std::cerr << "apctl: " << input << ":" << line_no
                << ": out-of-order timestamp\n";
      return kExitInput;
    }
    last_tick = row.tick;
    ap_status s = ap_cluster_advance_to(cluster.get(), row.tick);
    if (s != AP_OK) return fail(s, "stepping clock");
    s = ap_cluster_catalog(cluster.get(), node.c_str(), row.device.c_str(),
                           row.lat, row.lon, row.tick);
    if (s != AP_OK) {
      std::cerr << "apctl: " << input << ":" << line_no << ": "
                << ap_last_error() << '\n';
      return s == AP_ERR_UNAVAILABLE ? kExitUnavailable : kExitInput;
    }
    ++rows;
  }
  const ap_status s = ap_cluster_quiesce(cluster.get());
  if (s != AP_OK) return fail(s, "quiescing");

  char* text = nullptr;
  if (ap_cluster_summary(cluster.get(), &text) != AP_OK)
    return fail(AP_ERR_INVALID, "summary");
  OutPtr summary(text);
  std::cout << summary.get();

  if (!state.empty()) return save_state(cluster.get(), state);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive partition simulator"};
  app.require_subcommand(1);

  ap_config config;
  ap_config_default(&config);
  std::string key_space = "geo";
  std::string nodes = "n1@local";

  app.add_option("--optimum-count", config.optimum_count,
                 "records before a table splits (C_O)");
  app.add_option("--optimum-age", config.optimum_age,
                 "maximum ticks a table stays live (A_O)");
  app.add_option("--replicas", config.replicas, "copies of each table (K)");
  app.add_option("--locations", config.locations,
                 "distinct locations per table (L)");
  app.add_option("--lead", config.update_lead,
                 "future-dating distance for index updates");
  app.add_option("--retention", config.retention,
                 "ticks a closed table stays online");
  app.add_option("--sync-delay", config.sync_delay,
                 "message delivery delay in ticks");
  app.add_option("--seed", config.seed, "deterministic run seed");
  app.add_option("--nodes", nodes, "roster, e.g. n1@east,n2@west");
  app.add_option("--key-space", key_space, "geo|alpha")
      ->check(CLI::IsMember({"geo", "alpha"}));

  std::string input, state, script_path, out_path, archive_path, node;
  double lat_min = 0, lat_max = 0, lon_min = 0, lon_max = 0;
  long long t0 = 0, t1 = 0, table_id = 0;

  auto* ingest = app.add_subcommand("ingest", "replay a track point CSV");
  ingest->add_option("--input", input, "CSV: device,lat,lon,tick")->required();
  ingest->add_option("--state", state, "write cluster state here");
  ingest->add_option("--node", node, "entry node (default: first in roster)");

  auto* query = app.add_subcommand("query", "geo-time query");
  query->add_option("--state", state)->required();
  query->add_option("--lat-min", lat_min)->required();
  query->add_option("--lat-max", lat_max)->required();
  query->add_option("--lon-min", lon_min)->required();
  query->add_option("--lon-max", lon_max)->required();
  query->add_option("--t0", t0)->required();
  query->add_option("--t1", t1)->required();
  query->add_option("--node", node, "entry node (default: first online)");

  auto* dump = app.add_subcommand("dump-index", "print the main index");
  dump->add_option("--state", state)->required();
  dump->add_option("--out", out_path, "write here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "run an event script");
  simulate->add_option("--script", script_path)->required();

  auto* archive = app.add_subcommand("archive", "archive a closed table");
  archive->add_option("--state", state)->required();
  archive->add_option("--table", table_id)->required();
  archive->add_option("--out", archive_path)->required();

  auto* restore = app.add_subcommand("restore", "restore an archived table");
  restore->add_option("--state", state)->required();
  restore->add_option("--archive", archive_path)->required();

  auto* stats = app.add_subcommand("stats", "cluster summary");
  stats->add_option("--state", state)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  config.key_space =
      key_space == "alpha" ? AP_KEY_SPACE_ALPHA : AP_KEY_SPACE_GEO;

  if (*ingest) return cmd_ingest(config, nodes, input, state, node);

  if (*simulate) {
    bool ok = false;
    const std::string script = read_text(script_path, ok);
    if (!ok) {
      std::cerr << "apctl: cannot open script: " << script_path << '\n';
      return kExitInput;
    }
    ClusterPtr cluster(ap_cluster_create(&config, nodes.c_str()));
    if (!cluster) return fail(AP_ERR_INVALID, "creating cluster");
    char* log = nullptr;
    const ap_status s =
        ap_cluster_run_script(cluster.get(), script.c_str(), &log);
    if (s != AP_OK) return fail(s, "running script");
    OutPtr text(log);
    std::cout << text.get();
    return kExitOk;
  }

  // The remaining commands operate on a saved state file.
  ClusterPtr cluster = load_state(state);
  if (!cluster) return fail(AP_ERR_IO, "loading state from " + state);

  if (*query) {
    if (node.empty()) {
      char* text = nullptr;
      if (ap_cluster_summary(cluster.get(), &text) != AP_OK)
        return fail(AP_ERR_INVALID, "summary");
      OutPtr summary(text);
      std::istringstream in(summary.get());
      std::string line;
      while (std::getline(in, line)) {
        if (line.rfind("node ", 0) == 0 &&
            line.find("online=1") != std::string::npos) {
          node = line.substr(5, line.find(' ', 5) - 5);
          break;
        }
      }
    }
    char* csv = nullptr;
    const ap_status s =
        ap_cluster_query(cluster.get(), node.c_str(), lat_min, lat_max,
                         lon_min, lon_max, t0, t1, &csv);
    if (s != AP_OK) return fail(s, "query");
    OutPtr text(csv);
    std::cout << text.get();
    return kExitOk;
  }

  if (*dump) {
    char* text = nullptr;
    const ap_status s = ap_cluster_dump_index(cluster.get(), &text);
    if (s != AP_OK) return fail(s, "dump-index");
    OutPtr out(text);
    if (out_path.empty()) {
      std::cout << out.get();
    } else {
      std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
      if (!f) {
        std::cerr << "apctl: cannot write: " << out_path << '\n';
        return kExitInput;
      }
      f << out.get();
    }
    return kExitOk;
  }

  if (*archive) {
    const ap_status s =
        ap_cluster_archive_table(cluster.get(), table_id, archive_path.c_str());
    if (s != AP_OK) return fail(s, "archive");
    std::cout << "archived table " << table_id << " to " << archive_path
              << '\n';
    return save_state(cluster.get(), state);
  }

  if (*restore) {
    long long restored = 0;
    const ap_status s =
        ap_cluster_restore_archive(cluster.get(), archive_path.c_str(),
                                   &restored);
    if (s != AP_OK) return fail(s, "restore");
    std::cout << "restored table " << restored << '\n';
    return save_state(cluster.get(), state);
  }

  if (*stats) {
    char* text = nullptr;
    if (ap_cluster_summary(cluster.get(), &text) != AP_OK)
      return fail(AP_ERR_INVALID, "stats");
    OutPtr out(text);
    std::cout << out.get();
    return kExitOk;
  }

  return kExitInput;
}
