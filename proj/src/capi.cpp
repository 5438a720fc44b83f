#include "adaptive_partition.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "adaptive/archive.hpp"
#include "adaptive/error.hpp"
#include "adaptive/sim.hpp"

using namespace adaptive;

struct ap_cluster {
  ClusterSim sim;
};

namespace {

thread_local std::string g_last_error;

ap_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Unavailable:
      return AP_ERR_UNAVAILABLE;
    case ErrorCode::Io:
      return AP_ERR_IO;
    case ErrorCode::Conflict:
      return AP_ERR_CONFLICT;
    case ErrorCode::Corruption:
    case ErrorCode::ChecksumMismatch:
      return AP_ERR_CORRUPT;
    default:
      return AP_ERR_INVALID;
  }
}

template <typename Fn>
ap_status wrap(Fn&& fn) {
  try {
    fn();
    return AP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AP_ERR_INVALID;
  }
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<placement::ServerInfo> parse_roster(const char* nodes) {
  std::vector<placement::ServerInfo> roster;
  if (!nodes) return roster;
  std::istringstream in(nodes);
  std::string entry;
  while (std::getline(in, entry, ',')) {
    const auto at = entry.find('@');
    if (at == std::string::npos || at == 0 || at + 1 == entry.size())
      throw Error(ErrorCode::InvalidArgument,
                  "node entry must be id@location: " + entry);
    roster.push_back({entry.substr(0, at), entry.substr(at + 1), true});
  }
  return roster;
}

SimConfig to_sim_config(const ap_config& c) {
  SimConfig out;
  out.partition.optimum_count = c.optimum_count;
  out.partition.optimum_age = c.optimum_age;
  out.partition.replication_factor = c.replicas;
  out.partition.location_count = c.locations;
  out.partition.update_lead = c.update_lead;
  out.partition.retention = c.retention;
  out.partition.key_space =
      c.key_space == AP_KEY_SPACE_ALPHA ? KeySpace::Alpha : KeySpace::Geo;
  out.sync_delay = c.sync_delay;
  out.evaluate_every = c.evaluate_every;
  out.seed = c.seed;
  return out;
}

}  // namespace

extern "C" {

void ap_config_default(ap_config* config) {
  *config = ap_config{};
  config->optimum_count = 1000;
  config->optimum_age = 10;
  config->replicas = 1;
  config->locations = 1;
  config->update_lead = 2;
  config->retention = 100;
  config->sync_delay = 1;
  config->evaluate_every = 1;
  config->seed = 0;
  config->key_space = AP_KEY_SPACE_GEO;
}

ap_cluster* ap_cluster_create(const ap_config* config, const char* nodes) {
  ap_cluster* c = nullptr;
  wrap([&] {
    if (!config)
      throw Error(ErrorCode::InvalidArgument, "null config");
    c = new ap_cluster{ClusterSim(to_sim_config(*config),
                                  parse_roster(nodes))};
  });
  return c;
}

ap_cluster* ap_cluster_load(const char* path) {
  ap_cluster* c = nullptr;
  wrap([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error(ErrorCode::Io, std::string("cannot open: ") + path);
    c = new ap_cluster{ClusterSim::deserialize(in)};
  });
  return c;
}

ap_status ap_cluster_save(ap_cluster* c, const char* path) {
  return wrap([&] {
    std::ostringstream out;
    c->sim.serialize(out);
    write_file(path, out.str());
  });
}

void ap_cluster_destroy(ap_cluster* c) { delete c; }

const char* ap_last_error(void) { return g_last_error.c_str(); }

long long ap_cluster_now(const ap_cluster* c) { return c->sim.now(); }

ap_status ap_cluster_advance_to(ap_cluster* c, long long tick) {
  return wrap([&] {
    if (tick < c->sim.now())
      throw Error(ErrorCode::InvalidArgument, "cannot step backwards");
    while (c->sim.now() < tick) c->sim.step();
  });
}

ap_status ap_cluster_quiesce(ap_cluster* c) {
  return wrap([&] { c->sim.quiesce(); });
}

ap_status ap_cluster_catalog(ap_cluster* c, const char* node,
                             const char* device, double lat, double lon,
                             long long tick) {
  return wrap([&] {
    c->sim.catalog(node ? node : "",
                   TrackPoint{device ? device : "", lat, lon, tick});
  });
}

ap_status ap_cluster_query(ap_cluster* c, const char* node, double lat_min,
                           double lat_max, double lon_min, double lon_max,
                           long long t_start, long long t_end, char** out) {
  return wrap([&] {
    if (lat_min >= lat_max || lon_min >= lon_max)
      throw Error(ErrorCode::InvalidArgument, "empty or inverted query box");
    if (t_start >= t_end)
      throw Error(ErrorCode::InvalidArgument, "empty or inverted time range");
    const auto results =
        c->sim.query(node ? node : "",
                     GeoBox{lat_min, lat_max, lon_min, lon_max},
                     TimeInterval{t_start, t_end});
    std::ostringstream csv;
    for (const auto& p : results)
      csv << p.device_id << ',' << format_coord(p.lat) << ','
          << format_coord(p.lon) << ',' << p.reported_at << '\n';
    *out = copy_out(csv.str());
  });
}

ap_status ap_cluster_dump_index(ap_cluster* c, char** out) {
  return wrap([&] { *out = copy_out(c->sim.dump_index()); });
}

ap_status ap_cluster_summary(ap_cluster* c, char** out) {
  return wrap([&] { *out = copy_out(c->sim.summary()); });
}

ap_status ap_cluster_fail_node(ap_cluster* c, const char* node) {
  return wrap([&] { c->sim.fail_node(node ? node : ""); });
}

ap_status ap_cluster_restore_node(ap_cluster* c, const char* node) {
  return wrap([&] { c->sim.restore_node(node ? node : ""); });
}

ap_status ap_cluster_add_node(ap_cluster* c, const char* node,
                              const char* location) {
  return wrap([&] {
    c->sim.add_node(node ? node : "", location ? location : "");
  });
}

ap_status ap_cluster_force_age_out(ap_cluster* c) {
  return wrap([&] { c->sim.force_age_out(); });
}

ap_status ap_cluster_archive_table(ap_cluster* c, long long table_id,
                                   const char* path) {
  return wrap([&] { c->sim.archive_table(table_id, path); });
}

ap_status ap_cluster_restore_archive(ap_cluster* c, const char* path,
                                     long long* table_id) {
  return wrap([&] {
    const TableId id = c->sim.restore_archive(path);
    if (table_id) *table_id = id;
  });
}

ap_status ap_cluster_run_script(ap_cluster* c, const char* script,
                                char** out) {
  return wrap([&] {
    *out = copy_out(run_script(c->sim, script ? script : ""));
  });
}

int ap_cluster_converged(const ap_cluster* c) {
  return c->sim.check_convergence() ? 1 : 0;
}

void ap_free(char* p) { std::free(p); }

}  // extern "C"
