#include <sstream>

#include "adaptive/error.hpp"
#include "adaptive/sim.hpp"

namespace adaptive {

namespace {

[[noreturn]] void parse_error(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument,
              "script line " + std::to_string(line_no) + ": " + why);
}

std::string record_csv(const TrackPoint& p) {
  return p.device_id + ',' + format_coord(p.lat) + ',' + format_coord(p.lon) +
         ',' + std::to_string(p.reported_at);
}

}  // namespace

std::string run_script(ClusterSim& sim, const std::string& script) {
  std::ostringstream log;
  sim.set_log([&](const std::string& line) { log << line << '\n'; });

  std::istringstream lines(script);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream in(line);
    std::string op;
    if (!(in >> op) || op[0] == '#') continue;

    try {
      if (op == "TICK") {
        Tick target = 0;
        if (!(in >> target)) parse_error(line_no, "TICK needs a tick number");
        if (target < sim.now())
          parse_error(line_no, "TICK cannot move backwards");
        while (sim.now() < target) sim.step();
      } else if (op == "CATALOG") {
        TrackPoint p;
        NodeId node;
        if (!(in >> node >> p.lat >> p.lon >> p.device_id >> p.reported_at))
          parse_error(line_no, "CATALOG needs: node lat lon device tick");
        const CatalogAck ack = sim.catalog(node, p);
        log << "t=" << sim.now() << " catalog node=" << node
            << " device=" << p.device_id << " table=" << ack.table_id
            << " appends=" << ack.local_appends
            << " msgs=" << ack.messages_sent << '\n';
      } else if (op == "QUERY") {
        NodeId node;
        GeoBox box;
        Tick t0 = 0, t1 = 0;
        if (!(in >> node >> box.lat_min >> box.lat_max >> box.lon_min >>
              box.lon_max >> t0 >> t1))
          parse_error(line_no, "QUERY needs: node box(4 bounds) t0 t1");
        const auto results =
            sim.query(node, box, TimeInterval{t0, t1});
        log << "t=" << sim.now() << " query node=" << node
            << " n=" << results.size() << '\n';
        for (const auto& p : results)
          log << "t=" << sim.now() << " result " << record_csv(p) << '\n';
      } else if (op == "FAIL") {
        NodeId node;
        if (!(in >> node)) parse_error(line_no, "FAIL needs a node id");
        sim.fail_node(node);
      } else if (op == "RESTORE") {
        NodeId node;
        if (!(in >> node)) parse_error(line_no, "RESTORE needs a node id");
        sim.restore_node(node);
      } else if (op == "ADD") {
        NodeId node;
        std::string location;
        if (!(in >> node >> location))
          parse_error(line_no, "ADD needs: node location");
        sim.add_node(node, location);
      } else if (op == "FORCE_AGEOUT") {
        sim.force_age_out();
      } else {
        parse_error(line_no, "unknown event: " + op);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw;
      // Availability and routing failures are observable effects, not
      // script defects.
      log << "t=" << sim.now() << " error " << op << ": " << e.what() << '\n';
    }
  }
  sim.set_log(nullptr);
  return log.str();
}

}  // namespace adaptive
