#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "adaptive/archive.hpp"
#include "adaptive/error.hpp"
#include "adaptive/sim.hpp"
#include "doctest.h"

using namespace adaptive;
using placement::ServerInfo;

namespace {

SimConfig small_config(int k = 1, int l = 1) {
  SimConfig c;
  c.partition.optimum_count = 10;
  c.partition.optimum_age = 50;
  c.partition.replication_factor = k;
  c.partition.location_count = l;
  c.partition.update_lead = 2;
  c.partition.retention = 5;
  c.sync_delay = 1;
  return c;
}

std::vector<ServerInfo> roster1() { return {{"n1", "east", true}}; }

std::vector<ServerInfo> roster3() {
  return {{"n1", "east", true}, {"n2", "west", true}, {"n3", "east", true}};
}

TrackPoint at(double lat, double lon, Tick t, const std::string& dev = "d1") {
  return TrackPoint{dev, lat, lon, t};
}

std::string state_text(const ClusterSim& sim) {
  std::ostringstream out;
  sim.serialize(out);
  return out.str();
}

}  // namespace

TEST_CASE("step advances the clock and nothing else on an idle cluster") {
  ClusterSim sim(small_config(), roster1());
  const std::string before = sim.dump_index();
  for (int i = 0; i < 5; ++i) sim.step();
  CHECK(sim.now() == 5);
  CHECK(sim.dump_index() == before);
  CHECK(sim.check_convergence());
}

TEST_CASE("catalog appends locally and replicates to the other replicas") {
  SUBCASE("K=1 single node") {
    ClusterSim sim(small_config(), roster1());
    const auto ack = sim.catalog("n1", at(10, 20, 0));
    CHECK(ack.table_id == 1);
    CHECK(ack.local_appends == 1);
    CHECK(ack.messages_sent == 0);
  }
  SUBCASE("K=2: one append plus one message") {
    ClusterSim sim(small_config(2, 2), roster3());
    const auto ack = sim.catalog("n1", at(10, 20, 0));
    CHECK(ack.local_appends + ack.messages_sent == 2);
    CHECK(sim.messages().size() >= 1);
    CHECK(!sim.check_convergence());  // replication in flight
    sim.quiesce();
    CHECK(sim.check_convergence());
  }
  SUBCASE("entry node must be online and ticks must match") {
    ClusterSim sim(small_config(), roster1());
    CHECK_THROWS_AS(sim.catalog("nX", at(0, 0, 0)), Error);
    CHECK_THROWS_AS(sim.catalog("n1", at(0, 0, 7)), Error);
  }
}

TEST_CASE("scheduled updates apply on every node after the lead") {
  ClusterSim sim(small_config(2, 2), roster3());
  for (int i = 0; i < 15; ++i)
    sim.catalog("n1", at(10 + i, 20, 0, "d" + std::to_string(i)));
  // 15 > C_O=10: the evaluation in the next step schedules a split
  // effective at 0 + lead = 2.
  sim.step();
  CHECK(sim.now() == 1);
  sim.step();
  CHECK(sim.now() == 2);
  for (const auto& [id, node] : sim.nodes()) {
    CHECK(node.index.descriptors.at(1).state == TableState::Closed);
    CHECK(node.index.descriptors.size() == 5);
  }
  sim.quiesce();
  CHECK(sim.check_convergence());
  for (const auto& [id, node] : sim.nodes())
    CHECK(validate_index(node.index).ok());
}

TEST_CASE("query equals a full-scan oracle once quiesced") {
  ClusterSim sim(small_config(2, 2), roster3());
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::vector<TrackPoint> oracle;
  for (Tick t = 0; t < 30; ++t) {
    for (int i = 0; i < 8; ++i) {
      const auto p = at(std::round(lat(rng) * 1e6) / 1e6,
                        std::round(lon(rng) * 1e6) / 1e6, t,
                        "d" + std::to_string(i));
      sim.catalog(t % 2 == 0 ? "n1" : "n2", p);
      oracle.push_back(p);
    }
    sim.step();
  }
  sim.quiesce();

  for (int i = 0; i < 40; ++i) {
    double a = lat(rng), b = lat(rng), c = lon(rng), d = lon(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    if (a == b || c == d) continue;
    const GeoBox box{a, b, c, d};
    const TimeInterval t{static_cast<Tick>(i % 10),
                         std::optional<Tick>(10 + i % 25)};
    std::set<std::string> expect;
    for (const auto& p : oracle)
      if (box.contains(p.lat, p.lon) && t.contains(p.reported_at))
        expect.insert(record_key(p));
    std::set<std::string> got;
    Tick last = -1;
    for (const auto& p : sim.query("n3", box, t)) {
      got.insert(record_key(p));
      CHECK(p.reported_at >= last);  // sorted output
      last = p.reported_at;
    }
    REQUIRE(got == expect);
  }
}

TEST_CASE("eventual consistency: in-flight records appear after quiesce") {
  ClusterSim sim(small_config(2, 2), roster3());
  sim.catalog("n2", at(10, 20, 0));  // n2 may not hold a replica
  sim.quiesce();
  const auto results =
      sim.query("n3", global_geo_box(), {0, std::nullopt});
  REQUIRE(results.size() == 1);
  CHECK(results[0].device_id == "d1");
}

TEST_CASE("node failure flags replicas and drops in-flight messages") {
  ClusterSim sim(small_config(2, 2), roster3());
  for (int i = 0; i < 5; ++i)
    sim.catalog("n1", at(10, 20 + i, 0, "d" + std::to_string(i)));
  sim.quiesce();

  // Find the node that holds a replica of table 1 besides the lowest.
  const auto& desc = sim.nodes().at("n1").index.descriptors.at(1);
  REQUIRE(desc.replicas.size() == 2);
  const NodeId victim = desc.replicas[1].node;

  sim.fail_node(victim);
  CHECK_THROWS_AS(sim.fail_node(victim), Error);  // already offline

  SUBCASE("catalog goes only to surviving replicas") {
    const auto ack = sim.catalog("n1", at(10, 20, sim.now(), "fresh"));
    CHECK(ack.skipped_replicas == 1);
    CHECK(ack.local_appends + ack.messages_sent == 1);
    const auto frozen = sim.nodes().at(victim).stores.at(1).size();
    sim.quiesce();
    CHECK(sim.nodes().at(victim).stores.at(1).size() == frozen);
  }
  SUBCASE("queries still serve full results from survivors") {
    sim.quiesce();
    const auto results = sim.query("n1", global_geo_box(), {0, std::nullopt});
    CHECK(results.size() == 5);
  }
  SUBCASE("restore repairs stores but leaves flags until forced age-out") {
    const Tick fail_tick = sim.now();
    for (Tick t = fail_tick; t < fail_tick + 3; ++t) {
      sim.catalog("n1", at(11, 21, t, "late" + std::to_string(t)));
      sim.step();
    }
    sim.restore_node(victim);
    sim.quiesce();
    CHECK(sim.check_convergence());  // repair back-filled the records

    // Still flagged: no new live placements reach the restored node.
    const auto& after = sim.nodes().at("n1").index.descriptors.at(1);
    for (const auto& r : after.replicas)
      if (r.node == victim) CHECK(r.offline_flag);

    sim.force_age_out();
    const Tick effective = sim.now() + 2;  // update_lead
    while (sim.now() < effective) sim.step_drain();
    sim.quiesce();
    bool placed = false;
    for (const auto& [tid, d] : sim.nodes().at("n1").index.descriptors) {
      if (d.state != TableState::Live) continue;
      for (const auto& r : d.replicas)
        if (r.node == victim && !r.offline_flag) placed = true;
    }
    CHECK(placed);
  }
}

TEST_CASE("query fails loudly when every replica of a table is offline") {
  ClusterSim sim(small_config(1, 1), roster3());
  sim.catalog("n1", at(10, 20, 0));
  sim.quiesce();
  // K=1: table 1 lives on exactly one node.
  const NodeId owner = sim.nodes().at("n1").index.descriptors.at(1)
                           .replicas[0].node;
  sim.fail_node(owner);
  const NodeId entry = owner == "n2" ? "n3" : "n2";
  CHECK_THROWS_AS(sim.query(entry, global_geo_box(), {0, std::nullopt}),
                  Error);
}

TEST_CASE("added node receives placements only after forced age-out") {
  ClusterSim sim(small_config(1, 1), roster1());
  sim.catalog("n1", at(10, 20, 0));
  sim.step();
  sim.add_node("n0", "west");
  CHECK_THROWS_AS(sim.add_node("n0", "west"), Error);

  auto live_on = [&](const NodeId& node) {
    int n = 0;
    for (const auto& [tid, d] : sim.nodes().at("n1").index.descriptors)
      if (d.state == TableState::Live)
        for (const auto& r : d.replicas)
          if (r.node == node) ++n;
    return n;
  };
  sim.quiesce();
  CHECK(live_on("n0") == 0);

  sim.force_age_out();
  const Tick effective = sim.now() + 2;  // update_lead
  while (sim.now() < effective) sim.step_drain();
  sim.quiesce();
  CHECK(live_on("n0") >= 1);  // least-loaded new node attracts the replace
}

TEST_CASE("archive and restore through the cluster") {
  ClusterSim sim(small_config(), roster1());
  for (int i = 0; i < 15; ++i)
    sim.catalog("n1", at(-10 - i * 0.5, -20, 0, "d" + std::to_string(i)));
  sim.step();        // schedules the split, effective two ticks out
  sim.step_drain();  // reach the effective tick
  sim.quiesce();
  REQUIRE(sim.nodes().at("n1").index.descriptors.at(1).state ==
          TableState::Closed);

  const std::string path = "test_archive_t1.ap";
  SUBCASE("not eligible inside retention") {
    CHECK_THROWS_AS(sim.archive_table(1, path), Error);
  }
  SUBCASE("round trip") {
    while (sim.now() < 10) sim.step_drain();  // past retention=5
    const auto before =
        sim.query("n1", global_geo_box(), {0, std::nullopt});
    sim.archive_table(1, path);
    CHECK(sim.query("n1", global_geo_box(), {0, std::nullopt}).empty());
    CHECK(sim.nodes().at("n1").stores.count(1) == 0);

    const TableId restored = sim.restore_archive(path);
    CHECK(restored == 1);
    const auto after = sim.query("n1", global_geo_box(), {0, std::nullopt});
    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < after.size(); ++i)
      CHECK(record_key(after[i]) == record_key(before[i]));

    CHECK_THROWS_AS(sim.restore_archive(path), Error);  // id conflict
    std::remove(path.c_str());
  }
}

TEST_CASE("identical seeds and event sequences serialize identically") {
  auto run = [] {
    ClusterSim sim(small_config(2, 2), roster3());
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (Tick t = 0; t < 20; ++t) {
      for (int i = 0; i < 4; ++i)
        sim.catalog("n1", at(std::round(lat(rng) * 1e6) / 1e6,
                             std::round(lon(rng) * 1e6) / 1e6, t,
                             "d" + std::to_string(i)));
      if (t == 7) sim.fail_node("n3");
      if (t == 12) sim.restore_node("n3");
      if (t == 13) sim.force_age_out();
      sim.step();
    }
    sim.quiesce();
    return state_text(sim);
  };
  const std::string a = run();
  const std::string b = run();
  CHECK(a == b);

  // And the state file round-trips.
  std::istringstream in(a);
  const ClusterSim loaded = ClusterSim::deserialize(in);
  CHECK(state_text(loaded) == a);
}

TEST_CASE("run_script produces a deterministic log") {
  const std::string script =
      "# smoke script\n"
      "CATALOG n1 10.5 20.25 alpha 0\n"
      "TICK 3\n"
      "CATALOG n2 -5 60 bravo 3\n"
      "TICK 6\n"
      "QUERY n1 -90 90 -180 180 0 10\n"
      "FAIL n3\n"
      "QUERY n1 -90 90 -180 180 0 10\n";
  auto run = [&] {
    ClusterSim sim(small_config(2, 2), roster3());
    return run_script(sim, script);
  };
  const std::string log = run();
  CHECK(log == run());
  CHECK(log.find("catalog node=n1 device=alpha table=1") != std::string::npos);
  CHECK(log.find("result alpha,10.500000,20.250000,0") != std::string::npos);

  ClusterSim sim(small_config(2, 2), roster3());
  CHECK_THROWS_AS(run_script(sim, "BOGUS 1\n"), Error);
  CHECK(run_script(sim, "").empty());
}

TEST_CASE("write amplification equals online replica count") {
  ClusterSim sim(small_config(2, 2), roster3());
  std::int64_t appended_before = 0;
  auto total_records = [&] {
    std::int64_t n = 0;
    for (const auto& [id, node] : sim.nodes())
      for (const auto& [tid, store] : node.stores)
        n += static_cast<std::int64_t>(store.size());
    return n;
  };
  for (int i = 0; i < 6; ++i) {
    const auto ack = sim.catalog("n1", at(5, 5 + i, 0, "w" + std::to_string(i)));
    CHECK(ack.local_appends + ack.messages_sent == 2);
  }
  sim.quiesce();
  CHECK(total_records() - appended_before == 12);  // 6 points x K=2
}
