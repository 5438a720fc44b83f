#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "adaptive/error.hpp"
#include "adaptive/placement.hpp"
#include "doctest.h"

using namespace adaptive;
using placement::LoadMap;
using placement::ServerInfo;

namespace {

PartitionConfig config_with(std::int64_t c_o, Tick a_o, int k = 1, int l = 1) {
  PartitionConfig c;
  c.optimum_count = c_o;
  c.optimum_age = a_o;
  c.replication_factor = k;
  c.location_count = l;
  return c;
}

}  // namespace

TEST_CASE("optimum rate R_O = C_O / A_O") {
  CHECK(placement::optimum_rate(config_with(1000, 10)) == 100.0);
  CHECK(placement::optimum_rate(config_with(7, 7)) == 1.0);
  CHECK_THROWS_AS(placement::optimum_rate(config_with(1000, 0)), Error);
}

TEST_CASE("growth rate R_A = C_A / A_A with age-zero clamp") {
  CHECK(placement::growth_rate({1, 500, 0}, 2) == 250.0);
  CHECK(placement::growth_rate({1, 0, 0}, 5) == 0.0);
  CHECK(placement::growth_rate({1, 7, 5}, 5) == 7.0);  // age 0 clamps to 1
}

TEST_CASE("load factor L_T = R_A / R_O") {
  const auto cfg = config_with(1000, 10);
  CHECK(placement::load_factor({1, 1000, 0}, cfg, 10) == 1.0);  // optimum
  CHECK(placement::load_factor({1, 500, 0}, cfg, 2) == 2.5);
  CHECK(placement::load_factor({1, 0, 0}, cfg, 4) == 0.0);

  SUBCASE("scale invariance") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
      const std::int64_t c_a = 1 + rng() % 5000;
      const std::int64_t c_o = 1 + rng() % 5000;
      const Tick a_a = rng() % 50;
      const Tick a_o = 1 + rng() % 50;
      const auto base = config_with(c_o, a_o);
      const auto scaled = config_with(c_o * 3, a_o);
      const double lt = placement::load_factor({1, c_a, 0}, base, a_a);
      const double lt_scaled =
          placement::load_factor({1, c_a * 3, 0}, scaled, a_a);
      CHECK(lt == doctest::Approx(lt_scaled).epsilon(1e-12));
      const auto time_scaled = config_with(c_o, a_o * 4);
      const double lt_time = placement::load_factor(
          {1, c_a, 0}, time_scaled, a_a * 4);
      if (a_a > 0) CHECK(lt == doctest::Approx(lt_time).epsilon(1e-12));
    }
  }
}

TEST_CASE("server load sums live tables on the node") {
  const auto cfg = config_with(1000, 10);
  MainIndex index = make_genesis_index(KeySpace::Geo, {{"s1", false}});
  TableDescriptor second = index.descriptors.at(1);
  second.id = 2;
  second.range = GeoBox{0, 1, 0, 1};  // validity not needed for load math
  second.replicas = {{"s1", false}, {"s2", false}};
  index.descriptors.emplace(2, second);

  engine::StatsMap stats{{1, {1, 500, 0}}, {2, {2, 1000, 0}}};
  // now=2: table 1 L_T = (500/2)/100 = 2.5, table 2 L_T = (1000/2)/100 = 5.
  CHECK(placement::server_load("s1", index, stats, cfg, 2) == 7.5);
  CHECK(placement::server_load("s2", index, stats, cfg, 2) == 5.0);
  CHECK(placement::server_load("s9", index, stats, cfg, 2) == 0.0);

  SUBCASE("hand-summed randomized fixtures") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 20; ++i) {
      MainIndex idx;
      engine::StatsMap st;
      double expect = 0.0;
      const Tick now = 10;
      for (TableId id = 1; id <= 6; ++id) {
        TableDescriptor d;
        d.id = id;
        d.range = GeoBox{0, 1, 0, 1};
        d.state = id % 5 == 0 ? TableState::Closed : TableState::Live;
        d.time_range = d.state == TableState::Live
                           ? TimeInterval{0, std::nullopt}
                           : TimeInterval{0, 1};
        const bool on_node = rng() % 2 == 0;
        d.replicas = {{on_node ? "s1" : "s2", false}};
        d.opened_at = rng() % 10;
        idx.descriptors.emplace(id, d);
        const std::int64_t count = rng() % 2000;
        st.emplace(id, engine::TableStats{id, count, d.opened_at});
        if (on_node && d.state == TableState::Live) {
          const double age =
              static_cast<double>(std::max<Tick>(now - d.opened_at, 1));
          expect += (count / age) / 100.0;
        }
      }
      CHECK(placement::server_load("s1", idx, st, cfg, now) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("place_replicas prefers low load with id tie-break") {
  const std::vector<ServerInfo> servers{
      {"s1", "A", true}, {"s2", "A", true}, {"s3", "B", true}};

  SUBCASE("all equal: lexicographically smallest valid set") {
    LoadMap loads;
    const auto p = placement::place_replicas(1, servers, loads,
                                             config_with(100, 10, 2, 1));
    CHECK(p == std::vector<std::vector<NodeId>>{{"s1", "s2"}});
  }
  SUBCASE("sorted by load") {
    LoadMap loads{{"s1", 5.0}, {"s2", 1.0}, {"s3", 2.0}};
    const auto p = placement::place_replicas(1, servers, loads,
                                             config_with(100, 10, 2, 1));
    CHECK(p == std::vector<std::vector<NodeId>>{{"s2", "s3"}});
  }
  SUBCASE("location constraint pulls in s3") {
    LoadMap loads;
    const auto p = placement::place_replicas(1, servers, loads,
                                             config_with(100, 10, 3, 2));
    REQUIRE(p.size() == 1);
    CHECK(std::find(p[0].begin(), p[0].end(), "s3") != p[0].end());
  }
  SUBCASE("insufficient servers / locations") {
    LoadMap loads;
    CHECK_THROWS_AS(placement::place_replicas(1, servers, loads,
                                              config_with(100, 10, 4, 1)),
                    Error);
    CHECK_THROWS_AS(placement::place_replicas(1, servers, loads,
                                              config_with(100, 10, 3, 3)),
                    Error);
    const std::vector<ServerInfo> one_down{
        {"s1", "A", true}, {"s2", "A", false}, {"s3", "B", true}};
    CHECK_THROWS_AS(placement::place_replicas(1, one_down, loads,
                                              config_with(100, 10, 3, 1)),
                    Error);
  }
}

TEST_CASE("greedy placement balances siblings across empty servers") {
  std::vector<ServerInfo> servers;
  for (int i = 1; i <= 5; ++i)
    servers.push_back({"s" + std::to_string(i), "loc" + std::to_string(i % 2),
                       true});
  LoadMap loads;
  const auto placements =
      placement::place_replicas(15, servers, loads, config_with(100, 10, 2, 2));
  std::map<NodeId, int> counts;
  for (const auto& table : placements) {
    CHECK(table.size() == 2);
    std::set<std::string> locs;
    for (const auto& n : table) {
      ++counts[n];
      for (const auto& s : servers)
        if (s.node_id == n) locs.insert(s.location);
    }
    CHECK(locs.size() >= 2);
  }
  // The location constraint fixes how many picks each location group takes
  // (one per table here), so balance is per group, not global.
  std::map<std::string, std::pair<int, int>> spread;  // location -> min,max
  for (const auto& s : servers) {
    auto [it, fresh] =
        spread.try_emplace(s.location, 1 << 30, 0);
    it->second.first = std::min(it->second.first, counts[s.node_id]);
    it->second.second = std::max(it->second.second, counts[s.node_id]);
  }
  for (const auto& [loc, mm] : spread) CHECK(mm.second - mm.first <= 1);
}

TEST_CASE("placement validity under fuzzed rosters") {
  std::mt19937_64 rng(31);
  for (int run = 0; run < 200; ++run) {
    const int n = 2 + rng() % 6;
    std::vector<ServerInfo> servers;
    std::set<std::string> locations;
    for (int i = 1; i <= n; ++i) {
      const std::string loc = "L" + std::to_string(rng() % 3);
      servers.push_back({"s" + std::to_string(i), loc, true});
      locations.insert(loc);
    }
    const int k = 1 + static_cast<int>(rng() % n);
    const int l = 1 + static_cast<int>(
                          rng() % std::min<std::size_t>(k, locations.size()));
    LoadMap loads;
    for (const auto& s : servers)
      loads[s.node_id] = static_cast<double>(rng() % 100) / 10.0;
    const auto placements = placement::place_replicas(
        3, servers, loads, config_with(100, 10, k, l));
    for (const auto& table : placements) {
      std::set<NodeId> distinct(table.begin(), table.end());
      REQUIRE(distinct.size() == static_cast<std::size_t>(k));
      std::set<std::string> locs;
      for (const auto& node : table)
        for (const auto& s : servers)
          if (s.node_id == node) locs.insert(s.location);
      REQUIRE(locs.size() >= static_cast<std::size_t>(l));
    }
  }
}
