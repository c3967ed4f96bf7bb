#include <deque>
#include <set>
#include <sstream>

#include "doctest.h"
#include "graphs.hpp"
#include "pcnbal/balance.hpp"
#include "pcnbal/ingestion.hpp"

using namespace pcnbal;
using pcnbal::testing::id;
using pcnbal::testing::make_graph;

namespace {

std::vector<SnapshotRecord> parse(const std::string& text, SnapshotFormat fmt = SnapshotFormat::Csv) {
  std::istringstream in(text);
  return read_snapshot(in, fmt);
}

std::string error_of(const std::string& text, SnapshotFormat fmt = SnapshotFormat::Csv) {
  try {
    parse(text, fmt);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

// Every node reaches every other over arcs u->v with positive balance of u.
bool strongly_connected(const NetworkGraph& g) {
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    std::vector<bool> seen(g.node_count(), false);
    std::deque<NodeId> q{node_at(s)};
    seen[s] = true;
    while (!q.empty()) {
      const NodeId x = q.front();
      q.pop_front();
      for (const auto& adj : g.neighbors(x))
        if (g.balance(adj.channel, x) > 0 && !seen[index_of(adj.neighbor)]) {
          seen[index_of(adj.neighbor)] = true;
          q.push_back(adj.neighbor);
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("csv rows map onto records") {
  auto rows = parse("a,b,100000,1000,1\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == SnapshotRecord{"a", "b", 100000, 1000, 1, std::nullopt, std::nullopt});

  auto with_header = parse("node_a,node_b,capacity_sat,base_fee_msat,fee_rate_ppm\nx,y,5,0,10\nx,y,5,0,10\n");
  REQUIRE(with_header.size() == 2);
  CHECK(with_header[1].fee_rate_ppm == 10);
  CHECK(with_header[0] == with_header[1]);

  auto defaults = parse("node_a,node_b,capacity_sat\np,q,77\r\n");
  REQUIRE(defaults.size() == 1);
  CHECK(defaults[0].base_fee_msat == 1000);
  CHECK(defaults[0].fee_rate_ppm == 1);

  auto state = parse("node_a,node_b,capacity_sat,base_fee_msat,fee_rate_ppm,balance_a_sat,balance_b_sat\na,b,10,1,1,3,7\n");
  REQUIRE(state[0].has_balances());
  CHECK(*state[0].balance_b == 7);

  CHECK(parse("").empty());
}

TEST_CASE("csv errors name the line") {
  CHECK(error_of("node_a,node_b,capacity_sat,base_fee_msat,fee_rate_ppm\na,b,0,1000,1\n").find("line 2") !=
        std::string::npos);
  CHECK(error_of("a,b,-5,1000,1\n").find("line 1") != std::string::npos);
  CHECK(error_of("a,b,10,1000,1\na,b,1x,1000,1\n").find("line 2") != std::string::npos);
  CHECK(error_of("a,b,10,1000\n").find("line 1") != std::string::npos);
  CHECK(error_of("a,a,10,1000,1\n").find("self-channel") != std::string::npos);
  CHECK(!error_of("node_a,node_b,capacity_sat,base_fee_msat,fee_rate_ppm,balance_a_sat,balance_b_sat\na,b,10,1,1,3,3\n").empty());
}

TEST_CASE("jsonl snapshots") {
  auto rows = parse(R"({"node_a":"a","node_b":"b","capacity_sat":100000,"base_fee_msat":1000,"fee_rate_ppm":1}
{"node_a":"b","node_b":"c","capacity_sat":5}
)",
                    SnapshotFormat::Jsonl);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == SnapshotRecord{"a", "b", 100000, 1000, 1, std::nullopt, std::nullopt});
  CHECK(rows[1].base_fee_msat == 1000);
  CHECK(error_of("{\"node_a\":\"a\",\"node_b\":\"b\",\"capacity_sat\":0}\n", SnapshotFormat::Jsonl).find("line 1") !=
        std::string::npos);
  CHECK(error_of("{\"node_a\":\"a\"\n", SnapshotFormat::Jsonl).find("line 1") != std::string::npos);
}

TEST_CASE("written snapshots read back unchanged") {
  const auto records = generate_synthetic(40, 3, {100, 100000}, 3);
  const auto allocated = to_records(allocate_funds_coinflip(records, 4), true);
  for (auto fmt : {SnapshotFormat::Csv, SnapshotFormat::Jsonl}) {
    for (const auto* set : {&records, &allocated}) {
      std::ostringstream out;
      write_snapshot(out, *set, fmt);
      CHECK(parse(out.str(), fmt) == *set);
    }
  }
}

TEST_CASE("coin-flip allocation") {
  const auto records = generate_synthetic(60, 2, {1000, 5000}, 9);
  const auto g = allocate_funds_coinflip(records, 42);
  for (const Channel& ch : g.channels()) {
    const bool one_sided = (ch.balance_a == ch.capacity && ch.balance_b == 0) ||
                           (ch.balance_a == 0 && ch.balance_b == ch.capacity);
    CHECK(one_sided);
  }
  CHECK(allocate_funds_coinflip(records, 42) == g);
  CHECK_FALSE(allocate_funds_coinflip(records, 43) == g);

  std::vector<SnapshotRecord> many;
  for (int i = 0; i < 10000; ++i) many.push_back({"a" + std::to_string(i), "b" + std::to_string(i), 10, 1000, 1, {}, {}});
  const auto big = allocate_funds_coinflip(many, 7);
  std::size_t to_a = 0;
  for (const Channel& ch : big.channels()) to_a += ch.balance_a == ch.capacity ? 1 : 0;
  const double fraction = static_cast<double>(to_a) / 10000.0;
  CHECK(fraction > 0.48);
  CHECK(fraction < 0.52);
}

TEST_CASE("largest strongly connected component") {
  SUBCASE("one-sided path collapses to a single node") {
    auto path = make_graph({{"a", "b", 10, 10}, {"b", "c", 10, 10}});
    const auto scc = largest_scc(path);
    CHECK(scc.node_count() == 1);
    CHECK(scc.channel_count() == 0);
    CHECK(scc.name(node_at(0)) == "a");
  }
  SUBCASE("directed triangle survives whole") {
    auto tri = make_graph({{"a", "b", 10, 10}, {"b", "c", 10, 10}, {"c", "a", 10, 10}});
    const auto scc = largest_scc(tri);
    CHECK(scc == tri);
  }
  SUBCASE("strongly connected input is returned unchanged") {
    auto g = make_graph({{"a", "b", 10, 5}, {"b", "c", 10, 5}, {"c", "d", 10, 5}, {"a", "d", 7, 0}});
    CHECK(largest_scc(g) == g);
    CHECK(largest_scc(largest_scc(g)) == largest_scc(g));
  }
  SUBCASE("equal sizes go to the component with the smallest id") {
    auto g = make_graph({{"p", "q", 10, 5}, {"r", "s", 10, 5}, {"q", "r", 10, 10}});
    const auto scc = largest_scc(g);
    REQUIRE(scc.node_count() == 2);
    CHECK(scc.name(node_at(0)) == "p");
    CHECK(scc.name(node_at(1)) == "q");
  }
  SUBCASE("random allocations give strongly connected results") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto records = generate_synthetic(50, 2, {10, 1000}, seed);
      const auto scc = largest_scc(allocate_funds_coinflip(records, seed + 100));
      CHECK(strongly_connected(scc));
      scc.check_invariants();
      for (std::size_t n = 0; n < scc.node_count() && scc.node_count() > 1; ++n)
        CHECK_FALSE(scc.neighbors(node_at(n)).empty());
      // Maximality: no dropped node is mutually reachable with the component.
      std::size_t biggest = 0;
      for (const auto& comp : liquidity_components(allocate_funds_coinflip(records, seed + 100)))
        biggest = std::max(biggest, comp.size());
      CHECK(scc.node_count() == biggest);
    }
  }
}

TEST_CASE("synthetic preferential attachment") {
  const auto tree = generate_synthetic(4, 1, {10, 100}, 1);
  CHECK(tree.size() == 3);
  std::set<std::string> nodes;
  for (const auto& r : tree) {
    nodes.insert(r.node_a);
    nodes.insert(r.node_b);
  }
  CHECK(nodes.size() == 4);

  const auto big = generate_synthetic(200, 4, {10'000, 10'000'000}, 7);
  CHECK(big.size() == 784);
  CHECK(generate_synthetic(200, 4, {10'000, 10'000'000}, 7) == big);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& r : big) {
    CHECK(r.capacity >= 10'000);
    CHECK(r.capacity <= 10'000'000);
    CHECK(r.node_a != r.node_b);
    pairs.insert(std::minmax(r.node_a, r.node_b));
  }
  CHECK(pairs.size() == big.size());

  CHECK_THROWS_AS(generate_synthetic(10, 0, {10, 100}, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(3, 3, {10, 100}, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(10, 2, {100, 10}, 1), std::invalid_argument);
}

TEST_CASE("generate, allocate and filter is a pure function of its inputs") {
  auto pipeline = [](std::uint64_t seed) {
    return largest_scc(allocate_funds_coinflip(generate_synthetic(120, 3, {10'000, 10'000'000}, seed), seed));
  };
  CHECK(pipeline(5) == pipeline(5));
  const auto g = pipeline(5);
  CHECK(network_imbalance(g) > 0.3);
}

TEST_CASE("build_graph requires balances") {
  std::vector<SnapshotRecord> rows{{"a", "b", 10, 1000, 1, std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(build_graph(rows), InputError);
  rows[0].balance_a = 4;
  rows[0].balance_b = 6;
  const auto g = build_graph(rows);
  CHECK(g.balance(channel_at(0), id(g, "b")) == 6);
}
