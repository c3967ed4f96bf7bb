#include <unistd.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pcnbal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pcnbal::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pcnbal_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen is deterministic") {
  TempDir dir("gen");
  REQUIRE(run({"gen", "--nodes", "50", "--degree", "3", "--seed", "9", "-o", dir / "a.csv"}).code == 0);
  REQUIRE(run({"gen", "--nodes", "50", "--degree", "3", "--seed", "9", "-o", dir / "b.csv"}).code == 0);
  REQUIRE(run({"gen", "--nodes", "50", "--degree", "3", "--seed", "10", "-o", dir / "c.csv"}).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
  CHECK(lines(slurp(dir / "a.csv")).size() == 1 + 3 * 47);

  REQUIRE(run({"gen", "--nodes", "20", "--degree", "2", "-o", dir / "a.jsonl"}).code == 0);
  CHECK(nlohmann::json::parse(lines(slurp(dir / "a.jsonl")).front()).contains("capacity_sat"));
}

TEST_CASE("usage errors") {
  TempDir dir("usage");
  CHECK(run({"gen", "--nodes", "10", "--degree", "0", "-o", dir / "x.csv"}).code == 2);
  CHECK(run({"gen", "--nodes", "3", "--degree", "3", "-o", dir / "x.csv"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);

  REQUIRE(run({"gen", "--nodes", "10", "--degree", "2", "-o", dir / "g.csv"}).code == 0);
  const auto bad = run({"simulate", "-i", dir / "g.csv", "--strategy", "cycle6", "-o", dir / "run"});
  CHECK(bad.code == 2);
  for (const char* s : {"cycle4", "cycle5", "foaf", "mpp"}) CHECK(bad.err.find(s) != std::string::npos);
  CHECK(run({"simulate", "-i", dir / "missing.csv", "-o", dir / "run"}).code == 3);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("simulate writes a complete bundle") {
  TempDir dir("sim");
  REQUIRE(run({"gen", "--nodes", "40", "--degree", "3", "--seed", "2", "-o", dir / "net.csv"}).code == 0);
  const auto r = run({"simulate", "-i", dir / "net.csv", "--strategy", "foaf", "--seed", "42", "-o", dir / "run"});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  const auto metrics = lines(slurp(dir / "run/metrics.csv"));
  REQUIRE(metrics.size() >= 2);
  CHECK(metrics[0] == "ops_count,imbalance,success_rate,median_payment_sat");
  long prev = -1;
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    const long ops = std::stol(metrics[i].substr(0, metrics[i].find(',')));
    CHECK(ops > prev);
    prev = ops;
  }

  const auto ops = lines(slurp(dir / "run/operations.jsonl"));
  CHECK(static_cast<long>(ops.size()) == prev);
  for (const auto& line : ops) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"seq", "initiator", "cycle_nodes", "cycle_channels", "amount_sat", "requested_sat",
                            "imbalance_after"})
      CHECK(j.contains(key));
    CHECK(j["cycle_nodes"].front() == j["initiator"]);
    CHECK(j["cycle_nodes"].back() == j["initiator"]);
    CHECK(j["cycle_channels"].size() + 1 == j["cycle_nodes"].size());
  }

  const auto fees = lines(slurp(dir / "run/fees.csv"));
  CHECK(fees[0] == "node_id,net_fee_msat");
  long long sum = 0;
  for (std::size_t i = 1; i < fees.size(); ++i) sum += std::stoll(fees[i].substr(fees[i].find(',') + 1));
  CHECK(sum == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "run/manifest.json"));
  CHECK(manifest["config"]["strategy"] == "foaf");
  CHECK(manifest["config"]["seed"] == 42);
  CHECK(manifest["input_fnv1a64"].get<std::string>().size() == 16);
  CHECK(fs::exists(dir / "run/final_state.csv"));
  CHECK(fs::exists(dir / "run/initial_state.csv"));

  SUBCASE("manifest replay reproduces the run") {
    REQUIRE(run({"simulate", "--manifest", dir / "run/manifest.json", "-o", dir / "replay"}).code == 0);
    CHECK(slurp(dir / "replay/metrics.csv") == slurp(dir / "run/metrics.csv"));
    CHECK(slurp(dir / "replay/operations.jsonl") == slurp(dir / "run/operations.jsonl"));
  }

  SUBCASE("evaluate against itself and against the start") {
    REQUIRE(run({"evaluate", "-i", dir / "run/initial_state.csv", "-o", dir / "ev0"}).code == 0);
    const auto self = run({"evaluate", "-i", dir / "run/initial_state.csv", "--compare", dir / "ev0/report.json",
                           "-o", dir / "ev1"});
    REQUIRE(self.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "ev1/report.json"))["ks_distance_vs_baseline"] == 0.0);
    const auto moved = run({"evaluate", "-i", dir / "run/final_state.csv", "--compare", dir / "ev0/report.json",
                            "-o", dir / "ev2"});
    REQUIRE(moved.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "ev2/report.json"))["ks_distance_vs_baseline"].get<double>() > 0.0);
    CHECK(lines(slurp(dir / "ev2/gini_cdf.csv"))[0] == "value,cumulative_fraction");
  }

  SUBCASE("evaluate needs balances") {
    CHECK(run({"evaluate", "-i", dir / "net.csv", "-o", dir / "ev"}).code == 3);
  }
}

TEST_CASE("mpp asks for a twentieth") {
  TempDir dir("mpp");
  REQUIRE(run({"gen", "--nodes", "30", "--degree", "3", "--seed", "5", "-o", dir / "net.csv"}).code == 0);
  REQUIRE(run({"simulate", "-i", dir / "net.csv", "--strategy", "mpp", "--seed", "1", "--no-eval", "-o",
               dir / "mpp"})
              .code == 0);
  const auto ops = lines(slurp(dir / "mpp/operations.jsonl"));
  REQUIRE(!ops.empty());
  for (const auto& line : ops) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["amount_sat"].get<long long>() <= j["requested_sat"].get<long long>());
  }
  // The first operation starts from the initial state, where the full amount is known.
  const auto first = nlohmann::json::parse(ops.front());
  const auto state = lines(slurp(dir / "mpp/initial_state.csv"));
  std::map<std::string, std::pair<long long, long long>> totals;  // node -> (tau, kappa)
  std::map<long long, std::array<std::string, 2>> ends;
  std::map<long long, std::array<long long, 3>> chan;  // capacity, balance_a, balance_b
  for (std::size_t i = 1; i < state.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream row(state[i]);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    const long long cap = std::stoll(f[2]), ba = std::stoll(f[5]), bb = std::stoll(f[6]);
    totals[f[0]].first += ba;
    totals[f[0]].second += cap;
    totals[f[1]].first += bb;
    totals[f[1]].second += cap;
    ends[static_cast<long long>(i - 1)] = {f[0], f[1]};
    chan[static_cast<long long>(i - 1)] = {cap, ba, bb};
  }
  const std::string u = first["initiator"];
  const long long c = first["cycle_channels"][0];
  const long long b = ends[c][0] == u ? chan[c][1] : chan[c][2];
  const auto [tau, kappa] = totals[u];
  const long long full = (b * kappa - chan[c][0] * tau) / kappa;
  CHECK(first["requested_sat"].get<long long>() == full / 20);
}

TEST_CASE("a snapshot without a usable component is rejected") {
  TempDir dir("scc");
  {
    std::ofstream f(dir / "pair.csv");
    f << "node_a,node_b,capacity_sat,base_fee_msat,fee_rate_ppm,balance_a_sat,balance_b_sat\n"
      << "a,b,10,1000,1,10,0\n";
  }
  const auto r = run({"simulate", "-i", dir / "pair.csv", "--keep-balances", "-o", dir / "run"});
  CHECK(r.code == 3);
  CHECK(r.err.find("no rebalancing possible") != std::string::npos);
}
