#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcnbal/balance.hpp"
#include "pcnbal/evaluation.hpp"
#include "pcnbal/ingestion.hpp"
#include "pcnbal/rebalancer.hpp"

#ifndef PCNBAL_VERSION
#define PCNBAL_VERSION "0.0.0"
#endif

namespace pcnbal::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kOperationsFile = "operations.jsonl";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kFeesFile = "fees.csv";
constexpr const char* kInitialStateFile = "initial_state.csv";
constexpr const char* kFinalStateFile = "final_state.csv";
constexpr const char* kManifestFile = "manifest.json";

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// gen ----------------------------------------------------------------------

struct GenArgs {
  std::size_t nodes = 0;
  std::size_t degree = 0;
  std::uint64_t seed = 0;
  Sat min_capacity = 10'000;
  Sat max_capacity = 10'000'000;
  std::string output;
  std::string format;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (a.nodes < a.degree + 1) throw CLI::ValidationError("--nodes", "must be at least --degree + 1");
  if (a.min_capacity < 1 || a.max_capacity < a.min_capacity)
    throw CLI::ValidationError("--min-capacity/--max-capacity", "invalid capacity range");
  const auto records = generate_synthetic(a.nodes, a.degree, {a.min_capacity, a.max_capacity}, a.seed);
  const SnapshotFormat fmt = a.format.empty() ? format_from_path(a.output)
                             : a.format == "jsonl" ? SnapshotFormat::Jsonl
                                                   : SnapshotFormat::Csv;
  auto file = open_output(a.output);
  write_snapshot(file, records, fmt);
  out << "wrote " << records.size() << " channels over " << a.nodes << " nodes to " << a.output << '\n';
  return kOk;
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string input;
  std::string out_dir = "run";
  std::string manifest;
  std::string strategy = "foaf";
  std::string agreement = "band";
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> alloc_seed;
  bool keep_balances = false;
  bool no_sink_condition = false;
  bool no_verify = false;
  bool no_eval = false;
  std::size_t threads = 1;
  std::optional<std::size_t> sample_pairs;
  SimulationConfig config;
};

ojson config_to_json(const SimulateArgs& a) {
  const SimulationConfig& c = a.config;
  ojson j;
  j["seed"] = c.seed;
  j["alloc_seed"] = a.alloc_seed.value_or(a.seed);
  j["keep_balances"] = a.keep_balances;
  j["strategy"] = std::string(to_string(c.strategy));
  j["cycle_cap"] = c.cycle_cap;
  j["agreement_mode"] = std::string(to_string(c.agreement));
  j["require_sink_condition"] = c.require_sink_condition;
  j["mpp_divisor"] = c.mpp_divisor;
  j["min_amount"] = c.min_amount;
  j["max_operations"] = c.max_operations;
  j["convergence_epsilon"] = c.convergence_epsilon;
  j["foaf_max_hops"] = c.foaf_max_hops;
  j["verify_invariants"] = c.verify_invariants;
  j["evaluate_samples"] = !a.no_eval;
  if (a.sample_pairs) j["sample_pairs"] = *a.sample_pairs;
  return j;
}

void apply_manifest(SimulateArgs& a) {
  const auto j = nlohmann::json::parse(read_bytes(a.manifest));
  const auto& c = j.at("config");
  a.input = j.at("input").get<std::string>();
  a.seed = c.at("seed").get<std::uint64_t>();
  a.alloc_seed = c.at("alloc_seed").get<std::uint64_t>();
  a.keep_balances = c.at("keep_balances").get<bool>();
  a.strategy = c.at("strategy").get<std::string>();
  a.agreement = c.at("agreement_mode").get<std::string>();
  a.config.cycle_cap = c.at("cycle_cap").get<std::size_t>();
  a.no_sink_condition = !c.at("require_sink_condition").get<bool>();
  a.config.mpp_divisor = c.at("mpp_divisor").get<Sat>();
  a.config.min_amount = c.at("min_amount").get<Sat>();
  a.config.max_operations = c.at("max_operations").get<std::uint64_t>();
  a.config.convergence_epsilon = c.at("convergence_epsilon").get<double>();
  a.config.foaf_max_hops = c.at("foaf_max_hops").get<std::size_t>();
  a.no_verify = !c.at("verify_invariants").get<bool>();
  a.no_eval = !c.at("evaluate_samples").get<bool>();
  if (c.contains("sample_pairs")) a.sample_pairs = c.at("sample_pairs").get<std::size_t>();
  const std::string expected = j.at("input_fnv1a64").get<std::string>();
  if (fnv1a64_hex(read_bytes(a.input)) != expected)
    throw InputError("input " + a.input + " does not match the manifest hash");
}

void write_operations(std::ostream& out, const NetworkGraph& g, const std::vector<OperationRecord>& ops) {
  for (const auto& op : ops) {
    ojson j;
    j["seq"] = op.seq;
    j["initiator"] = g.name(op.initiator);
    auto& nodes = j["cycle_nodes"] = ojson::array();
    for (NodeId n : op.cycle.nodes()) nodes.push_back(g.name(n));
    auto& chans = j["cycle_channels"] = ojson::array();
    for (ChannelId c : op.cycle.channels()) chans.push_back(index_of(c));
    j["amount_sat"] = op.amount;
    j["requested_sat"] = op.requested;
    j["imbalance_after"] = op.imbalance_after;
    out << j.dump() << '\n';
  }
}

void write_metrics(std::ostream& out, const std::vector<MetricsSample>& samples) {
  out << "ops_count,imbalance,success_rate,median_payment_sat\n";
  for (const auto& s : samples) {
    out << s.ops_count << ',' << format_double(s.imbalance) << ',';
    if (s.success_rate) out << format_double(*s.success_rate);
    out << ',';
    if (s.median_payment) out << *s.median_payment;
    out << '\n';
  }
}

void write_fees(std::ostream& out, const NetworkGraph& g, const FeeLedger& ledger) {
  out << "node_id,net_fee_msat\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) out << g.name(node_at(i)) << ',' << ledger.net()[i] << '\n';
}

void write_state(const fs::path& path, const NetworkGraph& g) {
  auto file = open_output(path);
  write_snapshot(file, to_records(g, true), SnapshotFormat::Csv);
}

int cmd_simulate(SimulateArgs a, std::ostream& out) {
  if (!a.manifest.empty()) apply_manifest(a);
  if (a.input.empty()) throw CLI::RequiredError("--input");
  const auto strategy = parse_strategy(a.strategy);
  const auto agreement = parse_agreement_mode(a.agreement);
  if (!strategy) throw CLI::ValidationError("--strategy", "must be one of cycle4, cycle5, foaf, mpp");
  if (!agreement) throw CLI::ValidationError("--agreement", "must be band or gini");

  SimulationConfig& cfg = a.config;
  cfg.seed = a.seed;
  cfg.strategy = *strategy;
  cfg.agreement = *agreement;
  cfg.require_sink_condition = !a.no_sink_condition;
  cfg.verify_invariants = !a.no_verify;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("config", e.what());
  }

  const std::string input_bytes = read_bytes(a.input);
  std::istringstream input_stream(input_bytes);
  const auto records = read_snapshot(input_stream, format_from_path(a.input));
  const bool have_balances =
      !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.has_balances(); });
  NetworkGraph allocated = (a.keep_balances && have_balances)
                               ? build_graph(records)
                               : allocate_funds_coinflip(records, a.alloc_seed.value_or(a.seed));
  NetworkGraph g = largest_scc(allocated);
  if (g.node_count() < 2) throw InputError("no rebalancing possible: largest strongly connected component has a single node");

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const std::vector<std::string> outputs{kManifestFile, kInitialStateFile, kOperationsFile,
                                         kMetricsFile, kFeesFile, kFinalStateFile};
  {
    ojson m;
    m["tool"] = "pcnbal simulate";
    m["version"] = PCNBAL_VERSION;
    m["input"] = a.input;
    m["input_fnv1a64"] = fnv1a64_hex(input_bytes);
    m["config"] = config_to_json(a);
    m["outputs"] = outputs;
    auto file = open_output(dir / kManifestFile);
    file << m.dump(2) << '\n';
  }
  write_state(dir / kInitialStateFile, g);

  EvalHook hook;
  if (!a.no_eval) {
    EvaluationOptions eo;
    eo.threads = a.threads;
    eo.sample_pairs = a.sample_pairs;
    eo.seed = a.seed;
    hook = [eo](const NetworkGraph& state, MetricsSample& s) {
      const auto report = evaluate(state, eo);
      s.success_rate = report.success_rate;
      s.median_payment = report.median_payment;
    };
  }
  const std::size_t nodes = g.node_count();
  const std::size_t channels = g.channel_count();
  const SimulationResult result = run_simulation(g, cfg, hook);

  {
    auto file = open_output(dir / kOperationsFile);
    write_operations(file, g, result.operations);
  }
  {
    auto file = open_output(dir / kMetricsFile);
    write_metrics(file, result.samples);
  }
  {
    auto file = open_output(dir / kFeesFile);
    write_fees(file, g, result.ledger);
  }
  write_state(dir / kFinalStateFile, g);

  out << "nodes " << nodes << ", channels " << channels << ", operations " << result.operations.size()
      << ", sweeps " << result.sweeps << ", imbalance " << format_double(result.samples.front().imbalance)
      << " -> " << format_double(result.samples.back().imbalance)
      << (result.stop == StopReason::MaxOperations ? " (operation budget reached)" : "") << '\n';
  return kOk;
}

// evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  std::string input;
  std::string out_dir = "eval";
  std::string compare;
  Sat amount = 1;
  std::size_t threads = 1;
  std::optional<std::size_t> sample_pairs;
  std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto records = load_snapshot(a.input);
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!records[i].has_balances())
      throw InputError("record " + std::to_string(i + 1) + " of " + a.input +
                       " has no balances; evaluation needs a state snapshot");
  if (records.empty()) throw InputError("state snapshot " + a.input + " is empty");
  const NetworkGraph g = build_graph(records);

  EvaluationOptions eo;
  eo.amount = a.amount;
  eo.threads = a.threads;
  eo.sample_pairs = a.sample_pairs;
  eo.seed = a.seed;
  const EvaluationReport report = evaluate(g, eo);
  ojson j = to_json(report);

  std::optional<double> ks;
  if (!a.compare.empty()) {
    nlohmann::json baseline;
    try {
      baseline = nlohmann::json::parse(read_bytes(a.compare));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("cannot parse baseline report " + a.compare + ": " + e.what());
    }
    const auto base = report_from_json(baseline);
    ks = ks_distance(base.gini_values, report.gini_values);
    j["ks_distance_vs_baseline"] = *ks;
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  {
    auto file = open_output(dir / "report.json");
    file << j.dump(2) << '\n';
  }
  {
    auto file = open_output(dir / "payment_cdf.csv");
    write_cdf_csv(file, report.payment_size_cdf);
  }
  {
    auto file = open_output(dir / "gini_cdf.csv");
    write_cdf_csv(file, empirical_cdf(report.gini_values));
  }
  out << "success_rate " << format_double(report.success_rate) << ", median_payment_sat "
      << report.median_payment << ", imbalance " << format_double(report.network_imbalance)
      << (report.approximate ? " (sampled pairs)" : "");
  if (ks) out << ", ks_distance " << format_double(*ks);
  out << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Payment channel network balance simulator", "pcnbal"};
  app.set_version_flag("--version", PCNBAL_VERSION);
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic preferential-attachment snapshot");
  gen_cmd->add_option("--nodes", gen.nodes, "Number of nodes")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--degree", gen.degree, "Channels opened by each new node")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--min-capacity", gen.min_capacity, "Smallest channel capacity (sat)");
  gen_cmd->add_option("--max-capacity", gen.max_capacity, "Largest channel capacity (sat)");
  gen_cmd->add_option("-o,--output", gen.output, "Snapshot file to write")->required();
  gen_cmd->add_option("--format", gen.format, "csv or jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Allocate funds, extract the largest SCC and rebalance");
  sim_cmd->add_option("-i,--input", sim.input, "Snapshot file (csv or jsonl)");
  sim_cmd->add_option("-o,--out-dir", sim.out_dir, "Directory for the result bundle");
  sim_cmd->add_option("--manifest", sim.manifest, "Replay the configuration of an earlier run");
  sim_cmd->add_option("--strategy", sim.strategy, "Cycle strategy")
      ->check(CLI::IsMember({"cycle4", "cycle5", "foaf", "mpp"}));
  sim_cmd->add_option("--agreement", sim.agreement, "Agreement rule of intermediate nodes")
      ->check(CLI::IsMember({"band", "gini"}));
  sim_cmd->add_option("--seed", sim.seed, "Simulation seed");
  sim_cmd->add_option("--alloc-seed", sim.alloc_seed, "Coin-flip allocation seed (default: --seed)");
  sim_cmd->add_flag("--keep-balances", sim.keep_balances, "Use balances from the snapshot instead of a coin flip");
  sim_cmd->add_option("--cycle-cap", sim.config.cycle_cap, "Cycles kept per channel")->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--no-sink-condition", sim.no_sink_condition, "Do not require the returning channel to be below the node coefficient");
  sim_cmd->add_option("--mpp-divisor", sim.config.mpp_divisor, "Amount divisor for the mpp strategy")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--min-amount", sim.config.min_amount, "Smallest executed amount (sat)")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--max-operations", sim.config.max_operations, "Operation budget");
  sim_cmd->add_option("--epsilon", sim.config.convergence_epsilon, "Node Gini considered balanced")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--foaf-max-hops", sim.config.foaf_max_hops, "Cycle length bound for foaf and mpp");
  sim_cmd->add_option("--threads", sim.threads, "Threads for sample evaluation")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--sample-pairs", sim.sample_pairs, "Evaluate this many random pairs per sample (approximate)");
  sim_cmd->add_flag("--no-verify", sim.no_verify, "Skip per-operation invariant checks");
  sim_cmd->add_flag("--no-eval", sim.no_eval, "Skip success-rate and median evaluation at samples");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Compute payment metrics of a state snapshot");
  ev_cmd->add_option("-i,--input", ev.input, "State snapshot with balances")->required();
  ev_cmd->add_option("-o,--out-dir", ev.out_dir, "Directory for report.json and CDF files");
  ev_cmd->add_option("--compare", ev.compare, "Baseline report.json for the Gini KS distance");
  ev_cmd->add_option("--amount", ev.amount, "Probe payment size (sat)")->check(CLI::PositiveNumber);
  ev_cmd->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);
  ev_cmd->add_option("--sample-pairs", ev.sample_pairs, "Evaluate this many random pairs (approximate)");
  ev_cmd->add_option("--seed", ev.seed, "Pair sampling seed");

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kUsage;
}

}  // namespace pcnbal::cli
