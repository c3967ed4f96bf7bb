#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "pcnbal/balance.hpp"
#include "pcnbal/cycles.hpp"
#include "pcnbal/evaluation.hpp"
#include "pcnbal/ingestion.hpp"
#include "pcnbal/rebalancer.hpp"

#ifndef PCNBAL_VERSION
#define PCNBAL_VERSION "0.0.0"
#endif

namespace py = pybind11;
using namespace pcnbal;

namespace {

// Python sees nodes and channels as plain integers.
NodeId node_arg(const NetworkGraph& g, std::uint32_t n) {
  if (n >= g.node_count()) throw py::index_error("node " + std::to_string(n) + " out of range");
  return node_at(n);
}

ChannelId channel_arg(const NetworkGraph& g, std::uint32_t c) {
  if (c >= g.channel_count()) throw py::index_error("channel " + std::to_string(c) + " out of range");
  return channel_at(c);
}

py::tuple cycle_tuple(const RebalanceCycle& c) {
  std::vector<std::uint32_t> nodes, chans;
  for (NodeId n : c.nodes()) nodes.push_back(index_of(n));
  for (ChannelId ch : c.channels()) chans.push_back(index_of(ch));
  return py::make_tuple(nodes, chans);
}

RebalanceCycle cycle_from(const NetworkGraph& g, const std::vector<std::uint32_t>& nodes,
                          const std::vector<std::uint32_t>& chans) {
  if (nodes.size() != chans.size() + 1) throw py::value_error("nodes must have one entry more than channels");
  RebalanceCycle c{node_arg(g, nodes.front()), {}};
  for (std::size_t i = 0; i < chans.size(); ++i)
    c.hops.push_back({node_arg(g, nodes[i]), node_arg(g, nodes[i + 1]), channel_arg(g, chans[i])});
  return c;
}

}  // namespace

PYBIND11_MODULE(_pcnbal, m) {
  m.doc() = "Payment channel network balance simulation";
  m.attr("__version__") = PCNBAL_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<PaymentRejected>(m, "PaymentRejected", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_AssertionError);

  py::enum_<Strategy>(m, "Strategy")
      .value("CYCLE4", Strategy::Cycle4)
      .value("CYCLE5", Strategy::Cycle5)
      .value("FOAF", Strategy::Foaf)
      .value("MPP", Strategy::Mpp);

  py::enum_<AgreementMode>(m, "AgreementMode")
      .value("BAND", AgreementMode::Band)
      .value("GINI", AgreementMode::Gini);

  py::class_<Channel>(m, "Channel")
      .def_property_readonly("id", [](const Channel& c) { return index_of(c.id); })
      .def_property_readonly("a", [](const Channel& c) { return index_of(c.a); })
      .def_property_readonly("b", [](const Channel& c) { return index_of(c.b); })
      .def_readonly("capacity", &Channel::capacity)
      .def_readonly("balance_a", &Channel::balance_a)
      .def_readonly("balance_b", &Channel::balance_b)
      .def_readonly("base_fee_msat", &Channel::base_fee_msat)
      .def_readonly("fee_rate_ppm", &Channel::fee_rate_ppm);

  py::class_<NetworkGraph>(m, "NetworkGraph")
      .def(py::init<>())
      .def("add_node", [](NetworkGraph& g, const std::string& name) { return index_of(g.add_node(name)); })
      .def(
          "add_channel",
          [](NetworkGraph& g, std::uint32_t a, std::uint32_t b, Sat capacity, Sat balance_a, MilliSat base_fee,
             MilliSat fee_rate) {
            return index_of(g.add_channel(node_arg(g, a), node_arg(g, b), capacity, balance_a, base_fee, fee_rate));
          },
          py::arg("a"), py::arg("b"), py::arg("capacity"), py::arg("balance_a"), py::arg("base_fee_msat") = 1000,
          py::arg("fee_rate_ppm") = 1)
      .def_property_readonly("node_count", &NetworkGraph::node_count)
      .def_property_readonly("channel_count", &NetworkGraph::channel_count)
      .def("name", [](const NetworkGraph& g, std::uint32_t n) { return g.name(node_arg(g, n)); })
      .def("find",
           [](const NetworkGraph& g, const std::string& name) -> std::optional<std::uint32_t> {
             if (auto id = g.find(name)) return index_of(*id);
             return std::nullopt;
           })
      .def("channel", [](const NetworkGraph& g, std::uint32_t c) { return g.channel(channel_arg(g, c)); })
      .def("balance",
           [](const NetworkGraph& g, std::uint32_t c, std::uint32_t n) {
             return g.balance(channel_arg(g, c), node_arg(g, n));
           })
      .def("total_funds", [](const NetworkGraph& g, std::uint32_t n) { return g.total_funds(node_arg(g, n)); })
      .def("total_capacity", [](const NetworkGraph& g, std::uint32_t n) { return g.total_capacity(node_arg(g, n)); })
      .def("check_invariants", &NetworkGraph::check_invariants)
      .def("copy", [](const NetworkGraph& g) { return NetworkGraph(g); })
      .def(py::self == py::self);

  py::class_<SnapshotRecord>(m, "SnapshotRecord")
      .def_readonly("node_a", &SnapshotRecord::node_a)
      .def_readonly("node_b", &SnapshotRecord::node_b)
      .def_readonly("capacity", &SnapshotRecord::capacity)
      .def_readonly("base_fee_msat", &SnapshotRecord::base_fee_msat)
      .def_readonly("fee_rate_ppm", &SnapshotRecord::fee_rate_ppm)
      .def_readonly("balance_a", &SnapshotRecord::balance_a)
      .def_readonly("balance_b", &SnapshotRecord::balance_b);

  m.def("load_snapshot", py::overload_cast<const std::filesystem::path&>(&load_snapshot), py::arg("path"));
  m.def("build_graph", &build_graph, py::arg("records"));
  m.def("allocate_funds_coinflip", &allocate_funds_coinflip, py::arg("records"), py::arg("seed"));
  m.def("largest_scc", &largest_scc, py::arg("graph"));
  m.def(
      "generate_synthetic",
      [](std::size_t n, std::size_t d, Sat min_capacity, Sat max_capacity, std::uint64_t seed) {
        return generate_synthetic(n, d, {min_capacity, max_capacity}, seed);
      },
      py::arg("nodes"), py::arg("degree"), py::arg("min_capacity") = 10'000, py::arg("max_capacity") = 10'000'000,
      py::arg("seed") = 0);
  m.def(
      "save_state",
      [](const NetworkGraph& g, const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + path.string());
        write_snapshot(out, to_records(g, true), format_from_path(path));
      },
      py::arg("graph"), py::arg("path"));

  m.def(
      "channel_balance_coefficient",
      [](const NetworkGraph& g, std::uint32_t c, std::uint32_t n) {
        return channel_balance_coefficient(g, channel_arg(g, c), node_arg(g, n));
      },
      py::arg("graph"), py::arg("channel"), py::arg("node"));
  m.def(
      "node_balance_coefficient",
      [](const NetworkGraph& g, std::uint32_t n) { return node_balance_coefficient(g, node_arg(g, n)); },
      py::arg("graph"), py::arg("node"));
  m.def(
      "node_gini", [](const NetworkGraph& g, std::uint32_t n) { return node_gini(g, node_arg(g, n)); },
      py::arg("graph"), py::arg("node"));
  m.def(
      "gini", [](const std::vector<double>& v) { return gini(v); }, py::arg("values"));
  m.def("network_imbalance", &network_imbalance, py::arg("graph"));
  m.def(
      "apply_circular_payment",
      [](NetworkGraph& g, const std::vector<std::uint32_t>& nodes, const std::vector<std::uint32_t>& chans,
         Sat amount) { apply_circular_payment(g, cycle_from(g, nodes, chans), amount); },
      py::arg("graph"), py::arg("nodes"), py::arg("channels"), py::arg("amount"));

  m.def(
      "enumerate_cycles",
      [](const NetworkGraph& g, std::uint32_t u, std::uint32_t c, Strategy s, std::optional<std::size_t> cap) {
        py::list out;
        for (const auto& cyc : enumerate_cycles(g, node_arg(g, u), channel_arg(g, c), s, cap.value_or(kNoCap)))
          out.append(cycle_tuple(cyc));
        return out;
      },
      py::arg("graph"), py::arg("node"), py::arg("channel"), py::arg("strategy") = Strategy::Foaf,
      py::arg("cap") = py::none());

  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init<>())
      .def_readwrite("seed", &SimulationConfig::seed)
      .def_readwrite("strategy", &SimulationConfig::strategy)
      .def_readwrite("cycle_cap", &SimulationConfig::cycle_cap)
      .def_readwrite("agreement", &SimulationConfig::agreement)
      .def_readwrite("require_sink_condition", &SimulationConfig::require_sink_condition)
      .def_readwrite("mpp_divisor", &SimulationConfig::mpp_divisor)
      .def_readwrite("min_amount", &SimulationConfig::min_amount)
      .def_readwrite("max_operations", &SimulationConfig::max_operations)
      .def_readwrite("convergence_epsilon", &SimulationConfig::convergence_epsilon)
      .def_readwrite("foaf_max_hops", &SimulationConfig::foaf_max_hops)
      .def_readwrite("verify_invariants", &SimulationConfig::verify_invariants);

  py::class_<OperationRecord>(m, "OperationRecord")
      .def_readonly("seq", &OperationRecord::seq)
      .def_property_readonly("initiator", [](const OperationRecord& r) { return index_of(r.initiator); })
      .def_property_readonly("cycle", [](const OperationRecord& r) { return cycle_tuple(r.cycle); })
      .def_readonly("amount", &OperationRecord::amount)
      .def_readonly("requested", &OperationRecord::requested)
      .def_readonly("imbalance_after", &OperationRecord::imbalance_after);

  py::class_<MetricsSample>(m, "MetricsSample")
      .def_readonly("ops_count", &MetricsSample::ops_count)
      .def_readonly("imbalance", &MetricsSample::imbalance)
      .def_readonly("success_rate", &MetricsSample::success_rate)
      .def_readonly("median_payment", &MetricsSample::median_payment);

  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("operations", &SimulationResult::operations)
      .def_readonly("samples", &SimulationResult::samples)
      .def_readonly("sweeps", &SimulationResult::sweeps)
      .def_property_readonly("net_fees_msat", [](const SimulationResult& r) { return r.ledger.net(); })
      .def_property_readonly("total_fees_msat", [](const SimulationResult& r) { return r.ledger.total_paid(); })
      .def_property_readonly("hit_operation_budget",
                             [](const SimulationResult& r) { return r.stop == StopReason::MaxOperations; });

  m.def(
      "run_simulation",
      [](NetworkGraph& g, const SimulationConfig& config, bool evaluate_samples, std::size_t threads) {
        EvalHook hook;
        if (evaluate_samples)
          hook = [threads](const NetworkGraph& state, MetricsSample& s) {
            const auto bn = all_pairs_bottlenecks(state, threads);
            s.success_rate = success_rate(bn, 1);
            s.median_payment = median_payment_size(bn);
          };
        py::gil_scoped_release release;
        return run_simulation(g, config, hook);
      },
      py::arg("graph"), py::arg("config") = SimulationConfig{}, py::arg("evaluate_samples") = false,
      py::arg("threads") = 1);

  m.def(
      "cheapest_path",
      [](const NetworkGraph& g, std::uint32_t s, std::uint32_t t) {
        const auto r = cheapest_path(g, node_arg(g, s), node_arg(g, t));
        std::vector<std::uint32_t> nodes, chans;
        if (!r.path.empty()) nodes.push_back(index_of(r.source));
        for (const Hop& h : r.path) {
          nodes.push_back(index_of(h.to));
          chans.push_back(index_of(h.channel));
        }
        py::dict d;
        d["nodes"] = nodes;
        d["channels"] = chans;
        d["total_base_fee_msat"] = r.total_base_fee;
        d["bottleneck"] = r.bottleneck;
        return d;
      },
      py::arg("graph"), py::arg("source"), py::arg("target"));
  m.def(
      "all_pairs_bottlenecks",
      [](const NetworkGraph& g, std::size_t threads) {
        py::gil_scoped_release release;
        return all_pairs_bottlenecks(g, threads);
      },
      py::arg("graph"), py::arg("threads") = 1);
  m.def(
      "success_rate", [](const NetworkGraph& g, Sat amount, std::size_t threads) {
        py::gil_scoped_release release;
        return success_rate(g, amount, threads);
      },
      py::arg("graph"), py::arg("amount") = 1, py::arg("threads") = 1);
  m.def(
      "median_payment_size", [](const NetworkGraph& g, std::size_t threads) {
        py::gil_scoped_release release;
        return median_payment_size(g, threads);
      },
      py::arg("graph"), py::arg("threads") = 1);
  m.def(
      "ks_distance", [](const std::vector<double>& a, const std::vector<double>& b) { return ks_distance(a, b); },
      py::arg("a"), py::arg("b"));
  m.def("gini_distribution", &gini_distribution, py::arg("graph"));

  py::class_<EvaluationReport>(m, "EvaluationReport")
      .def_readonly("amount", &EvaluationReport::amount)
      .def_readonly("success_rate", &EvaluationReport::success_rate)
      .def_readonly("median_payment", &EvaluationReport::median_payment)
      .def_readonly("gini_values", &EvaluationReport::gini_values)
      .def_readonly("network_imbalance", &EvaluationReport::network_imbalance)
      .def_readonly("pairs", &EvaluationReport::pairs)
      .def_readonly("approximate", &EvaluationReport::approximate)
      .def("to_json", [](const EvaluationReport& r) { return to_json(r).dump(); });

  m.def(
      "evaluate",
      [](const NetworkGraph& g, Sat amount, std::size_t threads, std::optional<std::size_t> sample_pairs,
         std::uint64_t seed) {
        EvaluationOptions opts{amount, threads, sample_pairs, seed};
        py::gil_scoped_release release;
        return evaluate(g, opts);
      },
      py::arg("graph"), py::arg("amount") = 1, py::arg("threads") = 1, py::arg("sample_pairs") = py::none(),
      py::arg("seed") = 0);
}
