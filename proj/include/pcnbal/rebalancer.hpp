#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "pcnbal/cycle.hpp"
#include "pcnbal/cycles.hpp"
#include "pcnbal/network.hpp"

namespace pcnbal {

/// How intermediate nodes decide how much of a circular payment they forward.
///
/// Band: both touched coefficients move toward the node coefficient without
/// crossing it. Gini: any amount that does not raise the node's Gini.
enum class AgreementMode { Band, Gini };

std::string_view to_string(AgreementMode m);
std::optional<AgreementMode> parse_agreement_mode(std::string_view text);

struct SimulationConfig {
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::Foaf;
  std::size_t cycle_cap = 5000;
  AgreementMode agreement = AgreementMode::Band;
  bool require_sink_condition = true;
  Sat mpp_divisor = 20;
  Sat min_amount = 1;
  std::uint64_t max_operations = 10'000'000;
  /// Nodes whose Gini is at or below this are left alone.
  double convergence_epsilon = 0.01;
  std::size_t foaf_max_hops = 6;
  /// Re-check conservation and the agreement rule after every operation.
  bool verify_invariants = true;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Hypothetical routing fees: what each node would have earned forwarding
/// other nodes' rebalancing payments minus what it paid for its own.
class FeeLedger {
public:
  explicit FeeLedger(std::size_t node_count = 0) : net_(node_count, 0) {}

  MilliSat net(NodeId n) const { return net_.at(index_of(n)); }
  const std::vector<MilliSat>& net() const { return net_; }
  MilliSat total_paid() const { return total_paid_; }
  MilliSat sum() const;

  void transfer(NodeId payer, NodeId payee, MilliSat fee);

private:
  std::vector<MilliSat> net_;
  MilliSat total_paid_ = 0;
};

/// Forwarding fee for `amount` sat over a channel, in msat.
MilliSat forwarding_fee(const Channel& ch, Sat amount);

/// Credits every intermediate node with the fee of the channel it forwards
/// on and debits the initiator by the same total. Balances are not touched.
void record_fees(FeeLedger& ledger, const NetworkGraph& g, const RebalanceCycle& cycle, Sat amount);

/// Channels of u on which its coefficient exceeds its node coefficient.
std::vector<ChannelId> candidate_channels(const NetworkGraph& g, NodeId u);

/// floor(capacity * (zeta - nu)), divided by mpp_divisor for Mpp. Zero when
/// `ch` is not a candidate.
Sat desired_amount(const NetworkGraph& g, NodeId u, ChannelId ch, Strategy strategy,
                   Sat mpp_divisor = 20);

/// Largest amount x agrees to receive on `in_channel` and forward on
/// `out_channel`. Zero means x declines.
Sat max_agreeable_amount(const NetworkGraph& g, NodeId x, ChannelId in_channel, ChannelId out_channel,
                         Sat requested, AgreementMode mode);

/// True iff u's coefficient on `last_channel` is strictly below its node
/// coefficient, or the condition is switched off.
bool check_sink_condition(const NetworkGraph& g, NodeId u, ChannelId last_channel,
                          bool require_sink_condition = true);

/// Node Gini of x if `amount` entered on `in_channel` and left on `out_channel`.
double gini_after_shift(const NetworkGraph& g, NodeId x, ChannelId in_channel, ChannelId out_channel,
                        Sat amount);

struct RebalanceOutcome {
  bool executed = false;
  Sat amount = 0;     // executed amount, 0 when declined
  Sat requested = 0;  // what the initiator asked for

  static RebalanceOutcome declined(Sat requested) { return {false, 0, requested}; }
};

/// One negotiation along `cycle` for u's channel `ch`: ask for the desired
/// amount, let every intermediate lower it, check the sink and u's own
/// liquidity, then execute atomically and book the fees. Declines leave `g`
/// and `ledger` untouched. Throws std::invalid_argument when the cycle does
/// not start with u -> other(u) on `ch`.
RebalanceOutcome attempt_rebalance(NetworkGraph& g, NodeId u, ChannelId ch, const RebalanceCycle& cycle,
                                   const SimulationConfig& config, FeeLedger& ledger);

struct OperationRecord {
  std::uint64_t seq = 0;
  NodeId initiator{};
  RebalanceCycle cycle;
  Sat amount = 0;
  Sat requested = 0;
  double imbalance_after = 0.0;
};

struct MetricsSample {
  std::uint64_t ops_count = 0;
  double imbalance = 0.0;
  std::optional<double> success_rate;
  std::optional<Sat> median_payment;
};

/// Called on the current state whenever a sample is taken; fills the
/// optional evaluation fields of the sample.
using EvalHook = std::function<void(const NetworkGraph&, MetricsSample&)>;

/// Called after every executed operation with the new state.
using OperationObserver = std::function<void(const NetworkGraph&, const OperationRecord&)>;

enum class StopReason { Converged, MaxOperations };

struct SimulationResult {
  std::vector<OperationRecord> operations;
  FeeLedger ledger;
  std::vector<MetricsSample> samples;
  std::uint64_t sweeps = 0;
  StopReason stop = StopReason::Converged;
};

/// Runs seeded sweeps over all nodes until a sweep executes nothing or the
/// operation budget is spent. `g` is updated in place and ends as the final
/// state.
///
/// In each sweep the nodes are visited in a fresh random order. A node with
/// Gini above the epsilon tries its candidate channels in random order and
/// the cycles of each candidate in random order, and stops at the first
/// executed rebalance. A sample is taken at the start, whenever the network
/// imbalance first drops below a new multiple of 0.01, and at the end.
SimulationResult run_simulation(NetworkGraph& g, const SimulationConfig& config,
                                const EvalHook& eval_hook = {},
                                const OperationObserver& observer = {});

}  // namespace pcnbal
