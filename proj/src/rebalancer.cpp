#include "pcnbal/rebalancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pcnbal/balance.hpp"
#include "pcnbal/random.hpp"

namespace pcnbal {

std::string_view to_string(AgreementMode m) { return m == AgreementMode::Band ? "band" : "gini"; }

std::optional<AgreementMode> parse_agreement_mode(std::string_view text) {
  if (text == "band") return AgreementMode::Band;
  if (text == "gini") return AgreementMode::Gini;
  return std::nullopt;
}

void SimulationConfig::validate() const {
  if (cycle_cap < 1) throw std::invalid_argument("cycle_cap must be at least 1");
  if (mpp_divisor < 1) throw std::invalid_argument("mpp_divisor must be at least 1");
  if (min_amount < 1) throw std::invalid_argument("min_amount must be at least 1");
  if (foaf_max_hops < 2) throw std::invalid_argument("foaf_max_hops must be at least 2");
  if (!(convergence_epsilon >= 0.0)) throw std::invalid_argument("convergence_epsilon must be >= 0");
}

MilliSat FeeLedger::sum() const { return std::accumulate(net_.begin(), net_.end(), MilliSat{0}); }

void FeeLedger::transfer(NodeId payer, NodeId payee, MilliSat fee) {
  net_.at(index_of(payer)) -= fee;
  net_.at(index_of(payee)) += fee;
  total_paid_ += fee;
}

MilliSat forwarding_fee(const Channel& ch, Sat amount) {
  const __int128 proportional = static_cast<__int128>(ch.fee_rate_ppm) * amount * 1000 / 1'000'000;
  return ch.base_fee_msat + static_cast<MilliSat>(proportional);
}

void record_fees(FeeLedger& ledger, const NetworkGraph& g, const RebalanceCycle& cycle, Sat amount) {
  if (amount < 1) throw std::invalid_argument("fee amount must be at least 1 sat");
  for (std::size_t i = 1; i < cycle.hops.size(); ++i) {
    const Hop& h = cycle.hops[i];
    ledger.transfer(cycle.initiator, h.from, forwarding_fee(g.channel(h.channel), amount));
  }
}

namespace {

// Node totals are invariant under circular payments, so the simulation
// computes them once; standalone calls fall back to summing the adjacency.
struct Totals {
  const NetworkGraph& g;
  const std::vector<Sat>* tau = nullptr;
  const std::vector<Sat>* kappa = nullptr;

  Sat funds(NodeId n) const { return tau ? (*tau)[index_of(n)] : g.total_funds(n); }
  Sat capacity(NodeId n) const { return kappa ? (*kappa)[index_of(n)] : g.total_capacity(n); }
};

int side_of_node_coefficient(const Totals& t, NodeId u, ChannelId ch, Sat balance) {
  return compare_to_node_coefficient(balance, t.g.channel(ch).capacity, t.funds(u), t.capacity(u));
}

std::vector<ChannelId> candidates(const Totals& t, NodeId u) {
  std::vector<ChannelId> out;
  const Sat tau = t.funds(u);
  const Sat kappa = t.capacity(u);
  for (const auto& adj : t.g.neighbors(u)) {
    const Channel& ch = t.g.channel(adj.channel);
    if (compare_to_node_coefficient(ch.balance_of(u), ch.capacity, tau, kappa) > 0)
      out.push_back(adj.channel);
  }
  return out;
}

Sat desired(const Totals& t, NodeId u, ChannelId ch, Strategy strategy, Sat mpp_divisor) {
  const Channel& c = t.g.channel(ch);
  if (!c.has_endpoint(u)) throw std::invalid_argument("node is not an endpoint of the channel");
  const Sat full = excess_over_node_coefficient(c.balance_of(u), c.capacity, t.funds(u), t.capacity(u));
  return strategy == Strategy::Mpp ? full / mpp_divisor : full;
}

Sat band_bound(const Totals& t, NodeId x, ChannelId in, ChannelId out, Sat requested) {
  const Channel& ci = t.g.channel(in);
  const Channel& co = t.g.channel(out);
  const Sat tau = t.funds(x);
  const Sat kappa = t.capacity(x);
  const Sat b_out = co.balance_of(x);
  Sat bound = std::min(requested, b_out);
  bound = std::min(bound, excess_over_node_coefficient(b_out, co.capacity, tau, kappa));
  bound = std::min(bound, deficit_below_node_coefficient(ci.balance_of(x), ci.capacity, tau, kappa));
  return std::max<Sat>(bound, 0);
}

Sat gini_bound(const Totals& t, NodeId x, ChannelId in, ChannelId out, Sat requested) {
  const Channel& ci = t.g.channel(in);
  const Channel& co = t.g.channel(out);
  Sat hi = std::min({requested, co.balance_of(x), ci.capacity - ci.balance_of(x)});
  if (hi <= 0) return 0;
  const double before = node_gini(t.g, x);
  auto acceptable = [&](Sat a) { return gini_after_shift(t.g, x, in, out, a) <= before; };
  if (acceptable(hi)) return hi;
  // Gini along a single shift direction is quasiconvex in the amount, so the
  // acceptable amounts form an interval [0, a*].
  Sat lo = 0;
  const Sat band = band_bound(t, x, in, out, requested);
  if (band > 0 && band < hi && acceptable(band)) lo = band;
  while (hi - lo > 1) {
    const Sat mid = lo + (hi - lo) / 2;
    (acceptable(mid) ? lo : hi) = mid;
  }
  return lo;
}

Sat agreeable(const Totals& t, NodeId x, ChannelId in, ChannelId out, Sat requested, AgreementMode mode) {
  const Channel& ci = t.g.channel(in);
  const Channel& co = t.g.channel(out);
  if (!ci.has_endpoint(x) || !co.has_endpoint(x))
    throw std::invalid_argument("node is not an endpoint of both channels");
  if (in == out) throw std::invalid_argument("in and out channel must differ");
  if (requested <= 0) return 0;
  return mode == AgreementMode::Band ? band_bound(t, x, in, out, requested)
                                     : gini_bound(t, x, in, out, requested);
}

bool sink_ok(const Totals& t, NodeId u, ChannelId last, bool require) {
  if (!require) return true;
  const Channel& c = t.g.channel(last);
  if (!c.has_endpoint(u)) throw std::invalid_argument("sink channel is not incident to the initiator");
  return side_of_node_coefficient(t, u, last, c.balance_of(u)) < 0;
}

RebalanceOutcome attempt(const Totals& t, NetworkGraph& g, NodeId u, ChannelId ch,
                         const RebalanceCycle& cycle, const SimulationConfig& config, FeeLedger& ledger) {
  if (cycle.initiator != u || cycle.hops.size() < 2 || cycle.hops.front().from != u ||
      cycle.hops.front().channel != ch || cycle.hops.back().to != u)
    throw std::invalid_argument("cycle does not start on the initiator's channel");

  const Sat requested = desired(t, u, ch, config.strategy, config.mpp_divisor);
  if (requested <= 0) return RebalanceOutcome::declined(requested);
  if (!sink_ok(t, u, cycle.hops.back().channel, config.require_sink_condition))
    return RebalanceOutcome::declined(requested);

  Sat amount = requested;
  for (std::size_t i = 1; i < cycle.hops.size() && amount > 0; ++i)
    amount = std::min(amount, agreeable(t, cycle.hops[i].from, cycle.hops[i - 1].channel,
                                        cycle.hops[i].channel, amount, config.agreement));
  if (amount < config.min_amount || amount <= 0) return RebalanceOutcome::declined(requested);
  if (g.balance(ch, u) < amount) return RebalanceOutcome::declined(requested);

  if (config.agreement == AgreementMode::Gini) {
    // Each node bounded its own amount; confirm at the common minimum.
    for (std::size_t i = 1; i < cycle.hops.size(); ++i) {
      const NodeId x = cycle.hops[i].from;
      if (gini_after_shift(g, x, cycle.hops[i - 1].channel, cycle.hops[i].channel, amount) >
          node_gini(g, x))
        return RebalanceOutcome::declined(requested);
    }
  }

  apply_circular_payment(g, cycle, amount);
  record_fees(ledger, g, cycle, amount);
  return {true, amount, requested};
}

}  // namespace

std::vector<ChannelId> candidate_channels(const NetworkGraph& g, NodeId u) {
  return candidates(Totals{g}, u);
}

Sat desired_amount(const NetworkGraph& g, NodeId u, ChannelId ch, Strategy strategy, Sat mpp_divisor) {
  if (mpp_divisor < 1) throw std::invalid_argument("mpp_divisor must be at least 1");
  return desired(Totals{g}, u, ch, strategy, mpp_divisor);
}

Sat max_agreeable_amount(const NetworkGraph& g, NodeId x, ChannelId in_channel, ChannelId out_channel,
                         Sat requested, AgreementMode mode) {
  return agreeable(Totals{g}, x, in_channel, out_channel, requested, mode);
}

bool check_sink_condition(const NetworkGraph& g, NodeId u, ChannelId last_channel,
                          bool require_sink_condition) {
  return sink_ok(Totals{g}, u, last_channel, require_sink_condition);
}

double gini_after_shift(const NetworkGraph& g, NodeId x, ChannelId in_channel, ChannelId out_channel,
                        Sat amount) {
  std::vector<double> zeta;
  zeta.reserve(g.neighbors(x).size());
  for (const auto& adj : g.neighbors(x)) {
    const Channel& c = g.channel(adj.channel);
    Sat b = c.balance_of(x);
    if (adj.channel == in_channel) b += amount;
    if (adj.channel == out_channel) b -= amount;
    zeta.push_back(static_cast<double>(b) / static_cast<double>(c.capacity));
  }
  return gini(zeta);
}

RebalanceOutcome attempt_rebalance(NetworkGraph& g, NodeId u, ChannelId ch, const RebalanceCycle& cycle,
                                   const SimulationConfig& config, FeeLedger& ledger) {
  return attempt(Totals{g}, g, u, ch, cycle, config, ledger);
}

namespace {

class Simulation {
public:
  Simulation(NetworkGraph& g, const SimulationConfig& config, const EvalHook& hook,
             const OperationObserver& observer)
      : g_(g),
        config_(config),
        hook_(hook),
        observer_(observer),
        rng_(config.seed),
        cache_(g, config.strategy, config.cycle_cap, CycleSearchOptions{config.foaf_max_hops}) {
    const std::size_t n = g.node_count();
    result_.ledger = FeeLedger(n);
    tau_.resize(n);
    kappa_.resize(n);
    gini_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      tau_[i] = g.total_funds(node_at(i));
      kappa_[i] = g.total_capacity(node_at(i));
      gini_[i] = node_gini(g, node_at(i));
    }
    refresh_imbalance();
  }

  SimulationResult run() {
    take_sample();
    best_bucket_ = bucket(imbalance_);

    std::vector<NodeId> order(g_.node_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = node_at(i);

    bool budget_left = true;
    while (budget_left) {
      ++result_.sweeps;
      shuffle(std::span(order), rng_);
      std::size_t executed = 0;
      for (NodeId u : order) {
        if (result_.operations.size() >= config_.max_operations) {
          budget_left = false;
          result_.stop = StopReason::MaxOperations;
          break;
        }
        if (turn(u)) ++executed;
      }
      if (executed == 0) break;
    }
    if (result_.samples.back().ops_count != result_.operations.size()) take_sample();
    return std::move(result_);
  }

private:
  static long bucket(double imbalance) { return static_cast<long>(std::floor(imbalance * 100.0)); }

  void refresh_imbalance() {
    double sum = 0.0;
    for (double v : gini_) sum += v;
    imbalance_ = sum / static_cast<double>(gini_.size());
  }

  void take_sample() {
    MetricsSample s{result_.operations.size(), imbalance_, std::nullopt, std::nullopt};
    if (hook_) hook_(g_, s);
    result_.samples.push_back(s);
  }

  // One node's turn: at most one executed rebalance.
  bool turn(NodeId u) {
    if (gini_[index_of(u)] <= config_.convergence_epsilon) return false;
    const Totals totals{g_, &tau_, &kappa_};
    std::vector<ChannelId> chans = candidates(totals, u);
    if (chans.empty()) return false;
    shuffle(std::span(chans), rng_);
    for (ChannelId ch : chans) {
      if (desired(totals, u, ch, config_.strategy, config_.mpp_divisor) < config_.min_amount) continue;
      const auto& cycles = cache_.get(u, ch);
      perm_.resize(cycles.size());
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      shuffle(std::span(perm_), rng_);
      for (std::size_t idx : perm_) {
        const RebalanceCycle& cycle = cycles[idx];
        std::vector<double> before;
        if (config_.verify_invariants) before = intermediate_ginis(cycle);
        const RebalanceOutcome out = attempt(totals, g_, u, ch, cycle, config_, result_.ledger);
        if (!out.executed) continue;
        after_operation(cycle, out, before);
        return true;
      }
    }
    return false;
  }

  std::vector<double> intermediate_ginis(const RebalanceCycle& cycle) const {
    std::vector<double> out;
    for (std::size_t i = 1; i < cycle.hops.size(); ++i) out.push_back(gini_[index_of(cycle.hops[i].from)]);
    return out;
  }

  void after_operation(const RebalanceCycle& cycle, const RebalanceOutcome& out,
                       const std::vector<double>& before) {
    for (const Hop& h : cycle.hops) gini_[index_of(h.to)] = node_gini(g_, h.to);
    refresh_imbalance();

    OperationRecord rec{result_.operations.size() + 1, cycle.initiator, cycle, out.amount,
                        out.requested, imbalance_};
    if (config_.verify_invariants) verify(rec, before);
    result_.operations.push_back(std::move(rec));
    if (observer_) observer_(g_, result_.operations.back());

    if (const long b = bucket(imbalance_); b < best_bucket_) {
      best_bucket_ = b;
      take_sample();
    }
  }

  void verify(const OperationRecord& rec, const std::vector<double>& before) const {
    g_.check_invariants();
    for (const Hop& h : rec.cycle.hops)
      if (g_.total_funds(h.to) != tau_[index_of(h.to)])
        throw InvariantViolation("total funds of " + g_.name(h.to) + " changed");
    if (result_.ledger.sum() != 0) throw InvariantViolation("fee ledger is not zero-sum");

    const Totals totals{g_, &tau_, &kappa_};
    for (std::size_t i = 1; i < rec.cycle.hops.size(); ++i) {
      const NodeId x = rec.cycle.hops[i].from;
      const ChannelId in = rec.cycle.hops[i - 1].channel;
      const ChannelId out = rec.cycle.hops[i].channel;
      if (config_.agreement == AgreementMode::Band) {
        if (side_of_node_coefficient(totals, x, out, g_.balance(out, x)) < 0 ||
            side_of_node_coefficient(totals, x, in, g_.balance(in, x)) > 0)
          throw InvariantViolation("intermediate " + g_.name(x) + " crossed its node coefficient");
      } else if (gini_[index_of(x)] > before[i - 1]) {
        throw InvariantViolation("intermediate " + g_.name(x) + " Gini increased");
      }
    }
  }

  NetworkGraph& g_;
  const SimulationConfig& config_;
  const EvalHook& hook_;
  const OperationObserver& observer_;
  Rng rng_;
  CycleCache cache_;
  std::vector<Sat> tau_, kappa_;
  std::vector<double> gini_;
  std::vector<std::size_t> perm_;
  double imbalance_ = 0.0;
  long best_bucket_ = 0;
  SimulationResult result_;
};

}  // namespace

SimulationResult run_simulation(NetworkGraph& g, const SimulationConfig& config, const EvalHook& eval_hook,
                                const OperationObserver& observer) {
  config.validate();
  if (g.node_count() == 0) throw std::domain_error("cannot simulate an empty graph");
  return Simulation(g, config, eval_hook, observer).run();
}

}  // namespace pcnbal
