#pragma once

#include <span>
#include <vector>

#include "pcnbal/cycle.hpp"
#include "pcnbal/network.hpp"

namespace pcnbal {

/// Balance of `side` on `ch` relative to the channel capacity.
double channel_balance_coefficient(const NetworkGraph& g, ChannelId ch, NodeId side);

/// Total funds over total capacity of `u`. Throws std::domain_error when `u`
/// has no channels.
double node_balance_coefficient(const NetworkGraph& g, NodeId u);

struct CoefficientEntry {
  ChannelId channel{};
  double coefficient = 0.0;
};

struct CoefficientVector {
  NodeId node{};
  std::vector<CoefficientEntry> entries;
};

CoefficientVector coefficient_vector(const NetworkGraph& g, NodeId u);

/// Gini coefficient of `values` via the sorted closed form
///   sum_i (2i - n + 1) x_(i) / (n * sum x).
/// Empty, single-element and all-zero inputs yield 0.
double gini(std::span<const double> values);

/// Gini coefficient of u's channel balance coefficients. Throws
/// std::domain_error when `u` has no channels.
double node_gini(const NetworkGraph& g, NodeId u);

/// Mean node Gini over all nodes. Throws std::domain_error on an empty graph
/// or when some node has no channels.
double network_imbalance(const NetworkGraph& g);

/// Executes `cycle` with `amount` on every hop. All or nothing: on
/// insufficient liquidity PaymentRejected is thrown and `g` is untouched.
/// A malformed cycle or amount < 1 throws std::invalid_argument.
void apply_circular_payment(NetworkGraph& g, const RebalanceCycle& cycle, Sat amount);

// Exact sign tests on integer balances. For a node u with total funds tau and
// total capacity kappa, compare zeta = b/c against nu = tau/kappa without
// rounding.

/// Sign of (balance/capacity - tau/kappa): -1, 0 or +1.
int compare_to_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa);

/// floor(capacity * (balance/capacity - tau/kappa)), clamped at 0.
Sat excess_over_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa);

/// floor(capacity * (tau/kappa - balance/capacity)), clamped at 0.
Sat deficit_below_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa);

}  // namespace pcnbal
