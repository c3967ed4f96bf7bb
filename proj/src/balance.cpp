#include "pcnbal/balance.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pcnbal {

namespace {

using Wide = __int128;

void require_channels(const NetworkGraph& g, NodeId u) {
  if (g.neighbors(u).empty())
    throw std::domain_error("node " + g.name(u) + " has no channels");
}

}  // namespace

std::vector<NodeId> RebalanceCycle::nodes() const {
  std::vector<NodeId> out;
  out.reserve(hops.size() + 1);
  out.push_back(initiator);
  for (const Hop& h : hops) out.push_back(h.to);
  return out;
}

std::vector<ChannelId> RebalanceCycle::channels() const {
  std::vector<ChannelId> out;
  out.reserve(hops.size());
  for (const Hop& h : hops) out.push_back(h.channel);
  return out;
}

RebalanceCycle RebalanceCycle::reversed() const {
  RebalanceCycle r{initiator, {}};
  r.hops.reserve(hops.size());
  for (auto it = hops.rbegin(); it != hops.rend(); ++it) r.hops.push_back({it->to, it->from, it->channel});
  return r;
}

void validate_cycle(const NetworkGraph& g, const RebalanceCycle& cycle) {
  if (cycle.hops.size() < 2) throw std::invalid_argument("cycle needs at least two hops");
  if (cycle.hops.front().from != cycle.initiator || cycle.hops.back().to != cycle.initiator)
    throw std::invalid_argument("cycle is not closed at its initiator");
  std::vector<NodeId> seen;
  for (std::size_t i = 0; i < cycle.hops.size(); ++i) {
    const Hop& h = cycle.hops[i];
    const Channel& ch = g.channel(h.channel);
    if (!ch.has_endpoint(h.from) || ch.other(h.from) != h.to)
      throw std::invalid_argument("hop " + std::to_string(i) + " does not match its channel");
    if (i > 0 && cycle.hops[i - 1].to != h.from)
      throw std::invalid_argument("cycle hops are not contiguous");
    seen.push_back(h.from);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::invalid_argument("cycle is not simple");
  std::vector<ChannelId> chans = cycle.channels();
  std::sort(chans.begin(), chans.end());
  if (std::adjacent_find(chans.begin(), chans.end()) != chans.end())
    throw std::invalid_argument("cycle reuses a channel");
}

double channel_balance_coefficient(const NetworkGraph& g, ChannelId ch, NodeId side) {
  const Channel& c = g.channel(ch);
  return static_cast<double>(g.balance(ch, side)) / static_cast<double>(c.capacity);
}

double node_balance_coefficient(const NetworkGraph& g, NodeId u) {
  require_channels(g, u);
  return static_cast<double>(g.total_funds(u)) / static_cast<double>(g.total_capacity(u));
}

CoefficientVector coefficient_vector(const NetworkGraph& g, NodeId u) {
  CoefficientVector v{u, {}};
  for (const auto& adj : g.neighbors(u))
    v.entries.push_back({adj.channel, channel_balance_coefficient(g, adj.channel, u)});
  return v;
}

double gini(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += sorted[i];
    weighted += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * sorted[i];
  }
  if (total <= 0.0) return 0.0;
  return std::clamp(weighted / (static_cast<double>(n) * total), 0.0, 1.0);
}

double node_gini(const NetworkGraph& g, NodeId u) {
  require_channels(g, u);
  std::vector<double> zeta;
  zeta.reserve(g.neighbors(u).size());
  for (const auto& adj : g.neighbors(u)) zeta.push_back(channel_balance_coefficient(g, adj.channel, u));
  return gini(zeta);
}

double network_imbalance(const NetworkGraph& g) {
  if (g.node_count() == 0) throw std::domain_error("network imbalance of an empty graph");
  double sum = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) sum += node_gini(g, node_at(i));
  return sum / static_cast<double>(g.node_count());
}

void apply_circular_payment(NetworkGraph& g, const RebalanceCycle& cycle, Sat amount) {
  if (amount < 1) throw std::invalid_argument("circular payment amount must be at least 1 sat");
  validate_cycle(g, cycle);
  for (const Hop& h : cycle.hops) {
    if (g.balance(h.channel, h.from) < amount)
      throw PaymentRejected("insufficient balance of " + g.name(h.from) + " on channel " +
                            std::to_string(index_of(h.channel)));
  }
  for (const Hop& h : cycle.hops) g.shift(h.channel, h.from, amount);
}

int compare_to_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa) {
  const Wide lhs = static_cast<Wide>(balance) * kappa;
  const Wide rhs = static_cast<Wide>(tau) * capacity;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

Sat excess_over_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa) {
  const Wide num = static_cast<Wide>(balance) * kappa - static_cast<Wide>(capacity) * tau;
  if (num <= 0) return 0;
  return static_cast<Sat>(num / kappa);
}

Sat deficit_below_node_coefficient(Sat balance, Sat capacity, Sat tau, Sat kappa) {
  const Wide num = static_cast<Wide>(capacity) * tau - static_cast<Wide>(balance) * kappa;
  if (num <= 0) return 0;
  return static_cast<Sat>(num / kappa);
}

}  // namespace pcnbal
