#pragma once

// Brute-force reference implementations used only by tests. Each one follows
// the textbook definition directly and shares no code with the library paths
// it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "pcnbal/cycle.hpp"
#include "pcnbal/network.hpp"

namespace pcnbal::oracle {

/// sum_i sum_j |z_i - z_j| / (2 * sum_i sum_j z_j), 0 on a zero denominator.
inline double gini_double_sum(std::span<const double> z) {
  double num = 0.0, den = 0.0;
  for (double zi : z)
    for (double zj : z) {
      num += std::abs(zi - zj);
      den += zj;
    }
  return den == 0.0 ? 0.0 : num / (2.0 * den);
}

/// Every simple cycle u -> v (first hop on `first`) -> ... -> u with at most
/// `max_len` hops, found by unpruned DFS over all simple paths and optionally
/// restricted to `allowed` nodes.
inline std::set<std::vector<Hop>> all_cycles(const NetworkGraph& g, NodeId u, ChannelId first,
                                             std::size_t max_len,
                                             const std::vector<bool>* allowed = nullptr) {
  std::set<std::vector<Hop>> out;
  const Channel& ch = g.channel(first);
  std::vector<Hop> path{{u, ch.other(u), first}};
  std::vector<bool> on_path(g.node_count(), false);
  on_path[index_of(u)] = true;
  on_path[index_of(ch.other(u))] = true;
  std::function<void()> dfs = [&] {
    const NodeId x = path.back().to;
    for (const Channel& c : g.channels()) {
      if (!c.has_endpoint(x)) continue;
      const NodeId y = c.other(x);
      if (y == u) {
        if (c.id == first) continue;
        auto cyc = path;
        cyc.push_back({x, u, c.id});
        if (cyc.size() <= max_len) out.insert(cyc);
        continue;
      }
      if (on_path[index_of(y)]) continue;
      if (allowed && !(*allowed)[index_of(y)]) continue;
      if (path.size() + 1 >= max_len) continue;
      on_path[index_of(y)] = true;
      path.push_back({x, y, c.id});
      dfs();
      path.pop_back();
      on_path[index_of(y)] = false;
    }
  };
  dfs();
  return out;
}

struct BrutePath {
  bool found = false;
  MilliSat fee = std::numeric_limits<MilliSat>::max();
  std::size_t hops = 0;
  std::vector<Hop> path;
};

/// Cheapest simple path by summed base fee over all simple paths; ties by
/// fewer hops, then the smaller node sequence, then the smaller channel ids.
inline BrutePath cheapest_path(const NetworkGraph& g, NodeId s, NodeId t) {
  BrutePath best;
  std::vector<Hop> path;
  std::vector<bool> on_path(g.node_count(), false);
  on_path[index_of(s)] = true;
  auto key = [](const std::vector<Hop>& p) {
    std::vector<std::uint32_t> nodes, chans;
    for (const Hop& h : p) {
      nodes.push_back(index_of(h.to));
      chans.push_back(index_of(h.channel));
    }
    return std::make_pair(nodes, chans);
  };
  std::function<void(NodeId, MilliSat)> dfs = [&](NodeId x, MilliSat fee) {
    if (x == t) {
      const bool better = !best.found || fee < best.fee ||
                          (fee == best.fee && path.size() < best.hops) ||
                          (fee == best.fee && path.size() == best.hops && key(path) < key(best.path));
      if (better) best = {true, fee, path.size(), path};
      return;
    }
    for (const Channel& c : g.channels()) {
      if (!c.has_endpoint(x)) continue;
      const NodeId y = c.other(x);
      if (on_path[index_of(y)]) continue;
      on_path[index_of(y)] = true;
      path.push_back({x, y, c.id});
      dfs(y, fee + c.base_fee_msat);
      path.pop_back();
      on_path[index_of(y)] = false;
    }
  };
  dfs(s, 0);
  return best;
}

/// sup_x |F_a(x) - F_b(x)| evaluated at every sample point.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
  auto cdf = [](std::span<const double> s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  double d = 0.0;
  for (auto sample : {a, b})
    for (double x : sample) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  return d;
}

}  // namespace pcnbal::oracle
