#include "pcnbal/cycles.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace pcnbal {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Cycle4: return "cycle4";
    case Strategy::Cycle5: return "cycle5";
    case Strategy::Foaf: return "foaf";
    case Strategy::Mpp: return "mpp";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::Cycle4, Strategy::Cycle5, Strategy::Foaf, Strategy::Mpp})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

std::size_t max_cycle_length(Strategy s, const CycleSearchOptions& opts) {
  switch (s) {
    case Strategy::Cycle4: return 4;
    case Strategy::Cycle5: return 5;
    case Strategy::Foaf:
    case Strategy::Mpp: return opts.foaf_max_hops;
  }
  return 0;
}

std::vector<NodeId> foaf_node_set(const NetworkGraph& g, NodeId u) {
  std::vector<NodeId> out{u};
  for (const auto& first : g.neighbors(u)) {
    out.push_back(first.neighbor);
    for (const auto& second : g.neighbors(first.neighbor)) out.push_back(second.neighbor);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CycleFinder::CycleFinder(const NetworkGraph& g, CycleSearchOptions opts)
    : g_(g), opts_(opts), sorted_adj_(g.node_count()) {
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    auto adj = g.neighbors(node_at(n));
    sorted_adj_[n].assign(adj.begin(), adj.end());
    std::sort(sorted_adj_[n].begin(), sorted_adj_[n].end(), [](const Adjacent& x, const Adjacent& y) {
      return x.neighbor != y.neighbor ? x.neighbor < y.neighbor : x.channel < y.channel;
    });
  }
}

namespace {

struct Search {
  const std::vector<std::vector<Adjacent>>& adj;
  const std::vector<bool>& allowed;
  const std::vector<std::uint32_t>& dist;  // hops to the initiator
  NodeId initiator;
  ChannelId first_channel;
  std::size_t target_len;
  std::size_t cap;
  std::vector<bool> visited;
  std::vector<Hop> path;
  std::vector<RebalanceCycle>& out;

  // Returns false once the cap is reached.
  bool extend(NodeId x) {
    const std::size_t used = path.size();
    for (const Adjacent& a : adj[index_of(x)]) {
      if (a.neighbor == initiator) {
        if (used + 1 != target_len) continue;
        if (used == 1 && a.channel == first_channel) continue;
        path.push_back({x, initiator, a.channel});
        out.push_back({initiator, path});
        path.pop_back();
        if (out.size() >= cap) return false;
        continue;
      }
      const std::uint32_t w = index_of(a.neighbor);
      if (!allowed[w] || visited[w]) continue;
      if (used + 1 + dist[w] > target_len) continue;
      visited[w] = true;
      path.push_back({x, a.neighbor, a.channel});
      const bool more = extend(a.neighbor);
      path.pop_back();
      visited[w] = false;
      if (!more) return false;
    }
    return true;
  }
};

}  // namespace

std::vector<RebalanceCycle> CycleFinder::enumerate(NodeId u, ChannelId out_channel, Strategy strategy,
                                                   std::size_t cap) const {
  const Channel& first = g_.channel(out_channel);
  if (!first.has_endpoint(u)) throw std::invalid_argument("initiator is not an endpoint of the channel");
  if (cap == 0) throw std::invalid_argument("cycle cap must be at least 1");
  const NodeId v = first.other(u);
  const std::size_t n = g_.node_count();
  const std::size_t max_len = max_cycle_length(strategy, opts_);

  std::vector<bool> allowed(n, true);
  if (strategy == Strategy::Foaf || strategy == Strategy::Mpp) {
    allowed.assign(n, false);
    for (NodeId f : foaf_node_set(g_, u)) allowed[index_of(f)] = true;
  }

  // BFS distances to u inside the allowed set, capped at max_len.
  constexpr std::uint32_t kFar = UINT32_MAX / 2;
  std::vector<std::uint32_t> dist(n, kFar);
  std::deque<NodeId> queue{u};
  dist[index_of(u)] = 0;
  while (!queue.empty()) {
    const NodeId x = queue.front();
    queue.pop_front();
    if (dist[index_of(x)] >= max_len) continue;
    for (const Adjacent& a : sorted_adj_[index_of(x)]) {
      const std::uint32_t w = index_of(a.neighbor);
      if (!allowed[w] || dist[w] != kFar) continue;
      dist[w] = dist[index_of(x)] + 1;
      queue.push_back(a.neighbor);
    }
  }

  std::vector<RebalanceCycle> out;
  for (std::size_t len = 2; len <= max_len && out.size() < cap; ++len) {
    Search s{sorted_adj_, allowed, dist, u, out_channel, len, cap,
             std::vector<bool>(n, false), {}, out};
    s.visited[index_of(u)] = true;
    s.visited[index_of(v)] = true;
    s.path.push_back({u, v, out_channel});
    if (1 + dist[index_of(v)] > len) continue;
    s.extend(v);
  }
  return out;
}

std::vector<RebalanceCycle> enumerate_cycles(const NetworkGraph& g, NodeId u, ChannelId out_channel,
                                             Strategy strategy, std::size_t cap,
                                             CycleSearchOptions opts) {
  return CycleFinder(g, opts).enumerate(u, out_channel, strategy, cap);
}

CycleCache::CycleCache(const NetworkGraph& g, Strategy strategy, std::size_t cap,
                       CycleSearchOptions opts)
    : finder_(g, opts), strategy_(strategy), cap_(cap) {}

const std::vector<RebalanceCycle>& CycleCache::get(NodeId u, ChannelId out_channel) {
  const std::uint64_t key = (static_cast<std::uint64_t>(index_of(out_channel)) << 32) | index_of(u);
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(key, finder_.enumerate(u, out_channel, strategy_, cap_)).first;
  return it->second;
}

}  // namespace pcnbal
