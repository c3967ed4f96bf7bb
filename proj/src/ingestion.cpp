#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcnbal/ingestion.hpp"
#include "pcnbal/random.hpp"

namespace pcnbal {

NetworkGraph allocate_funds_coinflip(const std::vector<SnapshotRecord>& records, std::uint64_t seed) {
  Rng rng(seed);
  NetworkGraph g;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const NodeId a = g.add_node(r.node_a);
    const NodeId b = g.add_node(r.node_b);
    const Sat balance_a = coin_flip(rng) ? r.capacity : 0;
    try {
      g.add_channel(a, b, r.capacity, balance_a, r.base_fee_msat, r.fee_rate_ppm);
    } catch (const std::invalid_argument& e) {
      throw InputError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return g;
}

std::vector<std::vector<NodeId>> liquidity_components(const NetworkGraph& g) {
  // Iterative Tarjan over arcs u->v where u holds funds on the channel.
  const std::size_t n = g.node_count();
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<NodeId>> components;
  std::uint32_t next_index = 0;

  struct Frame {
    std::uint32_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      Frame& f = call.back();
      const auto adj = g.neighbors(node_at(f.node));
      if (f.edge < adj.size()) {
        const Adjacent& a = adj[f.edge++];
        if (g.channel(a.channel).balance_of(node_at(f.node)) <= 0) continue;
        const std::uint32_t w = index_of(a.neighbor);
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      const std::uint32_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] == index[v]) {
        std::vector<NodeId> comp;
        std::uint32_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(node_at(w));
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return components;
}

NetworkGraph largest_scc(const NetworkGraph& g) {
  const auto components = liquidity_components(g);
  if (components.empty()) return {};
  const std::vector<NodeId>* best = &components.front();
  for (const auto& comp : components)
    if (comp.size() > best->size()) best = &comp;

  std::vector<bool> keep(g.node_count(), false);
  for (NodeId n : *best) keep[index_of(n)] = true;

  NetworkGraph out;
  for (NodeId n : *best) out.add_node(g.name(n));
  for (const Channel& ch : g.channels()) {
    if (!keep[index_of(ch.a)] || !keep[index_of(ch.b)]) continue;
    out.add_channel(*out.find(g.name(ch.a)), *out.find(g.name(ch.b)), ch.capacity, ch.balance_a,
                    ch.base_fee_msat, ch.fee_rate_ppm);
  }
  return out;
}

std::vector<SnapshotRecord> generate_synthetic(std::size_t n_nodes, std::size_t attach_degree,
                                               CapacityRange capacities, std::uint64_t seed) {
  if (attach_degree < 1) throw std::invalid_argument("attach degree must be at least 1");
  if (n_nodes < attach_degree + 1)
    throw std::invalid_argument("need at least attach_degree + 1 nodes");
  if (capacities.min < 1 || capacities.max < capacities.min)
    throw std::invalid_argument("invalid capacity range");

  Rng rng(seed);
  const double log_lo = std::log(static_cast<double>(capacities.min));
  const double log_hi = std::log(static_cast<double>(capacities.max));
  auto draw_capacity = [&] {
    const double x = std::exp(log_lo + unit_interval(rng) * (log_hi - log_lo));
    return std::clamp(static_cast<Sat>(std::llround(x)), capacities.min, capacities.max);
  };
  auto name = [](std::size_t i) { return "n" + std::to_string(i); };

  std::vector<SnapshotRecord> edges;
  // One entry per edge endpoint, so uniform draws are degree-proportional.
  std::vector<std::size_t> endpoints;
  auto link = [&](std::size_t a, std::size_t b) {
    edges.push_back({name(a), name(b), draw_capacity(), 1000, 1, std::nullopt, std::nullopt});
    endpoints.push_back(a);
    endpoints.push_back(b);
  };

  for (std::size_t leaf = 1; leaf <= attach_degree; ++leaf) link(0, leaf);

  std::vector<std::size_t> picked;
  for (std::size_t v = attach_degree + 1; v < n_nodes; ++v) {
    picked.clear();
    while (picked.size() < attach_degree) {
      const std::size_t target = endpoints[uniform_below(rng, endpoints.size())];
      if (std::find(picked.begin(), picked.end(), target) == picked.end()) picked.push_back(target);
    }
    for (std::size_t target : picked) link(v, target);
  }
  return edges;
}

}  // namespace pcnbal
