#include "pcnbal/evaluation.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "pcnbal/balance.hpp"
#include "pcnbal/random.hpp"

namespace pcnbal {

namespace {

std::vector<NodeId> path_nodes(const PathTree& t, NodeId x) {
  std::vector<NodeId> out{x};
  while (x != t.source) {
    x = t.parent[index_of(x)].from;
    out.push_back(x);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

PathTree cheapest_path_tree(const NetworkGraph& g, NodeId source) {
  const std::size_t n = g.node_count();
  if (index_of(source) >= n) throw std::out_of_range("unknown source node");
  PathTree t;
  t.source = source;
  t.reached.assign(n, false);
  t.fee.assign(n, 0);
  t.hops.assign(n, 0);
  t.parent.assign(n, Hop{});
  t.bottleneck.assign(n, 0);
  std::vector<bool> done(n, false);

  using Key = std::tuple<MilliSat, std::uint32_t, std::uint32_t>;  // fee, hops, node
  std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
  t.reached[index_of(source)] = true;
  queue.emplace(0, 0, index_of(source));

  while (!queue.empty()) {
    const auto [fee, hops, xi] = queue.top();
    queue.pop();
    if (done[xi] || fee != t.fee[xi] || hops != t.hops[xi]) continue;
    done[xi] = true;
    const NodeId x = node_at(xi);
    if (x != source) {
      const Hop& p = t.parent[xi];
      const Sat hop_liquidity = g.channel(p.channel).balance_of(p.from);
      t.bottleneck[xi] = p.from == source ? hop_liquidity
                                          : std::min(t.bottleneck[index_of(p.from)], hop_liquidity);
    }
    for (const Adjacent& a : g.neighbors(x)) {
      const std::uint32_t w = index_of(a.neighbor);
      if (done[w]) continue;
      const MilliSat nf = fee + g.channel(a.channel).base_fee_msat;
      const std::uint32_t nh = hops + 1;
      bool better = !t.reached[w] || std::tie(nf, nh) < std::tie(t.fee[w], t.hops[w]);
      if (!better && nf == t.fee[w] && nh == t.hops[w]) {
        // Equal cost and length: both predecessors are settled, compare routes.
        const NodeId current = t.parent[w].from;
        if (current == x) {
          better = a.channel < t.parent[w].channel;
        } else {
          better = path_nodes(t, x) < path_nodes(t, current);
        }
      }
      if (!better) continue;
      const bool key_changed = !t.reached[w] || nf != t.fee[w] || nh != t.hops[w];
      t.reached[w] = true;
      t.fee[w] = nf;
      t.hops[w] = nh;
      t.parent[w] = Hop{x, a.neighbor, a.channel};
      if (key_changed) queue.emplace(nf, nh, w);
    }
  }
  return t;
}

PathQueryResult cheapest_path(const NetworkGraph& g, NodeId source, NodeId target) {
  if (source == target) throw std::invalid_argument("source and target must differ");
  if (index_of(target) >= g.node_count()) throw std::out_of_range("unknown target node");
  const PathTree t = cheapest_path_tree(g, source);
  PathQueryResult r{source, target, {}, 0, 0};
  if (!t.reached[index_of(target)]) return r;
  for (NodeId x = target; x != source; x = t.parent[index_of(x)].from) r.path.push_back(t.parent[index_of(x)]);
  std::reverse(r.path.begin(), r.path.end());
  r.total_base_fee = t.fee[index_of(target)];
  r.bottleneck = t.bottleneck[index_of(target)];
  return r;
}

std::vector<Sat> all_pairs_bottlenecks(const NetworkGraph& g, std::size_t threads) {
  const std::size_t n = g.node_count();
  if (n < 2) return {};
  std::vector<Sat> out(n * (n - 1), 0);
  auto fill_rows = [&](std::size_t first, std::size_t step) {
    for (std::size_t s = first; s < n; s += step) {
      const PathTree t = cheapest_path_tree(g, node_at(s));
      Sat* row = out.data() + s * (n - 1);
      for (std::size_t x = 0, k = 0; x < n; ++x)
        if (x != s) row[k++] = t.bottleneck[x];
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    fill_rows(0, 1);
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(fill_rows, i, threads);
  pool.clear();
  return out;
}

double success_rate(std::span<const Sat> bottlenecks, Sat amount) {
  if (amount < 1) throw std::invalid_argument("probe amount must be at least 1 sat");
  if (bottlenecks.empty()) return 0.0;
  const auto ok = std::count_if(bottlenecks.begin(), bottlenecks.end(), [&](Sat b) { return b >= amount; });
  return static_cast<double>(ok) / static_cast<double>(bottlenecks.size());
}

double success_rate(const NetworkGraph& g, Sat amount, std::size_t threads) {
  if (amount < 1) throw std::invalid_argument("probe amount must be at least 1 sat");
  return success_rate(all_pairs_bottlenecks(g, threads), amount);
}

Sat median_payment_size(std::span<const Sat> bottlenecks) {
  if (bottlenecks.empty()) return 0;
  std::vector<Sat> v(bottlenecks.begin(), bottlenecks.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

Sat median_payment_size(const NetworkGraph& g, std::size_t threads) {
  return median_payment_size(all_pairs_bottlenecks(g, threads));
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS distance needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(x.size());
    const double fb = static_cast<double>(j) / static_cast<double>(y.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

std::vector<double> gini_distribution(const NetworkGraph& g) {
  std::vector<double> out;
  out.reserve(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) out.push_back(node_gini(g, node_at(i)));
  return out;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> sample) {
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], static_cast<double>(i + 1) / static_cast<double>(v.size())});
  }
  return out;
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf) {
  out << "value,cumulative_fraction\n";
  const auto old = out.precision(17);
  for (const auto& p : cdf) out << p.value << ',' << p.cumulative_fraction << '\n';
  out.precision(old);
}

namespace {

std::vector<Sat> sampled_bottlenecks(const NetworkGraph& g, std::size_t k, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  if (n < 2) return {};
  Rng rng(seed);
  std::map<std::size_t, std::vector<std::size_t>> by_source;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = uniform_below(rng, n);
    std::size_t t = uniform_below(rng, n - 1);
    if (t >= s) ++t;
    pairs.emplace_back(s, t);
  }
  std::map<std::size_t, PathTree> trees;
  std::vector<Sat> out;
  out.reserve(k);
  for (const auto& [s, t] : pairs) {
    auto it = trees.find(s);
    if (it == trees.end()) it = trees.emplace(s, cheapest_path_tree(g, node_at(s))).first;
    out.push_back(it->second.bottleneck[t]);
  }
  return out;
}

}  // namespace

EvaluationReport evaluate(const NetworkGraph& g, const EvaluationOptions& opts) {
  if (g.node_count() == 0) throw std::domain_error("cannot evaluate an empty graph");
  EvaluationReport r;
  r.amount = opts.amount;
  const std::vector<Sat> bottlenecks = opts.sample_pairs
                                           ? sampled_bottlenecks(g, *opts.sample_pairs, opts.seed)
                                           : all_pairs_bottlenecks(g, opts.threads);
  r.approximate = opts.sample_pairs.has_value();
  r.pairs = bottlenecks.size();
  r.success_rate = success_rate(bottlenecks, opts.amount);
  r.median_payment = median_payment_size(bottlenecks);
  std::vector<double> sizes(bottlenecks.begin(), bottlenecks.end());
  r.payment_size_cdf = empirical_cdf(sizes);
  r.gini_values = gini_distribution(g);
  r.network_imbalance = network_imbalance(g);
  return r;
}

nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["amount_sat"] = r.amount;
  j["success_rate"] = r.success_rate;
  j["median_payment_sat"] = r.median_payment;
  j["network_imbalance"] = r.network_imbalance;
  j["pairs"] = r.pairs;
  j["approximate"] = r.approximate;
  j["gini_values"] = r.gini_values;
  auto& cdf = j["payment_size_cdf"] = nlohmann::ordered_json::array();
  for (const auto& p : r.payment_size_cdf) cdf.push_back({{"value", p.value}, {"cumulative_fraction", p.cumulative_fraction}});
  return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  r.amount = j.at("amount_sat").get<Sat>();
  r.success_rate = j.at("success_rate").get<double>();
  r.median_payment = j.at("median_payment_sat").get<Sat>();
  r.network_imbalance = j.at("network_imbalance").get<double>();
  r.pairs = j.at("pairs").get<std::size_t>();
  r.approximate = j.at("approximate").get<bool>();
  r.gini_values = j.at("gini_values").get<std::vector<double>>();
  for (const auto& p : j.at("payment_size_cdf"))
    r.payment_size_cdf.push_back({p.at("value").get<double>(), p.at("cumulative_fraction").get<double>()});
  return r;
}

}  // namespace pcnbal
