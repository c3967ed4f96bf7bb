#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "pcnbal/cycle.hpp"
#include "pcnbal/network.hpp"

namespace pcnbal {

/// Cheapest route from source to target by summed base fee. Routing cannot
/// see balances, so the route ignores them; `bottleneck` is what the route
/// could actually forward on a first attempt.
struct PathQueryResult {
  NodeId source{};
  NodeId target{};
  std::vector<Hop> path;  // empty when target is unreachable
  MilliSat total_base_fee = 0;
  Sat bottleneck = 0;
};

/// Single-source cheapest-path tree. Ties are broken by fewer hops, then the
/// lexicographically smallest node sequence, then the smaller channel id.
struct PathTree {
  NodeId source{};
  std::vector<bool> reached;
  std::vector<MilliSat> fee;
  std::vector<std::uint32_t> hops;
  std::vector<Hop> parent;     // hop entering each reached non-source node
  std::vector<Sat> bottleneck;  // 0 for the source and unreachable nodes
};

PathTree cheapest_path_tree(const NetworkGraph& g, NodeId source);

/// Throws std::invalid_argument when source == target.
PathQueryResult cheapest_path(const NetworkGraph& g, NodeId source, NodeId target);

/// Bottlenecks of all ordered pairs (s, t), s != t, row-major by s then t.
/// Unreachable targets count as 0.
std::vector<Sat> all_pairs_bottlenecks(const NetworkGraph& g, std::size_t threads = 1);

/// Fraction of ordered pairs whose cheapest path can forward `amount`.
double success_rate(const NetworkGraph& g, Sat amount, std::size_t threads = 1);
double success_rate(std::span<const Sat> bottlenecks, Sat amount);

/// Median of all ordered-pair bottlenecks; an even count takes the lower
/// middle value.
Sat median_payment_size(const NetworkGraph& g, std::size_t threads = 1);
Sat median_payment_size(std::span<const Sat> bottlenecks);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|. Throws
/// std::invalid_argument on an empty sample.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Node Gini values in NodeId order.
std::vector<double> gini_distribution(const NetworkGraph& g);

struct CdfPoint {
  double value = 0.0;
  double cumulative_fraction = 0.0;
};

/// One point per distinct value: the fraction of the sample <= value.
std::vector<CdfPoint> empirical_cdf(std::span<const double> sample);
void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf);

struct EvaluationOptions {
  Sat amount = 1;
  std::size_t threads = 1;
  /// Evaluate this many seeded random ordered pairs instead of all of them.
  std::optional<std::size_t> sample_pairs;
  std::uint64_t seed = 0;
};

struct EvaluationReport {
  Sat amount = 1;
  double success_rate = 0.0;
  Sat median_payment = 0;
  std::vector<CdfPoint> payment_size_cdf;
  std::vector<double> gini_values;
  double network_imbalance = 0.0;
  std::size_t pairs = 0;
  bool approximate = false;
};

EvaluationReport evaluate(const NetworkGraph& g, const EvaluationOptions& opts = {});

nlohmann::ordered_json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

}  // namespace pcnbal
