#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcnbal/network.hpp"

namespace pcnbal {

/// One channel row of a snapshot file. Balances are only present in state
/// snapshots written after allocation or simulation.
struct SnapshotRecord {
  std::string node_a;
  std::string node_b;
  Sat capacity = 0;
  MilliSat base_fee_msat = 1000;
  std::int64_t fee_rate_ppm = 1;
  std::optional<Sat> balance_a;
  std::optional<Sat> balance_b;

  bool has_balances() const { return balance_a.has_value() && balance_b.has_value(); }
  bool operator==(const SnapshotRecord&) const = default;
};

enum class SnapshotFormat { Csv, Jsonl };

/// Csv unless the extension is .jsonl or .json.
SnapshotFormat format_from_path(const std::filesystem::path& path);

/// Parses a snapshot. Rows keep file order and duplicates become parallel
/// channels. Throws InputError naming the offending line.
std::vector<SnapshotRecord> read_snapshot(std::istream& in, SnapshotFormat format);
std::vector<SnapshotRecord> load_snapshot(const std::filesystem::path& path, SnapshotFormat format);
std::vector<SnapshotRecord> load_snapshot(const std::filesystem::path& path);

void write_snapshot(std::ostream& out, const std::vector<SnapshotRecord>& records,
                    SnapshotFormat format);

/// Records for every channel of `g`, balances included when requested.
std::vector<SnapshotRecord> to_records(const NetworkGraph& g, bool with_balances);

/// Builds a graph from records that already carry balances. Throws
/// InputError if any record lacks them or they do not sum to the capacity.
NetworkGraph build_graph(const std::vector<SnapshotRecord>& records);

/// Gives each channel's whole capacity to one endpoint picked by a fair coin
/// from a generator seeded with `seed`.
NetworkGraph allocate_funds_coinflip(const std::vector<SnapshotRecord>& records, std::uint64_t seed);

/// Subgraph induced by the largest strongly connected component of the
/// liquidity digraph (arc u->v iff u holds a positive balance on some u-v
/// channel). Ties go to the component holding the smallest NodeId. Node and
/// channel ids are renumbered in their original relative order.
NetworkGraph largest_scc(const NetworkGraph& g);

/// Strongly connected components of the liquidity digraph. Each component is
/// sorted; components are ordered by their smallest member.
std::vector<std::vector<NodeId>> liquidity_components(const NetworkGraph& g);

struct CapacityRange {
  Sat min = 10'000;
  Sat max = 10'000'000;
};

/// Preferential-attachment topology. The seed graph is a star over the first
/// attach_degree + 1 nodes; every later node links to attach_degree distinct
/// existing nodes drawn proportionally to their degree. Capacities are
/// log-uniform over `capacities`. Node names are n0, n1, ...
std::vector<SnapshotRecord> generate_synthetic(std::size_t n_nodes, std::size_t attach_degree,
                                               CapacityRange capacities, std::uint64_t seed);

}  // namespace pcnbal
