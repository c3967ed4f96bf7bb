#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcnbal/cycle.hpp"
#include "pcnbal/network.hpp"

namespace pcnbal {

/// Cycle selection strategies. Mpp searches the same cycles as Foaf and only
/// differs in how much it asks for.
enum class Strategy { Cycle4, Cycle5, Foaf, Mpp };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

inline constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

struct CycleSearchOptions {
  /// Hop bound inside the friend-of-a-friend subgraph.
  std::size_t foaf_max_hops = 6;
};

/// Hop bound used by `s`.
std::size_t max_cycle_length(Strategy s, const CycleSearchOptions& opts = {});

/// u, its neighbours and their neighbours, sorted.
std::vector<NodeId> foaf_node_set(const NetworkGraph& g, NodeId u);

/// Reusable enumerator holding a sorted copy of the adjacency, so the emitted
/// order is shortest first, then lexicographic by node ids, then channel ids.
class CycleFinder {
public:
  explicit CycleFinder(const NetworkGraph& g, CycleSearchOptions opts = {});

  /// Simple cycles starting with hop u -> other(u) on `out_channel` and
  /// ending back at u, truncated to `cap` entries.
  std::vector<RebalanceCycle> enumerate(NodeId u, ChannelId out_channel, Strategy strategy,
                                        std::size_t cap) const;

  const CycleSearchOptions& options() const { return opts_; }

private:
  const NetworkGraph& g_;
  CycleSearchOptions opts_;
  std::vector<std::vector<Adjacent>> sorted_adj_;
};

std::vector<RebalanceCycle> enumerate_cycles(const NetworkGraph& g, NodeId u, ChannelId out_channel,
                                             Strategy strategy, std::size_t cap,
                                             CycleSearchOptions opts = {});

/// Lazily filled per (initiator, channel) cycle lists. Topology is static,
/// so entries never go stale; balances are not part of the key.
class CycleCache {
public:
  CycleCache(const NetworkGraph& g, Strategy strategy, std::size_t cap,
             CycleSearchOptions opts = {});

  const std::vector<RebalanceCycle>& get(NodeId u, ChannelId out_channel);

  std::size_t cached_lists() const { return cache_.size(); }

private:
  CycleFinder finder_;
  Strategy strategy_;
  std::size_t cap_;
  std::unordered_map<std::uint64_t, std::vector<RebalanceCycle>> cache_;
};

}  // namespace pcnbal
