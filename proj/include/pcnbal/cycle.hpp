#pragma once

#include <vector>

#include "pcnbal/network.hpp"

namespace pcnbal {

struct Hop {
  NodeId from{};
  NodeId to{};
  ChannelId channel{};

  bool operator==(const Hop&) const = default;
  auto operator<=>(const Hop&) const = default;
};

/// A circular payment from `initiator` back to itself.
///
/// The first hop leaves the initiator, the last one returns to it, and no
/// other node repeats. Two hops are allowed only across parallel channels.
struct RebalanceCycle {
  NodeId initiator{};
  std::vector<Hop> hops;

  std::size_t length() const { return hops.size(); }

  /// Initiator followed by every receiver, so the initiator appears twice.
  std::vector<NodeId> nodes() const;
  std::vector<ChannelId> channels() const;

  /// The same cycle traversed backwards.
  RebalanceCycle reversed() const;

  bool operator==(const RebalanceCycle&) const = default;
};

/// Throws std::invalid_argument unless `cycle` is a simple closed walk over
/// real channels of `g` with at least two hops.
void validate_cycle(const NetworkGraph& g, const RebalanceCycle& cycle);

}  // namespace pcnbal
