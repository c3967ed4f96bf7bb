#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcnbal/types.hpp"

namespace pcnbal {

/// An undirected payment channel. The capacity is public, the split into
/// balance_a/balance_b is private to the two endpoints.
struct Channel {
  ChannelId id{};
  NodeId a{};
  NodeId b{};
  Sat capacity = 0;
  Sat balance_a = 0;
  Sat balance_b = 0;
  MilliSat base_fee_msat = 1000;
  std::int64_t fee_rate_ppm = 1;

  bool has_endpoint(NodeId n) const { return n == a || n == b; }
  NodeId other(NodeId n) const { return n == a ? b : a; }
  Sat balance_of(NodeId n) const { return n == a ? balance_a : balance_b; }
};

struct Adjacent {
  ChannelId channel{};
  NodeId neighbor{};
};

/// Node and channel store. This is the single mutable world state of a
/// simulation; only balances ever change after construction.
class NetworkGraph {
public:
  NetworkGraph() = default;

  /// Returns the id of `name`, creating the node if it does not exist yet.
  NodeId add_node(std::string_view name);

  /// Throws std::invalid_argument on self-channels, non-positive capacity,
  /// negative fees or balances that do not sum to the capacity.
  ChannelId add_channel(NodeId a, NodeId b, Sat capacity, Sat balance_a,
                        MilliSat base_fee_msat = 1000, std::int64_t fee_rate_ppm = 1);

  std::size_t node_count() const { return names_.size(); }
  std::size_t channel_count() const { return channels_.size(); }

  const std::string& name(NodeId n) const;
  std::optional<NodeId> find(std::string_view name) const;

  const Channel& channel(ChannelId c) const;
  std::span<const Channel> channels() const { return channels_; }
  std::span<const Adjacent> neighbors(NodeId n) const;

  /// Balance held by `side` on channel `c`.
  Sat balance(ChannelId c, NodeId side) const;

  /// Sets the balance of `side` on `c`; the counterparty receives the rest.
  void set_balance(ChannelId c, NodeId side, Sat amount);

  /// Moves `amount` from `from` to the other endpoint of `c`. No checks
  /// beyond the endpoint test; callers guarantee liquidity.
  void shift(ChannelId c, NodeId from, Sat amount);

  /// Total funds of a node (sum of its balances).
  Sat total_funds(NodeId n) const;
  /// Total capacity of a node (sum of its channel capacities).
  Sat total_capacity(NodeId n) const;

  /// Throws InvariantViolation if any channel breaks balance_a + balance_b ==
  /// capacity or the adjacency lists disagree with the channel list.
  void check_invariants() const;

  bool operator==(const NetworkGraph& other) const;

private:
  Channel& mutable_channel(ChannelId c);
  void check_node(NodeId n) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> by_name_;
  std::vector<Channel> channels_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

}  // namespace pcnbal
