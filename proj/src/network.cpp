#include "pcnbal/network.hpp"

#include <sstream>

namespace pcnbal {

NodeId NetworkGraph::add_node(std::string_view name) {
  std::string key(name);
  if (auto it = by_name_.find(key); it != by_name_.end()) return it->second;
  const NodeId id = node_at(names_.size());
  names_.push_back(key);
  by_name_.emplace(std::move(key), id);
  adjacency_.emplace_back();
  return id;
}

ChannelId NetworkGraph::add_channel(NodeId a, NodeId b, Sat capacity, Sat balance_a,
                                    MilliSat base_fee_msat, std::int64_t fee_rate_ppm) {
  check_node(a);
  check_node(b);
  if (a == b) throw std::invalid_argument("self-channel on node " + name(a));
  if (capacity <= 0) throw std::invalid_argument("channel capacity must be positive");
  if (balance_a < 0 || balance_a > capacity)
    throw std::invalid_argument("channel balance outside [0, capacity]");
  if (base_fee_msat < 0 || fee_rate_ppm < 0)
    throw std::invalid_argument("channel fees must be non-negative");

  const ChannelId id = channel_at(channels_.size());
  channels_.push_back(Channel{id, a, b, capacity, balance_a, capacity - balance_a,
                              base_fee_msat, fee_rate_ppm});
  adjacency_[index_of(a)].push_back({id, b});
  adjacency_[index_of(b)].push_back({id, a});
  return id;
}

const std::string& NetworkGraph::name(NodeId n) const {
  check_node(n);
  return names_[index_of(n)];
}

std::optional<NodeId> NetworkGraph::find(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

const Channel& NetworkGraph::channel(ChannelId c) const {
  if (index_of(c) >= channels_.size())
    throw std::out_of_range("unknown channel " + std::to_string(index_of(c)));
  return channels_[index_of(c)];
}

Channel& NetworkGraph::mutable_channel(ChannelId c) {
  if (index_of(c) >= channels_.size())
    throw std::out_of_range("unknown channel " + std::to_string(index_of(c)));
  return channels_[index_of(c)];
}

std::span<const Adjacent> NetworkGraph::neighbors(NodeId n) const {
  check_node(n);
  return adjacency_[index_of(n)];
}

void NetworkGraph::check_node(NodeId n) const {
  if (index_of(n) >= names_.size())
    throw std::out_of_range("unknown node " + std::to_string(index_of(n)));
}

Sat NetworkGraph::balance(ChannelId c, NodeId side) const {
  const Channel& ch = channel(c);
  if (!ch.has_endpoint(side))
    throw std::invalid_argument("node " + std::to_string(index_of(side)) +
                                " is not an endpoint of channel " + std::to_string(index_of(c)));
  return ch.balance_of(side);
}

void NetworkGraph::set_balance(ChannelId c, NodeId side, Sat amount) {
  Channel& ch = mutable_channel(c);
  if (!ch.has_endpoint(side)) throw std::invalid_argument("node is not an endpoint of channel");
  if (amount < 0 || amount > ch.capacity)
    throw std::invalid_argument("balance outside [0, capacity]");
  if (side == ch.a) {
    ch.balance_a = amount;
    ch.balance_b = ch.capacity - amount;
  } else {
    ch.balance_b = amount;
    ch.balance_a = ch.capacity - amount;
  }
}

void NetworkGraph::shift(ChannelId c, NodeId from, Sat amount) {
  Channel& ch = mutable_channel(c);
  if (from == ch.a) {
    ch.balance_a -= amount;
    ch.balance_b += amount;
  } else if (from == ch.b) {
    ch.balance_b -= amount;
    ch.balance_a += amount;
  } else {
    throw std::invalid_argument("node is not an endpoint of channel");
  }
}

Sat NetworkGraph::total_funds(NodeId n) const {
  Sat sum = 0;
  for (const auto& adj : neighbors(n)) sum += channels_[index_of(adj.channel)].balance_of(n);
  return sum;
}

Sat NetworkGraph::total_capacity(NodeId n) const {
  Sat sum = 0;
  for (const auto& adj : neighbors(n)) sum += channels_[index_of(adj.channel)].capacity;
  return sum;
}

void NetworkGraph::check_invariants() const {
  std::vector<std::size_t> seen(names_.size(), 0);
  for (const Channel& ch : channels_) {
    if (ch.balance_a < 0 || ch.balance_b < 0 || ch.balance_a + ch.balance_b != ch.capacity) {
      std::ostringstream msg;
      msg << "channel " << index_of(ch.id) << " breaks conservation: " << ch.balance_a << " + "
          << ch.balance_b << " != " << ch.capacity;
      throw InvariantViolation(msg.str());
    }
    if (ch.a == ch.b) throw InvariantViolation("self-channel in graph");
  }
  for (std::size_t n = 0; n < adjacency_.size(); ++n) {
    for (const auto& adj : adjacency_[n]) {
      const Channel& ch = channel(adj.channel);
      if (!ch.has_endpoint(node_at(n)) || ch.other(node_at(n)) != adj.neighbor)
        throw InvariantViolation("adjacency disagrees with channel list");
      ++seen[n];
    }
  }
  std::vector<std::size_t> expected(names_.size(), 0);
  for (const Channel& ch : channels_) {
    ++expected[index_of(ch.a)];
    ++expected[index_of(ch.b)];
  }
  if (seen != expected) throw InvariantViolation("adjacency size mismatch");
}

bool NetworkGraph::operator==(const NetworkGraph& other) const {
  if (names_ != other.names_ || channels_.size() != other.channels_.size()) return false;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const Channel& x = channels_[i];
    const Channel& y = other.channels_[i];
    if (x.a != y.a || x.b != y.b || x.capacity != y.capacity || x.balance_a != y.balance_a ||
        x.base_fee_msat != y.base_fee_msat || x.fee_rate_ppm != y.fee_rate_ppm)
      return false;
  }
  return true;
}

}  // namespace pcnbal
