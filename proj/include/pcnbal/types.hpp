#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace pcnbal {

/// Ordinal node index inside a NetworkGraph. Ordered, so it doubles as the
/// deterministic tie-breaker everywhere.
enum class NodeId : std::uint32_t {};

/// Ordinal channel index inside a NetworkGraph.
enum class ChannelId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId n) { return static_cast<std::uint32_t>(n); }
constexpr std::uint32_t index_of(ChannelId c) { return static_cast<std::uint32_t>(c); }
constexpr NodeId node_at(std::size_t i) { return static_cast<NodeId>(i); }
constexpr ChannelId channel_at(std::size_t i) { return static_cast<ChannelId>(i); }

using Sat = std::int64_t;       // satoshi
using MilliSat = std::int64_t;  // millisatoshi

/// Malformed or unusable input data (bad snapshot rows, degenerate graphs).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A conserved quantity or structural invariant was broken.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A circular payment could not be applied; the graph is left untouched.
class PaymentRejected : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcnbal
