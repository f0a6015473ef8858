#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace slasim {

/// Dense node index in [0, node_count).
using NodeId = std::uint32_t;

/// Simulation clock in integer microseconds; reported in milliseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

inline SimTime from_ms(double ms) { return static_cast<SimTime>(std::llround(ms * 1000.0)); }
inline double to_ms(SimTime t) { return static_cast<double>(t) / 1000.0; }

/// Exact millisecond rendering of a microsecond clock value ("12.345").
std::string format_ms(SimTime t);

struct FlowId {
    std::uint64_t value = 0;
    friend auto operator<=>(const FlowId&, const FlowId&) = default;
};

/// Directed link identified by its endpoints.
struct LinkKey {
    NodeId src = 0;
    NodeId dst = 0;
    friend auto operator<=>(const LinkKey&, const LinkKey&) = default;
};

std::string to_string(const LinkKey& link);

/// Ordered node sequence from origin to destination.
using Route = std::vector<NodeId>;

std::string to_string(const Route& route);

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad scenario or topology configuration.
class ConfigError : public SimError {
public:
    using SimError::SimError;
};

/// No route exists, or a routing precondition was broken.
class RoutingError : public SimError {
public:
    using SimError::SimError;
};

/// A packet was handed to a buffer that does not own its lineage.
class ProtocolError : public SimError {
public:
    using SimError::SimError;
};

/// Merge attempted while sequence numbers are still missing.
class IncompleteFlowError : public SimError {
public:
    using SimError::SimError;
};

/// Aggregates every validation failure found, keyed by config path.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

}  // namespace slasim

template <>
struct std::hash<slasim::LinkKey> {
    std::size_t operator()(const slasim::LinkKey& k) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(k.src) << 32) | k.dst);
    }
};
