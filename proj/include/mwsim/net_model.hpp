#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mwsim {

using NodeId = int;
using EdgeId = int;
using Slot = std::int64_t;
using PacketId = std::int64_t;

/// Comparison slack used for all fluid-state checks.
inline constexpr double kTolerance = 1e-9;

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by enumerate_rate_vectors when the feasible family is too large to list.
class EnumerationLimitError : public ModelError {
public:
    using ModelError::ModelError;
};

struct Edge {
    NodeId tail = 0;
    NodeId head = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Static problem instance: topology, destinations, exponent and rate bounds.
///
/// Destinations are single nodes. A subset-valued destination would replace
/// `destinations` with a list of node sets and change the absorption rule in
/// pin_destinations(); nothing else depends on the representation.
struct NetworkSpec {
    int node_count = 0;
    std::vector<Edge> edges;
    std::vector<NodeId> destinations;
    double beta = 1.0;
    double r_min = 1.0;
    double r_max = 1.0;

    int edge_count() const { return static_cast<int>(edges.size()); }
    int dest_count() const { return static_cast<int>(destinations.size()); }

    /// Position of `node` in the destination list, or nullopt.
    std::optional<int> dest_index(NodeId node) const;

    /// Throws ModelError naming the first violated invariant.
    void validate() const;
};

/// Per-(node, destination) fluid backlog. Destinations are addressed by their
/// index in NetworkSpec::destinations.
class QueueMatrix {
public:
    QueueMatrix() = default;
    QueueMatrix(int nodes, int dests);
    explicit QueueMatrix(const NetworkSpec& spec);

    double operator()(NodeId v, int d) const { return q_[index(v, d)]; }
    double& at(NodeId v, int d) { return q_[index(v, d)]; }

    int nodes() const { return nodes_; }
    int dests() const { return dests_; }
    std::span<const double> values() const { return q_; }

    double total() const;
    double max() const;

    friend bool operator==(const QueueMatrix&, const QueueMatrix&) = default;

private:
    std::size_t index(NodeId v, int d) const
    {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(dests_) + static_cast<std::size_t>(d);
    }

    int nodes_ = 0;
    int dests_ = 0;
    std::vector<double> q_;
};

/// Explicit finite list of k-dimensional rate vectors (downward closure implied).
struct ExplicitVectors {
    std::vector<std::vector<double>> vectors;
};

/// Node-exclusive family: any set of edges whose endpoints are pairwise
/// disjoint may be active at once, each edge at up to its cap. A zero cap
/// means the edge is unavailable.
struct MatchingFamily {
    std::vector<double> caps;
};

using RateSet = std::variant<ExplicitVectors, MatchingFamily>;
using RateVector = std::vector<double>;

/// Checks vector lengths and that every nonzero component lies in [r_min, r_max].
void validate_rate_set(const RateSet& rs, const NetworkSpec& spec);

/// Downward-closed membership test: is `r` dominated by some feasible vector?
bool rate_set_contains(const RateSet& rs, const NetworkSpec& spec, std::span<const double> r,
                       double tol = kTolerance);

/// Lists one vector per feasible support (for MatchingFamily, one per matching
/// at full cap, including the empty matching). Matchings come out in
/// lexicographic order of their sorted edge indices.
std::vector<RateVector> enumerate_rate_vectors(const RateSet& rs, const NetworkSpec& spec, std::size_t limit);

struct InjectionEvent {
    PacketId packet_id = 0;
    Slot slot = 0;
    NodeId node = 0;
    NodeId destination = 0;
    double size = 0.0;
};

/// One slot's protocol choice. `dest[e]` is the destination index carried on
/// edge e, or -1 when the edge is idle.
struct ScheduleDecision {
    RateVector rates;
    std::vector<int> dest;
    std::vector<double> transfer;
    double objective = 0.0;

    static ScheduleDecision idle(int edge_count);
};

double potential(const QueueMatrix& q, double beta);

/// q^beta with the beta == 1 fast path.
double queue_power(double x, double beta);

/// Objective sum_e s_e (q_v^beta - q_u^beta) recomputed from the queues.
double decision_objective(const QueueMatrix& q, const NetworkSpec& spec, const ScheduleDecision& dec);

/// Zeroes every destination's own queue and returns the mass removed.
double pin_destinations(QueueMatrix& q, const NetworkSpec& spec);

/// Applies the transfers of `dec` and absorbs at destinations. Returns the mass
/// delivered. Throws ModelError if the decision violates its transfer bounds
/// or would drive a queue negative.
double apply_decision(QueueMatrix& q, const NetworkSpec& spec, const ScheduleDecision& dec);

/// Adds each event's size to its source queue. Events whose destination is
/// their own node are absorbed immediately. Returns the mass absorbed.
double apply_injections(QueueMatrix& q, const NetworkSpec& spec, std::span<const InjectionEvent> events);

}  // namespace mwsim
