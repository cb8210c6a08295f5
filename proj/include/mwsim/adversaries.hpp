#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mwsim/net_model.hpp"
#include "mwsim/rng.hpp"
#include "mwsim/witness.hpp"

namespace mwsim {

/// What the adversary hands the engine for one slot. Witness fields are
/// filled only by witness-backed adversaries.
struct SlotInput {
    RateSet rates;
    std::vector<InjectionEvent> injections;
    std::optional<RateVector> witness_rates;
    std::vector<WitnessMove> witness_moves;
};

class Adversary {
public:
    virtual ~Adversary() = default;

    /// Input for slot t given the queues at the start of the slot; nullopt
    /// halts the run.
    virtual std::optional<SlotInput> step(Slot t, const QueueMatrix& q) = 0;

    /// Reason reported when step() returns nullopt.
    virtual std::string halt_reason() const { return "adversary halted"; }

    virtual bool provides_witness() const { return false; }
};

/// Phase containing slot t >= 1. Phase i covers
/// [ceil(sum_{j<i} 1.5^j) + 1, ceil(sum_{j<=i} 1.5^j)].
int phase_index(Slot t);

/// First slot of phase i.
Slot phase_start(int phase);

/// N parallel single-hop edges 2i -> 2i+1, each toward its own head, with
/// r_min = (1 - eps)/2 and r_max = 1.
NetworkSpec parallel_network(int n, double eps);

struct ExponentialStep {
    int target = -1;  // i', or -1 when every queue has reached its threshold
    RateSet rates;
    InjectionEvent injection;
    RateVector witness;  // rate vector the witness uses (one active edge)
};

/// i' = min{i : q_i < (1 - eps) 2^i}. For i' = 0 offers r_0 = 1 and injects
/// 1 - eps into queue 0; otherwise offers r_{i'-1} = 1 - eps or
/// r_{i'} = (1 - eps)/2 (one at a time) and injects (1 - eps)^2 / 2 into queue i'.
ExponentialStep exponential_adversary_step(Slot t, const QueueMatrix& q, int n, double eps, PacketId next_id);

class ExponentialAdversary : public Adversary {
public:
    ExponentialAdversary(int n, double eps);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;
    std::string halt_reason() const override { return "every queue reached (1-eps)2^i"; }
    bool provides_witness() const override { return true; }

    const NetworkSpec& spec() const { return spec_; }

private:
    int n_;
    double eps_;
    NetworkSpec spec_;
    PacketId next_id_ = 0;
};

struct TrafficPair {
    NodeId source = 0;
    NodeId destination = 0;
};

/// One fluid event per pair with positive size; packet ids are taken from `next_id`.
std::vector<InjectionEvent> pair_injections(Slot t, const std::vector<TrafficPair>& pairs,
                                            const std::vector<double>& sizes, PacketId& next_id);

/// Fixed matching caps and a fixed per-slot injection vector.
class FixedAdversary : public Adversary {
public:
    FixedAdversary(RateSet rates, std::vector<TrafficPair> pairs, std::vector<double> sizes);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;

private:
    RateSet rates_;
    std::vector<TrafficPair> pairs_;
    std::vector<double> sizes_;
    PacketId next_id_ = 0;
};

/// Arrival constants and vectors shared by the two cyclic experiments.
struct CyclicConfig {
    std::array<std::vector<double>, 3> caps;    // r^(1..3), one cap per directed edge
    std::array<std::vector<double>, 3> gammas;  // gamma^(1..3), one rate per pair
    std::array<std::array<double, 3>, 3> c{};   // c[i][j] pairs r^(i+1) with gamma^(j+1)
    std::vector<TrafficPair> pairs;
    std::uint64_t seed = 1;
};

/// Edge rates fixed at r^(i); in phase p the arrival vector is
/// c[i][jbar] * gamma^(jbar) with jbar = (p - 1) mod 3.
class CyclicArrivalAdversary : public Adversary {
public:
    CyclicArrivalAdversary(CyclicConfig cfg, int rate_index);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;

private:
    CyclicConfig cfg_;
    int rate_index_;
    PacketId next_id_ = 0;
};

/// Edge rates r^(ibar) with ibar = (p - 1) mod 3; the arrival vector index j
/// is drawn per phase from (seed, p), and the load is c[ibar][j] * gamma^(j).
class CyclicEdgeArrivalAdversary : public Adversary {
public:
    explicit CyclicEdgeArrivalAdversary(CyclicConfig cfg);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;

    /// (rate index, gamma index) used during phase p, both 0-based.
    std::pair<int, int> phase_choice(int phase) const;

private:
    CyclicConfig cfg_;
    PacketId next_id_ = 0;
};

struct IidArrival {
    TrafficPair pair;
    double probability = 0.0;
    double size = 0.0;
};

/// Each slot draws a rate set from `options` with the given probabilities and
/// independently injects each pair's packet with its probability.
class IidAdversary : public Adversary {
public:
    IidAdversary(std::vector<RateSet> options, std::vector<double> weights, std::vector<IidArrival> arrivals,
                 std::uint64_t seed);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;

private:
    std::vector<RateSet> options_;
    std::vector<double> cumulative_;
    std::vector<IidArrival> arrivals_;
    Rng rng_;
    PacketId next_id_ = 0;
};

/// Replays a prepared slot sequence, then halts.
class ScriptedAdversary : public Adversary {
public:
    explicit ScriptedAdversary(std::vector<SlotInput> script, bool with_witness = false);

    std::optional<SlotInput> step(Slot t, const QueueMatrix& q) override;
    std::string halt_reason() const override { return "script exhausted"; }
    bool provides_witness() const override { return with_witness_; }

private:
    std::vector<SlotInput> script_;
    bool with_witness_;
};

}  // namespace mwsim
