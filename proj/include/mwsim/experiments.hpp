#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mwsim/adversaries.hpp"
#include "mwsim/engine.hpp"
#include "mwsim/net_model.hpp"

namespace mwsim {

/// rows x cols grid, node id r*cols + c. Undirected edge u (horizontal ones
/// first, then vertical) becomes directed edges 2u = (a, b) and 2u+1 = (b, a)
/// with a < b.
NetworkSpec grid_network(int rows, int cols);

struct GridSetup {
    int rows = 3;
    int cols = 4;
    int pairs = 10;
    int removed_per_vector = 3;
    double cap_lo = 0.5;
    double cap_hi = 2.0;
    double gamma_lo = 0.5;
    double gamma_hi = 2.0;
    std::uint64_t seed = 1;
};

struct GridExperiment {
    NetworkSpec spec;              // destinations are the distinct pair destinations
    std::array<std::vector<double>, 3> caps;    // r^(1..3)
    std::array<std::vector<double>, 3> gammas;  // gamma^(1..3)
    std::array<std::vector<int>, 3> removed;    // undirected edges removed from each r^(i)
    std::vector<TrafficPair> pairs;
};

/// Random instance: each r^(i) drops `removed_per_vector` undirected edges
/// (both directions), redrawn until the rest stays connected, and draws every
/// other directed cap from U[cap_lo, cap_hi]. Pairs are distinct ordered
/// (source, destination) node pairs; gamma entries are U[gamma_lo, gamma_hi].
GridExperiment make_grid_experiment(const GridSetup& setup);

/// Cyclic config carrying the experiment's vectors and the constants c.
CyclicConfig cyclic_config(const GridExperiment& g, const std::array<std::array<double, 3>, 3>& c,
                           std::uint64_t seed);

struct ProbeSettings {
    Slot horizon = 100'000;
    double tol = 0.001;
    double initial_hi = 1.0;
    double max_hi = 1024.0;
    double check_offset = 0.01;  // second look above the returned c
    double slope_threshold = kDefaultSlopeThreshold;
    double plateau_factor = kDefaultPlateauFactor;
    ApproxParams approx;
    std::uint64_t seed = 1;
    int jobs = 0;  // 0: one per hardware thread
};

/// Run of fixed caps with per-slot injections c * gamma.
SimulationTrace run_fixed_load(const NetworkSpec& spec, const RateSet& rates, const std::vector<TrafficPair>& pairs,
                               const std::vector<double>& gamma, double c, const ProbeSettings& s,
                               Slot record_stride = 1);

StabilityVerdict fixed_load_verdict(const NetworkSpec& spec, const RateSet& rates,
                                    const std::vector<TrafficPair>& pairs, const std::vector<double>& gamma, double c,
                                    const ProbeSettings& s);

struct LoadProbe {
    ProbeResult search;
    StabilityVerdict at_c;
    StabilityVerdict above;  // at c + check_offset
};

/// Binary search for the largest stable c, plus verdicts at c and at
/// c + check_offset. Throws ModelError for an all-zero gamma.
LoadProbe probe_load(const NetworkSpec& spec, const RateSet& rates, const std::vector<TrafficPair>& pairs,
                     const std::vector<double>& gamma, const ProbeSettings& s);

using ProbeTable = std::array<std::array<LoadProbe, 3>, 3>;

/// probe_load for every (r^(i), gamma^(j)), spread over s.jobs threads.
ProbeTable probe_grid(const GridExperiment& g, const ProbeSettings& s);

std::array<std::array<double, 3>, 3> c_values(const ProbeTable& t);

struct ScenarioLimits {
    int min_nodes = 2;
    int max_nodes = 4;
    int max_omega = 3;
    int min_windows = 4;
    int max_windows = 6;
    int max_packets_per_window = 3;
    double eps_lo = 0.1;
    double eps_hi = 0.5;
    double size_lo = 0.2;
    double size_hi = 0.6;
};

/// Small witness-backed instance: a random connected graph with both edge
/// directions, per-slot matching caps U[1, 2], and packets routed by the
/// witness along shortest paths, one hop per slot starting at injection.
/// Each slot's witness edges form a matching at full cap and carry at most
/// (1 - eps) of it, so the script is compliant by construction.
struct WitnessScenario {
    NetworkSpec spec;
    AdversaryParams params;
    std::vector<SlotInput> script;
};

WitnessScenario make_witness_scenario(std::uint64_t seed, const ScenarioLimits& limits = {});

}  // namespace mwsim
