#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwsim/adversaries.hpp"
#include "mwsim/net_model.hpp"
#include "mwsim/scheduler.hpp"
#include "mwsim/witness.hpp"

namespace mwsim {

struct RunOptions {
    Slot horizon = 1000;
    std::uint64_t seed = 1;
    bool audit = false;
    Slot record_stride = 1;
    Slot snapshot_every = 1000;
    std::size_t snapshot_capacity = 64;
    ApproxParams approx;
};

/// End-of-slot summary. `potential`, `max_queue` and `backlog` describe the
/// queues after service and injection.
struct SlotRecord {
    Slot slot = 0;
    double max_queue = 0.0;
    double potential = 0.0;
    double backlog = 0.0;
    double objective = 0.0;
    double delivered = 0.0;
};

struct Snapshot {
    Slot slot = 0;
    QueueMatrix queues;
    double potential = 0.0;
};

struct InjectionAtHeight {
    InjectionEvent event;
    double height = 0.0;  // q_{node,d} just before this event was added
};

/// Everything the auditor needs about one slot.
struct AuditSlot {
    Slot slot = 0;
    QueueMatrix before;
    RateSet rates;
    ScheduleDecision decision;
    double exact_objective = 0.0;
    QueueMatrix after_service;
    std::vector<InjectionAtHeight> injections;
};

struct SimulationTrace {
    std::vector<SlotRecord> records;
    std::deque<Snapshot> snapshots;
    double peak_queue = 0.0;
    Slot slots_run = 0;
    bool halted = false;
    std::string halt_reason;
    QueueMatrix final_queues;

    std::vector<AuditSlot> audit;
    WitnessSchedule witness;
    std::vector<InjectionEvent> injections;
};

/// Slot loop: adversary input, scheduling on the queues at the start of the
/// slot, service, injection, absorption, logging.
SimulationTrace run(const NetworkSpec& spec, Adversary& adversary, const RunOptions& opts);

/// Observer called after every slot with the end-of-slot queues.
using SlotObserver = std::function<void(Slot, const QueueMatrix&)>;
SimulationTrace run(const NetworkSpec& spec, Adversary& adversary, const RunOptions& opts, const SlotObserver& observe);

enum class Verdict { stable, unstable, inconclusive };

std::string to_string(Verdict v);

struct StabilityVerdict {
    Verdict verdict = Verdict::inconclusive;
    double max_queue_overall = 0.0;
    double tail_slope = 0.0;
    double first_half_max = 0.0;
    double last_half_max = 0.0;
};

inline constexpr double kDefaultSlopeThreshold = 1e-4;
inline constexpr double kDefaultPlateauFactor = 1.5;

/// Unstable when the least-squares slope of the max queue over the last half
/// exceeds `slope_threshold`; otherwise stable when the last half's max stays
/// within `plateau_factor` times the first half's; otherwise inconclusive.
StabilityVerdict stability_verdict(const SimulationTrace& trace, double slope_threshold = kDefaultSlopeThreshold,
                                   double plateau_factor = kDefaultPlateauFactor);

struct ProbeResult {
    double c = 0.0;
    Verdict at_c = Verdict::stable;
    Verdict above_c = Verdict::unstable;
    int evaluations = 0;
    std::vector<std::string> non_monotone;
    std::map<std::int64_t, Verdict> observed;  // grid index k -> verdict at k * tol
};

/// Largest c on the grid {k * tol} whose load is judged stable, assuming the
/// verdict is monotone in c. The bracket starts at [0, initial_hi] and
/// doubles its upper end while that end is still stable, up to `max_hi`.
/// The loads at c/2 and 3c/4 are also evaluated; every stable verdict seen
/// above a non-stable one is listed in `non_monotone`.
ProbeResult binary_search_c(const std::function<Verdict(double)>& verdict_at, double tol = 0.001,
                            double initial_hi = 1.0, double max_hi = 1024.0);

struct DriftResult {
    double mean_drift = 0.0;
    std::size_t samples = 0;
    bool flagged = false;  // no slot met the threshold
};

/// Mean of P(t+1) - P(t) over consecutive records whose earlier max queue is
/// at least `threshold_q`. Requires record stride 1.
DriftResult drift_diagnostic(const SimulationTrace& trace, double threshold_q);

}  // namespace mwsim
