#include "mwsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mwsim {

SimulationTrace run(const NetworkSpec& spec, Adversary& adversary, const RunOptions& opts)
{
    return run(spec, adversary, opts, SlotObserver{});
}

SimulationTrace run(const NetworkSpec& spec, Adversary& adversary, const RunOptions& opts, const SlotObserver& observe)
{
    if (opts.horizon < 1) throw ModelError("horizon must be at least 1");
    if (opts.record_stride < 1) throw ModelError("record stride must be at least 1");
    spec.validate();
    opts.approx.validate();
    if (opts.audit && !adversary.provides_witness())
        throw ModelError("auditing needs a witness-backed adversary");

    Rng rng(opts.seed);
    SimulationTrace trace;
    QueueMatrix q(spec);
    const bool approx = opts.approx.mode != ApproxMode::exact;

    for (Slot t = 0; t < opts.horizon; ++t) {
        std::optional<SlotInput> in = adversary.step(t, q);
        if (!in) {
            trace.halted = true;
            trace.halt_reason = adversary.halt_reason();
            break;
        }

        ScheduleDecision dec = approx ? max_weight_approx(q, spec, in->rates, opts.approx, rng)
                                      : max_weight_exact(q, spec, in->rates);

        AuditSlot* log = nullptr;
        if (opts.audit) {
            trace.audit.push_back(AuditSlot{});
            log = &trace.audit.back();
            log->slot = t;
            log->before = q;
            log->rates = in->rates;
            log->decision = dec;
            log->exact_objective = approx ? max_weight_exact(q, spec, in->rates).objective : dec.objective;
        }

        double delivered = apply_decision(q, spec, dec);
        if (log) {
            log->after_service = q;
            for (const auto& ev : in->injections) {
                const auto d = spec.dest_index(ev.destination);
                const double h = (d && ev.node != ev.destination) ? q(ev.node, *d) : 0.0;
                log->injections.push_back({ev, h});
                delivered += apply_injections(q, spec, std::span<const InjectionEvent>(&ev, 1));
            }
            if (in->witness_rates) trace.witness.rate_vectors[t] = *in->witness_rates;
            trace.witness.moves.insert(trace.witness.moves.end(), in->witness_moves.begin(), in->witness_moves.end());
            trace.injections.insert(trace.injections.end(), in->injections.begin(), in->injections.end());
        } else {
            delivered += apply_injections(q, spec, in->injections);
        }

        const double qmax = q.max();
        trace.peak_queue = std::max(trace.peak_queue, qmax);
        trace.slots_run = t + 1;
        if (t % opts.record_stride == 0) {
            trace.records.push_back(SlotRecord{t, qmax, potential(q, spec.beta), q.total(), dec.objective, delivered});
        }
        if (opts.snapshot_every > 0 && t % opts.snapshot_every == 0 && opts.snapshot_capacity > 0) {
            trace.snapshots.push_back(Snapshot{t, q, potential(q, spec.beta)});
            if (trace.snapshots.size() > opts.snapshot_capacity) trace.snapshots.pop_front();
        }
        if (observe) observe(t, q);
    }
    trace.final_queues = std::move(q);
    return trace;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::stable:
        return "stable";
    case Verdict::unstable:
        return "unstable";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

StabilityVerdict stability_verdict(const SimulationTrace& trace, double slope_threshold, double plateau_factor)
{
    StabilityVerdict v;
    const auto& rec = trace.records;
    if (rec.empty()) return v;

    const std::size_t half = rec.size() / 2;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        v.max_queue_overall = std::max(v.max_queue_overall, rec[i].max_queue);
        if (i < half)
            v.first_half_max = std::max(v.first_half_max, rec[i].max_queue);
        else
            v.last_half_max = std::max(v.last_half_max, rec[i].max_queue);
    }

    // Least-squares slope of max_queue against slot over the last half.
    const std::size_t n = rec.size() - half;
    if (n >= 2) {
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t i = half; i < rec.size(); ++i) {
            mx += static_cast<double>(rec[i].slot);
            my += rec[i].max_queue;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = half; i < rec.size(); ++i) {
            const double dx = static_cast<double>(rec[i].slot) - mx;
            sxy += dx * (rec[i].max_queue - my);
            sxx += dx * dx;
        }
        v.tail_slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }

    if (v.tail_slope > slope_threshold)
        v.verdict = Verdict::unstable;
    else if (v.last_half_max <= plateau_factor * v.first_half_max)
        v.verdict = Verdict::stable;
    else
        v.verdict = Verdict::inconclusive;
    return v;
}

ProbeResult binary_search_c(const std::function<Verdict(double)>& verdict_at, double tol, double initial_hi,
                            double max_hi)
{
    if (!(tol > 0.0)) throw ModelError("probe resolution must be positive");
    ProbeResult out;
    auto eval = [&](std::int64_t k) {
        auto it = out.observed.find(k);
        if (it != out.observed.end()) return it->second;
        const Verdict v = verdict_at(static_cast<double>(k) * tol);
        ++out.evaluations;
        out.observed.emplace(k, v);
        return v;
    };

    std::int64_t lo = 0;
    std::int64_t hi = std::max<std::int64_t>(1, std::llround(initial_hi / tol));
    const auto limit = std::llround(max_hi / tol);
    while (eval(hi) == Verdict::stable) {
        lo = hi;
        hi *= 2;
        if (hi > limit) {
            std::ostringstream os;
            os << "load still stable at c = " << static_cast<double>(lo) * tol << "; no unstable upper bracket";
            throw ModelError(os.str());
        }
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (eval(mid) == Verdict::stable)
            lo = mid;
        else
            hi = mid;
    }

    // Spot checks below the answer; a non-stable verdict there shows up as
    // a non-monotone observation.
    for (const std::int64_t k : {lo / 2, 3 * lo / 4})
        if (k > 0) eval(k);

    out.c = static_cast<double>(lo) * tol;
    out.at_c = lo == 0 ? Verdict::stable : out.observed.at(lo);
    out.above_c = out.observed.at(hi);

    std::optional<std::int64_t> first_bad;
    for (const auto& [k, v] : out.observed) {
        if (v != Verdict::stable && !first_bad) first_bad = k;
        if (v == Verdict::stable && first_bad) {
            std::ostringstream os;
            os << "stable at c = " << static_cast<double>(k) * tol << " above non-stable c = "
               << static_cast<double>(*first_bad) * tol;
            out.non_monotone.push_back(os.str());
        }
    }
    return out;
}

DriftResult drift_diagnostic(const SimulationTrace& trace, double threshold_q)
{
    DriftResult r;
    const auto& rec = trace.records;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
        if (rec[i + 1].slot != rec[i].slot + 1) throw ModelError("drift diagnostic needs record stride 1");
        if (rec[i].max_queue < threshold_q) continue;
        sum += rec[i + 1].potential - rec[i].potential;
        ++r.samples;
    }
    r.flagged = r.samples == 0;
    r.mean_drift = r.samples ? sum / static_cast<double>(r.samples) : 0.0;
    return r;
}

}  // namespace mwsim
