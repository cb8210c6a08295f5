#include "mwsim/auditor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mwsim {

double RateShareAllocation::total(PacketId p, EdgeId e) const
{
    double s = 0.0;
    for (const auto& sh : shares)
        if (sh.packet == p && sh.edge == e) s += sh.amount;
    return s;
}

namespace {

bool over(double lhs, double rhs) { return lhs > rhs + kTolerance * std::max(1.0, std::abs(rhs)); }

bool injection_order(const InjectionEvent& a, const InjectionEvent& b)
{
    return a.slot != b.slot ? a.slot < b.slot : a.packet_id < b.packet_id;
}

RateShareAllocation water_fill(const NetworkSpec& spec, const std::map<Slot, RateVector>& rate_vectors,
                               const std::vector<const WitnessMove*>& moves, std::vector<InjectionEvent> packets,
                               const AdversaryParams& ap, Slot window)
{
    RateShareAllocation alloc;
    alloc.window = window;
    const Slot first = window * ap.omega;
    const auto w = static_cast<std::size_t>(ap.omega);
    const auto k = static_cast<std::size_t>(spec.edge_count());

    std::vector<double> residual(w * k, 0.0);
    for (std::size_t i = 0; i < w; ++i) {
        auto it = rate_vectors.find(first + static_cast<Slot>(i));
        if (it == rate_vectors.end()) continue;
        for (std::size_t e = 0; e < k; ++e) residual[i * k + e] = it->second[e];
    }

    std::map<std::pair<PacketId, EdgeId>, double> load;
    for (const WitnessMove* m : moves) load[{m->packet, m->edge}] += m->amount;

    std::sort(packets.begin(), packets.end(), injection_order);
    for (const auto& p : packets) {
        for (auto it = load.lower_bound({p.packet_id, 0}); it != load.end() && it->first.first == p.packet_id; ++it) {
            const EdgeId e = it->first.second;
            double need = it->second / (1.0 - ap.eps);
            const double wanted = need;
            for (std::size_t i = 0; i < w && need > 0.0; ++i) {
                double& r = residual[i * k + static_cast<std::size_t>(e)];
                const double take = std::min(r, need);
                if (take <= 0.0) continue;
                r -= take;
                need -= take;
                alloc.shares.push_back(RateShare{p.packet_id, e, first + static_cast<Slot>(i), take});
            }
            if (need > kTolerance * std::max(1.0, wanted)) {
                std::ostringstream os;
                os << "water-filling infeasible on edge " << e << " in window " << window << ": packet "
                   << p.packet_id << " lacks " << need << " of rate";
                throw AuditError(os.str());
            }
        }
    }
    return alloc;
}

double differential(const QueueMatrix& q, const NetworkSpec& spec, EdgeId e, int d)
{
    const Edge& edge = spec.edges[e];
    return queue_power(q(edge.tail, d), spec.beta) - queue_power(q(edge.head, d), spec.beta);
}

}  // namespace

RateShareAllocation water_fill_shares(const NetworkSpec& spec, const WitnessSchedule& ws,
                                      std::span<const InjectionEvent> events, const AdversaryParams& ap, Slot window)
{
    ap.validate();
    std::vector<InjectionEvent> packets;
    std::set<PacketId> ids;
    for (const auto& ev : events) {
        const Slot j = ap.window_of(ev.slot);
        if (j == window || j == window - 1) {
            packets.push_back(ev);
            ids.insert(ev.packet_id);
        }
    }
    std::vector<const WitnessMove*> moves;
    for (const auto& m : ws.moves)
        if (ap.window_of(m.slot) == window && ids.count(m.packet)) moves.push_back(&m);
    return water_fill(spec, ws.rate_vectors, moves, std::move(packets), ap, window);
}

SlotAssignment assign_slot_shares(const NetworkSpec& spec, const SlotContext& ctx, std::span<const PacketDemand> demands)
{
    const int k = spec.edge_count();
    const QueueMatrix& q = *ctx.before;
    const ScheduleDecision& dec = *ctx.decision;

    SlotAssignment out;
    out.slot = ctx.slot;
    out.k_plus.assign(static_cast<std::size_t>(k), 0.0);
    out.k_hat.assign(static_cast<std::size_t>(k), 0.0);
    out.w_witness.assign(static_cast<std::size_t>(k), 0.0);

    // Witness-weighted totals per edge, positive differentials only.
    std::vector<std::vector<double>> contrib(demands.size());
    for (std::size_t i = 0; i < demands.size(); ++i) {
        contrib[i].assign(static_cast<std::size_t>(k), 0.0);
        for (const auto& [e, amount] : demands[i].rates) {
            const double c = amount * std::max(0.0, differential(q, spec, e, demands[i].dest));
            contrib[i][e] += c;
            out.k_plus[e] += c;
        }
    }
    for (EdgeId e = 0; e < k; ++e) {
        const double r = ctx.witness_rates ? (*ctx.witness_rates)[e] : 0.0;
        out.w_witness[e] = edge_weight(q, spec, e, r).weight;
        out.k_hat[e] = std::min(out.k_plus[e], out.w_witness[e]);
        if (out.k_hat[e] < out.k_plus[e]) ++out.clamped_edges;
        out.sum_k_plus += out.k_plus[e];
        out.sum_w_witness += out.w_witness[e];
    }

    const double keep = 1.0 - ctx.eps_hat;
    std::vector<double> k_res(demands.size(), 0.0);
    for (std::size_t i = 0; i < demands.size(); ++i) {
        for (EdgeId e = 0; e < k; ++e) {
            if (out.k_plus[e] <= 0.0 || contrib[i][e] <= 0.0) continue;
            k_res[i] += keep * contrib[i][e] * (out.k_hat[e] / out.k_plus[e]);
        }
        out.sum_k += k_res[i];
    }

    out.objective = decision_objective(q, spec, dec);
    out.exact_objective = ctx.exact_objective;
    double j_res = out.objective;
    double min_res = 0.0;

    for (EdgeId e = 0; e < k; ++e) {
        const double s = dec.transfer[e];
        const int d = dec.dest[e];
        if (s <= 0.0 || d < 0) continue;
        const double delta = differential(q, spec, e, d);
        if (delta <= 0.0) continue;
        double s_res = s;
        for (std::size_t i = 0; i < demands.size(); ++i) {
            const double share = std::min({j_res / delta, s_res, k_res[i] / delta});
            if (share <= 0.0) continue;
            j_res -= share * delta;
            s_res -= share;
            k_res[i] -= share * delta;
            min_res = std::min({min_res, j_res, s_res, k_res[i]});
            out.shares.push_back(GammaShare{demands[i].packet, e, d, ctx.slot, share, delta});
            out.weighted_shares += share * delta;
        }
    }
    out.min_residual = min_res;
    if (min_res < -1e-9) {
        std::ostringstream os;
        os << "residual fell to " << min_res << " at slot " << ctx.slot;
        throw AuditError(os.str());
    }
    return out;
}

double explicit_c(int omega, int max_links, double r_max, int node_count)
{
    return static_cast<double>(omega) * max_links * r_max * 2.0 * node_count * r_max * omega;
}

double q_star(double eps, double ell, double c) { return (4.0 - 2.0 * eps) / ((2.0 * eps + eps * eps) * ell) * (c + 1.0); }

double small_link_transfer_bound(std::span<const double> gaps)
{
    double sum = 0.0;
    for (double g : gaps) sum += g;
    return static_cast<double>(gaps.size()) / 2.0 * sum * sum;
}

ChainRun run_small_link_chain(std::span<const double> heights, double rate, double stop, Slot max_slots)
{
    const int m = static_cast<int>(heights.size());
    if (m < 2) throw ModelError("a chain needs at least two queues");
    NetworkSpec spec;
    spec.node_count = m + 1;  // node m is the unreachable destination
    for (int v = 0; v + 1 < m; ++v) {
        spec.edges.push_back({v, v + 1});
        spec.edges.push_back({v + 1, v});
    }
    spec.destinations = {m};
    spec.r_min = rate;
    spec.r_max = rate;
    const RateSet rs = MatchingFamily{RateVector(spec.edges.size(), rate)};

    QueueMatrix q(spec);
    for (int v = 0; v < m; ++v) q.at(v, 0) = heights[static_cast<std::size_t>(v)];
    const double start = potential(q, 1.0);
    ChainRun out;
    for (; out.slots < max_slots; ++out.slots) {
        const ScheduleDecision dec = max_weight_exact(q, spec, rs);
        if (dec.objective < stop) {
            out.quiescent = true;
            break;
        }
        for (double s : dec.transfer) out.mass += s;
        apply_decision(q, spec, dec);
    }
    out.potential_drop = start - potential(q, 1.0);
    return out;
}

PacketClass classify_bad_packet(double delta, double ell, double q, double eps, double c)
{
    const double threshold = -(eps / (1.0 - eps / 2.0)) * ell * q + c + 1.0;
    return delta >= threshold ? PacketClass::bad : PacketClass::good;
}

double per_packet_potential_delta(const InjectionEvent& p, std::span<const GammaShare> gamma, double height,
                                  double beta, bool at_destination)
{
    if (at_destination) return 0.0;
    const double increase = queue_power(height + p.size, beta + 1.0) - queue_power(height, beta + 1.0);
    double credit = 0.0;
    for (const auto& g : gamma) credit += g.amount * g.differential;
    return increase - (beta + 1.0) * credit;
}

AuditReport audit_trace(const NetworkSpec& spec, const SimulationTrace& trace, const AdversaryParams& ap,
                        const AuditOptions& opts)
{
    ap.validate();
    if (opts.eps_hat < 0.0 || opts.eps_hat >= ap.eps) throw AuditError("eps_hat must lie in [0, eps)");

    AuditReport report;
    report.params = ap;
    report.eps_effective = opts.eps_hat > 0.0 ? (ap.eps - opts.eps_hat) / (1.0 - opts.eps_hat) : ap.eps;

    std::map<Slot, RateSet> rates;
    for (const auto& a : trace.audit) rates.emplace(a.slot, a.rates);
    report.compliance = check_witness_compliance(spec, trace.witness, trace.injections, rates, ap);
    if (!report.compliance.ok) {
        report.notes.push_back("witness not compliant: " + report.compliance.first_violation);
        return report;
    }

    std::unordered_map<PacketId, std::set<EdgeId>> links;
    for (const auto& m : trace.witness.moves) links[m.packet].insert(m.edge);
    for (const auto& [p, es] : links) report.max_links = std::max(report.max_links, static_cast<int>(es.size()));
    report.c = opts.c_override ? *opts.c_override
                               : explicit_c(ap.omega, std::max(report.max_links, 1), spec.r_max, spec.node_count);

    const Slot horizon = static_cast<Slot>(trace.audit.size());
    const Slot windows = horizon / ap.omega;
    for (Slot t = 0; t < horizon; ++t)
        if (trace.audit[t].slot != t) throw AuditError("audit log is not contiguous from slot 0");

    std::map<Slot, std::vector<const WitnessMove*>> moves_by_window;
    for (const auto& m : trace.witness.moves) moves_by_window[ap.window_of(m.slot)].push_back(&m);
    std::map<Slot, std::vector<InjectionEvent>> events_by_window;
    for (const auto& ev : trace.injections) events_by_window[ap.window_of(ev.slot)].push_back(ev);

    std::unordered_map<PacketId, std::vector<GammaShare>> gamma;
    std::unordered_map<PacketId, int> dest_of;
    for (const auto& ev : trace.injections) dest_of[ev.packet_id] = spec.dest_index(ev.destination).value_or(-1);

    const std::vector<const WitnessMove*> no_moves;
    for (Slot j = 0; j < windows; ++j) {
        std::vector<InjectionEvent> packets;
        for (Slot jj : {j - 1, j}) {
            auto it = events_by_window.find(jj);
            if (it != events_by_window.end()) packets.insert(packets.end(), it->second.begin(), it->second.end());
        }
        auto mit = moves_by_window.find(j);
        const auto alloc = water_fill(spec, trace.witness.rate_vectors, mit == moves_by_window.end() ? no_moves : mit->second,
                                      packets, ap, j);

        std::map<Slot, std::map<std::pair<Slot, PacketId>, PacketDemand>> per_slot;
        std::unordered_map<PacketId, Slot> injected_at;
        for (const auto& p : packets) injected_at[p.packet_id] = p.slot;
        for (const auto& sh : alloc.shares) {
            auto& d = per_slot[sh.slot][{injected_at[sh.packet], sh.packet}];
            d.packet = sh.packet;
            d.dest = dest_of[sh.packet];
            d.rates.emplace_back(sh.edge, sh.amount);
        }

        for (Slot t = j * ap.omega; t < (j + 1) * ap.omega; ++t) {
            const AuditSlot& log = trace.audit[t];
            std::vector<PacketDemand> demands;
            if (auto it = per_slot.find(t); it != per_slot.end())
                for (auto& [key, d] : it->second) demands.push_back(std::move(d));
            auto wit = trace.witness.rate_vectors.find(t);
            SlotContext ctx{t, &log.before, &log.decision,
                            wit == trace.witness.rate_vectors.end() ? nullptr : &wit->second, log.exact_objective,
                            opts.eps_hat};
            SlotAssignment sa = assign_slot_shares(spec, ctx, demands);

            std::vector<double> used(static_cast<std::size_t>(spec.edge_count()), 0.0);
            bool def2 = true;
            for (const auto& g : sa.shares) {
                if (g.amount < 0.0) def2 = false;
                used[g.edge] += g.amount;
                gamma[g.packet].push_back(g);
            }
            for (EdgeId e = 0; e < spec.edge_count(); ++e)
                if (over(used[e], log.decision.transfer[e])) def2 = false;
            if (!def2) ++report.share_violations;

            if (std::abs(sa.weighted_shares - sa.sum_k) > 1e-9 * std::max(1.0, sa.sum_k)) {
                ++report.equality_violations;
                std::ostringstream os;
                os << "slot " << t << ": weighted shares " << sa.weighted_shares << " != K total " << sa.sum_k;
                report.notes.push_back(os.str());
            }
            double k_hat_total = 0.0;
            for (double x : sa.k_hat) k_hat_total += x;
            if (over(k_hat_total, sa.sum_w_witness) || over(sa.sum_w_witness, sa.exact_objective)) {
                ++report.domination_violations;
                std::ostringstream os;
                os << "slot " << t << ": K " << k_hat_total << ", witness weight " << sa.sum_w_witness
                   << ", Max-Weight objective " << sa.exact_objective;
                report.notes.push_back(os.str());
            }
            report.slots.push_back(std::move(sa));
        }
    }

    const Slot audited_end = windows * ap.omega;  // first slot past the audited windows
    const double eps = report.eps_effective;
    for (const auto& a : trace.audit) {
        for (const auto& inj : a.injections) {
            const InjectionEvent& ev = inj.event;
            if (ev.slot + ap.omega - 1 >= audited_end) continue;
            PacketAudit pa;
            pa.event = ev;
            pa.height = inj.height;
            const auto it = gamma.find(ev.packet_id);
            const std::span<const GammaShare> g =
                it == gamma.end() ? std::span<const GammaShare>{} : std::span<const GammaShare>(it->second);
            for (const auto& s : g) pa.credit += s.amount * s.differential;
            const bool at_dest = ev.node == ev.destination;
            pa.delta = per_packet_potential_delta(ev, g, pa.height, spec.beta, at_dest);
            if (spec.beta == 1.0) {
                pa.bound_checked = true;
                pa.bound = -(eps / (1.0 - eps / 2.0)) * ev.size * 2.0 * pa.height + report.c;
                pa.within_bound = at_dest || pa.delta <= pa.bound + 1e-9 * std::max(1.0, std::abs(pa.bound));
                if (!pa.within_bound) ++report.bound_violations;
            } else {
                pa.bound = std::numeric_limits<double>::quiet_NaN();
            }
            pa.cls = at_dest ? PacketClass::good : classify_bad_packet(pa.delta, ev.size, pa.height, eps, report.c);
            if (pa.cls == PacketClass::bad) ++report.bad_packets;
            report.packets.push_back(pa);
        }
    }
    if (spec.beta != 1.0) report.notes.push_back("per-packet bound checked only for beta = 1");
    return report;
}

}  // namespace mwsim
