#include "mwsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mwsim/matching.hpp"

namespace mwsim {

EdgeWeight edge_weight(const QueueMatrix& q, const NetworkSpec& spec, EdgeId e, double rate)
{
    EdgeWeight best;
    if (rate <= 0.0) return best;
    const Edge& edge = spec.edges[e];
    for (int d = 0; d < spec.dest_count(); ++d) {
        const double qv = q(edge.tail, d);
        const double qu = q(edge.head, d);
        if (qv <= qu) continue;
        const double s = std::min(rate, (qv - qu) / 2.0);
        const double w = s * (queue_power(qv, spec.beta) - queue_power(qu, spec.beta));
        if (w > best.weight) {
            best.weight = w;
            best.transfer = s;
            best.dest = d;
        }
    }
    return best;
}

namespace {

struct Candidate {
    double objective = 0.0;
    std::vector<EdgeId> active;
};

bool tied(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// True when `c` should replace `best` under max-objective, then
// lexicographically smallest active edge list.
bool better(const Candidate& c, const Candidate& best)
{
    if (tied(c.objective, best.objective))
        return std::lexicographical_compare(c.active.begin(), c.active.end(), best.active.begin(), best.active.end());
    return c.objective > best.objective;
}

ScheduleDecision decision_from(const QueueMatrix& q, const NetworkSpec& spec, const RateVector& r)
{
    ScheduleDecision dec = ScheduleDecision::idle(spec.edge_count());
    dec.rates = r;
    for (EdgeId e = 0; e < spec.edge_count(); ++e) {
        const EdgeWeight w = edge_weight(q, spec, e, r[e]);
        if (w.weight <= 0.0) continue;
        dec.dest[e] = *w.dest;
        dec.transfer[e] = w.transfer;
        dec.objective += w.weight;
    }
    return dec;
}

ScheduleDecision best_of(const QueueMatrix& q, const NetworkSpec& spec, const std::vector<RateVector>& vectors)
{
    Candidate best;
    const RateVector* chosen = nullptr;
    for (const auto& r : vectors) {
        Candidate c;
        for (EdgeId e = 0; e < spec.edge_count(); ++e) {
            const double w = edge_weight(q, spec, e, r[e]).weight;
            if (w <= 0.0) continue;
            c.objective += w;
            c.active.push_back(e);
        }
        if (chosen == nullptr || better(c, best)) {
            best = std::move(c);
            chosen = &r;
        }
    }
    if (chosen == nullptr || best.objective <= 0.0) return ScheduleDecision::idle(spec.edge_count());
    return decision_from(q, spec, *chosen);
}

ScheduleDecision matching_decision(const QueueMatrix& q, const NetworkSpec& spec, const MatchingFamily& mf)
{
    const int k = spec.edge_count();
    std::vector<double> w(static_cast<std::size_t>(k), 0.0);
    for (EdgeId e = 0; e < k; ++e) w[e] = edge_weight(q, spec, e, mf.caps[e]).weight;

    // Each unordered node pair keeps its heavier direction (lower index on ties).
    std::map<std::pair<NodeId, NodeId>, EdgeId> pick;
    for (EdgeId e = 0; e < k; ++e) {
        if (w[e] <= 0.0) continue;
        const Edge& edge = spec.edges[e];
        const auto key = std::minmax(edge.tail, edge.head);
        auto [it, inserted] = pick.emplace(key, e);
        if (!inserted && w[e] > w[it->second]) it->second = e;
    }
    std::vector<WeightedEdge> graph;
    std::vector<EdgeId> owner;
    graph.reserve(pick.size());
    for (const auto& [key, e] : pick) {
        graph.push_back({key.first, key.second, w[e]});
        owner.push_back(e);
    }
    const auto mate = max_weight_matching(spec.node_count, graph);

    RateVector r(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < graph.size(); ++i)
        if (mate[graph[i].u] == graph[i].v) r[owner[i]] = mf.caps[owner[i]];
    ScheduleDecision dec = decision_from(q, spec, r);
    if (dec.objective <= 0.0) return ScheduleDecision::idle(k);
    return dec;
}

int usable_pairs(const NetworkSpec& spec, const MatchingFamily& mf)
{
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (EdgeId e = 0; e < spec.edge_count(); ++e)
        if (mf.caps[e] > 0.0) pairs.push_back(std::minmax(spec.edges[e].tail, spec.edges[e].head));
    std::sort(pairs.begin(), pairs.end());
    return static_cast<int>(std::unique(pairs.begin(), pairs.end()) - pairs.begin());
}

}  // namespace

ScheduleDecision max_weight_exact(const QueueMatrix& q, const NetworkSpec& spec, const RateSet& rs)
{
    if (const auto* ev = std::get_if<ExplicitVectors>(&rs)) return best_of(q, spec, ev->vectors);

    const auto& mf = std::get<MatchingFamily>(rs);
    if (usable_pairs(spec, mf) <= kEnumerateMatchingEdges) {
        // Empty matching first, then lexicographic: tie-breaking falls out of best_of.
        return best_of(q, spec, enumerate_rate_vectors(rs, spec, std::size_t{1} << 20));
    }
    return matching_decision(q, spec, mf);
}

void ApproxParams::validate() const
{
    if (!(eps_hat >= 0.0 && eps_hat < 1.0)) throw ModelError("eps_hat must lie in [0, 1)");
    if ((eps_hat == 0.0) != (mode == ApproxMode::exact))
        throw ModelError("eps_hat = 0 exactly when the scheduler mode is exact");
}

ScheduleDecision max_weight_approx(const QueueMatrix& q, const NetworkSpec& spec, const RateSet& rs,
                                   const ApproxParams& ap, Rng& rng)
{
    ScheduleDecision dec = max_weight_exact(q, spec, rs);
    if (ap.mode == ApproxMode::exact || ap.eps_hat == 0.0 || dec.objective <= 0.0) return dec;

    std::vector<EdgeId> active;
    for (EdgeId e = 0; e < spec.edge_count(); ++e)
        if (dec.transfer[e] > 0.0) active.push_back(e);
    const EdgeId e = active[uniform_index(rng, active.size())];

    const Edge& edge = spec.edges[e];
    const int d = dec.dest[e];
    const double diff = queue_power(q(edge.tail, d), spec.beta) - queue_power(q(edge.head, d), spec.beta);
    const double w = dec.transfer[e] * diff;
    const double loss = std::min(w, ap.eps_hat * dec.objective) * (1.0 - 1e-12);
    const double s = dec.transfer[e] * (w - loss) / w;

    dec.transfer[e] = s;
    dec.rates[e] = s;
    if (s <= 0.0) {
        dec.transfer[e] = 0.0;
        dec.rates[e] = 0.0;
        dec.dest[e] = -1;
    }
    dec.objective = decision_objective(q, spec, dec);
    return dec;
}

}  // namespace mwsim
