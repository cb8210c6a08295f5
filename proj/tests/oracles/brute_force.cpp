#include "brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace oracle {

double best_matching_weight(int vertex_count, const std::vector<mwsim::WeightedEdge>& edges)
{
    std::vector<bool> used(static_cast<std::size_t>(vertex_count), false);
    double best = 0.0;
    std::function<void(std::size_t, double)> go = [&](std::size_t i, double acc) {
        best = std::max(best, acc);
        for (std::size_t j = i; j < edges.size(); ++j) {
            const auto& e = edges[j];
            if (used[e.u] || used[e.v]) continue;
            used[e.u] = used[e.v] = true;
            go(j + 1, acc + e.weight);
            used[e.u] = used[e.v] = false;
        }
    };
    go(0, 0.0);
    return best;
}

double matching_weight(const std::vector<int>& mate, const std::vector<mwsim::WeightedEdge>& edges)
{
    for (std::size_t v = 0; v < mate.size(); ++v) {
        const int m = mate[v];
        if (m == -1) continue;
        if (m < 0 || m >= static_cast<int>(mate.size()) || mate[m] != static_cast<int>(v)) return -1.0;
    }
    double total = 0.0;
    for (std::size_t v = 0; v < mate.size(); ++v) {
        const int m = mate[v];
        if (m <= static_cast<int>(v)) continue;
        double w = -1.0;
        for (const auto& e : edges)
            if ((e.u == static_cast<int>(v) && e.v == m) || (e.v == static_cast<int>(v) && e.u == m)) w = std::max(w, e.weight);
        if (w < 0.0) return -1.0;
        total += w;
    }
    return total;
}

namespace {

// Best contribution of one directed edge at rate r, written directly from
// the protocol's definition: pick a commodity flowing downhill and move
// min{r, gap/2}.
double edge_best(const mwsim::QueueMatrix& q, const mwsim::NetworkSpec& spec, int e, double r)
{
    double best = 0.0;
    const auto& edge = spec.edges[e];
    for (int d = 0; d < spec.dest_count(); ++d) {
        const double a = q(edge.tail, d);
        const double b = q(edge.head, d);
        if (a < b) continue;
        const double moved = std::min(r, std::abs(a - b) / 2.0);
        best = std::max(best, moved * (std::pow(a, spec.beta) - std::pow(b, spec.beta)));
    }
    return best;
}

}  // namespace

double best_objective(const mwsim::QueueMatrix& q, const mwsim::NetworkSpec& spec, const mwsim::RateSet& rs)
{
    double best = 0.0;
    if (const auto* ev = std::get_if<mwsim::ExplicitVectors>(&rs)) {
        for (const auto& r : ev->vectors) {
            double total = 0.0;
            for (int e = 0; e < spec.edge_count(); ++e) total += edge_best(q, spec, e, r[e]);
            best = std::max(best, total);
        }
        return best;
    }
    const auto& caps = std::get<mwsim::MatchingFamily>(rs).caps;
    std::vector<bool> busy(static_cast<std::size_t>(spec.node_count), false);
    std::function<void(int, double)> go = [&](int from, double acc) {
        best = std::max(best, acc);
        for (int e = from; e < spec.edge_count(); ++e) {
            if (caps[e] <= 0.0) continue;
            const auto& edge = spec.edges[e];
            if (busy[edge.tail] || busy[edge.head]) continue;
            busy[edge.tail] = busy[edge.head] = true;
            go(e + 1, acc + edge_best(q, spec, e, caps[e]));
            busy[edge.tail] = busy[edge.head] = false;
        }
    };
    go(0, 0.0);
    return best;
}

}  // namespace oracle
