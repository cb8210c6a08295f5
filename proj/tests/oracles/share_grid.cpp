#include "share_grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

using namespace mwsim;

namespace {

double diff(const ShareInstance& inst, EdgeId e, int d)
{
    const Edge& ed = inst.spec.edges[static_cast<std::size_t>(e)];
    return inst.before(ed.tail, d) - inst.before(ed.head, d);
}

double witness_weight(const ShareInstance& inst, EdgeId e)
{
    const double r = inst.witness[static_cast<std::size_t>(e)];
    double best = 0.0;
    for (int d = 0; d < inst.spec.dest_count(); ++d) {
        const double dl = diff(inst, e, d);
        if (dl > 0.0) best = std::max(best, std::min(r, dl / 2.0) * dl);
    }
    return best;
}

ShareInstance base(int nodes, std::vector<Edge> edges, std::vector<NodeId> dests, std::vector<std::vector<double>> q)
{
    ShareInstance inst;
    inst.spec.node_count = nodes;
    inst.spec.edges = std::move(edges);
    inst.spec.destinations = std::move(dests);
    inst.before = QueueMatrix(inst.spec);
    for (int v = 0; v < nodes; ++v)
        for (int d = 0; d < inst.spec.dest_count(); ++d) inst.before.at(v, d) = q[static_cast<std::size_t>(v)][static_cast<std::size_t>(d)];
    return inst;
}

void decide(ShareInstance& inst, const RateSet& rs) { inst.decision = max_weight_exact(inst.before, inst.spec, rs); }

}  // namespace

SlotContext ShareInstance::context() const
{
    return SlotContext{0, &before, &decision, &witness, decision.objective, eps_hat};
}

std::vector<double> share_targets(const ShareInstance& inst)
{
    const int k = inst.spec.edge_count();
    std::vector<double> k_plus(static_cast<std::size_t>(k), 0.0);
    for (const auto& dm : inst.demands)
        for (const auto& [e, a] : dm.rates) k_plus[e] += a * std::max(0.0, diff(inst, e, dm.dest));
    std::vector<double> out;
    for (const auto& dm : inst.demands) {
        double t = 0.0;
        for (const auto& [e, a] : dm.rates) {
            const double c = a * std::max(0.0, diff(inst, e, dm.dest));
            if (c > 0.0) t += c * std::min(1.0, witness_weight(inst, e) / k_plus[e]);
        }
        out.push_back((1.0 - inst.eps_hat) * t);
    }
    return out;
}

bool share_grid_feasible(const ShareInstance& inst, const std::vector<double>& targets, double resolution)
{
    std::vector<EdgeId> active;
    std::vector<double> delta;
    std::vector<double> cap;
    for (EdgeId e = 0; e < inst.spec.edge_count(); ++e) {
        const int d = inst.decision.dest[e];
        const double s = inst.decision.transfer[e];
        if (d < 0 || s <= 0.0 || diff(inst, e, d) <= 0.0) continue;
        active.push_back(e);
        delta.push_back(diff(inst, e, d));
        cap.push_back(s);
    }
    const std::size_t n = targets.size();
    const std::size_t m = active.size();
    if (m == 0) return std::all_of(targets.begin(), targets.end(), [&](double t) { return t <= resolution; });

    std::vector<double> residual = cap;
    // Packet i, free edge j (all edges except the last are free).
    std::function<bool(std::size_t, std::size_t, double)> search = [&](std::size_t i, std::size_t j, double left) -> bool {
        if (i == n) return true;
        if (j + 1 == m) {
            const double x = left / delta[j];
            const double tol = resolution * std::max(1.0, cap[j]);
            if (x < -tol || x > residual[j] + tol) return false;
            const double taken = std::clamp(x, 0.0, residual[j]);
            residual[j] -= taken;
            const bool ok = search(i + 1, 0, i + 1 < n ? targets[i + 1] : 0.0);
            residual[j] += taken;
            return ok;
        }
        const double step = resolution * cap[j];
        const int steps = static_cast<int>(std::floor(residual[j] / step + 1e-9));
        for (int s = 0; s <= steps; ++s) {
            const double x = s * step;
            if (x * delta[j] > left + resolution * std::max(1.0, left)) break;
            residual[j] -= x;
            const bool ok = search(i, j + 1, left - x * delta[j]);
            residual[j] += x;
            if (ok) return true;
        }
        return false;
    };
    return search(0, 0, n ? targets[0] : 0.0);
}

std::vector<ShareInstance> hand_share_instances()
{
    std::vector<ShareInstance> out;

    {  // path, one transmitting edge, two packets
        ShareInstance a = base(3, {{0, 1}, {1, 2}}, {2}, {{3.0}, {1.0}, {0.0}});
        const RateSet rs = MatchingFamily{{1.0, 1.0}};
        decide(a, rs);
        a.witness = {1.0, 0.0};
        a.demands = {{1, 0, {{0, 0.6}}}, {2, 0, {{0, 0.3}}}};
        out.push_back(std::move(a));
    }
    {  // two edges into one sink, the second clamped by the witness weight
        ShareInstance a = base(3, {{0, 2}, {1, 2}}, {2}, {{2.0}, {1.0}, {0.0}});
        const RateSet rs = ExplicitVectors{{{1.0, 1.0}}};
        decide(a, rs);
        a.witness = {1.0, 1.0};
        a.demands = {{1, 0, {{0, 0.5}, {1, 0.4}}}, {2, 0, {{1, 0.2}}}};
        out.push_back(std::move(a));
    }
    {  // same slot with approximation slack
        ShareInstance a = out.back();
        a.eps_hat = 0.05;
        out.push_back(std::move(a));
    }
    {  // two destinations, packets of both commodities
        ShareInstance a = base(4, {{0, 1}, {1, 2}, {0, 3}}, {2, 3}, {{4.0, 3.0}, {1.0, 2.5}, {0.0, 1.0}, {2.0, 0.0}});
        const RateSet rs = ExplicitVectors{{{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}};
        decide(a, rs);
        a.witness = {1.0, 0.0, 1.0};
        a.demands = {{1, 0, {{0, 0.7}}}, {2, 1, {{2, 0.8}}}};
        out.push_back(std::move(a));
    }
    {  // three packets sharing two edges
        ShareInstance a = base(4, {{0, 3}, {1, 3}, {2, 3}}, {3}, {{2.5}, {2.0}, {0.4}, {0.0}});
        const RateSet rs = ExplicitVectors{{{1.0, 1.0, 0.0}, {0.0, 1.0, 1.0}}};
        decide(a, rs);
        a.witness = {1.0, 1.0, 0.0};
        a.demands = {{1, 0, {{0, 0.3}, {1, 0.3}}}, {2, 0, {{0, 0.4}}}, {3, 0, {{1, 0.5}}}};
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace oracle
