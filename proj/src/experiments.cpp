#include "mwsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <set>
#include <thread>

#include "mwsim/rng.hpp"

namespace mwsim {

NetworkSpec grid_network(int rows, int cols)
{
    if (rows < 1 || cols < 1 || rows * cols < 2) throw ModelError("grid needs at least two nodes");
    NetworkSpec spec;
    spec.node_count = rows * cols;
    auto add = [&](NodeId a, NodeId b) {
        spec.edges.push_back({a, b});
        spec.edges.push_back({b, a});
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c) add(r * cols + c, r * cols + c + 1);
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c < cols; ++c) add(r * cols + c, (r + 1) * cols + c);
    return spec;
}

namespace {

bool connected_without(const NetworkSpec& spec, const std::vector<int>& removed)
{
    std::vector<int> parent(static_cast<std::size_t>(spec.node_count));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = spec.node_count;
    const int undirected = spec.edge_count() / 2;
    for (int u = 0; u < undirected; ++u) {
        if (std::find(removed.begin(), removed.end(), u) != removed.end()) continue;
        const int a = find(spec.edges[2 * u].tail);
        const int b = find(spec.edges[2 * u].head);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

}  // namespace

GridExperiment make_grid_experiment(const GridSetup& setup)
{
    GridExperiment g;
    g.spec = grid_network(setup.rows, setup.cols);
    g.spec.r_min = setup.cap_lo;
    g.spec.r_max = setup.cap_hi;
    Rng rng(setup.seed);

    const int undirected = g.spec.edge_count() / 2;
    if (setup.removed_per_vector < 0 || setup.removed_per_vector >= undirected)
        throw ModelError("cannot remove that many grid edges");
    for (int i = 0; i < 3; ++i) {
        std::vector<int> removed;
        do {
            removed.clear();
            while (static_cast<int>(removed.size()) < setup.removed_per_vector) {
                const int u = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(undirected)));
                if (std::find(removed.begin(), removed.end(), u) == removed.end()) removed.push_back(u);
            }
        } while (!connected_without(g.spec, removed));
        std::sort(removed.begin(), removed.end());
        g.caps[i].assign(static_cast<std::size_t>(g.spec.edge_count()), 0.0);
        for (int e = 0; e < g.spec.edge_count(); ++e) {
            const double cap = uniform(rng, setup.cap_lo, setup.cap_hi);
            if (!std::binary_search(removed.begin(), removed.end(), e / 2)) g.caps[i][e] = cap;
        }
        g.removed[i] = removed;
    }

    const int n = g.spec.node_count;
    if (setup.pairs < 1 || setup.pairs > n * (n - 1)) throw ModelError("invalid number of traffic pairs");
    std::set<std::pair<int, int>> seen;
    while (static_cast<int>(g.pairs.size()) < setup.pairs) {
        const int s = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        const int d = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        if (s == d || !seen.insert({s, d}).second) continue;
        g.pairs.push_back({s, d});
    }
    std::set<int> dests;
    for (const auto& p : g.pairs) dests.insert(p.destination);
    g.spec.destinations.assign(dests.begin(), dests.end());

    for (int j = 0; j < 3; ++j) {
        g.gammas[j].resize(g.pairs.size());
        for (auto& x : g.gammas[j]) x = uniform(rng, setup.gamma_lo, setup.gamma_hi);
    }
    g.spec.validate();
    return g;
}

CyclicConfig cyclic_config(const GridExperiment& g, const std::array<std::array<double, 3>, 3>& c, std::uint64_t seed)
{
    CyclicConfig cfg;
    cfg.caps = g.caps;
    cfg.gammas = g.gammas;
    cfg.c = c;
    cfg.pairs = g.pairs;
    cfg.seed = seed;
    return cfg;
}

SimulationTrace run_fixed_load(const NetworkSpec& spec, const RateSet& rates, const std::vector<TrafficPair>& pairs,
                               const std::vector<double>& gamma, double c, const ProbeSettings& s, Slot record_stride)
{
    std::vector<double> sizes = gamma;
    for (auto& x : sizes) x *= c;
    FixedAdversary adv(rates, pairs, sizes);
    RunOptions o;
    o.horizon = s.horizon;
    o.seed = s.seed;
    o.approx = s.approx;
    o.record_stride = record_stride;
    return run(spec, adv, o);
}

StabilityVerdict fixed_load_verdict(const NetworkSpec& spec, const RateSet& rates,
                                    const std::vector<TrafficPair>& pairs, const std::vector<double>& gamma, double c,
                                    const ProbeSettings& s)
{
    return stability_verdict(run_fixed_load(spec, rates, pairs, gamma, c, s), s.slope_threshold, s.plateau_factor);
}

LoadProbe probe_load(const NetworkSpec& spec, const RateSet& rates, const std::vector<TrafficPair>& pairs,
                     const std::vector<double>& gamma, const ProbeSettings& s)
{
    if (std::none_of(gamma.begin(), gamma.end(), [](double x) { return x > 0.0; }))
        throw ModelError("arrival vector is zero; there is no load to scale");
    LoadProbe out;
    std::map<double, StabilityVerdict> seen;
    auto verdict = [&](double c) {
        auto it = seen.find(c);
        if (it == seen.end()) it = seen.emplace(c, fixed_load_verdict(spec, rates, pairs, gamma, c, s)).first;
        return it->second;
    };
    out.search = binary_search_c([&](double c) { return verdict(c).verdict; }, s.tol, s.initial_hi, s.max_hi);
    out.at_c = verdict(out.search.c);
    out.above = verdict(out.search.c + s.check_offset);
    return out;
}

ProbeTable probe_grid(const GridExperiment& g, const ProbeSettings& s)
{
    ProbeTable table;
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int k = next++; k < 9; k = next++) {
            const int i = k / 3;
            const int j = k % 3;
            try {
                table[i][j] = probe_load(g.spec, MatchingFamily{g.caps[i]}, g.pairs, g.gammas[j], s);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int jobs = std::clamp(s.jobs > 0 ? s.jobs : static_cast<int>(std::thread::hardware_concurrency()), 1, 9);
    std::vector<std::thread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return table;
}

std::array<std::array<double, 3>, 3> c_values(const ProbeTable& t)
{
    std::array<std::array<double, 3>, 3> c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[i][j] = t[i][j].search.c;
    return c;
}

namespace {

std::vector<EdgeId> shortest_path(const NetworkSpec& spec, NodeId from, NodeId to)
{
    std::vector<EdgeId> via(static_cast<std::size_t>(spec.node_count), -1);
    std::vector<bool> seen(static_cast<std::size_t>(spec.node_count), false);
    std::queue<NodeId> frontier;
    frontier.push(from);
    seen[from] = true;
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop();
        for (EdgeId e = 0; e < spec.edge_count(); ++e) {
            const Edge& edge = spec.edges[e];
            if (edge.tail != v || seen[edge.head]) continue;
            seen[edge.head] = true;
            via[edge.head] = e;
            frontier.push(edge.head);
        }
    }
    std::vector<EdgeId> path;
    for (NodeId v = to; v != from; v = spec.edges[via[v]].tail) {
        if (via[v] < 0) return {};
        path.push_back(via[v]);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool share_node(const Edge& a, const Edge& b)
{
    return a.tail == b.tail || a.tail == b.head || a.head == b.tail || a.head == b.head;
}

}  // namespace

WitnessScenario make_witness_scenario(std::uint64_t seed, const ScenarioLimits& limits)
{
    Rng rng(mix64(seed));
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1))); };

    WitnessScenario sc;
    NetworkSpec& spec = sc.spec;
    spec.node_count = pick(limits.min_nodes, limits.max_nodes);
    std::set<std::pair<int, int>> pairs;
    for (int v = 1; v < spec.node_count; ++v) pairs.insert({pick(0, v - 1), v});
    for (int a = 0; a < spec.node_count; ++a)
        for (int b = a + 1; b < spec.node_count; ++b)
            if (uniform01(rng) < 0.4) pairs.insert({a, b});
    for (const auto& [a, b] : pairs) {
        spec.edges.push_back({a, b});
        spec.edges.push_back({b, a});
    }
    const int dest_count = std::min(pick(1, 2), spec.node_count - 1);
    std::vector<int> nodes(static_cast<std::size_t>(spec.node_count));
    std::iota(nodes.begin(), nodes.end(), 0);
    for (int i = 0; i < dest_count; ++i) {
        std::swap(nodes[i], nodes[static_cast<std::size_t>(pick(i, spec.node_count - 1))]);
        spec.destinations.push_back(nodes[i]);
    }
    std::sort(spec.destinations.begin(), spec.destinations.end());
    spec.beta = 1.0;
    spec.r_min = 1.0;
    spec.r_max = 2.0;

    sc.params.omega = pick(1, limits.max_omega);
    sc.params.eps = uniform(rng, limits.eps_lo, limits.eps_hi);
    const int omega = sc.params.omega;
    const int windows = pick(limits.min_windows, limits.max_windows);
    const auto horizon = static_cast<std::size_t>(windows * omega);
    const auto k = static_cast<std::size_t>(spec.edge_count());

    std::vector<std::vector<double>> caps(horizon, std::vector<double>(k));
    for (auto& row : caps)
        for (auto& c : row) c = uniform(rng, 1.0, 2.0);
    std::vector<std::map<EdgeId, double>> load(horizon);

    sc.script.resize(horizon);
    PacketId next_id = 0;
    for (int j = 0; j + 1 < windows; ++j) {
        const int count = pick(0, limits.max_packets_per_window);
        for (int p = 0; p < count; ++p) {
            const auto tp = static_cast<std::size_t>(j * omega + pick(0, omega - 1));
            const NodeId dst = spec.destinations[static_cast<std::size_t>(pick(0, dest_count - 1))];
            NodeId src = pick(0, spec.node_count - 1);
            if (src == dst) src = (src + 1) % spec.node_count;
            const auto path = shortest_path(spec, src, dst);
            if (path.empty() || static_cast<int>(path.size()) > omega || tp + path.size() > horizon) continue;
            const double ell = uniform(rng, limits.size_lo, limits.size_hi);

            bool fits = true;
            for (std::size_t h = 0; h < path.size() && fits; ++h) {
                const std::size_t t = tp + h;
                const EdgeId e = path[h];
                for (const auto& [other, used] : load[t])
                    if (other != e && share_node(spec.edges[other], spec.edges[e])) fits = false;
                const double used = load[t].count(e) ? load[t][e] : 0.0;
                if (used + ell > (1.0 - sc.params.eps) * caps[t][e]) fits = false;
            }
            if (!fits) continue;

            const PacketId id = next_id++;
            sc.script[tp].injections.push_back(InjectionEvent{id, static_cast<Slot>(tp), src, dst, ell});
            for (std::size_t h = 0; h < path.size(); ++h) {
                load[tp + h][path[h]] += ell;
                sc.script[tp + h].witness_moves.push_back(WitnessMove{id, path[h], static_cast<Slot>(tp + h), ell});
            }
        }
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        sc.script[t].rates = MatchingFamily{caps[t]};
        RateVector r(k, 0.0);
        for (const auto& [e, used] : load[t]) r[e] = caps[t][e];
        sc.script[t].witness_rates = std::move(r);
    }
    spec.validate();
    return sc;
}

}  // namespace mwsim
