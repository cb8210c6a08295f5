#include "doctest.h"

#include <queue>
#include <set>

#include "mwsim/experiments.hpp"

using namespace mwsim;

namespace {

bool connected_under(const NetworkSpec& s, const std::vector<double>& caps)
{
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(s.node_count));
    for (EdgeId e = 0; e < s.edge_count(); ++e)
        if (caps[e] > 0.0) {
            adj[s.edges[e].tail].push_back(s.edges[e].head);
            adj[s.edges[e].head].push_back(s.edges[e].tail);
        }
    std::vector<bool> seen(static_cast<std::size_t>(s.node_count), false);
    std::queue<int> todo;
    todo.push(0);
    seen[0] = true;
    int count = 1;
    while (!todo.empty()) {
        const int v = todo.front();
        todo.pop();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                todo.push(w);
            }
    }
    return count == s.node_count;
}

}  // namespace

TEST_CASE("3x4 grid")
{
    const NetworkSpec g = grid_network(3, 4);
    CHECK(g.node_count == 12);
    CHECK(g.edge_count() == 34);
    for (int u = 0; u < 17; ++u) {
        CHECK(g.edges[2 * u].tail == g.edges[2 * u + 1].head);
        CHECK(g.edges[2 * u].head == g.edges[2 * u + 1].tail);
        CHECK(g.edges[2 * u].tail < g.edges[2 * u].head);
    }
}

TEST_CASE("generated grid experiment")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 44u}) {
        CAPTURE(seed);
        GridSetup setup;
        setup.seed = seed;
        const GridExperiment g = make_grid_experiment(setup);
        std::set<std::pair<int, int>> pairs;
        for (const auto& p : g.pairs) {
            CHECK(p.source != p.destination);
            pairs.insert({p.source, p.destination});
        }
        CHECK(pairs.size() == 10);
        for (int i = 0; i < 3; ++i) {
            const auto& caps = g.caps[i];
            CHECK(g.removed[i].size() == 3);
            for (int u : g.removed[i]) {
                CHECK(caps[2 * u] == 0.0);
                CHECK(caps[2 * u + 1] == 0.0);
            }
            int zeros = 0;
            for (double c : caps) {
                if (c == 0.0)
                    ++zeros;
                else
                    CHECK((c >= 0.5 && c <= 2.0));
            }
            CHECK(zeros == 6);
            CHECK(connected_under(g.spec, caps));
            for (double x : g.gammas[i]) CHECK((x >= 0.5 && x <= 2.0));
            CHECK(g.gammas[i].size() == 10);
        }
        const GridExperiment again = make_grid_experiment(setup);
        CHECK(again.caps == g.caps);
        CHECK(again.gammas == g.gammas);
    }
}

TEST_CASE("witness scenarios respect their limits")
{
    const ScenarioLimits lim;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto sc = make_witness_scenario(seed, lim);
        CHECK(sc.spec.node_count >= lim.min_nodes);
        CHECK(sc.spec.node_count <= lim.max_nodes);
        CHECK(sc.params.omega <= lim.max_omega);
        CHECK(sc.params.eps >= lim.eps_lo);
        CHECK(sc.params.eps <= lim.eps_hi);
        CHECK_NOTHROW(sc.spec.validate());
    }
}

TEST_CASE("probe on one edge finds a load near the cap")
{
    NetworkSpec s;
    s.node_count = 2;
    s.edges = {{0, 1}};
    s.destinations = {1};
    const RateSet rs = MatchingFamily{{1.0}};
    const std::vector<TrafficPair> pairs{{0, 1}};
    ProbeSettings ps;
    ps.horizon = 4000;
    ps.tol = 0.01;
    const auto lp = probe_load(s, rs, pairs, {1.0}, ps);
    CHECK(lp.search.c >= 0.95);
    CHECK(lp.search.c <= 1.0);
    CHECK(lp.above.verdict == Verdict::unstable);
    CHECK(lp.at_c.verdict == Verdict::stable);
    CHECK_THROWS_AS(probe_load(s, rs, pairs, {0.0}, ps), ModelError);
}
