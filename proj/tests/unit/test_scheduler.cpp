#include "doctest.h"

#include <random>

#include "brute_force.hpp"
#include "random_instances.hpp"
#include "mwsim/scheduler.hpp"

using namespace mwsim;
using oracle::random_network;
using oracle::random_queues;

namespace {

NetworkSpec single_edge()
{
    NetworkSpec s;
    s.node_count = 2;
    s.edges = {{0, 1}};
    s.destinations = {1};
    return s;
}

}  // namespace

TEST_CASE("edge_weight examples")
{
    NetworkSpec s = single_edge();
    QueueMatrix q(s);
    q.at(0, 0) = 4;
    auto w = edge_weight(q, s, 0, 1.0);
    CHECK(w.transfer == 1.0);
    CHECK(w.weight == 4.0);
    CHECK(w.dest == 0);

    q.at(0, 0) = 1;
    w = edge_weight(q, s, 0, 1.0);
    CHECK(w.transfer == 0.5);
    CHECK(w.weight == 0.5);

    QueueMatrix flat(3, 1);
    NetworkSpec t;
    t.node_count = 3;
    t.edges = {{0, 1}};
    t.destinations = {2};
    flat.at(0, 0) = 2;
    flat.at(1, 0) = 2;
    w = edge_weight(flat, t, 0, 1.0);
    CHECK(w.weight == 0.0);
    CHECK(w.transfer == 0.0);
    CHECK_FALSE(w.dest.has_value());
}

TEST_CASE("edge_weight picks the product argmax, ties to lowest index")
{
    NetworkSpec s;
    s.node_count = 4;
    s.edges = {{0, 1}};
    s.destinations = {2, 3};
    QueueMatrix q(s);
    q.at(0, 0) = 3;
    q.at(0, 1) = 3;
    auto w = edge_weight(q, s, 0, 1.0);
    CHECK(w.dest == 0);
    q.at(0, 1) = 5;
    w = edge_weight(q, s, 0, 1.0);
    CHECK(w.dest == 1);
    CHECK(w.weight == 5.0);
}

TEST_CASE("max_weight_exact examples")
{
    NetworkSpec s = single_edge();
    QueueMatrix q(s);
    q.at(0, 0) = 4;
    auto dec = max_weight_exact(q, s, ExplicitVectors{{{1.0}}});
    CHECK(dec.transfer[0] == 1.0);
    CHECK(dec.objective == 4.0);

    // Two edges sharing node 1; only one may be active.
    NetworkSpec p;
    p.node_count = 3;
    p.edges = {{0, 1}, {2, 1}};
    p.destinations = {1};
    QueueMatrix r(p);
    r.at(0, 0) = 4;
    r.at(2, 0) = 3;
    dec = max_weight_exact(r, p, MatchingFamily{{1.0, 1.0}});
    CHECK(dec.objective == 4.0);
    CHECK(dec.transfer[0] == 1.0);
    CHECK(dec.transfer[1] == 0.0);

    dec = max_weight_exact(QueueMatrix(p), p, MatchingFamily{{1.0, 1.0}});
    CHECK(dec.objective == 0.0);
    for (double x : dec.transfer) CHECK(x == 0.0);
    for (double x : dec.rates) CHECK(x == 0.0);

    dec = max_weight_exact(r, p, ExplicitVectors{});
    CHECK(dec.objective == 0.0);
}

TEST_CASE("ties prefer the lexicographically smallest edge set")
{
    NetworkSpec p;
    p.node_count = 3;
    p.edges = {{0, 1}, {2, 1}};
    p.destinations = {1};
    QueueMatrix r(p);
    r.at(0, 0) = 4;
    r.at(2, 0) = 4;
    auto dec = max_weight_exact(r, p, MatchingFamily{{1.0, 1.0}});
    CHECK(dec.transfer[0] == 1.0);
    CHECK(dec.transfer[1] == 0.0);
    dec = max_weight_exact(r, p, ExplicitVectors{{{0.0, 1.0}, {1.0, 0.0}}});
    CHECK(dec.transfer[0] == 1.0);
}

TEST_CASE("exact objective matches brute force")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        NetworkSpec s = random_network(rng, 7, trial % 3 == 0 ? 12 : 8);
        const QueueMatrix q = random_queues(s, rng, trial % 2 == 0);
        RateSet rs;
        if (trial % 4 == 1)
            rs = oracle::random_vectors(s, rng, 19);
        else
            rs = oracle::random_matching_caps(s, rng);
        const auto dec = max_weight_exact(q, s, rs);
        INFO("trial " << trial);
        CHECK(dec.objective == doctest::Approx(oracle::best_objective(q, s, rs)).epsilon(1e-9));
        CHECK(dec.objective == doctest::Approx(decision_objective(q, s, dec)).epsilon(1e-12));
        CHECK(rate_set_contains(rs, s, dec.rates));
        for (std::size_t e = 0; e < dec.transfer.size(); ++e) CHECK(dec.transfer[e] <= dec.rates[e] + 1e-12);
    }
}

TEST_CASE("exact decisions never raise potential")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        NetworkSpec s = random_network(rng, 6, 10);
        QueueMatrix q = random_queues(s, rng, false);
        for (int t = 0; t < 50; ++t) {
            RateVector caps(s.edges.size());
            for (auto& x : caps) x = oracle::random_cap(rng);
            const double before = potential(q, s.beta);
            apply_decision(q, s, max_weight_exact(q, s, MatchingFamily{caps}));
            REQUIRE(potential(q, s.beta) <= before + 1e-9);
        }
    }
}

TEST_CASE("approx params validation")
{
    CHECK_NOTHROW(ApproxParams{0.0, ApproxMode::exact}.validate());
    CHECK_THROWS(ApproxParams{0.1, ApproxMode::exact}.validate());
    CHECK_THROWS(ApproxParams{0.0, ApproxMode::synthetic_degrade}.validate());
    CHECK_THROWS(ApproxParams{1.0, ApproxMode::synthetic_degrade}.validate());
}

TEST_CASE("approx examples")
{
    NetworkSpec s = single_edge();
    QueueMatrix q(s);
    q.at(0, 0) = 4;
    Rng rng(1);
    const RateSet rs = ExplicitVectors{{{1.0}}};
    auto dec = max_weight_approx(q, s, rs, ApproxParams{}, rng);
    CHECK(dec.objective == 4.0);

    dec = max_weight_approx(q, s, rs, ApproxParams{0.5, ApproxMode::synthetic_degrade}, rng);
    CHECK(dec.objective >= 2.0);
    CHECK(dec.objective <= 4.0);
    CHECK(decision_objective(q, s, dec) == doctest::Approx(dec.objective));
    CHECK(dec.transfer[0] == doctest::Approx(dec.objective / 4.0));
}

TEST_CASE("approx contract on random instances")
{
    std::mt19937_64 gen(21);
    Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        NetworkSpec s = random_network(gen, 6, 10);
        const QueueMatrix q = random_queues(s, gen, false);
        RateVector caps(s.edges.size());
        for (auto& x : caps) x = oracle::random_cap(gen);
        const RateSet rs = MatchingFamily{caps};
        const double eps_hat = 0.01 + 0.9 * static_cast<double>(gen() % 1000) / 1000.0;
        const auto exact = max_weight_exact(q, s, rs);
        const auto dec = max_weight_approx(q, s, rs, ApproxParams{eps_hat, ApproxMode::synthetic_degrade}, rng);
        CHECK(dec.objective >= (1.0 - eps_hat) * exact.objective - 1e-12);
        CHECK(dec.objective <= exact.objective + 1e-12);
        CHECK(rate_set_contains(rs, s, dec.rates));
        QueueMatrix after = q;
        CHECK_NOTHROW(apply_decision(after, s, dec));
    }
}

TEST_CASE("several links out of one node can overdraw it")
{
    // Star: the centre holds 2 and four leaves hold 0. Each link alone would
    // move min{1, 2/2} = 1, so the rule asks for 4 units out of 2.
    NetworkSpec s;
    s.node_count = 6;
    for (int leaf = 1; leaf <= 4; ++leaf) s.edges.push_back({0, leaf});
    s.destinations = {5};
    QueueMatrix q(s);
    q.at(0, 0) = 2.0;
    const RateSet rs = ExplicitVectors{{{1.0, 1.0, 1.0, 1.0}}};
    const auto dec = max_weight_exact(q, s, rs);
    CHECK(dec.objective == doctest::Approx(8.0));
    QueueMatrix after = q;
    CHECK_THROWS_AS(apply_decision(after, s, dec), ModelError);
}
