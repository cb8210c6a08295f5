#include "doctest.h"

#include <random>

#include "mwsim/net_model.hpp"

using namespace mwsim;

namespace {

NetworkSpec line(int nodes, NodeId dest)
{
    NetworkSpec s;
    s.node_count = nodes;
    for (int v = 0; v + 1 < nodes; ++v) s.edges.push_back({v, v + 1});
    s.destinations = {dest};
    return s;
}

ScheduleDecision one_transfer(const NetworkSpec& s, EdgeId e, int d, double amount)
{
    auto dec = ScheduleDecision::idle(s.edge_count());
    dec.rates[e] = amount;
    dec.dest[e] = d;
    dec.transfer[e] = amount;
    return dec;
}

}  // namespace

TEST_CASE("spec validation")
{
    NetworkSpec s = line(3, 2);
    CHECK_NOTHROW(s.validate());
    s.edges.push_back({1, 1});
    CHECK_THROWS_AS(s.validate(), ModelError);
    s = line(3, 2);
    s.edges.push_back({0, 1});
    CHECK_THROWS_AS(s.validate(), ModelError);
    s = line(3, 5);
    CHECK_THROWS_AS(s.validate(), ModelError);
    s = line(3, 2);
    s.r_min = 0.0;
    CHECK_THROWS_AS(s.validate(), ModelError);
    s.r_min = 2.0;
    s.r_max = 1.0;
    CHECK_THROWS_AS(s.validate(), ModelError);
}

TEST_CASE("potential")
{
    QueueMatrix q(2, 1);
    CHECK(potential(q, 1.0) == 0.0);
    q.at(0, 0) = 3;
    q.at(1, 0) = 4;
    CHECK(potential(q, 1.0) == 25.0);
    QueueMatrix r(1, 1);
    r.at(0, 0) = 2;
    CHECK(potential(r, 2.0) == doctest::Approx(8.0));
}

TEST_CASE("potential is invariant under relabeling")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        QueueMatrix q(5, 3), p(5, 3);
        std::vector<int> perm_v{0, 1, 2, 3, 4}, perm_d{0, 1, 2};
        std::shuffle(perm_v.begin(), perm_v.end(), rng);
        std::shuffle(perm_d.begin(), perm_d.end(), rng);
        for (int v = 0; v < 5; ++v)
            for (int d = 0; d < 3; ++d) {
                q.at(v, d) = static_cast<double>(rng() % 1000) / 37.0;
                p.at(perm_v[v], perm_d[d]) = q(v, d);
            }
        for (double beta : {0.5, 1.0, 2.0}) CHECK(potential(q, beta) == doctest::Approx(potential(p, beta)).epsilon(1e-12));
    }
}

TEST_CASE("apply_decision moves and absorbs")
{
    NetworkSpec s = line(3, 2);
    QueueMatrix q(s);
    q.at(0, 0) = 4;
    CHECK(apply_decision(q, s, one_transfer(s, 0, 0, 1.0)) == 0.0);
    CHECK(q(0, 0) == 3.0);
    CHECK(q(1, 0) == 1.0);

    CHECK(apply_decision(q, s, one_transfer(s, 1, 0, 0.5)) == 0.5);
    CHECK(q(1, 0) == 0.5);
    CHECK(q(2, 0) == 0.0);
}

TEST_CASE("apply_decision rejects overdraft")
{
    NetworkSpec s = line(2, 1);
    QueueMatrix q(s);
    q.at(0, 0) = 0.5;
    CHECK_THROWS_AS(apply_decision(q, s, one_transfer(s, 0, 0, 1.0)), ModelError);
}

TEST_CASE("simultaneous disjoint transfers match sequential application")
{
    NetworkSpec s;
    s.node_count = 4;
    s.edges = {{0, 1}, {2, 3}};
    s.destinations = {1, 3};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        QueueMatrix q(s);
        q.at(0, 0) = 2.0 + static_cast<double>(rng() % 100) / 10.0;
        q.at(2, 1) = 2.0 + static_cast<double>(rng() % 100) / 10.0;
        q.at(0, 1) = static_cast<double>(rng() % 100) / 10.0;
        auto dec = ScheduleDecision::idle(2);
        dec.rates = {1.0, 1.0};
        dec.dest = {0, 1};
        dec.transfer = {1.0, 1.0};
        QueueMatrix both = q, seq = q;
        const double before = q.total();
        const double delivered = apply_decision(both, s, dec);
        double seq_delivered = apply_decision(seq, s, one_transfer(s, 0, 0, 1.0));
        seq_delivered += apply_decision(seq, s, one_transfer(s, 1, 1, 1.0));
        CHECK(both == seq);
        CHECK(delivered == doctest::Approx(seq_delivered));
        CHECK(before - both.total() == doctest::Approx(delivered).epsilon(1e-12));
    }
}

TEST_CASE("apply_injections")
{
    NetworkSpec s = line(2, 1);
    QueueMatrix q(s);
    CHECK(apply_injections(q, s, {}) == 0.0);
    CHECK(q.total() == 0.0);

    const std::vector<InjectionEvent> ev{{0, 0, 0, 1, 0.9}};
    apply_injections(q, s, ev);
    CHECK(q(0, 0) == doctest::Approx(0.9));

    const std::vector<InjectionEvent> self{{1, 0, 1, 1, 2.0}};
    CHECK(apply_injections(q, s, self) == 2.0);
    CHECK(q(1, 0) == 0.0);

    const std::vector<InjectionEvent> bad{{2, 0, 0, 1, 0.0}};
    CHECK_THROWS_AS(apply_injections(q, s, bad), ModelError);
}

TEST_CASE("enumerate_rate_vectors")
{
    NetworkSpec s = line(3, 2);
    const RateSet ev = ExplicitVectors{{{1, 0}, {0, 1}, {1, 1}}};
    CHECK(enumerate_rate_vectors(ev, s, 10).size() == 3);

    NetworkSpec one = line(2, 1);
    one.r_max = 2.0;
    const auto single = enumerate_rate_vectors(MatchingFamily{{2.0}}, one, 10);
    REQUIRE(single.size() == 2);
    CHECK(single[0] == RateVector{0.0});
    CHECK(single[1] == RateVector{2.0});

    const auto path = enumerate_rate_vectors(MatchingFamily{{1.0, 1.0}}, s, 10);
    REQUIRE(path.size() == 3);
    CHECK(path[0] == RateVector{0, 0});
    CHECK(path[1] == RateVector{1, 0});
    CHECK(path[2] == RateVector{0, 1});

    CHECK_THROWS_AS(enumerate_rate_vectors(MatchingFamily{{1.0, 1.0}}, s, 2), EnumerationLimitError);
}

TEST_CASE("matching count on small complete graphs")
{
    // Matchings of K_n: 1, 1, 2, 4, 10, 26, 76 (telephone numbers).
    const std::size_t expected[] = {1, 1, 2, 4, 10, 26, 76};
    for (int n = 2; n <= 6; ++n) {
        NetworkSpec s;
        s.node_count = n;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) s.edges.push_back({a, b});
        s.destinations = {0};
        const RateSet rs = MatchingFamily{RateVector(s.edges.size(), 1.0)};
        CHECK(enumerate_rate_vectors(rs, s, 1000).size() == expected[n]);
    }
}

TEST_CASE("rate set validation and membership")
{
    NetworkSpec s = line(3, 2);
    s.r_min = 0.5;
    s.r_max = 2.0;
    CHECK_NOTHROW(validate_rate_set(MatchingFamily{{0.5, 2.0}}, s));
    CHECK_THROWS_AS(validate_rate_set(MatchingFamily{{0.4, 1.0}}, s), ModelError);
    CHECK_THROWS_AS(validate_rate_set(ExplicitVectors{{{3.0, 0.0}}}, s), ModelError);
    CHECK_THROWS_AS(validate_rate_set(ExplicitVectors{{{1.0}}}, s), ModelError);

    const RateSet m = MatchingFamily{{1.0, 1.0}};
    CHECK(rate_set_contains(m, s, RateVector{1.0, 0.0}));
    CHECK(rate_set_contains(m, s, RateVector{0.3, 0.0}));
    CHECK_FALSE(rate_set_contains(m, s, RateVector{0.5, 0.5}));
    CHECK_FALSE(rate_set_contains(m, s, RateVector{1.5, 0.0}));
    const RateSet e = ExplicitVectors{{{1.0, 0.0}, {0.0, 2.0}}};
    CHECK(rate_set_contains(e, s, RateVector{0.0, 1.0}));
    CHECK_FALSE(rate_set_contains(e, s, RateVector{1.0, 1.0}));
}

TEST_CASE("pin_destinations")
{
    NetworkSpec s = line(3, 2);
    QueueMatrix q(s);
    q.at(2, 0) = 5.0;
    q.at(1, 0) = 1.0;
    CHECK(pin_destinations(q, s) == 5.0);
    CHECK(q(2, 0) == 0.0);
    CHECK(q(1, 0) == 1.0);
}
