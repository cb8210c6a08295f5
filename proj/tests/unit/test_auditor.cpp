#include "doctest.h"

#include <random>

#include "mwsim/adversaries.hpp"
#include "mwsim/auditor.hpp"
#include "mwsim/experiments.hpp"
#include "share_grid.hpp"

using namespace mwsim;

namespace {

NetworkSpec one_edge()
{
    NetworkSpec s;
    s.node_count = 2;
    s.edges = {{0, 1}};
    s.destinations = {1};
    return s;
}

double packet_total(const RateShareAllocation& a, PacketId p)
{
    double t = 0.0;
    for (const auto& s : a.shares)
        if (s.packet == p) t += s.amount;
    return t;
}

}  // namespace

TEST_CASE("water-filling reserves moves over (1 - eps)")
{
    const NetworkSpec s = one_edge();
    const AdversaryParams ap{1, 0.1};
    WitnessSchedule ws;
    ws.rate_vectors[0] = {1.0};
    ws.moves = {{1, 0, 0, 0.9}};
    const std::vector<InjectionEvent> ev{{1, 0, 0, 1, 0.9}};
    const auto a = water_fill_shares(s, ws, ev, ap, 0);
    CHECK(packet_total(a, 1) == doctest::Approx(1.0));
    CHECK(a.total(1, 0) == doctest::Approx(1.0));

    SUBCASE("no packets, no shares")
    {
        CHECK(water_fill_shares(s, ws, {}, ap, 0).shares.empty());
    }
    SUBCASE("two packets exactly use the rate")
    {
        WitnessSchedule w2 = ws;
        w2.moves = {{1, 0, 0, 0.45}, {2, 0, 0, 0.45}};
        const std::vector<InjectionEvent> two{{1, 0, 0, 1, 0.45}, {2, 0, 0, 1, 0.45}};
        const auto b = water_fill_shares(s, w2, two, ap, 0);
        CHECK(packet_total(b, 1) + packet_total(b, 2) == doctest::Approx(1.0));
    }
    SUBCASE("over-subscribed edge throws")
    {
        WitnessSchedule w2 = ws;
        w2.moves = {{1, 0, 0, 0.5}, {2, 0, 0, 0.5}};
        const std::vector<InjectionEvent> two{{1, 0, 0, 1, 0.5}, {2, 0, 0, 1, 0.5}};
        CHECK_THROWS_AS(water_fill_shares(s, w2, two, ap, 0), AuditError);
    }
}

TEST_CASE("share assignment on one edge")
{
    const NetworkSpec s = one_edge();
    QueueMatrix q(s);
    q.at(0, 0) = 3.0;
    const ScheduleDecision dec = max_weight_exact(q, s, MatchingFamily{{1.0}});
    const RateVector wr{1.0};
    const std::vector<PacketDemand> one{{5, 0, {{0, 1.0}}}};
    const SlotContext ctx{0, &q, &dec, &wr, dec.objective, 0.0};
    const auto sa = assign_slot_shares(s, ctx, one);
    // K_e = 1 * 3, the whole objective.
    CHECK(sa.sum_k == doctest::Approx(3.0));
    REQUIRE(sa.shares.size() == 1);
    CHECK(sa.shares[0].amount * sa.shares[0].differential == doctest::Approx(3.0));

    SUBCASE("zero witness rate leaves nothing to credit")
    {
        const RateVector zero{0.0};
        const SlotContext c0{0, &q, &dec, &zero, dec.objective, 0.0};
        const auto z = assign_slot_shares(s, c0, one);
        CHECK(z.sum_k == 0.0);
        CHECK(z.shares.empty());
    }
}

TEST_CASE("per-packet delta")
{
    const InjectionEvent p{1, 0, 0, 1, 0.5};
    CHECK(per_packet_potential_delta(p, {}, 4.0, 1.0, true) == 0.0);
    CHECK(per_packet_potential_delta(p, {}, 0.0, 1.0, false) == doctest::Approx(0.25));
    const std::vector<GammaShare> g{{1, 0, 0, 0, 0.5, 10.0}, {1, 0, 0, 1, 0.5, 10.0}};
    // (10.5^2 - 10^2) - 2 * 10 = -9.75
    CHECK(per_packet_potential_delta(p, g, 10.0, 1.0, false) == doctest::Approx(-9.75));
}

TEST_CASE("bad-packet threshold")
{
    // -(0.1 / 0.95) * 1 * 19 + 0 + 1 = -1
    CHECK(classify_bad_packet(-1.0, 1.0, 19.0, 0.1, 0.0) == PacketClass::bad);
    CHECK(classify_bad_packet(-1.0001, 1.0, 19.0, 0.1, 0.0) == PacketClass::good);
    CHECK(classify_bad_packet(0.0, 1.0, 0.0, 0.1, 0.0) == PacketClass::good);
    CHECK(classify_bad_packet(1.0, 1.0, 0.0, 0.1, 0.0) == PacketClass::bad);
}

TEST_CASE("q_star and C")
{
    CHECK(q_star(0.5, 1.0, 0.0) == doctest::Approx(2.4));
    CHECK(q_star(0.5, 1.0, -1.0) == 0.0);
    const double eps = 0.01;
    CHECK(q_star(eps, 1.0, 3.0) == doctest::Approx(2.0 / eps * 4.0).epsilon(0.01));
    CHECK(explicit_c(2, 3, 1.5, 4) == doctest::Approx(2 * 3 * 1.5 * 2 * 4 * 1.5 * 2));
}

TEST_CASE("small-link bound")
{
    const std::vector<double> one{2.0};
    CHECK(small_link_transfer_bound(one) == doctest::Approx(2.0));
    CHECK(small_link_transfer_bound({}) == 0.0);
    const std::vector<double> two{1.0, 1.0};
    CHECK(small_link_transfer_bound(two) == doctest::Approx(4.0));
}

TEST_CASE("chain of three equalizes within the bound")
{
    const std::vector<double> h{2.0, 1.0, 0.0};
    const auto r = run_small_link_chain(h, 1.0);
    CHECK(r.quiescent);
    CHECK(r.potential_drop == doctest::Approx(2.0).epsilon(1e-6));  // 5 - 3 * 1^2
    CHECK(r.potential_drop <= 4.0);
}

TEST_CASE("random chains stay within the small-link bound")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> gap(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        const int m = 3 + static_cast<int>(rng() % 4);
        std::vector<double> h(static_cast<std::size_t>(m));
        std::vector<double> gaps;
        h.back() = gap(rng);
        for (int i = m - 2; i >= 0; --i) {
            gaps.push_back(gap(rng));
            h[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(i) + 1] + gaps.back();
        }
        const double rate = k % 2 ? 1.0 : 100.0;
        const auto r = run_small_link_chain(h, rate);
        CAPTURE(k);
        CHECK(r.quiescent);
        CHECK(r.potential_drop >= 0.0);
        CHECK(r.potential_drop <= small_link_transfer_bound(gaps));
    }
}

TEST_CASE("share assignment matches the grid oracle")
{
    const auto instances = oracle::hand_share_instances();
    REQUIRE(instances.size() == 5);
    for (std::size_t k = 0; k < instances.size(); ++k) {
        CAPTURE(k);
        const auto& inst = instances[k];
        const auto targets = oracle::share_targets(inst);
        CHECK(oracle::share_grid_feasible(inst, targets));
        const auto sa = assign_slot_shares(inst.spec, inst.context(), inst.demands);
        std::vector<double> used(static_cast<std::size_t>(inst.spec.edge_count()), 0.0);
        for (std::size_t i = 0; i < inst.demands.size(); ++i) {
            double credit = 0.0;
            for (const auto& g : sa.shares)
                if (g.packet == inst.demands[i].packet) credit += g.amount * g.differential;
            CHECK(credit == doctest::Approx(targets[i]).epsilon(1e-9));
        }
        for (const auto& g : sa.shares) used[g.edge] += g.amount;
        for (EdgeId e = 0; e < inst.spec.edge_count(); ++e) CHECK(used[e] <= inst.decision.transfer[e] + 1e-12);
    }
}

TEST_CASE("grid oracle rejects an unreachable target")
{
    auto inst = oracle::hand_share_instances()[0];
    auto targets = oracle::share_targets(inst);
    targets[0] += 10.0;
    CHECK_FALSE(oracle::share_grid_feasible(inst, targets));
}

TEST_CASE("generated scenarios audit clean")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        CAPTURE(seed);
        const auto sc = make_witness_scenario(seed);
        ScriptedAdversary adv(sc.script, true);
        RunOptions o;
        o.horizon = static_cast<Slot>(sc.script.size());
        o.audit = true;
        const auto tr = run(sc.spec, adv, o);
        const auto rep = audit_trace(sc.spec, tr, sc.params);
        CHECK(rep.compliance.ok);
        CHECK(rep.bad_packets == 0);
        CHECK(rep.bound_violations == 0);
        CHECK(rep.share_violations == 0);
        CHECK(rep.equality_violations == 0);
        CHECK(rep.domination_violations == 0);
    }
}

TEST_CASE("bound is not vacuous without the slack")
{
    std::size_t violations = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto sc = make_witness_scenario(seed);
        ScriptedAdversary adv(sc.script, true);
        RunOptions o;
        o.horizon = static_cast<Slot>(sc.script.size());
        o.audit = true;
        const auto tr = run(sc.spec, adv, o);
        AuditOptions ao;
        ao.c_override = 0.0;
        violations += audit_trace(sc.spec, tr, sc.params, ao).bound_violations;
    }
    CHECK(violations > 0);
}

TEST_CASE("exponential adversary audits clean")
{
    ExponentialAdversary ex(3, 0.1);
    RunOptions o;
    o.horizon = 2000;
    o.audit = true;
    const auto tr = run(ex.spec(), ex, o);
    const auto rep = audit_trace(ex.spec(), tr, AdversaryParams{1, 0.1});
    CHECK(rep.passed());
    CHECK_FALSE(rep.packets.empty());
}
