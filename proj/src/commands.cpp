#include "mwsim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "mwsim/auditor.hpp"
#include "mwsim/bounds.hpp"

namespace mwsim {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ProbeSettings probe_settings(const ExperimentConfig& cfg)
{
    ProbeSettings s;
    s.horizon = cfg.horizon;
    s.tol = cfg.probe.tol;
    s.initial_hi = cfg.probe.initial_hi;
    s.max_hi = cfg.probe.max_hi;
    s.check_offset = cfg.probe.check_offset;
    s.slope_threshold = cfg.probe.slope_threshold;
    s.plateau_factor = cfg.probe.plateau_factor;
    s.approx = cfg.scheduler;
    s.seed = cfg.seed;
    s.jobs = cfg.probe.jobs;
    return s;
}

namespace {

std::vector<TrafficPair> traffic_pairs(const std::vector<PairConfig>& pairs)
{
    std::vector<TrafficPair> out;
    for (const auto& p : pairs) out.push_back({p.source, p.destination});
    return out;
}

std::vector<double> pair_rates(const std::vector<PairConfig>& pairs)
{
    std::vector<double> out;
    for (const auto& p : pairs) out.push_back(p.rate);
    return out;
}

void check_pairs(const NetworkSpec& spec, const std::vector<PairConfig>& pairs)
{
    for (const auto& p : pairs) {
        if (p.source < 0 || p.source >= spec.node_count) throw ConfigError("pair source is not a node", 0);
        if (!spec.dest_index(p.destination))
            throw ConfigError("pair destination " + std::to_string(p.destination) + " is not a network destination", 0);
    }
}

Json c_json(const std::array<std::array<double, 3>, 3>& c)
{
    Json rows = Json::array();
    for (const auto& row : c) rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
    return rows;
}

Json verdict_json(const StabilityVerdict& v)
{
    return Json{{"verdict", to_string(v.verdict)},
                {"max_queue", v.max_queue_overall},
                {"tail_slope", v.tail_slope},
                {"first_half_max", v.first_half_max},
                {"last_half_max", v.last_half_max}};
}

fs::path output_dir(const ExperimentConfig& cfg)
{
    fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const Json& j)
{
    std::ofstream f(path);
    if (!f) throw ModelError("cannot write " + path.string());
    f << j.dump(2) << "\n";
}

void write_trace_csv(const fs::path& path, const SimulationTrace& trace)
{
    std::ofstream f(path);
    if (!f) throw ModelError("cannot write " + path.string());
    f << std::setprecision(17);
    f << "slot,max_queue,potential,backlog,objective,delivered\n";
    for (const auto& r : trace.records)
        f << r.slot << ',' << r.max_queue << ',' << r.potential << ',' << r.backlog << ',' << r.objective << ','
          << r.delivered << '\n';
}

struct Series {
    std::string name;
    std::vector<SlotRecord> records;
};

/// Wide CSV: one row per recorded slot, one max-queue column per series.
void write_series_csv(const fs::path& path, const std::vector<Series>& series)
{
    std::ofstream f(path);
    if (!f) throw ModelError("cannot write " + path.string());
    f << std::setprecision(10) << "slot";
    std::size_t rows = 0;
    for (const auto& s : series) {
        f << ',' << s.name;
        rows = std::max(rows, s.records.size());
    }
    f << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        Slot slot = -1;
        for (const auto& s : series)
            if (i < s.records.size()) slot = s.records[i].slot;
        f << slot;
        for (const auto& s : series) {
            f << ',';
            if (i < s.records.size()) f << s.records[i].max_queue;
        }
        f << '\n';
    }
}

std::string series_name(int i, int j) { return "r" + std::to_string(i + 1) + "_g" + std::to_string(j + 1); }

}  // namespace

Setup make_setup(const ExperimentConfig& cfg, std::ostream& log)
{
    Setup s;
    s.horizon = cfg.horizon;
    const AdversaryConfig& a = cfg.adversary;
    switch (a.kind) {
    case AdversaryConfig::Kind::exponential: {
        auto adv = std::make_unique<ExponentialAdversary>(a.n, a.eps);
        s.spec = adv->spec();
        s.params = AdversaryParams{1, a.eps};
        s.adversary = std::move(adv);
        break;
    }
    case AdversaryConfig::Kind::exp1:
    case AdversaryConfig::Kind::exp2: {
        s.grid = make_grid_experiment(cfg.generate.value_or(GridSetup{}));
        s.spec = s.grid->spec;
        if (a.c) {
            s.c = *a.c;
        } else {
            log << "no c table in config; probing the 3x3 grid first\n" << std::flush;
            s.c = c_values(probe_grid(*s.grid, probe_settings(cfg)));
        }
        const CyclicConfig cc = cyclic_config(*s.grid, *s.c, a.seed);
        if (a.kind == AdversaryConfig::Kind::exp1)
            s.adversary = std::make_unique<CyclicArrivalAdversary>(cc, a.rate_index);
        else
            s.adversary = std::make_unique<CyclicEdgeArrivalAdversary>(cc);
        break;
    }
    case AdversaryConfig::Kind::fixed: {
        s.spec = build_network(*cfg.network);
        const RateSet rs = MatchingFamily{a.caps};
        validate_rate_set(rs, s.spec);
        check_pairs(s.spec, a.pairs);
        s.adversary = std::make_unique<FixedAdversary>(rs, traffic_pairs(a.pairs), pair_rates(a.pairs));
        break;
    }
    case AdversaryConfig::Kind::iid: {
        s.spec = build_network(*cfg.network);
        std::vector<RateSet> options;
        for (const auto& caps : a.rate_options) {
            options.push_back(MatchingFamily{caps});
            validate_rate_set(options.back(), s.spec);
        }
        check_pairs(s.spec, a.pairs);
        std::vector<IidArrival> arrivals;
        for (const auto& p : a.pairs) arrivals.push_back({{p.source, p.destination}, p.probability, p.rate});
        s.adversary = std::make_unique<IidAdversary>(options, a.weights, arrivals, a.seed);
        break;
    }
    case AdversaryConfig::Kind::scenario: {
        ScenarioLimits lim;
        lim.max_nodes = a.max_nodes;
        lim.min_nodes = std::min(lim.min_nodes, a.max_nodes);
        WitnessScenario sc = make_witness_scenario(a.seed, lim);
        s.spec = sc.spec;
        s.params = sc.params;
        s.horizon = std::min<Slot>(cfg.horizon, static_cast<Slot>(sc.script.size()));
        s.adversary = std::make_unique<ScriptedAdversary>(std::move(sc.script), true);
        break;
    }
    }
    return s;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out)
{
    Setup s = make_setup(cfg, out);
    if (s.horizon < 1) throw ConfigError("simulate needs a horizon of at least 1", 0);
    const fs::path dir = output_dir(cfg);

    RunOptions o;
    o.horizon = s.horizon;
    o.seed = cfg.seed;
    o.approx = cfg.scheduler;
    o.record_stride = cfg.output.record_stride;

    // First slot at which each exponential-adversary queue reaches (1 - eps) 2^i.
    const bool exponential = cfg.adversary.kind == AdversaryConfig::Kind::exponential;
    std::vector<std::optional<Slot>> milestone(exponential ? static_cast<std::size_t>(cfg.adversary.n) : 0);
    SlotObserver observe;
    if (exponential) {
        observe = [&](Slot t, const QueueMatrix& q) {
            for (std::size_t i = 0; i < milestone.size(); ++i)
                if (!milestone[i] && q(static_cast<NodeId>(2 * i), static_cast<int>(i)) >=
                                         (1.0 - cfg.adversary.eps) * std::ldexp(1.0, static_cast<int>(i)) - kTolerance)
                    milestone[i] = t;
        };
    }
    const SimulationTrace trace = run(s.spec, *s.adversary, o, observe);
    const StabilityVerdict v = stability_verdict(trace, cfg.probe.slope_threshold, cfg.probe.plateau_factor);
    write_trace_csv(dir / "trace.csv", trace);

    Json summary;
    summary["command"] = "simulate";
    summary["slots_run"] = trace.slots_run;
    summary["halted"] = trace.halted;
    if (trace.halted) summary["halt_reason"] = trace.halt_reason;
    summary["peak_queue"] = trace.peak_queue;
    summary["stability"] = verdict_json(v);
    if (exponential) {
        Json ms = Json::array();
        for (std::size_t i = 0; i < milestone.size(); ++i) {
            Json m{{"queue", i}, {"threshold", (1.0 - cfg.adversary.eps) * std::ldexp(1.0, static_cast<int>(i))}};
            m["first_slot"] = milestone[i] ? Json(*milestone[i]) : Json(nullptr);
            ms.push_back(m);
        }
        summary["milestones"] = ms;
    }

    if (s.grid && s.c) {
        // Cyclic run next to the fixed-vector runs it is compared with.
        std::vector<Series> series;
        RunOptions so = o;
        so.record_stride = cfg.output.series_stride;
        Json fixed = Json::array();
        {
            ExperimentConfig probed = cfg;
            probed.adversary.c = *s.c;
            Setup again = make_setup(probed, out);
            series.push_back({"cyclic", run(s.spec, *again.adversary, so).records});
        }
        ProbeSettings ps = probe_settings(cfg);
        ps.horizon = s.horizon;
        const bool exp1 = cfg.adversary.kind == AdversaryConfig::Kind::exp1;
        for (int i = 0; i < 3; ++i) {
            if (exp1 && i != cfg.adversary.rate_index) continue;
            for (int j = 0; j < 3; ++j) {
                const auto tr = run_fixed_load(s.spec, MatchingFamily{s.grid->caps[i]}, s.grid->pairs, s.grid->gammas[j],
                                               (*s.c)[i][j], ps, cfg.output.series_stride);
                fixed.push_back(Json{{"rate_index", i},
                                     {"gamma_index", j},
                                     {"c", (*s.c)[i][j]},
                                     {"stability", verdict_json(stability_verdict(tr, ps.slope_threshold, ps.plateau_factor))}});
                series.push_back({series_name(i, j), tr.records});
            }
        }
        write_series_csv(dir / "series.csv", series);
        summary["c"] = c_json(*s.c);
        summary["fixed_runs"] = fixed;
    }
    summary["config"] = Json::parse(serialize_config(cfg));
    write_json(dir / "summary.json", summary);

    out << "simulate: " << trace.slots_run << " slots, peak queue " << trace.peak_queue << ", verdict "
        << to_string(v.verdict) << " (tail slope " << v.tail_slope << ")\n";
    if (trace.halted) out << "halted: " << trace.halt_reason << "\n";
    for (std::size_t i = 0; i < milestone.size(); ++i) {
        out << "  queue " << i << " reached " << (1.0 - cfg.adversary.eps) * std::ldexp(1.0, static_cast<int>(i));
        if (milestone[i])
            out << " at slot " << *milestone[i] << "\n";
        else
            out << ": not reached\n";
    }
    out << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "summary.json").string() << "\n";
    return v.verdict == Verdict::unstable ? kExitUnstable : kExitOk;
}

int cmd_probe(const ExperimentConfig& cfg, std::ostream& out)
{
    if (cfg.horizon < 1) throw ConfigError("probe needs a horizon of at least 1", 0);
    const ProbeSettings ps = probe_settings(cfg);
    const fs::path dir = output_dir(cfg);
    Json summary;
    summary["command"] = "probe";
    summary["horizon"] = ps.horizon;

    std::ofstream csv(dir / "c_table.csv");
    csv << std::setprecision(10)
        << "rate_index,gamma_index,c,verdict_at_c,verdict_above,check_offset,evaluations,non_monotone\n";
    auto row = [&](int i, int j, const LoadProbe& p) {
        csv << i + 1 << ',' << j + 1 << ',' << p.search.c << ',' << to_string(p.at_c.verdict) << ','
            << to_string(p.above.verdict) << ',' << ps.check_offset << ',' << p.search.evaluations << ','
            << p.search.non_monotone.size() << '\n';
        Json entry{{"rate_index", i + 1},
                   {"gamma_index", j + 1},
                   {"c", p.search.c},
                   {"at_c", verdict_json(p.at_c)},
                   {"above", verdict_json(p.above)},
                   {"evaluations", p.search.evaluations},
                   {"non_monotone", p.search.non_monotone}};
        summary["probes"].push_back(entry);
    };

    const bool single = !cfg.generate && cfg.adversary.kind == AdversaryConfig::Kind::fixed;
    if (single) {
        const NetworkSpec spec = build_network(*cfg.network);
        const RateSet rs = MatchingFamily{cfg.adversary.caps};
        validate_rate_set(rs, spec);
        check_pairs(spec, cfg.adversary.pairs);
        const auto gamma = pair_rates(cfg.adversary.pairs);
        if (std::none_of(gamma.begin(), gamma.end(), [](double x) { return x > 0; }))
            throw ConfigError("probe needs a nonzero arrival vector", 0);
        const LoadProbe p = probe_load(spec, rs, traffic_pairs(cfg.adversary.pairs), gamma, ps);
        row(0, 0, p);
        out << "c = " << p.search.c << " (" << to_string(p.at_c.verdict) << " at c, " << to_string(p.above.verdict)
            << " at c + " << ps.check_offset << ")\n";
    } else {
        if (cfg.adversary.kind != AdversaryConfig::Kind::exp1 && cfg.adversary.kind != AdversaryConfig::Kind::exp2 &&
            !cfg.generate)
            throw ConfigError("probe needs a 'generate' section or a fixed adversary", 0);
        const GridExperiment g = make_grid_experiment(cfg.generate.value_or(GridSetup{}));
        const ProbeTable table = probe_grid(g, ps);
        std::vector<Series> series;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const LoadProbe& p = table[i][j];
                row(i, j, p);
                out << "c[" << i + 1 << "][" << j + 1 << "] = " << p.search.c << "  (" << to_string(p.at_c.verdict)
                    << " / " << to_string(p.above.verdict) << " at +" << ps.check_offset << ")\n";
                for (const double c : {p.search.c, p.search.c + ps.check_offset}) {
                    const auto tr = run_fixed_load(g.spec, MatchingFamily{g.caps[i]}, g.pairs, g.gammas[j], c, ps,
                                                   cfg.output.series_stride);
                    series.push_back({series_name(i, j) + (c == p.search.c ? "_c" : "_above"), tr.records});
                }
            }
        write_series_csv(dir / "series.csv", series);
        summary["c"] = c_json(c_values(table));
    }
    summary["config"] = Json::parse(serialize_config(cfg));
    write_json(dir / "summary.json", summary);
    out << "wrote " << (dir / "c_table.csv").string() << "\n";
    return kExitOk;
}

int cmd_audit(const ExperimentConfig& cfg, std::ostream& out)
{
    Setup s = make_setup(cfg, out);
    if (!s.adversary->provides_witness())
        throw ModelError("adversary provides no witness schedule; audit needs the exponential or scenario adversary");
    const fs::path dir = output_dir(cfg);

    AuditReport rep;
    rep.params = s.params;
    if (s.horizon >= 1) {
        RunOptions o;
        o.horizon = s.horizon;
        o.seed = cfg.seed;
        o.approx = cfg.scheduler;
        o.audit = true;
        o.record_stride = cfg.output.record_stride;
        const SimulationTrace trace = run(s.spec, *s.adversary, o);
        AuditOptions ao;
        ao.eps_hat = cfg.scheduler.eps_hat;
        rep = audit_trace(s.spec, trace, s.params, ao);
    }

    Json j;
    j["command"] = "audit";
    j["omega"] = rep.params.omega;
    j["eps"] = rep.params.eps;
    j["eps_effective"] = rep.eps_effective;
    j["c"] = rep.c;
    j["max_links"] = rep.max_links;
    j["compliance"] = Json{{"ok", rep.compliance.ok},
                           {"first_violation", rep.compliance.first_violation},
                           {"packets_checked", rep.compliance.packets_checked}};
    j["counts"] = Json{{"packets", rep.packets.size()},
                       {"slots", rep.slots.size()},
                       {"bad_packets", rep.bad_packets},
                       {"bound_violations", rep.bound_violations},
                       {"share_violations", rep.share_violations},
                       {"equality_violations", rep.equality_violations},
                       {"domination_violations", rep.domination_violations}};
    j["passed"] = rep.passed();
    Json packets = Json::array();
    for (const auto& p : rep.packets) {
        Json pj{{"packet", p.event.packet_id}, {"slot", p.event.slot},  {"node", p.event.node},
                {"destination", p.event.destination}, {"size", p.event.size}, {"height", p.height},
                {"credit", p.credit}, {"delta", p.delta}};
        pj["bound"] = p.bound_checked ? Json(p.bound) : Json(nullptr);
        pj["class"] = p.cls == PacketClass::bad ? "bad" : "good";
        packets.push_back(pj);
    }
    j["packets"] = packets;
    Json slots = Json::array();
    for (const auto& sa : rep.slots)
        slots.push_back(Json{{"slot", sa.slot},
                             {"sum_k", sa.sum_k},
                             {"weighted_shares", sa.weighted_shares},
                             {"sum_w_witness", sa.sum_w_witness},
                             {"objective", sa.objective},
                             {"exact_objective", sa.exact_objective},
                             {"min_residual", sa.min_residual},
                             {"clamped_edges", sa.clamped_edges}});
    j["slots"] = slots;
    j["notes"] = rep.notes;
    j["config"] = Json::parse(serialize_config(cfg));
    write_json(dir / "audit.json", j);

    out << "audit: " << rep.packets.size() << " packets over " << rep.slots.size() << " slots, C = " << rep.c
        << "\n  compliance " << (rep.compliance.ok ? "ok" : "FAILED: " + rep.compliance.first_violation)
        << "\n  bad packets " << rep.bad_packets << ", bound violations " << rep.bound_violations
        << ", share violations " << rep.share_violations << ", equality violations " << rep.equality_violations
        << ", domination violations " << rep.domination_violations << "\n  " << (rep.passed() ? "PASSED" : "FAILED")
        << "; wrote " << (dir / "audit.json").string() << "\n";
    return rep.passed() ? kExitOk : kExitRuntime;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out)
{
    const BoundsConfig& b = cfg.bounds;
    const fs::path dir = output_dir(cfg);
    BoundInputs in;
    try {
        in.eps = parse_rational(b.eps);
        in.r_min = parse_rational(b.r_min);
        in.r_max = parse_rational(b.r_max);
        in.q0 = parse_rational(b.q0);
        if (b.c) {
            in.c = parse_rational(*b.c);
        } else if (cfg.network) {
            const NetworkSpec spec = build_network(*cfg.network);
            in.c = Rational(explicit_c(b.omega, spec.edge_count(), spec.r_max, spec.node_count));
        }
    } catch (const ModelError& e) {
        throw ConfigError(std::string("bounds: ") + e.what(), 0);
    }
    in.omega = b.omega;
    in.injection_cap = b.injection_cap;
    in.budget = b.budget;

    // Values past this many digits are written as approximations only.
    constexpr std::size_t kMaxExactDigits = 4000;
    auto exact = [&](const Rational& x) {
        const std::string s = x.str();
        return s.size() <= kMaxExactDigits ? Json(s) : Json(nullptr);
    };
    auto number = [&](const Rational& x) { return Json{{"exact", exact(x)}, {"approx", approx_string(x, 8)}}; };

    Json j;
    j["command"] = "bounds";
    bool exceeded = false;
    for (const int n : b.queue_counts) {
        in.queue_count = n;
        Json entry{{"queue_count", n}};
        out << "n = " << n << ": ";
        try {
            const BoundConstants bc = compute_bound_constants(in);
            entry["status"] = "ok";
            entry["c"] = number(bc.c);
            entry["q_star"] = number(bc.q_star);
            entry["p0"] = number(bc.p0);
            Json m = Json::array();
            for (const auto& x : bc.m) m.push_back(number(x));
            entry["m"] = m;
            Json ladder = Json::array();
            for (const auto& level : bc.ladder) {
                Json lj{{"k", level.k}};
                for (const auto& x : level.s) lj["s"].push_back(number(x));
                for (const auto& x : level.l) lj["l"].push_back(number(x));
                lj["m"] = number(level.m);
                ladder.push_back(lj);
            }
            entry["ladder"] = ladder;
            entry["ineq_rhs"] = number(bc.ineq_rhs);
            entry["max_queue_bound"] = number(Rational(bc.max_queue_bound));
            entry["evaluations"] = bc.evaluations;
            out << "q* = " << approx_string(bc.q_star) << ", M = [";
            for (std::size_t i = 0; i < bc.m.size(); ++i) out << (i ? ", " : "") << approx_string(bc.m[i]);
            out << "], potential bound " << approx_string(bc.ineq_rhs) << ", max queue <= "
                << approx_string(Rational(bc.max_queue_bound)) << "\n";
        } catch (const BudgetExceeded& e) {
            exceeded = true;
            entry["status"] = "budget_exceeded";
            entry["message"] = e.what();
            out << e.what() << "\n";
        }
        j["results"].push_back(entry);
    }
    j["config"] = Json::parse(serialize_config(cfg));
    write_json(dir / "bounds.json", j);
    out << "wrote " << (dir / "bounds.json").string() << "\n";
    return exceeded ? kExitRuntime : kExitOk;
}

}  // namespace mwsim
