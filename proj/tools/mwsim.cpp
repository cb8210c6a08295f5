#include <iostream>

#include "CLI11.hpp"
#include "mwsim/commands.hpp"

using namespace mwsim;

namespace {

struct Overrides {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> horizon;
    bool full = false;
    std::optional<std::string> out;
    std::optional<int> n;
    std::optional<double> eps;
    std::optional<double> eps_hat;
    std::optional<int> jobs;
    bool print_config = false;
};

ExperimentConfig resolve(const Overrides& o)
{
    if (!o.config.empty() && !o.preset.empty()) throw ConfigError("use either --config or --preset, not both", 0);
    ExperimentConfig cfg = !o.config.empty() ? load_config(o.config)
                           : !o.preset.empty() ? preset_config(o.preset)
                                               : ExperimentConfig{};
    if (o.full) {
        cfg.horizon = cfg.adversary.kind == AdversaryConfig::Kind::exponential ? cfg.horizon : 1'000'000;
        if (cfg.adversary.kind == AdversaryConfig::Kind::exponential && !o.n) cfg.adversary.n = 8;
    }
    if (o.horizon) cfg.horizon = *o.horizon;
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.adversary.seed = *o.seed;
        if (cfg.generate) cfg.generate->seed = *o.seed;
    }
    if (o.out) cfg.output.dir = *o.out;
    if (o.n) {
        if (*o.n < 1) throw ConfigError("--n must be at least 1", 0);
        cfg.adversary.n = *o.n;
        cfg.bounds.queue_counts = {*o.n};
    }
    if (o.eps) {
        if (!(*o.eps > 0 && *o.eps < 1)) throw ConfigError("--eps must lie in (0, 1)", 0);
        cfg.adversary.eps = *o.eps;
    }
    if (o.eps_hat) {
        cfg.scheduler.eps_hat = *o.eps_hat;
        cfg.scheduler.mode = *o.eps_hat > 0 ? ApproxMode::synthetic_degrade : ApproxMode::exact;
        try {
            cfg.scheduler.validate();
        } catch (const ModelError& e) {
            throw ConfigError(std::string("--eps-hat: ") + e.what(), 0);
        }
    }
    if (o.jobs) cfg.probe.jobs = *o.jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Max-Weight(beta) network scheduling simulator"};
    app.require_subcommand(1);
    Overrides o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--preset", o.preset, "exp1, exp2, exp-exponential, grid-probe or single-edge");
        sub->add_option("--seed", o.seed, "seed for the run, the adversary and the grid instance");
        sub->add_option("--horizon", o.horizon, "slots to simulate");
        sub->add_flag("--full", o.full, "long horizon (10^6 slots; N = 8 for the exponential adversary)");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--n", o.n, "exponential adversary edge count, or queue count for bounds");
        sub->add_option("--eps", o.eps, "exponential adversary eps");
        sub->add_option("--eps-hat", o.eps_hat, "approximate scheduler slack");
        sub->add_option("--jobs", o.jobs, "probe worker threads");
        sub->add_flag("--print-config", o.print_config, "print the resolved config and exit");
    };

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const ExperimentConfig&, std::ostream&);
    };
    const Command commands[] = {
        {"simulate", "run one experiment and write trace.csv and summary.json", cmd_simulate},
        {"probe", "binary-search the largest stable load scale c", cmd_probe},
        {"audit", "run a witness-backed adversary and audit the per-packet accounting", cmd_audit},
        {"bounds", "exact potential and queue bound constants", cmd_bounds},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        subs.push_back(app.add_subcommand(c.name, c.help));
        add_common(subs.back());
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    ExperimentConfig cfg;
    try {
        cfg = resolve(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (o.print_config) {
        std::cout << serialize_config(cfg);
        return kExitOk;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            return commands[i].fn(cfg, std::cout);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitRuntime;
        }
    }
    return kExitRuntime;
}
