#pragma once

#include <iosfwd>
#include <memory>
#include <optional>

#include "mwsim/config.hpp"
#include "mwsim/engine.hpp"
#include "mwsim/experiments.hpp"

namespace mwsim {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitUnstable = 3 };

/// Network, adversary and witness parameters assembled from a config.
struct Setup {
    NetworkSpec spec;
    std::unique_ptr<Adversary> adversary;
    AdversaryParams params;
    std::optional<GridExperiment> grid;
    std::optional<std::array<std::array<double, 3>, 3>> c;
    Slot horizon = 0;
};

ProbeSettings probe_settings(const ExperimentConfig& cfg);

/// Builds the run described by `cfg`. exp1/exp2 without constants probe them
/// first, logging progress to `log`.
Setup make_setup(const ExperimentConfig& cfg, std::ostream& log);

/// Each command writes its files under cfg.output.dir, a summary to `out`,
/// and returns an ExitCode.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_probe(const ExperimentConfig& cfg, std::ostream& out);
int cmd_audit(const ExperimentConfig& cfg, std::ostream& out);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace mwsim
