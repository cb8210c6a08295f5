#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwsim/adversaries.hpp"
#include "mwsim/experiments.hpp"
#include "mwsim/net_model.hpp"
#include "mwsim/scheduler.hpp"
#include "mwsim/witness.hpp"

namespace mwsim {

inline constexpr int kConfigSchemaVersion = 1;

/// Bad config text or contents. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line);

    int line() const { return line_; }

private:
    int line_;
};

struct NetworkConfig {
    enum class Kind { grid, explicit_edges, parallel };
    Kind kind = Kind::grid;
    int rows = 3;  // grid
    int cols = 4;
    int nodes = 0;  // explicit
    std::vector<std::array<int, 2>> edges;
    std::vector<int> destinations;
    int n = 6;  // parallel
    double beta = 1.0;
    std::optional<double> r_min;
    std::optional<double> r_max;
};

struct PairConfig {
    int source = 0;
    int destination = 0;
    double rate = 0.0;         // fixed: per-slot size; iid: size when present
    double probability = 1.0;  // iid only
};

using CTable = std::array<std::array<double, 3>, 3>;

struct AdversaryConfig {
    enum class Kind { exponential, exp1, exp2, fixed, iid, scenario };
    Kind kind = Kind::exponential;
    int n = 6;  // exponential
    double eps = 0.1;
    int rate_index = 0;               // exp1, 0-based
    std::optional<CTable> c;          // exp1/exp2; probed when absent
    std::vector<double> caps;         // fixed
    std::vector<std::vector<double>> rate_options;  // iid
    std::vector<double> weights;                     // iid
    std::vector<PairConfig> pairs;    // fixed/iid
    std::uint64_t seed = 1;
    int max_nodes = 4;  // scenario
};

struct ProbeConfig {
    double tol = 0.001;
    double initial_hi = 1.0;
    double max_hi = 1024.0;
    double check_offset = 0.01;
    double slope_threshold = 1e-4;
    double plateau_factor = 1.5;
    int jobs = 0;  // 0: hardware concurrency
};

struct BoundsConfig {
    std::vector<int> queue_counts{1, 2, 3};
    std::string eps = "1/2";
    int omega = 1;
    std::string r_min = "1";
    std::string r_max = "1";
    std::optional<std::string> c;  // explicit C when absent
    int injection_cap = 1;
    std::string q0 = "1";
    std::uint64_t budget = 1'000'000;
};

struct OutputConfig {
    std::string dir = "out";
    std::int64_t record_stride = 1;
    std::int64_t series_stride = 100;
};

/// Sections that do not apply to the chosen adversary may be absent:
/// exponential and scenario adversaries build their own networks, exp1 and
/// exp2 take theirs from `generate`, fixed and iid need `network`.
struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::optional<NetworkConfig> network;
    std::optional<GridSetup> generate;
    AdversaryConfig adversary;
    ApproxParams scheduler;
    std::int64_t horizon = 100'000;
    std::uint64_t seed = 1;
    ProbeConfig probe;
    BoundsConfig bounds;
    OutputConfig output;
};

/// Parses JSON text. Unknown keys, wrong types and out-of-range values throw
/// ConfigError with the offending line.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Canonical JSON with every field written out.
std::string serialize_config(const ExperimentConfig& cfg);

/// Names accepted by preset_config().
std::vector<std::string> preset_names();

ExperimentConfig preset_config(const std::string& name);

/// Network for the config; grid networks carry no destinations until an
/// experiment is generated.
NetworkSpec build_network(const NetworkConfig& nc);

}  // namespace mwsim
