#include "mwsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mwsim {

using Json = nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line)
{
}

namespace {

int line_at(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Best-effort source line of a key path: each key is searched for as a
/// quoted string followed by ':' after the previous one.
int locate(const std::string& text, const std::vector<std::string>& path)
{
    std::size_t pos = 0;
    bool found = false;
    for (const auto& key : path) {
        if (!key.empty() && std::isdigit(static_cast<unsigned char>(key[0]))) continue;
        const std::string quoted = "\"" + key + "\"";
        for (std::size_t at = text.find(quoted, pos); at != std::string::npos; at = text.find(quoted, at + 1)) {
            std::size_t k = at + quoted.size();
            while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            if (k < text.size() && text[k] == ':') {
                pos = at;
                found = true;
                break;
            }
        }
    }
    return found ? line_at(text, pos) : 0;
}

std::string join(const std::vector<std::string>& path)
{
    std::string out;
    for (const auto& p : path) out += "/" + p;
    return out.empty() ? "/" : out;
}

/// Strict object reader: every key must be consumed exactly once.
class Reader {
public:
    Reader(const Json& j, std::vector<std::string> path, const std::string& text)
        : j_(j), path_(std::move(path)), text_(text)
    {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const
    {
        throw ConfigError(join(path) + ": " + msg, locate(text_, path));
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const { fail(sub(key), msg); }

    std::vector<std::string> sub(const std::string& key) const
    {
        auto p = path_;
        p.push_back(key);
        return p;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const std::string& text() const { return text_; }

    const Json& raw(const std::string& key)
    {
        if (!has(key)) fail(path_, "missing required key '" + key + "'");
        used_.insert(key);
        return j_.at(key);
    }

    Reader object(const std::string& key) { return Reader(raw(key), sub(key), text_); }

    template <class T>
    T get(const std::string& key, const T& fallback)
    {
        if (!has(key)) return fallback;
        return as<T>(raw(key), sub(key));
    }

    template <class T>
    T require(const std::string& key)
    {
        if (!has(key)) fail(path_, "missing required key '" + key + "'");
        return as<T>(raw(key), sub(key));
    }

    template <class T>
    T as(const Json& v, const std::vector<std::string>& path) const
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, "expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(path, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
                if (v.get<std::int64_t>() < 0) fail(path, "expected a nonnegative integer");
                return static_cast<T>(v.get<std::int64_t>());
            } else {
                const auto x = v.get<std::int64_t>();
                if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) fail(path, "out of range");
                return static_cast<T>(x);
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(path, "expected a number");
            return v.get<double>();
        } else {
            // std::vector<U>
            using U = typename T::value_type;
            if (!v.is_array()) fail(path, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                auto p = path;
                p.push_back(std::to_string(i));
                out.push_back(as<U>(v[i], p));
            }
            return out;
        }
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key)) fail(key, "unknown key '" + key + "'");
    }

private:
    const Json& j_;
    std::vector<std::string> path_;
    const std::string& text_;
    std::set<std::string> used_;
};

template <class E>
struct NamedEnum {
    E value;
    const char* name;
};

constexpr NamedEnum<NetworkConfig::Kind> kNetworkKinds[] = {{NetworkConfig::Kind::grid, "grid"},
                                                            {NetworkConfig::Kind::explicit_edges, "explicit"},
                                                            {NetworkConfig::Kind::parallel, "parallel"}};

constexpr NamedEnum<AdversaryConfig::Kind> kAdversaryKinds[] = {
    {AdversaryConfig::Kind::exponential, "exponential"}, {AdversaryConfig::Kind::exp1, "exp1"},
    {AdversaryConfig::Kind::exp2, "exp2"},               {AdversaryConfig::Kind::fixed, "fixed"},
    {AdversaryConfig::Kind::iid, "iid"},                 {AdversaryConfig::Kind::scenario, "scenario"}};

constexpr NamedEnum<ApproxMode> kApproxModes[] = {{ApproxMode::exact, "exact"},
                                                  {ApproxMode::synthetic_degrade, "synthetic-degrade"}};

template <class E, std::size_t N>
E enum_from(Reader& r, const std::string& key, const NamedEnum<E> (&table)[N])
{
    const auto name = r.require<std::string>(key);
    for (const auto& entry : table)
        if (name == entry.name) return entry.value;
    std::string known;
    for (const auto& entry : table) known += std::string(known.empty() ? "" : ", ") + entry.name;
    r.fail(key, "unknown value '" + name + "' (expected one of: " + known + ")");
}

template <class E, std::size_t N>
const char* enum_name(E value, const NamedEnum<E> (&table)[N])
{
    for (const auto& entry : table)
        if (entry.value == value) return entry.name;
    return "?";
}

NetworkConfig read_network(Reader r)
{
    NetworkConfig n;
    n.kind = enum_from(r, "kind", kNetworkKinds);
    switch (n.kind) {
    case NetworkConfig::Kind::grid:
        n.rows = r.get<int>("rows", n.rows);
        n.cols = r.get<int>("cols", n.cols);
        break;
    case NetworkConfig::Kind::explicit_edges: {
        n.nodes = r.require<int>("nodes");
        const auto edges = r.require<std::vector<std::vector<int>>>("edges");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (edges[i].size() != 2) r.fail(r.sub("edges"), "edge " + std::to_string(i) + " is not a [tail, head] pair");
            n.edges.push_back({edges[i][0], edges[i][1]});
        }
        n.destinations = r.require<std::vector<int>>("destinations");
        break;
    }
    case NetworkConfig::Kind::parallel:
        n.n = r.require<int>("n");
        break;
    }
    n.beta = r.get<double>("beta", n.beta);
    if (r.has("r_min")) n.r_min = r.get<double>("r_min", 0.0);
    if (r.has("r_max")) n.r_max = r.get<double>("r_max", 0.0);
    r.finish();
    return n;
}

Json write_network(const NetworkConfig& n)
{
    Json j;
    j["kind"] = enum_name(n.kind, kNetworkKinds);
    switch (n.kind) {
    case NetworkConfig::Kind::grid:
        j["rows"] = n.rows;
        j["cols"] = n.cols;
        break;
    case NetworkConfig::Kind::explicit_edges: {
        j["nodes"] = n.nodes;
        Json edges = Json::array();
        for (const auto& e : n.edges) edges.push_back({e[0], e[1]});
        j["edges"] = edges;
        j["destinations"] = n.destinations;
        break;
    }
    case NetworkConfig::Kind::parallel:
        j["n"] = n.n;
        break;
    }
    j["beta"] = n.beta;
    if (n.r_min) j["r_min"] = *n.r_min;
    if (n.r_max) j["r_max"] = *n.r_max;
    return j;
}

GridSetup read_generate(Reader r)
{
    GridSetup g;
    g.rows = r.get<int>("rows", g.rows);
    g.cols = r.get<int>("cols", g.cols);
    g.pairs = r.get<int>("pairs", g.pairs);
    g.removed_per_vector = r.get<int>("removed_per_vector", g.removed_per_vector);
    g.cap_lo = r.get<double>("cap_lo", g.cap_lo);
    g.cap_hi = r.get<double>("cap_hi", g.cap_hi);
    g.gamma_lo = r.get<double>("gamma_lo", g.gamma_lo);
    g.gamma_hi = r.get<double>("gamma_hi", g.gamma_hi);
    g.seed = r.get<std::uint64_t>("seed", g.seed);
    if (!(g.cap_lo > 0 && g.cap_hi >= g.cap_lo)) r.fail("cap_lo", "need 0 < cap_lo <= cap_hi");
    if (!(g.gamma_lo >= 0 && g.gamma_hi >= g.gamma_lo)) r.fail("gamma_lo", "need 0 <= gamma_lo <= gamma_hi");
    r.finish();
    return g;
}

Json write_generate(const GridSetup& g)
{
    Json j;
    j["rows"] = g.rows;
    j["cols"] = g.cols;
    j["pairs"] = g.pairs;
    j["removed_per_vector"] = g.removed_per_vector;
    j["cap_lo"] = g.cap_lo;
    j["cap_hi"] = g.cap_hi;
    j["gamma_lo"] = g.gamma_lo;
    j["gamma_hi"] = g.gamma_hi;
    j["seed"] = g.seed;
    return j;
}

std::vector<PairConfig> read_pairs(Reader& r, bool iid)
{
    std::vector<PairConfig> out;
    const Json& arr = r.raw("pairs");
    if (!arr.is_array()) r.fail("pairs", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        auto path = r.sub("pairs");
        path.push_back(std::to_string(i));
        Reader p(arr[i], path, r.text());
        PairConfig pc;
        pc.source = p.require<int>("source");
        pc.destination = p.require<int>("destination");
        pc.rate = p.require<double>("rate");
        if (iid) pc.probability = p.require<double>("probability");
        if (pc.rate < 0) r.fail("pairs", "pair " + std::to_string(i) + " has a negative rate");
        if (iid && !(pc.probability >= 0 && pc.probability <= 1))
            r.fail("pairs", "pair " + std::to_string(i) + " has a probability outside [0, 1]");
        p.finish();
        out.push_back(pc);
    }
    return out;
}

AdversaryConfig read_adversary(Reader r)
{
    AdversaryConfig a;
    a.kind = enum_from(r, "kind", kAdversaryKinds);
    auto read_c = [&] {
        if (!r.has("c")) return;
        const auto rows = r.get<std::vector<std::vector<double>>>("c", {});
        if (rows.size() != 3) r.fail("c", "expected a 3x3 table");
        CTable c{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (rows[i].size() != 3) r.fail("c", "expected a 3x3 table");
            for (std::size_t j = 0; j < 3; ++j) {
                if (!(rows[i][j] >= 0)) r.fail("c", "constants must be nonnegative");
                c[i][j] = rows[i][j];
            }
        }
        a.c = c;
    };
    switch (a.kind) {
    case AdversaryConfig::Kind::exponential:
        a.n = r.require<int>("n");
        a.eps = r.require<double>("eps");
        if (a.n < 1) r.fail("n", "need n >= 1");
        if (!(a.eps > 0 && a.eps < 1)) r.fail("eps", "need 0 < eps < 1");
        break;
    case AdversaryConfig::Kind::exp1:
        a.rate_index = r.require<int>("rate_index");
        if (a.rate_index < 0 || a.rate_index > 2) r.fail("rate_index", "expected 0, 1 or 2");
        read_c();
        a.seed = r.get<std::uint64_t>("seed", a.seed);
        break;
    case AdversaryConfig::Kind::exp2:
        read_c();
        a.seed = r.get<std::uint64_t>("seed", a.seed);
        break;
    case AdversaryConfig::Kind::fixed:
        a.caps = r.require<std::vector<double>>("caps");
        a.pairs = read_pairs(r, false);
        break;
    case AdversaryConfig::Kind::iid:
        a.rate_options = r.require<std::vector<std::vector<double>>>("rate_options");
        a.weights = r.require<std::vector<double>>("weights");
        if (a.rate_options.empty() || a.weights.size() != a.rate_options.size())
            r.fail("weights", "need one weight per rate option and at least one option");
        a.pairs = read_pairs(r, true);
        a.seed = r.get<std::uint64_t>("seed", a.seed);
        break;
    case AdversaryConfig::Kind::scenario:
        a.seed = r.get<std::uint64_t>("seed", a.seed);
        a.max_nodes = r.get<int>("max_nodes", a.max_nodes);
        if (a.max_nodes < 2) r.fail("max_nodes", "need at least 2 nodes");
        break;
    }
    r.finish();
    return a;
}

Json write_pairs(const std::vector<PairConfig>& pairs, bool iid)
{
    Json arr = Json::array();
    for (const auto& p : pairs) {
        Json j;
        j["source"] = p.source;
        j["destination"] = p.destination;
        j["rate"] = p.rate;
        if (iid) j["probability"] = p.probability;
        arr.push_back(j);
    }
    return arr;
}

Json write_adversary(const AdversaryConfig& a)
{
    Json j;
    j["kind"] = enum_name(a.kind, kAdversaryKinds);
    auto write_c = [&] {
        if (!a.c) return;
        Json rows = Json::array();
        for (const auto& row : *a.c) rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
        j["c"] = rows;
    };
    switch (a.kind) {
    case AdversaryConfig::Kind::exponential:
        j["n"] = a.n;
        j["eps"] = a.eps;
        break;
    case AdversaryConfig::Kind::exp1:
        j["rate_index"] = a.rate_index;
        write_c();
        j["seed"] = a.seed;
        break;
    case AdversaryConfig::Kind::exp2:
        write_c();
        j["seed"] = a.seed;
        break;
    case AdversaryConfig::Kind::fixed:
        j["caps"] = a.caps;
        j["pairs"] = write_pairs(a.pairs, false);
        break;
    case AdversaryConfig::Kind::iid:
        j["rate_options"] = a.rate_options;
        j["weights"] = a.weights;
        j["pairs"] = write_pairs(a.pairs, true);
        j["seed"] = a.seed;
        break;
    case AdversaryConfig::Kind::scenario:
        j["seed"] = a.seed;
        j["max_nodes"] = a.max_nodes;
        break;
    }
    return j;
}

ProbeConfig read_probe(Reader r)
{
    ProbeConfig p;
    p.tol = r.get<double>("tol", p.tol);
    p.initial_hi = r.get<double>("initial_hi", p.initial_hi);
    p.max_hi = r.get<double>("max_hi", p.max_hi);
    p.check_offset = r.get<double>("check_offset", p.check_offset);
    p.slope_threshold = r.get<double>("slope_threshold", p.slope_threshold);
    p.plateau_factor = r.get<double>("plateau_factor", p.plateau_factor);
    p.jobs = r.get<int>("jobs", p.jobs);
    if (!(p.tol > 0)) r.fail("tol", "must be positive");
    if (!(p.initial_hi > 0) || p.max_hi < p.initial_hi) r.fail("initial_hi", "need 0 < initial_hi <= max_hi");
    if (p.jobs < 0) r.fail("jobs", "must be nonnegative");
    r.finish();
    return p;
}

Json write_probe(const ProbeConfig& p)
{
    Json j;
    j["tol"] = p.tol;
    j["initial_hi"] = p.initial_hi;
    j["max_hi"] = p.max_hi;
    j["check_offset"] = p.check_offset;
    j["slope_threshold"] = p.slope_threshold;
    j["plateau_factor"] = p.plateau_factor;
    j["jobs"] = p.jobs;
    return j;
}

BoundsConfig read_bounds(Reader r)
{
    BoundsConfig b;
    b.queue_counts = r.get<std::vector<int>>("queue_counts", b.queue_counts);
    b.eps = r.get<std::string>("eps", b.eps);
    b.omega = r.get<int>("omega", b.omega);
    b.r_min = r.get<std::string>("r_min", b.r_min);
    b.r_max = r.get<std::string>("r_max", b.r_max);
    if (r.has("c")) b.c = r.get<std::string>("c", "");
    b.injection_cap = r.get<int>("injection_cap", b.injection_cap);
    b.q0 = r.get<std::string>("q0", b.q0);
    b.budget = r.get<std::uint64_t>("budget", b.budget);
    r.finish();
    return b;
}

Json write_bounds(const BoundsConfig& b)
{
    Json j;
    j["queue_counts"] = b.queue_counts;
    j["eps"] = b.eps;
    j["omega"] = b.omega;
    j["r_min"] = b.r_min;
    j["r_max"] = b.r_max;
    if (b.c) j["c"] = *b.c;
    j["injection_cap"] = b.injection_cap;
    j["q0"] = b.q0;
    j["budget"] = b.budget;
    return j;
}

OutputConfig read_output(Reader r)
{
    OutputConfig o;
    o.dir = r.get<std::string>("dir", o.dir);
    o.record_stride = r.get<std::int64_t>("record_stride", o.record_stride);
    o.series_stride = r.get<std::int64_t>("series_stride", o.series_stride);
    if (o.record_stride < 1) r.fail("record_stride", "must be at least 1");
    if (o.series_stride < 1) r.fail("series_stride", "must be at least 1");
    r.finish();
    return o;
}

Json write_output(const OutputConfig& o)
{
    Json j;
    j["dir"] = o.dir;
    j["record_stride"] = o.record_stride;
    j["series_stride"] = o.series_stride;
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text)
{
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::string what = e.what();
        if (auto at = what.find("syntax error"); at != std::string::npos) what = what.substr(at);
        throw ConfigError(what, line_at(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    Reader r(root, {}, text);
    ExperimentConfig cfg;
    cfg.schema_version = r.require<int>("schema_version");
    if (cfg.schema_version != kConfigSchemaVersion)
        r.fail("schema_version", "unsupported schema version " + std::to_string(cfg.schema_version) +
                                     " (this build reads version " + std::to_string(kConfigSchemaVersion) + ")");
    if (r.has("network")) cfg.network = read_network(r.object("network"));
    if (r.has("generate")) cfg.generate = read_generate(r.object("generate"));
    if (r.has("adversary")) cfg.adversary = read_adversary(r.object("adversary"));
    if (r.has("scheduler")) {
        Reader s = r.object("scheduler");
        cfg.scheduler.eps_hat = s.get<double>("eps_hat", 0.0);
        cfg.scheduler.mode = s.has("mode")             ? enum_from(s, "mode", kApproxModes)
                             : cfg.scheduler.eps_hat > 0 ? ApproxMode::synthetic_degrade
                                                         : ApproxMode::exact;
        try {
            cfg.scheduler.validate();
        } catch (const ModelError& e) {
            s.fail("eps_hat", e.what());
        }
        s.finish();
    }
    cfg.horizon = r.get<std::int64_t>("horizon", cfg.horizon);
    if (cfg.horizon < 0) r.fail("horizon", "must be nonnegative");
    cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
    if (r.has("probe")) cfg.probe = read_probe(r.object("probe"));
    if (r.has("bounds")) cfg.bounds = read_bounds(r.object("bounds"));
    if (r.has("output")) cfg.output = read_output(r.object("output"));
    r.finish();

    const auto kind = cfg.adversary.kind;
    if ((kind == AdversaryConfig::Kind::fixed || kind == AdversaryConfig::Kind::iid) && !cfg.network)
        r.fail(std::vector<std::string>{"adversary"}, "fixed and iid adversaries need a 'network' section");
    if (cfg.network) {
        try {
            build_network(*cfg.network).validate();
        } catch (const ModelError& e) {
            r.fail(std::vector<std::string>{"network"}, e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg)
{
    Json j;
    j["schema_version"] = cfg.schema_version;
    if (cfg.network) j["network"] = write_network(*cfg.network);
    if (cfg.generate) j["generate"] = write_generate(*cfg.generate);
    j["adversary"] = write_adversary(cfg.adversary);
    j["scheduler"] = Json{{"mode", enum_name(cfg.scheduler.mode, kApproxModes)}, {"eps_hat", cfg.scheduler.eps_hat}};
    j["horizon"] = cfg.horizon;
    j["seed"] = cfg.seed;
    j["probe"] = write_probe(cfg.probe);
    j["bounds"] = write_bounds(cfg.bounds);
    j["output"] = write_output(cfg.output);
    return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() { return {"exp1", "exp2", "exp-exponential", "grid-probe", "single-edge"}; }

ExperimentConfig preset_config(const std::string& name)
{
    ExperimentConfig cfg;
    if (name == "exp1" || name == "exp2" || name == "grid-probe") {
        cfg.generate = GridSetup{};
        cfg.adversary.kind = name == "exp2" ? AdversaryConfig::Kind::exp2 : AdversaryConfig::Kind::exp1;
        cfg.horizon = 100'000;
    } else if (name == "exp-exponential") {
        cfg.adversary.kind = AdversaryConfig::Kind::exponential;
        cfg.adversary.n = 6;
        cfg.adversary.eps = 0.1;
        cfg.horizon = 10'000'000;
    } else if (name == "single-edge") {
        NetworkConfig n;
        n.kind = NetworkConfig::Kind::explicit_edges;
        n.nodes = 2;
        n.edges = {{0, 1}};
        n.destinations = {1};
        cfg.network = n;
        cfg.adversary.kind = AdversaryConfig::Kind::fixed;
        cfg.adversary.caps = {1.0};
        cfg.adversary.pairs = {PairConfig{0, 1, 1.0, 1.0}};
        cfg.horizon = 100'000;
    } else {
        std::string known;
        for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")", 0);
    }
    return cfg;
}

NetworkSpec build_network(const NetworkConfig& nc)
{
    NetworkSpec spec;
    switch (nc.kind) {
    case NetworkConfig::Kind::grid:
        spec = grid_network(nc.rows, nc.cols);
        break;
    case NetworkConfig::Kind::explicit_edges:
        spec.node_count = nc.nodes;
        for (const auto& e : nc.edges) spec.edges.push_back({e[0], e[1]});
        spec.destinations = nc.destinations;
        break;
    case NetworkConfig::Kind::parallel:
        spec = parallel_network(nc.n, 0.1);
        break;
    }
    spec.beta = nc.beta;
    if (nc.r_min) spec.r_min = *nc.r_min;
    if (nc.r_max) spec.r_max = *nc.r_max;
    return spec;
}

}  // namespace mwsim
