#include "mwsim/adversaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mwsim {

namespace {

using i128 = __int128;

// ceil(sum_{j=1}^{i} 1.5^j) = ceil(3 (3^i - 2^i) / 2^i), exact for i <= 70.
Slot phase_end(int i)
{
    i128 p3 = 1;
    i128 p2 = 1;
    for (int k = 0; k < i; ++k) {
        p3 *= 3;
        p2 *= 2;
    }
    const i128 num = 3 * (p3 - p2);
    return static_cast<Slot>((num + p2 - 1) / p2);
}

constexpr int kMaxPhase = 70;

const std::array<Slot, kMaxPhase + 1>& phase_ends()
{
    static const auto table = [] {
        std::array<Slot, kMaxPhase + 1> ends{};
        for (int i = 1; i <= kMaxPhase; ++i) ends[i] = phase_end(i);
        return ends;
    }();
    return table;
}

}  // namespace

int phase_index(Slot t)
{
    if (t < 1) throw ModelError("phase_index requires t >= 1");
    const auto& ends = phase_ends();
    auto it = std::lower_bound(ends.begin() + 1, ends.end(), t);
    if (it == ends.end()) throw ModelError("slot beyond the last representable phase");
    return static_cast<int>(it - ends.begin());
}

Slot phase_start(int phase)
{
    if (phase < 1 || phase > kMaxPhase) throw ModelError("phase out of range");
    return phase_ends()[phase - 1] + 1;
}

NetworkSpec parallel_network(int n, double eps)
{
    if (n < 1) throw ModelError("parallel network needs at least one edge");
    NetworkSpec spec;
    spec.node_count = 2 * n;
    for (int i = 0; i < n; ++i) {
        spec.edges.push_back({2 * i, 2 * i + 1});
        spec.destinations.push_back(2 * i + 1);
    }
    spec.beta = 1.0;
    spec.r_min = (1.0 - eps) / 2.0;
    spec.r_max = 1.0;
    return spec;
}

ExponentialStep exponential_adversary_step(Slot t, const QueueMatrix& q, int n, double eps, PacketId next_id)
{
    ExponentialStep step;
    double threshold = 1.0 - eps;
    for (int i = 0; i < n; ++i, threshold *= 2.0) {
        if (q(2 * i, i) < threshold) {
            step.target = i;
            break;
        }
    }
    if (step.target < 0) return step;

    const int i = step.target;
    const auto k = static_cast<std::size_t>(n);
    ExplicitVectors ev;
    RateVector witness(k, 0.0);
    double size = 0.0;
    if (i == 0) {
        RateVector r(k, 0.0);
        r[0] = 1.0;
        ev.vectors.push_back(r);
        witness[0] = 1.0;
        size = 1.0 - eps;
    } else {
        RateVector lower(k, 0.0);
        lower[i - 1] = 1.0 - eps;
        RateVector upper(k, 0.0);
        upper[i] = (1.0 - eps) / 2.0;
        ev.vectors.push_back(lower);
        ev.vectors.push_back(upper);
        witness[i] = (1.0 - eps) / 2.0;
        size = (1.0 - eps) * (1.0 - eps) / 2.0;
    }
    step.rates = std::move(ev);
    step.injection = InjectionEvent{next_id, t, 2 * i, 2 * i + 1, size};
    step.witness = std::move(witness);
    return step;
}

ExponentialAdversary::ExponentialAdversary(int n, double eps) : n_(n), eps_(eps), spec_(parallel_network(n, eps))
{
    AdversaryParams{1, eps}.validate();
}

std::optional<SlotInput> ExponentialAdversary::step(Slot t, const QueueMatrix& q)
{
    ExponentialStep s = exponential_adversary_step(t, q, n_, eps_, next_id_);
    if (s.target < 0) return std::nullopt;
    ++next_id_;
    SlotInput in;
    in.rates = std::move(s.rates);
    in.injections.push_back(s.injection);
    in.witness_moves.push_back(WitnessMove{s.injection.packet_id, s.target, t, s.injection.size});
    in.witness_rates = std::move(s.witness);
    return in;
}

std::vector<InjectionEvent> pair_injections(Slot t, const std::vector<TrafficPair>& pairs,
                                            const std::vector<double>& sizes, PacketId& next_id)
{
    std::vector<InjectionEvent> out;
    for (std::size_t m = 0; m < pairs.size(); ++m) {
        if (sizes[m] <= 0.0) continue;
        out.push_back(InjectionEvent{next_id++, t, pairs[m].source, pairs[m].destination, sizes[m]});
    }
    return out;
}

FixedAdversary::FixedAdversary(RateSet rates, std::vector<TrafficPair> pairs, std::vector<double> sizes)
    : rates_(std::move(rates)), pairs_(std::move(pairs)), sizes_(std::move(sizes))
{
    if (pairs_.size() != sizes_.size()) throw ModelError("one injection size per traffic pair is required");
}

std::optional<SlotInput> FixedAdversary::step(Slot t, const QueueMatrix&)
{
    SlotInput in;
    in.rates = rates_;
    in.injections = pair_injections(t, pairs_, sizes_, next_id_);
    return in;
}

namespace {

std::vector<double> scaled(const std::vector<double>& gamma, double c)
{
    std::vector<double> out(gamma.size());
    for (std::size_t m = 0; m < gamma.size(); ++m) out[m] = c * gamma[m];
    return out;
}

}  // namespace

CyclicArrivalAdversary::CyclicArrivalAdversary(CyclicConfig cfg, int rate_index)
    : cfg_(std::move(cfg)), rate_index_(rate_index)
{
    if (rate_index < 0 || rate_index > 2) throw ModelError("rate index must be 0, 1 or 2");
}

std::optional<SlotInput> CyclicArrivalAdversary::step(Slot t, const QueueMatrix&)
{
    const int phase = phase_index(std::max<Slot>(t, 1));
    const int j = (phase - 1) % 3;
    SlotInput in;
    in.rates = MatchingFamily{cfg_.caps[rate_index_]};
    in.injections = pair_injections(t, cfg_.pairs, scaled(cfg_.gammas[j], cfg_.c[rate_index_][j]), next_id_);
    return in;
}

CyclicEdgeArrivalAdversary::CyclicEdgeArrivalAdversary(CyclicConfig cfg) : cfg_(std::move(cfg)) {}

std::pair<int, int> CyclicEdgeArrivalAdversary::phase_choice(int phase) const
{
    const int i = (phase - 1) % 3;
    const int j = static_cast<int>(mix64(cfg_.seed ^ mix64(static_cast<std::uint64_t>(phase))) % 3);
    return {i, j};
}

std::optional<SlotInput> CyclicEdgeArrivalAdversary::step(Slot t, const QueueMatrix&)
{
    const auto [i, j] = phase_choice(phase_index(std::max<Slot>(t, 1)));
    SlotInput in;
    in.rates = MatchingFamily{cfg_.caps[i]};
    in.injections = pair_injections(t, cfg_.pairs, scaled(cfg_.gammas[j], cfg_.c[i][j]), next_id_);
    return in;
}

IidAdversary::IidAdversary(std::vector<RateSet> options, std::vector<double> weights, std::vector<IidArrival> arrivals,
                           std::uint64_t seed)
    : options_(std::move(options)), arrivals_(std::move(arrivals)), rng_(seed)
{
    if (options_.empty() || options_.size() != weights.size())
        throw ModelError("i.i.d. adversary needs one weight per rate-set option");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw ModelError("rate-set weights must have a positive sum");
    double acc = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ModelError("rate-set weights must be nonnegative");
        acc += w / total;
        cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
}

std::optional<SlotInput> IidAdversary::step(Slot t, const QueueMatrix&)
{
    const double u = uniform01(rng_);
    std::size_t pick = 0;
    while (u >= cumulative_[pick]) ++pick;
    SlotInput in;
    in.rates = options_[pick];
    for (const auto& a : arrivals_) {
        if (uniform01(rng_) < a.probability)
            in.injections.push_back(InjectionEvent{next_id_++, t, a.pair.source, a.pair.destination, a.size});
    }
    return in;
}

ScriptedAdversary::ScriptedAdversary(std::vector<SlotInput> script, bool with_witness)
    : script_(std::move(script)), with_witness_(with_witness)
{
}

std::optional<SlotInput> ScriptedAdversary::step(Slot t, const QueueMatrix&)
{
    if (t < 0 || static_cast<std::size_t>(t) >= script_.size()) return std::nullopt;
    return script_[static_cast<std::size_t>(t)];
}

}  // namespace mwsim
