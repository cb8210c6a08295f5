#include "mwsim/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace mwsim {

std::optional<int> NetworkSpec::dest_index(NodeId node) const
{
    auto it = std::find(destinations.begin(), destinations.end(), node);
    if (it == destinations.end()) return std::nullopt;
    return static_cast<int>(it - destinations.begin());
}

void NetworkSpec::validate() const
{
    if (node_count <= 0) throw ModelError("network must have at least one node");
    if (!(beta > 0.0)) throw ModelError("beta must be positive");
    if (!(r_min > 0.0)) throw ModelError("r_min must be positive");
    if (r_max < r_min) throw ModelError("r_max must be >= r_min");

    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.tail < 0 || e.tail >= node_count || e.head < 0 || e.head >= node_count) {
            std::ostringstream os;
            os << "edge " << i << " references a node outside [0, " << node_count << ")";
            throw ModelError(os.str());
        }
        if (e.tail == e.head) {
            std::ostringstream os;
            os << "edge " << i << " is a self-loop on node " << e.tail;
            throw ModelError(os.str());
        }
        if (!seen.insert({e.tail, e.head}).second) {
            std::ostringstream os;
            os << "duplicate edge (" << e.tail << ", " << e.head << ")";
            throw ModelError(os.str());
        }
    }
    std::set<NodeId> dests;
    for (NodeId d : destinations) {
        if (d < 0 || d >= node_count) throw ModelError("destination " + std::to_string(d) + " is not a node");
        if (!dests.insert(d).second) throw ModelError("duplicate destination " + std::to_string(d));
    }
}

QueueMatrix::QueueMatrix(int nodes, int dests)
    : nodes_(nodes), dests_(dests), q_(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(dests), 0.0)
{
}

QueueMatrix::QueueMatrix(const NetworkSpec& spec) : QueueMatrix(spec.node_count, spec.dest_count()) {}

double QueueMatrix::total() const { return std::accumulate(q_.begin(), q_.end(), 0.0); }

double QueueMatrix::max() const
{
    double m = 0.0;
    for (double x : q_) m = std::max(m, x);
    return m;
}

ScheduleDecision ScheduleDecision::idle(int edge_count)
{
    const auto k = static_cast<std::size_t>(edge_count);
    return ScheduleDecision{RateVector(k, 0.0), std::vector<int>(k, -1), std::vector<double>(k, 0.0), 0.0};
}

namespace {

void check_length(std::span<const double> r, const NetworkSpec& spec, const char* what)
{
    if (r.size() != spec.edges.size()) {
        std::ostringstream os;
        os << what << " has " << r.size() << " components, network has " << spec.edges.size() << " edges";
        throw ModelError(os.str());
    }
}

void check_bounds(std::span<const double> r, const NetworkSpec& spec, const char* what)
{
    for (std::size_t e = 0; e < r.size(); ++e) {
        const double x = r[e];
        if (x < 0.0 || (x != 0.0 && (x < spec.r_min - kTolerance || x > spec.r_max + kTolerance))) {
            std::ostringstream os;
            os << what << " component " << e << " = " << x << " outside {0} U [" << spec.r_min << ", "
               << spec.r_max << "]";
            throw ModelError(os.str());
        }
    }
}

bool touches(const Edge& a, const Edge& b)
{
    return a.tail == b.tail || a.tail == b.head || a.head == b.tail || a.head == b.head;
}

}  // namespace

void validate_rate_set(const RateSet& rs, const NetworkSpec& spec)
{
    if (const auto* ev = std::get_if<ExplicitVectors>(&rs)) {
        for (const auto& v : ev->vectors) {
            check_length(v, spec, "rate vector");
            check_bounds(v, spec, "rate vector");
        }
    } else {
        const auto& mf = std::get<MatchingFamily>(rs);
        check_length(mf.caps, spec, "matching caps");
        check_bounds(mf.caps, spec, "matching caps");
    }
}

bool rate_set_contains(const RateSet& rs, const NetworkSpec& spec, std::span<const double> r, double tol)
{
    if (r.size() != spec.edges.size()) return false;
    for (double x : r)
        if (x < -tol) return false;

    if (const auto* ev = std::get_if<ExplicitVectors>(&rs)) {
        const bool all_zero = std::all_of(r.begin(), r.end(), [tol](double x) { return x <= tol; });
        if (all_zero) return true;
        for (const auto& v : ev->vectors) {
            bool dominated = true;
            for (std::size_t e = 0; e < r.size() && dominated; ++e) dominated = r[e] <= v[e] + tol;
            if (dominated) return true;
        }
        return false;
    }

    const auto& caps = std::get<MatchingFamily>(rs).caps;
    std::vector<EdgeId> active;
    for (std::size_t e = 0; e < r.size(); ++e) {
        if (r[e] <= tol) continue;
        if (r[e] > caps[e] + tol) return false;
        active.push_back(static_cast<EdgeId>(e));
    }
    for (std::size_t i = 0; i < active.size(); ++i)
        for (std::size_t j = i + 1; j < active.size(); ++j)
            if (touches(spec.edges[active[i]], spec.edges[active[j]])) return false;
    return true;
}

std::vector<RateVector> enumerate_rate_vectors(const RateSet& rs, const NetworkSpec& spec, std::size_t limit)
{
    if (const auto* ev = std::get_if<ExplicitVectors>(&rs)) {
        if (ev->vectors.size() > limit)
            throw EnumerationLimitError("explicit rate set has more vectors than the enumeration limit");
        return ev->vectors;
    }

    const auto& caps = std::get<MatchingFamily>(rs).caps;
    const auto k = spec.edges.size();
    std::vector<EdgeId> usable;
    for (std::size_t e = 0; e < k; ++e)
        if (caps[e] > 0.0) usable.push_back(static_cast<EdgeId>(e));

    std::vector<RateVector> out;
    std::vector<int> node_busy(static_cast<std::size_t>(spec.node_count), 0);
    RateVector current(k, 0.0);

    // Depth-first over edges with increasing index: yields matchings in
    // lexicographic order of their sorted edge lists.
    std::function<void(std::size_t)> extend = [&](std::size_t from) {
        if (out.size() >= limit)
            throw EnumerationLimitError("matching family has more matchings than the enumeration limit");
        out.push_back(current);
        for (std::size_t i = from; i < usable.size(); ++i) {
            const Edge& e = spec.edges[usable[i]];
            if (node_busy[e.tail] || node_busy[e.head]) continue;
            node_busy[e.tail] = node_busy[e.head] = 1;
            current[usable[i]] = caps[usable[i]];
            extend(i + 1);
            current[usable[i]] = 0.0;
            node_busy[e.tail] = node_busy[e.head] = 0;
        }
    };
    extend(0);
    return out;
}

double queue_power(double x, double beta)
{
    if (beta == 1.0) return x;
    if (beta == 2.0) return x * x;
    return std::pow(x, beta);
}

double potential(const QueueMatrix& q, double beta)
{
    double p = 0.0;
    for (double x : q.values()) p += queue_power(x, beta + 1.0);
    return p;
}

double decision_objective(const QueueMatrix& q, const NetworkSpec& spec, const ScheduleDecision& dec)
{
    double j = 0.0;
    for (std::size_t e = 0; e < spec.edges.size(); ++e) {
        const int d = dec.dest[e];
        if (d < 0 || dec.transfer[e] == 0.0) continue;
        const Edge& edge = spec.edges[e];
        j += dec.transfer[e] * (queue_power(q(edge.tail, d), spec.beta) - queue_power(q(edge.head, d), spec.beta));
    }
    return j;
}

double pin_destinations(QueueMatrix& q, const NetworkSpec& spec)
{
    double removed = 0.0;
    for (int d = 0; d < spec.dest_count(); ++d) {
        double& self = q.at(spec.destinations[d], d);
        removed += self;
        self = 0.0;
    }
    return removed;
}

double apply_decision(QueueMatrix& q, const NetworkSpec& spec, const ScheduleDecision& dec)
{
    const auto k = spec.edges.size();
    if (dec.transfer.size() != k || dec.dest.size() != k || dec.rates.size() != k)
        throw ModelError("decision dimensions do not match the network");

    QueueMatrix next = q;
    for (std::size_t e = 0; e < k; ++e) {
        const double s = dec.transfer[e];
        if (s == 0.0) continue;
        const int d = dec.dest[e];
        if (s < 0.0 || d < 0 || d >= spec.dest_count()) {
            std::ostringstream os;
            os << "edge " << e << " carries transfer " << s << " with destination index " << d;
            throw ModelError(os.str());
        }
        const Edge& edge = spec.edges[e];
        const double qv = q(edge.tail, d);
        const double qu = q(edge.head, d);
        if (qv < qu - kTolerance || s > dec.rates[e] + kTolerance || s > (qv - qu) / 2.0 + kTolerance) {
            std::ostringstream os;
            os << "edge " << e << " transfer " << s << " exceeds min{r_e=" << dec.rates[e] << ", (q_v-q_u)/2="
               << (qv - qu) / 2.0 << "}";
            throw ModelError(os.str());
        }
        next.at(edge.tail, d) -= s;
        next.at(edge.head, d) += s;
    }
    for (NodeId v = 0; v < next.nodes(); ++v) {
        for (int d = 0; d < next.dests(); ++d) {
            double& x = next.at(v, d);
            if (x < -kTolerance) {
                std::ostringstream os;
                os << "decision drives queue (" << v << ", dest " << spec.destinations[d] << ") to " << x;
                throw ModelError(os.str());
            }
            if (x < 0.0) x = 0.0;
        }
    }
    const double delivered = pin_destinations(next, spec);
    q = std::move(next);
    return delivered;
}

double apply_injections(QueueMatrix& q, const NetworkSpec& spec, std::span<const InjectionEvent> events)
{
    double absorbed = 0.0;
    for (const auto& ev : events) {
        if (!(ev.size > 0.0)) throw ModelError("injection of packet " + std::to_string(ev.packet_id) + " has size <= 0");
        if (ev.node < 0 || ev.node >= spec.node_count)
            throw ModelError("injection of packet " + std::to_string(ev.packet_id) + " at unknown node");
        const auto d = spec.dest_index(ev.destination);
        if (!d) throw ModelError("injection of packet " + std::to_string(ev.packet_id) + " to a non-destination");
        if (ev.node == ev.destination) {
            absorbed += ev.size;
            continue;
        }
        q.at(ev.node, *d) += ev.size;
    }
    return absorbed;
}

}  // namespace mwsim
