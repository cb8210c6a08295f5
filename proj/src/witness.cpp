#include "mwsim/witness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace mwsim {

void AdversaryParams::validate() const
{
    if (omega < 1) throw ModelError("omega must be at least 1");
    if (!(eps > 0.0 && eps < 1.0)) throw ModelError("eps must lie in (0, 1)");
}

namespace {

bool exceeds(double lhs, double rhs) { return lhs > rhs + kTolerance * std::max(1.0, std::abs(rhs)); }

ComplianceReport fail(std::string msg)
{
    ComplianceReport r;
    r.ok = false;
    r.first_violation = std::move(msg);
    return r;
}

}  // namespace

ComplianceReport check_witness_compliance(const NetworkSpec& spec, const WitnessSchedule& ws,
                                          const std::vector<InjectionEvent>& events,
                                          const std::map<Slot, RateSet>& rates, const AdversaryParams& ap)
{
    ap.validate();

    for (const auto& [slot, r] : ws.rate_vectors) {
        auto it = rates.find(slot);
        if (it == rates.end()) return fail("witness rate vector at slot " + std::to_string(slot) + " has no rate set");
        if (!rate_set_contains(it->second, spec, r)) {
            return fail("witness rate vector at slot " + std::to_string(slot) + " is not in R(t)");
        }
    }

    std::unordered_map<PacketId, const InjectionEvent*> by_id;
    for (const auto& ev : events) {
        if (!by_id.emplace(ev.packet_id, &ev).second)
            return fail("duplicate packet id " + std::to_string(ev.packet_id));
    }

    std::unordered_map<PacketId, std::vector<const WitnessMove*>> per_packet;
    std::map<std::pair<Slot, EdgeId>, double> window_load;
    for (const auto& m : ws.moves) {
        auto it = by_id.find(m.packet);
        if (it == by_id.end()) return fail("witness moves unknown packet " + std::to_string(m.packet));
        const InjectionEvent& ev = *it->second;
        if (m.edge < 0 || m.edge >= spec.edge_count())
            return fail("witness move of packet " + std::to_string(m.packet) + " uses unknown edge");
        if (m.amount < 0.0) return fail("negative witness move for packet " + std::to_string(m.packet));
        if (m.slot < ev.slot || m.slot > ev.slot + ap.omega - 1) {
            std::ostringstream os;
            os << "packet " << m.packet << " moves at slot " << m.slot << ", outside [" << ev.slot << ", "
               << ev.slot + ap.omega - 1 << "]";
            return fail(os.str());
        }
        per_packet[m.packet].push_back(&m);
        window_load[{ap.window_of(m.slot), m.edge}] += m.amount;
    }

    for (const auto& [key, load] : window_load) {
        const auto [j, e] = key;
        double cap = 0.0;
        for (Slot t = j * ap.omega; t < (j + 1) * ap.omega; ++t) {
            auto it = ws.rate_vectors.find(t);
            if (it != ws.rate_vectors.end()) cap += it->second[e];
        }
        if (exceeds(load, (1.0 - ap.eps) * cap)) {
            std::ostringstream os;
            os << "window " << j << " edge " << e << ": witness moves " << load << " > (1-eps) * " << cap;
            return fail(os.str());
        }
    }

    ComplianceReport report;
    for (const auto& ev : events) {
        ++report.packets_checked;
        if (ev.node == ev.destination) continue;
        auto it = per_packet.find(ev.packet_id);
        if (it == per_packet.end()) return fail("missing witness for packet " + std::to_string(ev.packet_id));

        auto moves = it->second;
        std::stable_sort(moves.begin(), moves.end(), [](const auto* a, const auto* b) { return a->slot < b->slot; });
        std::unordered_map<NodeId, double> held{{ev.node, ev.size}};
        std::size_t i = 0;
        while (i < moves.size()) {
            const Slot t = moves[i]->slot;
            std::size_t end = i;
            std::unordered_map<NodeId, double> out;
            while (end < moves.size() && moves[end]->slot == t) {
                out[spec.edges[moves[end]->edge].tail] += moves[end]->amount;
                ++end;
            }
            for (const auto& [v, amount] : out) {
                if (v == ev.destination) {
                    return fail("packet " + std::to_string(ev.packet_id) + " leaves its destination");
                }
                if (exceeds(amount, held[v])) {
                    std::ostringstream os;
                    os << "packet " << ev.packet_id << " sends " << amount << " from node " << v << " at slot " << t
                       << " but holds " << held[v];
                    return fail(os.str());
                }
            }
            for (std::size_t k = i; k < end; ++k) {
                const Edge& e = spec.edges[moves[k]->edge];
                held[e.tail] -= moves[k]->amount;
                held[e.head] += moves[k]->amount;
            }
            i = end;
        }
        const double delivered = held[ev.destination];
        if (exceeds((1.0 - ap.eps / 2.0) * ev.size, delivered)) {
            std::ostringstream os;
            os << "packet " << ev.packet_id << " delivers " << delivered << " of " << ev.size << " within its window";
            return fail(os.str());
        }
    }
    return report;
}

}  // namespace mwsim
