#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwsim/engine.hpp"
#include "mwsim/net_model.hpp"
#include "mwsim/scheduler.hpp"
#include "mwsim/witness.hpp"

namespace mwsim {

class AuditError : public ModelError {
public:
    using ModelError::ModelError;
};

/// d_{p,e}(t'): the part of the witness rate r'_e(t') reserved for packet p.
struct RateShare {
    PacketId packet = 0;
    EdgeId edge = 0;
    Slot slot = 0;
    double amount = 0.0;
};

struct RateShareAllocation {
    Slot window = 0;
    std::vector<RateShare> shares;

    double total(PacketId p, EdgeId e) const;
};

/// Water-filling for window j: packets of I^j and I^{j-1} in injection order
/// (slot, then id); for each edge a packet moves on inside W_j, reserve
/// (sum of its moves in W_j) / (1 - eps) from the residual witness rates,
/// earliest slot first. Throws AuditError naming the edge if the residual
/// runs out.
RateShareAllocation water_fill_shares(const NetworkSpec& spec, const WitnessSchedule& ws,
                                      std::span<const InjectionEvent> events, const AdversaryParams& ap, Slot window);

/// One protocol transfer credited to a packet.
struct GammaShare {
    PacketId packet = 0;
    EdgeId edge = 0;
    int dest = -1;  // protocol's destination index on that edge
    Slot slot = 0;
    double amount = 0.0;
    double differential = 0.0;  // q_v^beta - q_u^beta for (edge, dest) at the start of the slot
};

/// Per-packet demand entering one slot's assignment.
struct PacketDemand {
    PacketId packet = 0;
    int dest = 0;                                   // packet's destination index
    std::vector<std::pair<EdgeId, double>> rates;   // d_{p,e}(t') > 0
};

/// State of one slot as the protocol saw it.
struct SlotContext {
    Slot slot = 0;
    const QueueMatrix* before = nullptr;
    const ScheduleDecision* decision = nullptr;
    const RateVector* witness_rates = nullptr;  // r'(t'); null means all zero
    double exact_objective = 0.0;               // J of the exact Max-Weight decision
    double eps_hat = 0.0;                       // approximation slack of the logged decision
};

struct SlotAssignment {
    Slot slot = 0;
    std::vector<double> k_plus;     // per edge: sum_i d_{i,e} max(0, Delta_{e,d_i})
    std::vector<double> k_hat;      // per edge: min(k_plus, w_e(r'_e))
    std::vector<double> w_witness;  // per edge: edge_weight at the witness rate
    double sum_k_plus = 0.0;
    double sum_k = 0.0;             // sum of k_hat, scaled by (1 - eps_hat)
    double sum_w_witness = 0.0;
    double objective = 0.0;         // J (or J' for a degraded decision)
    double exact_objective = 0.0;
    double weighted_shares = 0.0;   // sum over shares of amount * differential
    double min_residual = 0.0;
    int clamped_edges = 0;
    std::vector<GammaShare> shares;
};

/// Splits the protocol's transfers of one slot among packets. Protocol edges
/// are visited in network order and packets in the given order; each step
/// takes min{J_res / Delta_j, s_res_j, K_res_i / Delta_j}. Throws AuditError
/// if any residual falls below -1e-9.
SlotAssignment assign_slot_shares(const NetworkSpec& spec, const SlotContext& ctx,
                                  std::span<const PacketDemand> demands);

/// Explicit O(q^{beta-1}) slack for beta = 1:
/// omega * links * r_max * 2 n r_max * omega.
double explicit_c(int omega, int max_links, double r_max, int node_count);

/// (4 - 2 eps) / ((2 eps + eps^2) ell) * (C + 1).
double q_star(double eps, double ell, double c);

/// (m/2) (sum of gaps)^2.
double small_link_transfer_bound(std::span<const double> gaps);

struct ChainRun {
    double mass = 0.0;            // sum of s_e over all transfers
    double potential_drop = 0.0;  // sum of q^2 at the start minus at the end
    Slot slots = 0;
    bool quiescent = false;
};

/// Max-Weight (beta = 1) on a path of queues for one destination that no
/// queue can reach, so only link transfers happen. Both directions of each
/// link have cap `rate`; runs until the objective drops below `stop` or
/// `max_slots` pass.
ChainRun run_small_link_chain(std::span<const double> heights, double rate, double stop = 1e-12,
                              Slot max_slots = 1'000'000);

enum class PacketClass { good, bad };

/// Bad iff delta >= -(eps / (1 - eps/2)) ell q + C + 1.
PacketClass classify_bad_packet(double delta, double ell, double q, double eps, double c);

/// [(q + ell)^{beta+1} - q^{beta+1}] - (beta + 1) * sum(amount * differential).
/// Zero for packets injected at their own destination.
double per_packet_potential_delta(const InjectionEvent& p, std::span<const GammaShare> gamma, double height,
                                  double beta, bool at_destination);

struct PacketAudit {
    InjectionEvent event;
    double height = 0.0;
    double credit = 0.0;  // sum of amount * differential over the packet's shares
    double delta = 0.0;
    double bound = 0.0;   // -(eps/(1-eps/2)) ell (beta+1) q^beta + C; NaN when beta != 1
    bool bound_checked = false;
    bool within_bound = true;
    PacketClass cls = PacketClass::good;
};

struct AuditOptions {
    std::optional<double> c_override;
    double eps_hat = 0.0;
};

struct AuditReport {
    AdversaryParams params;
    double eps_effective = 0.0;  // eps, or (eps - eps_hat) / (1 - eps_hat) for a degraded run
    double c = 0.0;
    int max_links = 0;
    ComplianceReport compliance;
    std::vector<SlotAssignment> slots;
    std::vector<PacketAudit> packets;
    std::size_t bad_packets = 0;
    std::size_t bound_violations = 0;
    std::size_t share_violations = 0;
    std::size_t equality_violations = 0;
    std::size_t domination_violations = 0;
    std::vector<std::string> notes;

    bool passed() const
    {
        return compliance.ok && bad_packets == 0 && bound_violations == 0 && share_violations == 0 &&
               equality_violations == 0 && domination_violations == 0;
    }
};

/// Full audit of a trace recorded with RunOptions::audit. Windows are
/// audited while they lie entirely inside the run; packets are audited when
/// their whole lifetime [t_p, t_p + omega - 1] does.
AuditReport audit_trace(const NetworkSpec& spec, const SimulationTrace& trace, const AdversaryParams& ap,
                        const AuditOptions& opts = {});

}  // namespace mwsim
