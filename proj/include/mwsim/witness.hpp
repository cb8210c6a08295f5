#pragma once

#include <map>
#include <string>
#include <vector>

#include "mwsim/net_model.hpp"

namespace mwsim {

struct AdversaryParams {
    int omega = 1;
    double eps = 0.1;

    void validate() const;

    /// Window index j with slot t in [j*omega, (j+1)*omega - 1].
    Slot window_of(Slot t) const { return t / omega; }
};

/// One fractional hop of the witness: `amount` of packet `packet` crosses
/// `edge` during `slot`.
struct WitnessMove {
    PacketId packet = 0;
    EdgeId edge = 0;
    Slot slot = 0;
    double amount = 0.0;
};

/// The adversary's feasibility certificate: the rate vector it claims to use
/// in each slot and the per-packet movements it makes with them.
struct WitnessSchedule {
    std::map<Slot, RateVector> rate_vectors;
    std::vector<WitnessMove> moves;
};

struct ComplianceReport {
    bool ok = true;
    std::string first_violation;
    std::size_t packets_checked = 0;
};

/// Checks every packet and window against the (omega, eps) conditions: each
/// packet delivers at least (1 - eps/2) of its size within
/// [t_p, t_p + omega - 1] while conserving flow at intermediate nodes; per
/// window and edge, moves by packets of the current and previous window stay
/// within (1 - eps) times the witness's rate summed over the window; every
/// witness rate vector belongs to that slot's rate set.
ComplianceReport check_witness_compliance(const NetworkSpec& spec, const WitnessSchedule& ws,
                                          const std::vector<InjectionEvent>& events,
                                          const std::map<Slot, RateSet>& rates, const AdversaryParams& ap);

}  // namespace mwsim
