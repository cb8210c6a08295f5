#pragma once

#include <optional>

#include "mwsim/net_model.hpp"
#include "mwsim/rng.hpp"

namespace mwsim {

struct EdgeWeight {
    double weight = 0.0;
    double transfer = 0.0;
    std::optional<int> dest;  // destination index; empty when nothing moves
};

/// Best single-commodity use of edge e at rate `rate`: the destination
/// maximizing s_e * (q_v^beta - q_u^beta) with s_e = min{rate, (q_v - q_u)/2}.
/// Ties go to the lowest destination index. Weight is 0 and dest empty when
/// no commodity has a positive differential.
EdgeWeight edge_weight(const QueueMatrix& q, const NetworkSpec& spec, EdgeId e, double rate);

/// Max-Weight(beta) decision. Explicit rate sets and small matching families
/// are enumerated, with ties broken toward the lexicographically smallest set
/// of transmitting edges. Larger matching families go through the blossom
/// solver on the undirected support.
ScheduleDecision max_weight_exact(const QueueMatrix& q, const NetworkSpec& spec, const RateSet& rs);

/// Matching families with at most this many usable undirected edges are
/// enumerated rather than solved by blossom.
inline constexpr int kEnumerateMatchingEdges = 8;

enum class ApproxMode { exact, synthetic_degrade };

struct ApproxParams {
    double eps_hat = 0.0;
    ApproxMode mode = ApproxMode::exact;

    void validate() const;
};

/// Exact decision degraded on one uniformly chosen transmitting edge. The
/// edge's rate and transfer shrink together so that the objective falls by
/// min{w_e, eps_hat * J} (times 1 - 1e-12), keeping J' >= (1 - eps_hat) J.
ScheduleDecision max_weight_approx(const QueueMatrix& q, const NetworkSpec& spec, const RateSet& rs,
                                   const ApproxParams& ap, Rng& rng);

}  // namespace mwsim
