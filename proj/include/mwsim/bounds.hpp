#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mwsim/net_model.hpp"
#include "mwsim/witness.hpp"

namespace mwsim {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

class BudgetExceeded : public ModelError {
public:
    using ModelError::ModelError;
};

/// Parses "3", "-2/7" or a decimal such as "0.125" exactly.
Rational parse_rational(const std::string& text);

/// Decimal rendering to `digits` significant figures, for humans.
std::string approx_string(const Rational& x, int digits = 6);

struct BoundInputs {
    int queue_count = 1;
    Rational eps{1, 10};
    int omega = 1;
    Rational r_min{1};
    Rational r_max{1};
    Rational c{0};
    int injection_cap = 1;  // packets per window
    Rational q0{0};
    std::uint64_t budget = 1'000'000;  // maximum number of U(., ., 0) evaluations
};

struct LadderLevel {
    int k = 0;
    std::vector<Rational> s;  // S_1 .. S_k
    std::vector<Rational> l;  // L_1 .. L_k
    Rational m;               // M_k
};

struct BoundConstants {
    Rational c;
    Rational q_star;
    Rational p0;
    std::vector<LadderLevel> ladder;  // k = 1 .. n-1, then M_n = 0
    std::vector<Rational> m;          // M_1 .. M_n
    Rational ineq_rhs;                // (n-1) M_1^2 + max{n q0^2, n M_1^2 + 2 sqrt(n) R_max M_1 + R_max^2}
    BigInt max_queue_bound;           // U(n, q0, 0) = ceil(sqrt(ineq_rhs))
    std::map<std::pair<int, std::string>, BigInt> u_table;  // (queue count, q0) -> U(., q0, 0)
    std::uint64_t evaluations = 0;
};

/// Constant ladder for n = queue_count with exact rationals. U(m, q, b)
/// for m >= 2 iterates U(m, q, i) = U(m, U(m, q, i-1) + R_max, 0) with
/// U(m, q, 0) = ceil(sqrt(ineq_rhs(m, q))); U(1, q, b) = q. Bad-injection
/// budgets are rounded up to integers and square roots to rational upper
/// bounds. Throws BudgetExceeded when the work would exceed inputs.budget.
BoundConstants compute_bound_constants(const BoundInputs& in);

/// U(m, q, b) alone, with the ladder for m built from `in` (queue_count is
/// ignored). Same budget rule as above.
Rational bound_u(const BoundInputs& in, int m, const Rational& q, const BigInt& b);

/// Wrapper taking the queue count as node_count * |D| and C from explicit_c
/// with |E| links per packet.
BoundConstants compute_bound_constants(const NetworkSpec& spec, const AdversaryParams& ap, const Rational& q0,
                                       int injection_cap, std::uint64_t budget = 1'000'000);

}  // namespace mwsim
