#include "mwsim/bounds.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "mwsim/auditor.hpp"

namespace mwsim {

namespace mp = boost::multiprecision;

Rational parse_rational(const std::string& text)
{
    auto bad = [&] { return ModelError("not a rational number: '" + text + "'"); };
    if (text.empty()) throw bad();
    if (auto slash = text.find('/'); slash != std::string::npos) {
        const Rational num = parse_rational(text.substr(0, slash));
        const Rational den = parse_rational(text.substr(slash + 1));
        if (den == 0) throw ModelError("zero denominator in '" + text + "'");
        return num / den;
    }
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
    BigInt digits = 0;
    BigInt scale = 1;
    bool seen_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '.' && !seen_point) {
            seen_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(ch))) throw bad();
        seen_digit = true;
        digits = digits * 10 + (ch - '0');
        if (seen_point) scale *= 10;
    }
    if (!seen_digit) throw bad();
    Rational r(digits, scale);
    return negative ? Rational(-r) : r;
}

std::string approx_string(const Rational& x, int digits)
{
    if (x == 0) return "0";
    const Rational ax = x < 0 ? Rational(-x) : x;
    if (ax < Rational(BigInt(1) << 900) && ax > Rational(1, BigInt(1) << 900)) {
        std::ostringstream os;
        os.precision(digits);
        os << x.convert_to<double>();
        return os.str();
    }
    const BigInt whole = mp::numerator(ax) / mp::denominator(ax);
    const std::string s = whole.str();
    std::string out = x < 0 ? "-" : "";
    out += s.substr(0, 1);
    if (digits > 1 && s.size() > 1) out += "." + s.substr(1, static_cast<std::size_t>(digits - 1));
    out += "e+" + std::to_string(s.size() - 1);
    return out;
}

namespace {

BigInt ceil_rational(const Rational& r)
{
    const BigInt& n = mp::numerator(r);
    const BigInt& d = mp::denominator(r);
    BigInt q = n / d;
    if (q * d < n) q += 1;
    return q;
}

BigInt ceil_sqrt(const BigInt& c)
{
    if (c <= 0) return 0;
    BigInt k = mp::sqrt(c);
    if (k * k < c) k += 1;
    return k;
}

class Calculator {
public:
    explicit Calculator(const BoundInputs& in) : in_(in)
    {
        q_star_ = (Rational(4) - 2 * in.eps) / ((2 * in.eps + in.eps * in.eps) * in.r_min) * (in.c + 1);
        p0_ = Rational(in.injection_cap) * (2 * in.r_max * q_star_ + in.r_max * in.r_max);
    }

    const Rational& q_star() const { return q_star_; }
    const Rational& p0() const { return p0_; }
    std::uint64_t evaluations() const { return evaluations_; }
    const std::map<std::pair<int, std::string>, BigInt>& u_table() const { return u_table_; }

    struct Ladder {
        std::vector<LadderLevel> levels;
        std::vector<Rational> m;  // m[0] = M_1 .. m[n-1] = M_n
    };

    const Ladder& ladder(int n)
    {
        if (auto it = ladders_.find(n); it != ladders_.end()) return it->second;
        Ladder lad;
        lad.m.assign(static_cast<std::size_t>(n), Rational(0));
        for (int k = n - 1; k >= 1; --k) {
            LadderLevel level;
            level.k = k;
            const Rational& m_next = lad.m[static_cast<std::size_t>(k)];
            Rational l_sum = 0;
            for (int j = 1; j <= k; ++j) {
                const BigInt b = ceil_rational(Rational(j - 1, 2) * l_sum * l_sum);
                const Rational s = u(n - k, m_next, b);
                const Rational l = Rational(2 * (n - k)) * s * s / in_.eps;
                level.s.push_back(s);
                level.l.push_back(l);
                l_sum += l;
            }
            level.m = level.l.back() / in_.r_min + level.s.back() + 2 * p0_ / (in_.eps * in_.r_min);
            lad.m[static_cast<std::size_t>(k - 1)] = level.m;
            lad.levels.push_back(std::move(level));
        }
        std::reverse(lad.levels.begin(), lad.levels.end());
        return ladders_.emplace(n, std::move(lad)).first->second;
    }

    Rational ineq_rhs(int n, const Rational& q0)
    {
        const Rational& m1 = ladder(n).m.front();
        const Rational tall = Rational(n) * m1 * m1 + 2 * sqrt_upper(n) * in_.r_max * m1 + in_.r_max * in_.r_max;
        const Rational start = Rational(n) * q0 * q0;
        return Rational(n - 1) * m1 * m1 + (start > tall ? start : tall);
    }

    Rational u0(int n, const Rational& q0)
    {
        if (n == 1) return q0;
        if (++evaluations_ > in_.budget) throw BudgetExceeded(budget_message());
        const BigInt v = ceil_sqrt(ceil_rational(ineq_rhs(n, q0)));
        u_table_.emplace(std::make_pair(n, q0.str()), v);
        return Rational(v);
    }

    Rational u(int n, const Rational& q0, const BigInt& b)
    {
        if (n == 1) return q0;
        if (b > BigInt(in_.budget - std::min(evaluations_, in_.budget))) throw BudgetExceeded(budget_message());
        Rational x = u0(n, q0);
        for (BigInt i = 0; i < b; ++i) x = u0(n, x + in_.r_max);
        return x;
    }

private:
    static Rational sqrt_upper(int n)
    {
        const BigInt scaled = ceil_sqrt(BigInt(n) << 64);
        return Rational(scaled, BigInt(1) << 32);
    }

    std::string budget_message() const
    {
        std::ostringstream os;
        os << "budget exceeded: the recursion for " << in_.queue_count << " queues needs more than " << in_.budget
           << " evaluations of U(m, q, 0)";
        return os.str();
    }

    BoundInputs in_;
    Rational q_star_;
    Rational p0_;
    std::uint64_t evaluations_ = 0;
    std::map<int, Ladder> ladders_;
    std::map<std::pair<int, std::string>, BigInt> u_table_;
};

}  // namespace

BoundConstants compute_bound_constants(const BoundInputs& in)
{
    if (in.queue_count < 1) throw ModelError("queue count must be at least 1");
    if (!(in.eps > 0 && in.eps < 1)) throw ModelError("eps must lie in (0, 1)");
    if (!(in.r_min > 0) || in.r_max < in.r_min) throw ModelError("need 0 < r_min <= r_max");
    if (in.omega < 1 || in.injection_cap < 0 || in.q0 < 0) throw ModelError("invalid bound inputs");

    Calculator calc(in);
    BoundConstants out;
    out.c = in.c;
    out.q_star = calc.q_star();
    out.p0 = calc.p0();
    const auto& lad = calc.ladder(in.queue_count);
    out.ladder = lad.levels;
    out.m = lad.m;
    out.ineq_rhs = calc.ineq_rhs(in.queue_count, in.q0);
    out.max_queue_bound = in.queue_count == 1 ? ceil_rational(in.q0) : ceil_sqrt(ceil_rational(out.ineq_rhs));
    out.u_table = calc.u_table();
    out.evaluations = calc.evaluations();
    return out;
}

Rational bound_u(const BoundInputs& in, int m, const Rational& q, const BigInt& b)
{
    if (m < 1) throw ModelError("queue count must be at least 1");
    Calculator calc(in);
    return calc.u(m, q, b);
}

BoundConstants compute_bound_constants(const NetworkSpec& spec, const AdversaryParams& ap, const Rational& q0,
                                       int injection_cap, std::uint64_t budget)
{
    if (spec.beta != 1.0) throw ModelError("the bound recursion is stated for beta = 1 only");
    BoundInputs in;
    in.queue_count = spec.node_count * spec.dest_count();
    in.eps = Rational(ap.eps);
    in.omega = ap.omega;
    in.r_min = Rational(spec.r_min);
    in.r_max = Rational(spec.r_max);
    in.c = Rational(explicit_c(ap.omega, spec.edge_count(), spec.r_max, spec.node_count));
    in.injection_cap = injection_cap;
    in.q0 = q0;
    in.budget = budget;
    return compute_bound_constants(in);
}

}  // namespace mwsim
