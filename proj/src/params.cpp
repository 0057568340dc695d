#include "ckn/params.hpp"

#include <cmath>
#include <vector>

#include "ckn/error.hpp"

namespace ckn {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

// Constraint lists return the violated clauses, empty when the regime applies.

std::vector<std::string> c1_violations(const CknParams& P) {
    std::vector<std::string> v;
    const double N = P.N, p = P.p;
    if (!(p > 1)) v.emplace_back("1 < p violated");
    if (!(P.mu >= 0)) v.emplace_back("mu >= 0 violated");
    if (!(p + P.mu < N)) v.emplace_back("p + mu < N violated");
    if (v.empty()) {
        const double crit = N * P.mu / (N - p);
        if (!(P.theta <= crit || nearly_equal(P.theta, crit))) v.emplace_back("theta <= N mu/(N-p) violated");
        if (!(crit <= P.s || nearly_equal(crit, P.s))) v.emplace_back("N mu/(N-p) <= s violated");
        if (!(P.s < N)) v.emplace_back("s < N violated");
        if (!(P.r < N * p / (N - p))) v.emplace_back("r < Np/(N-p) violated");
    }
    if (!(P.q >= 1)) v.emplace_back("1 <= q violated");
    if (!(P.q < P.r)) v.emplace_back("q < r violated");
    return v;
}

std::vector<std::string> c3_violations(const CknParams& P, bool& endpoint) {
    std::vector<std::string> v;
    endpoint = false;
    const double N = P.N, p = P.p;
    if (!(p > 1)) v.emplace_back("1 < p violated");
    if (!(P.mu >= 0)) v.emplace_back("mu >= 0 violated");
    if (!(p + P.mu < N)) {
        v.emplace_back("p + mu < N violated");
        return v;
    }
    if (!nearly_equal(P.r, (N - P.s) * p / (N - P.mu - p))) {
        v.emplace_back("r = (N-s)p/(N-mu-p) violated");
    }
    if (!(P.mu / p <= P.s / P.r || nearly_equal(P.mu / p, P.s / P.r))) v.emplace_back("mu/p <= s/r violated");
    if (nearly_equal(P.s, p + P.mu)) {
        endpoint = true;
    } else if (!(P.s / P.r < P.mu / p + 1)) {
        v.emplace_back("s/r < mu/p + 1 violated");
    }
    return v;
}

std::vector<std::string> c2_violations(const CknParams& P) {
    std::vector<std::string> v;
    const double N = P.N;
    if (P.p != 2) v.emplace_back("p = 2 violated");
    if (!(P.mu >= 0)) v.emplace_back("mu >= 0 violated");
    if (!(2 + P.mu < N)) {
        v.emplace_back("2 + mu < N violated");
        return v;
    }
    if (!nearly_equal(P.r, 2 * (P.q - 1))) v.emplace_back("r = 2(q-1) violated");
    if (!(P.r > 2)) v.emplace_back("2 < r violated");
    if (!(P.r < 2 * N / (N - 2))) v.emplace_back("r < 2N/(N-2) violated");
    if (!nearly_equal(P.s, P.theta)) v.emplace_back("s = theta violated");
    if (!(P.s > N * P.mu / (N - 2))) v.emplace_back("s > N mu/(N-2) violated");
    if (!(P.s < P.mu + 2)) v.emplace_back("s < mu + 2 violated");
    return v;
}

// The general admissibility conditions in the exponent form alpha=-mu/p, beta=-theta/q,
// gamma=-s/r. The balance identity holds by construction of a.
std::vector<std::string> general_violations(const CknParams& P) {
    std::vector<std::string> v;
    const double N = P.N;
    const double alpha = -P.mu / P.p, beta = -P.theta / P.q, gamma = -P.s / P.r;
    if (!(P.p >= 1)) v.emplace_back("p >= 1 violated");
    if (!(P.q >= 1)) v.emplace_back("q >= 1 violated");
    if (!(P.r > 0)) v.emplace_back("r > 0 violated");
    if (!(1 / P.p + alpha / N > 0)) v.emplace_back("1/p + alpha/N > 0 violated");
    if (!(1 / P.q + beta / N > 0)) v.emplace_back("1/q + beta/N > 0 violated");
    if (!(1 / P.r + gamma / N > 0)) v.emplace_back("1/r + gamma/N > 0 violated");
    if (P.a > 0) {
        const double sigma = (gamma - (1 - P.a) * beta) / P.a;
        if (!(alpha - sigma >= -1e-12)) v.emplace_back("alpha - sigma >= 0 violated");
        const bool critical = nearly_equal(1 / P.p + (alpha - 1) / N, 1 / P.r + gamma / N);
        if (critical && !(alpha - sigma <= 1 + 1e-12)) {
            v.emplace_back("alpha - sigma <= 1 violated");
        }
    }
    return v;
}

}  // namespace

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::C1: return "C1";
        case Regime::C2: return "C2";
        case Regime::C3: return "C3";
        case Regime::General: return "General";
        case Regime::Invalid: return "Invalid";
    }
    return "Invalid";
}

bool nearly_equal(double x, double y, double rel) {
    return std::abs(x - y) <= rel * std::max({std::abs(x), std::abs(y), 1e-300});
}

double interpolation_exponent(double N, double p, double q, double r, double s, double mu,
                              double theta) {
    const double num = ((N - theta) * r - (N - s) * q) * p;
    const double den = ((N - theta) * p - (N - mu - p) * q) * r;
    const double scale = (std::abs((N - theta) * p) + std::abs((N - mu - p) * q)) * std::abs(r);
    if (std::abs(den) <= 1e-14 * scale) {
        throw Error("degenerate-denominator", "the interpolation exponent a has a zero denominator");
    }
    return num / den;
}

double transform_power(double N, double p, double mu) {
    if (!(N - p - mu > 0)) {
        throw Error("hardy-denominator", "N - p - mu must be positive");
    }
    return (N - p) / (N - p - mu);
}

double prefactor_exponent(double p, double q, double r, double a) {
    return 1 / r + (p - 1) / p - (1 - a) / q - ((p - 1) / p) * (1 - a);
}

ScalingExponents scaling_exponents(const CknParams& P, double d) {
    const double k = (P.N * d - P.s * d) / P.r;
    return {k * P.p + P.p - P.N, P.N * d - P.theta * d - P.q * k};
}

CknParams validate(const RawParams& raw) {
    for (double x : {raw.N, raw.p, raw.q, raw.r, raw.s, raw.mu, raw.theta}) {
        require_finite(x, "parameter");
    }
    CknParams P;
    P.N = raw.N;
    P.p = raw.p;
    P.q = raw.q;
    P.r = raw.r;
    P.s = raw.s;
    P.mu = raw.mu;
    P.theta = raw.theta;
    P.a = interpolation_exponent(P.N, P.p, P.q, P.r, P.s, P.mu, P.theta);

    if (raw.a && !nearly_equal(*raw.a, P.a, 1e-9)) {
        P.regime = Regime::Invalid;
        P.reason = "supplied a disagrees with the balance value " + std::to_string(P.a);
        return P;
    }
    if (!(P.N >= 2)) {
        P.regime = Regime::Invalid;
        P.reason = "N >= 2 violated";
        return P;
    }

    const bool a_in_range = (P.a >= 0 || std::abs(P.a) <= 1e-12) && (P.a <= 1 || nearly_equal(P.a, 1));
    bool endpoint = false;
    if (nearly_equal(P.a, 1) && c3_violations(P, endpoint).empty()) {
        P.a = 1;
        P.regime = Regime::C3;
        P.hardy_endpoint = endpoint;
        return P;
    }
    // q = r sits on the strict side of q < r: rejected rather than passed on as General.
    if (P.q == P.r) {
        P.regime = Regime::Invalid;
        P.reason = "q < r violated";
        return P;
    }
    auto c1 = c1_violations(P);
    if (c1.empty() && a_in_range) {
        P.regime = Regime::C1;
        return P;
    }
    if (a_in_range && c2_violations(P).empty()) {
        P.regime = Regime::C2;
        return P;
    }
    auto gen = general_violations(P);
    if (a_in_range && gen.empty()) {
        P.regime = Regime::General;
        return P;
    }
    if (!a_in_range) c1.emplace_back("0 <= a <= 1 violated");
    for (auto& g : gen) c1.push_back(std::move(g));
    P.regime = Regime::Invalid;
    P.reason = join(c1);
    return P;
}

DerivedExponents derive(const CknParams& P, Branch branch) {
    if (P.regime != Regime::C1 && P.regime != Regime::C3) {
        throw Error("branch-mismatch", "exponents are derived only in regimes C1 and C3");
    }
    DerivedExponents e;
    e.d = transform_power(P.N, P.p, P.mu);
    if (branch == Branch::T5) {
        if (!(P.q > P.p)) throw Error("branch-mismatch", "the T5 branch needs q > p");
        e.delta = P.N * P.p - P.q * (P.N - P.p);
    } else {
        if (!(P.r > 2 - 1 / P.p && P.r < P.p)) {
            throw Error("branch-mismatch", "the T6 branch needs 2 - 1/p < r < p");
        }
        e.delta = P.N * P.p - P.r * (P.N - P.p);
    }
    const auto mn = scaling_exponents(P, e.d);
    e.m = mn.m;
    e.n = mn.n;
    e.prefactor_exp = prefactor_exponent(P.p, P.q, P.r, P.a);
    return e;
}

}  // namespace ckn
