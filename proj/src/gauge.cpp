#include "ckn/gauge.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "ckn/error.hpp"
#include "ckn/transform.hpp"

namespace ckn {

Gauge make_gauge(double rho, double N) {
    if (!(rho >= 1)) throw Error("not-a-norm", "l^rho needs rho >= 1");
    Gauge g;
    g.rho = rho;
    g.N = require_integer_dimension(N, 1, 64);
    if (rho == 1) {
        g.dual_rho = HUGE_VAL;
    } else if (std::isinf(rho)) {
        g.dual_rho = 1;
    } else {
        g.dual_rho = rho / (rho - 1);
    }
    g.kappa_N = ball_volume(g);
    return g;
}

double ball_volume(const Gauge& g) {
    if (!(g.rho >= 1)) throw Error("not-a-norm", "l^rho needs rho >= 1");
    const double N = g.N;
    if (std::isinf(g.rho)) return std::exp2(N);
    using boost::math::lgamma;
    return std::exp(N * std::log(2.0) + N * lgamma(1 + 1 / g.rho) - lgamma(1 + N / g.rho));
}

namespace {

double lp_norm(double rho, std::span<const double> x) {
    if (std::isinf(rho)) {
        double m = 0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    if (m == 0) return 0;
    double s = 0;
    for (double v : x) s += std::pow(std::abs(v) / m, rho);
    return m * std::pow(s, 1 / rho);
}

}  // namespace

double gauge_norm(const Gauge& g, std::span<const double> x) { return lp_norm(g.rho, x); }
double dual_norm(const Gauge& g, std::span<const double> x) { return lp_norm(g.dual_rho, x); }

McEstimate ball_volume_mc(const Gauge& g, std::size_t samples, std::uint64_t seed) {
    const auto indicator = [&g](std::span<const double> x) {
        return gauge_norm(g, x) <= 1 ? 1.0 : 0.0;
    };
    return integrate_mc(indicator, 0, g.N, samples, seed);
}

namespace {

QuotientSetup gauge_setup(const CknParams& P, const Gauge& gauge, double tolerance) {
    QuotientSetup S = setup_from(P, tolerance);
    S.sphere = gauge.N * gauge.kappa_N;
    return S;
}

void flag_gauge(const Gauge& gauge, std::vector<std::string>& flags) {
    if (!gauge.smooth()) flags.emplace_back("non-smooth-gauge");
}

}  // namespace

QuotientReport gauge_quotient(const CknParams& P, const RadialProfile& g, const Gauge& gauge,
                              double tolerance) {
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);
    if (std::abs(P.N - gauge.N) > 0) throw Error("dimension-mismatch", "gauge and params differ in N");
    auto rep = quotient(g, gauge_setup(P, gauge, tolerance));
    flag_gauge(gauge, rep.flags);
    return rep;
}

TransferResult t10_transfer(const CknParams& P, const RadialProfile& g, const Gauge& gauge,
                            double tolerance) {
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);
    if (!(P.a > 0 && P.a <= 1)) throw Error("invalid-params", "the transfer needs 0 < a <= 1");
    if (std::abs(P.N - gauge.N) > 0) throw Error("dimension-mismatch", "gauge and params differ in N");
    const double d = transform_power(P.N, P.p, P.mu);
    const TransformSpec spec{d, P.p, P.N};

    QuotientSetup S2 = gauge_setup(P, gauge, tolerance);
    QuotientSetup S1 = S2;
    S1.w = {transformed_weight(spec, P.s), 0, transformed_weight(spec, P.theta)};

    TransferResult out;
    out.q2 = quotient(g, S2).quotient;
    out.q1 = quotient(forward(g, spec), S1).quotient;
    out.ratio = out.q2 / out.q1;
    out.expected_ratio = std::pow(d, prefactor_exponent(P.p, P.q, P.r, P.a));
    flag_gauge(gauge, out.flags);
    return out;
}

}  // namespace ckn
