#include "ckn/functionals.hpp"

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

namespace {

RadialIntegral base_job(const RadialProfile& g, double tolerance) {
    RadialIntegral job;
    job.edge = g.shape().edge;
    job.breakpoints = g.shape().breakpoints;
    job.center = g.shape().center;
    job.tolerance = tolerance;
    return job;
}

double mul_order(double k, double order) { return order * k; }

}  // namespace

IntegralValue power_integral(const RadialProfile& g, double k, double t, double N,
                             double tolerance, std::optional<double> sphere) {
    RadialIntegral job = base_job(g, tolerance);
    job.log_integrand = [&g, k](double tau) { return k * g.value_at(tau).log_abs; };
    job.power = N - 1 - t;
    job.origin_order = mul_order(k, g.shape().origin_order);
    job.tail_order = mul_order(k, g.shape().tail_order);
    job.edge_order = mul_order(k, g.shape().edge_order);
    const auto res = integrate_radial(job);
    const double S = sphere.value_or(sphere_measure(N));
    return {S * res.value, S * res.error};
}

IntegralValue gradient_integral(const RadialProfile& g, double p, double mu, double N,
                                double tolerance, std::optional<double> sphere) {
    RadialIntegral job = base_job(g, tolerance);
    job.log_integrand = [&g, p](double tau) { return p * g.slope_at(tau).log_abs; };
    job.power = N - 1 - mu;
    job.origin_order = mul_order(p, g.shape().deriv_origin_order);
    job.tail_order = mul_order(p, g.shape().deriv_tail_order);
    job.edge_order = mul_order(p, g.shape().deriv_edge_order);
    const auto res = integrate_radial(job);
    const double S = sphere.value_or(sphere_measure(N));
    return {S * res.value, S * res.error};
}

double weighted_norm(const RadialProfile& g, double k, double t, double N, double tolerance) {
    if (!(k >= 1)) throw Error("bad-job", "norm exponent must be >= 1");
    return std::pow(power_integral(g, k, t, N, tolerance).value, 1 / k);
}

double gradient_norm(const RadialProfile& g, double p, double mu, double N, double tolerance) {
    return std::pow(gradient_integral(g, p, mu, N, tolerance).value, 1 / p);
}

QuotientSetup setup_from(const CknParams& P, double tolerance) {
    QuotientSetup s;
    s.N = P.N;
    s.p = P.p;
    s.q = P.q;
    s.r = P.r;
    s.a = P.a;
    s.w = {P.s, P.mu, P.theta};
    s.tolerance = tolerance;
    return s;
}

QuotientReport quotient(const RadialProfile& g, const QuotientSetup& S) {
    QuotientReport rep;
    const auto T = power_integral(g, S.r, S.w.s, S.N, S.tolerance, S.sphere);
    rep.target_norm = require_finite(std::pow(T.value, 1 / S.r), "target norm");
    rep.target_error = T.error;
    double rel = T.error / (S.r * T.value);

    double denom = 1;
    if (S.a > 0) {
        const auto G = gradient_integral(g, S.p, S.w.mu, S.N, S.tolerance, S.sphere);
        rep.grad_norm = require_finite(std::pow(G.value, 1 / S.p), "gradient norm");
        rep.grad_error = G.error;
        denom *= std::pow(rep.grad_norm, S.a);
        rel += S.a * G.error / (S.p * G.value);
    }
    if (S.a < 1) {
        const auto J = power_integral(g, S.q, S.w.theta, S.N, S.tolerance, S.sphere);
        rep.interp_norm = require_finite(std::pow(J.value, 1 / S.q), "interpolation norm");
        rep.interp_error = J.error;
        denom *= std::pow(*rep.interp_norm, 1 - S.a);
        rel += (1 - S.a) * J.error / (S.q * J.value);
    }
    rep.quotient = require_finite(rep.target_norm / denom, "quotient");
    rep.quotient_error = rep.quotient * rel;
    return rep;
}

QuotientReport ckn_quotient(const CknParams& P, const RadialProfile& g, double tolerance) {
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);
    return quotient(g, setup_from(P, tolerance));
}

EnergyParts energy(const RadialProfile& g, const CknParams& P, double tolerance) {
    if (P.regime != Regime::C1) throw Error("invalid-params", "the energy reduction needs regime C1");
    const double d = transform_power(P.N, P.p, P.mu);
    const auto mn = scaling_exponents(P, d);
    EnergyParts e;
    e.m = mn.m;
    e.n = mn.n;
    e.A_part = gradient_integral(g, P.p, 0, P.N, tolerance).value / P.p;
    const double w = P.N + P.theta * d - P.N * d;
    e.B_part = power_integral(g, P.q, w, P.N, tolerance).value / P.q;
    e.I = e.A_part + e.B_part;
    const double mn_sum = e.m + e.n;
    e.lambda0 = std::pow(e.n * e.B_part / (e.m * e.A_part), 1 / mn_sum);
    e.I_min = (mn_sum / e.m) * std::pow(e.n / e.m, -e.n / mn_sum) *
              std::pow(e.A_part, e.n / mn_sum) * std::pow(e.B_part, e.m / mn_sum);
    require_finite(e.I_min, "minimal energy");
    return e;
}

RadialProfile energy_rescale(const RadialProfile& g, const CknParams& P, double lambda) {
    const double d = transform_power(P.N, P.p, P.mu);
    const double k = (P.N * d - P.s * d) / P.r;
    return compose(g, std::pow(lambda, k), lambda, 1);
}

}  // namespace ckn
