#include "ckn/constants.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "ckn/error.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

std::string_view to_string(ConstantBranch b) {
    switch (b) {
        case ConstantBranch::T5: return "T5";
        case ConstantBranch::T6: return "T6";
        case ConstantBranch::A1: return "A1";
        case ConstantBranch::Hardy: return "Hardy";
    }
    return "?";
}

ConstantBranch constant_branch_from_string(std::string_view s) {
    if (s == "t5" || s == "T5") return ConstantBranch::T5;
    if (s == "t6" || s == "T6") return ConstantBranch::T6;
    if (s == "a1" || s == "A1") return ConstantBranch::A1;
    if (s == "hardy" || s == "Hardy") return ConstantBranch::Hardy;
    throw Error("bad-branch", "unknown branch '" + std::string(s) + "'");
}

namespace {

double log_gamma(double x) {
    if (!(x > 0) || !std::isfinite(x)) {
        throw Error("invalid-gamma-argument", "Gamma argument " + std::to_string(x) + " is not positive");
    }
    return boost::math::lgamma(x);
}

// Factors accumulate in log space; the report keeps each factor and their product.
class Product {
public:
    void add(std::string name, double log_factor) {
        log_total_ += log_factor;
        parts_.emplace_back(std::move(name), std::exp(log_factor));
    }
    [[nodiscard]] double value() const { return std::exp(log_total_); }
    [[nodiscard]] std::vector<std::pair<std::string, double>> take() { return std::move(parts_); }

private:
    double log_total_ = 0;
    std::vector<std::pair<std::string, double>> parts_;
};

void require_critical_weights(const CknParams& P) {
    if (P.regime != Regime::C1) throw Error("branch-mismatch", "needs regime C1");
    const double crit = P.N * P.mu / (P.N - P.p);
    if (!nearly_equal(P.s, crit) || !nearly_equal(P.theta, crit)) {
        throw Error("branch-mismatch", "needs theta = s = N mu/(N-p)");
    }
}

void attach_oracle(SharpConstantReport& rep, FamilyKind family, const CknParams& P,
                   const ConstantOptions& opts) {
    if (!opts.check_oracle) return;
    const auto g = make_optimizer({family, 1, 1}, P);
    const double q = ckn_quotient(P, g, opts.tolerance).quotient;
    rep.oracle_quotient = q;
    if (std::abs(q - rep.value) > opts.discrepancy_threshold * rep.value) {
        rep.flags.emplace_back("formula-discrepancy");
    }
}

}  // namespace

SharpConstantReport sharp_constant_t5(const CknParams& P, const ConstantOptions& opts) {
    require_critical_weights(P);
    const double N = P.N, p = P.p, q = P.q, r = P.r, a = P.a;
    if (!(q > p)) throw Error("branch-mismatch", "needs q > p");
    if (!nearly_equal(r, p * (q - 1) / (p - 1))) {
        throw Error("branch-mismatch", "needs r = p(q-1)/(p-1)");
    }
    const auto ex = derive(P, Branch::T5);
    const double delta = ex.delta;
    if (!(delta > 0)) throw Error("branch-mismatch", "needs Np - q(N-p) > 0");

    Product f;
    f.add("prefactor", ex.prefactor_exp * std::log(ex.d));
    f.add("sqrt_pi_factor", a * std::log((q - p) / (p * std::sqrt(M_PI))));
    f.add("power_factor", (a / p) * std::log(p * q / (N * (q - p))));
    f.add("delta_factor", (1 / r) * std::log(delta / (p * q)));
    const double lg = log_gamma(q * (p - 1) / (q - p)) + log_gamma(N / 2 + 1) -
                      log_gamma(((p - 1) / p) * (delta / (q - p))) -
                      log_gamma(N * (p - 1) / p + 1);
    f.add("gamma_ratio", (a / N) * lg);

    SharpConstantReport rep;
    rep.branch = ConstantBranch::T5;
    rep.value = require_finite(f.value(), "T5 constant");
    rep.components = f.take();
    attach_oracle(rep, FamilyKind::T5, P, opts);
    return rep;
}

SharpConstantReport sharp_constant_t6(const CknParams& P, const ConstantOptions& opts) {
    require_critical_weights(P);
    const double N = P.N, p = P.p, q = P.q, r = P.r, a = P.a;
    if (!(r < p)) throw Error("branch-mismatch", "needs r < p");
    if (!(r > 2 - 1 / p)) throw Error("branch-mismatch", "needs r > 2 - 1/p");
    if (!nearly_equal(q, p * (r - 1) / (p - 1))) {
        throw Error("branch-mismatch", "needs q = p(r-1)/(p-1)");
    }
    const auto ex = derive(P, Branch::T6);
    const double delta = ex.delta;
    if (!(delta > 0)) throw Error("branch-mismatch", "needs Np - r(N-p) > 0");

    Product f;
    f.add("prefactor", ex.prefactor_exp * std::log(ex.d));
    f.add("sqrt_pi_factor", a * std::log((p - r) / (p * std::sqrt(M_PI))));
    f.add("power_factor", (a / p) * std::log(p * r / (N * (p - r))));
    f.add("delta_factor", ((1 - a) / q) * std::log(p * r / delta));
    const double lg = log_gamma(((p - 1) / p) * (delta / (p - r)) + 1) + log_gamma(N / 2 + 1) -
                      log_gamma(r * (p - 1) / (p - r) + 1) - log_gamma(N * (p - 1) / p + 1);
    f.add("gamma_ratio", (a / N) * lg);

    SharpConstantReport rep;
    rep.branch = ConstantBranch::T6;
    rep.value = require_finite(f.value(), "T6 constant");
    rep.components = f.take();
    attach_oracle(rep, FamilyKind::T6, P, opts);
    return rep;
}

double a1_prefactor_exponent(const CknParams& P) {
    const double k = P.N - P.mu - P.p;
    return (1 + (P.N - P.s) * (P.p - 1) / k) * (k / ((P.N - P.s) * P.p));
}

SharpConstantReport sharp_constant_a1(const CknParams& P, double tolerance) {
    if (P.regime != Regime::C3) throw Error("branch-mismatch", "needs regime C3");
    if (P.hardy_endpoint) throw Error("branch-mismatch", "s = p + mu belongs to the Hardy branch");
    const double d = transform_power(P.N, P.p, P.mu);
    const auto g = make_optimizer({FamilyKind::A1, 1, 1}, P);
    const double q = ckn_quotient(P, g, tolerance).quotient;
    const double pref = std::pow(d, a1_prefactor_exponent(P));

    SharpConstantReport rep;
    rep.branch = ConstantBranch::A1;
    rep.value = q;
    rep.oracle_quotient = q;
    rep.components = {{"prefactor", pref}, {"unweighted_constant", q / pref}};
    return rep;
}

SharpConstantReport hardy_constant(const CknParams& P) {
    if (!nearly_equal(P.s, P.p + P.mu)) throw Error("branch-mismatch", "needs s = p + mu");
    const double k = P.N - P.p - P.mu;
    if (!(k > 0)) throw Error("branch-mismatch", "needs N - p - mu > 0");
    SharpConstantReport rep;
    rep.branch = ConstantBranch::Hardy;
    rep.value = P.p / k;
    rep.attained = false;
    rep.components = {{"hardy_ratio", rep.value}};
    return rep;
}

SharpConstantReport sharp_constant(const CknParams& P, ConstantBranch branch,
                                   const ConstantOptions& opts) {
    switch (branch) {
        case ConstantBranch::T5: return sharp_constant_t5(P, opts);
        case ConstantBranch::T6: return sharp_constant_t6(P, opts);
        case ConstantBranch::A1: return sharp_constant_a1(P, opts.tolerance);
        case ConstantBranch::Hardy: return hardy_constant(P);
    }
    throw Error("bad-branch", "unknown branch");
}

}  // namespace ckn
