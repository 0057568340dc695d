#include "ckn/profiles.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "ckn/error.hpp"
#include "ckn/pchip.hpp"

namespace ckn {

// ---- LogValue ---------------------------------------------------------------------------

double LogValue::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

LogValue LogValue::of(double x) {
    if (x == 0) return {};
    return {std::log(std::abs(x)), x > 0 ? 1 : -1};
}

LogValue operator*(LogValue a, LogValue b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.log_abs + b.log_abs, a.sign * b.sign};
}

LogValue operator+(LogValue a, LogValue b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_abs < b.log_abs) std::swap(a, b);
    const double r = std::exp(b.log_abs - a.log_abs);
    const double m = a.sign == b.sign ? 1 + r : 1 - r;
    if (m == 0) return {};
    return {a.log_abs + std::log(m), a.sign};
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// ---- analytic shapes ----------------------------------------------------------------------

class BubbleImpl final : public ProfileImpl {
public:
    BubbleImpl(double A, double B, double beta, double gamma)
        : lA_(std::log(std::abs(A))), sA_(sign_of(A)), lB_(std::log(B)), beta_(beta), gamma_(gamma) {}

    LogValue value(double tau) const override {
        return {lA_ - gamma_ * softplus(lB_ + beta_ * tau), sA_};
    }
    LogValue slope(double tau) const override {
        if (gamma_ == 0) return {};
        const double z = lB_ + beta_ * tau;
        return {lA_ + std::log(std::abs(gamma_) * beta_) + z - tau - (gamma_ + 1) * softplus(z),
                -sA_ * sign_of(gamma_)};
    }

private:
    double lA_;
    int sA_;
    double lB_, beta_, gamma_;
};

class CompactImpl final : public ProfileImpl {
public:
    CompactImpl(double A, double B, double beta, double gamma)
        : lA_(std::log(std::abs(A))), sA_(sign_of(A)), lB_(std::log(B)), beta_(beta), gamma_(gamma) {}

    LogValue value(double tau) const override {
        const double z = lB_ + beta_ * tau;
        if (z >= 0) return {};
        return {lA_ + gamma_ * std::log(-std::expm1(z)), sA_};
    }
    LogValue slope(double tau) const override {
        const double z = lB_ + beta_ * tau;
        if (z >= 0) return {};
        return {lA_ + std::log(gamma_ * beta_) + z - tau + (gamma_ - 1) * std::log(-std::expm1(z)),
                -sA_};
    }

private:
    double lA_;
    int sA_;
    double lB_, beta_, gamma_;
};

class StretchedExpImpl final : public ProfileImpl {
public:
    StretchedExpImpl(double A, double B, double beta)
        : lA_(std::log(std::abs(A))), sA_(sign_of(A)), lB_(std::log(B)), beta_(beta) {}

    LogValue value(double tau) const override { return {lA_ - std::exp(lB_ + beta_ * tau), sA_}; }
    LogValue slope(double tau) const override {
        const double z = lB_ + beta_ * tau;
        return {lA_ + std::log(beta_) + z - tau - std::exp(z), -sA_};
    }

private:
    double lA_;
    int sA_;
    double lB_, beta_;
};

void check_shape_args(double A, double B, double beta) {
    if (!(A != 0 && std::isfinite(A))) throw Error("bad-scale", "amplitude must be nonzero");
    if (!(B > 0 && std::isfinite(B))) throw Error("bad-scale", "scale must be positive");
    if (!(beta > 0 && std::isfinite(beta))) throw Error("bad-scale", "power must be positive");
}

// ---- grid --------------------------------------------------------------------------------

class GridImpl final : public ProfileImpl {
public:
    GridImpl(std::vector<double> tau, std::vector<double> y, double o0, double o1, GridInterp mode)
        : tau_(std::move(tau)), y_(std::move(y)), o0_(o0), o1_(o1), mode_(mode) {
        d_ = pchip::slopes(tau_, y_);
    }

    LogValue value(double tau) const override {
        if (tau <= tau_.front()) return end_value(0, o0_, tau);
        if (tau >= tau_.back()) return end_value(tau_.size() - 1, o1_, tau);
        const auto s = sample(tau);
        return mode_ == GridInterp::Value ? LogValue::of(s.value) : LogValue{s.value, 1};
    }

    LogValue slope(double tau) const override {
        if (tau <= tau_.front() || tau >= tau_.back()) {
            const bool left = tau <= tau_.front();
            const double o = left ? o0_ : o1_;
            if (o == 0) return {};
            return value(tau) * LogValue{std::log(std::abs(o)) - tau, sign_of(o)};
        }
        const auto s = sample(tau);
        if (mode_ == GridInterp::Value) return LogValue::of(s.derivative) * LogValue{-tau, 1};
        return LogValue{s.value - tau, 1} * LogValue::of(s.derivative);
    }

private:
    LogValue end_value(std::size_t k, double order, double tau) const {
        const double shift = order == 0 ? 0.0 : order * (tau - tau_[k]);
        if (mode_ == GridInterp::LogValue) return {y_[k] + shift, 1};
        if (y_[k] == 0) return {};
        return {std::log(y_[k]) + shift, 1};
    }

    pchip::Sample sample(double tau) const {
        const auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
        const std::size_t k = static_cast<std::size_t>(it - tau_.begin()) - 1;
        return pchip::hermite(tau_[k], tau_[k + 1], y_[k], y_[k + 1], d_[k], d_[k + 1], tau);
    }

    std::vector<double> tau_, y_, d_;
    double o0_, o1_;
    GridInterp mode_;
};

// ---- composition -------------------------------------------------------------------------

class CompositionImpl final : public ProfileImpl {
public:
    CompositionImpl(RadialProfile base, double scale, double dilation, double exponent)
        : base_(std::move(base)),
          ls_(LogValue::of(scale)),
          ld_(std::log(dilation)),
          e_(exponent),
          lslope_(LogValue{std::log(dilation) + std::log(exponent), 1} * LogValue::of(scale)) {}

    LogValue value(double tau) const override { return ls_ * base_.value_at(ld_ + e_ * tau); }
    LogValue slope(double tau) const override {
        return lslope_ * base_.slope_at(ld_ + e_ * tau) * LogValue{(e_ - 1) * tau, 1};
    }

private:
    RadialProfile base_;
    LogValue ls_;
    double ld_, e_;
    LogValue lslope_;
};

double scaled_order(double e, double order) { return std::isinf(order) ? order : e * order; }

double scaled_deriv_order(double e, double order) {
    return std::isinf(order) ? order : e * order + e - 1;
}

}  // namespace

// ---- RadialProfile -------------------------------------------------------------------------

RadialProfile::RadialProfile(std::shared_ptr<const ProfileImpl> impl, ProfileShape shape,
                             ProfileKind kind)
    : impl_(std::move(impl)), shape_(std::move(shape)), kind_(std::move(kind)) {}

double RadialProfile::eval(double rho) const { return impl_->value(std::log(rho)).value(); }

double RadialProfile::deriv(double rho) const { return impl_->slope(std::log(rho)).value(); }

RadialProfile RadialProfile::with_kind(ProfileKind kind) const {
    return {impl_, shape_, std::move(kind)};
}

RadialProfile make_bubble(double A, double B, double beta, double gamma) {
    check_shape_args(A, B, beta);
    if (!std::isfinite(gamma)) throw Error("bad-scale", "exponent must be finite");
    ProfileShape sh;
    sh.origin_order = 0;
    sh.tail_order = -beta * gamma;
    const bool flat = gamma == 0;
    sh.deriv_origin_order = flat ? HUGE_VAL : beta - 1;
    sh.deriv_tail_order = flat ? -HUGE_VAL : -beta * gamma - 1;
    sh.center = std::pow(B, -1 / beta);
    return {std::make_shared<BubbleImpl>(A, B, beta, gamma), sh,
            AnalyticKind{AnalyticShape::Bubble, A, B, beta, gamma, std::nullopt}};
}

RadialProfile make_compact(double A, double B, double beta, double gamma) {
    check_shape_args(A, B, beta);
    if (!(gamma > 0)) throw Error("bad-scale", "compact exponent must be positive");
    ProfileShape sh;
    sh.origin_order = 0;
    sh.tail_order = -HUGE_VAL;
    sh.deriv_origin_order = beta - 1;
    sh.deriv_tail_order = -HUGE_VAL;
    sh.edge = std::pow(B, -1 / beta);
    sh.edge_order = gamma;
    sh.deriv_edge_order = gamma - 1;
    sh.center = 0.5 * *sh.edge;
    return {std::make_shared<CompactImpl>(A, B, beta, gamma), sh,
            AnalyticKind{AnalyticShape::Compact, A, B, beta, gamma, std::nullopt}};
}

RadialProfile make_stretched_exp(double A, double B, double beta) {
    check_shape_args(A, B, beta);
    ProfileShape sh;
    sh.origin_order = 0;
    sh.tail_order = -HUGE_VAL;
    sh.deriv_origin_order = beta - 1;
    sh.deriv_tail_order = -HUGE_VAL;
    sh.center = std::pow(B, -1 / beta);
    return {std::make_shared<StretchedExpImpl>(A, B, beta), sh,
            AnalyticKind{AnalyticShape::StretchedExp, A, B, beta, 0.0, std::nullopt}};
}

std::string_view to_string(FamilyKind f) {
    switch (f) {
        case FamilyKind::T5: return "T5";
        case FamilyKind::T6: return "T6";
        case FamilyKind::A1: return "A1";
        case FamilyKind::T11: return "T11";
        case FamilyKind::HSE: return "HSE";
        case FamilyKind::GN_DPD: return "GN_DPD";
        case FamilyKind::GN_DPD_compact: return "GN_DPD_compact";
    }
    return "T5";
}

FamilyKind family_from_string(std::string_view s) {
    for (auto f : {FamilyKind::T5, FamilyKind::T6, FamilyKind::A1, FamilyKind::T11,
                   FamilyKind::HSE, FamilyKind::GN_DPD, FamilyKind::GN_DPD_compact}) {
        if (to_string(f) == s) return f;
    }
    throw Error("malformed-input", "unknown family " + std::string(s));
}

FamilyExponents family_exponents(FamilyKind kind, const CknParams& P) {
    const auto mismatch = [&](const std::string& why) {
        return Error("family-regime-mismatch", std::string(to_string(kind)) + ": " + why);
    };
    const double N = P.N, p = P.p;
    switch (kind) {
        case FamilyKind::T5:
        case FamilyKind::GN_DPD:
        case FamilyKind::T6:
        case FamilyKind::GN_DPD_compact: {
            const bool compact = kind == FamilyKind::T6 || kind == FamilyKind::GN_DPD_compact;
            if (P.regime != Regime::C1) throw mismatch("needs regime C1");
            const bool gn = kind == FamilyKind::GN_DPD || kind == FamilyKind::GN_DPD_compact;
            if (gn && P.mu != 0) throw mismatch("needs mu = 0");
            const double crit = N * P.mu / (N - p);
            if (!nearly_equal(P.s, crit) || !nearly_equal(P.theta, crit)) {
                throw mismatch("needs theta = s = N mu/(N-p)");
            }
            const double beta = ((N - p - P.mu) / (N - p)) * p / (p - 1);
            if (!compact) {
                if (!(P.q > p)) throw mismatch("needs q > p");
                if (!nearly_equal(P.r, p * (P.q - 1) / (p - 1))) {
                    throw mismatch("needs r = p(q-1)/(p-1)");
                }
                return {AnalyticShape::Bubble, beta, (p - 1) / (P.q - p)};
            }
            if (!(P.r > 2 - 1 / p && P.r < p)) throw mismatch("needs 2 - 1/p < r < p");
            if (!nearly_equal(P.q, p * (P.r - 1) / (p - 1))) {
                throw mismatch("needs q = p(r-1)/(p-1)");
            }
            return {AnalyticShape::Compact, beta, (p - 1) / (p - P.r)};
        }
        case FamilyKind::A1: {
            if (P.regime != Regime::C3 || P.hardy_endpoint) {
                throw mismatch("needs regime C3 with s < p + mu");
            }
            const double k = P.p + P.mu - P.s;
            return {AnalyticShape::Bubble, k / (p - 1), (N - p - P.mu) / k};
        }
        case FamilyKind::HSE: {
            if (P.regime != Regime::C3 || P.hardy_endpoint) {
                throw mismatch("needs regime C3 with s < p + mu");
            }
            const double d = transform_power(N, p, P.mu);
            const double s_hs = N - d * (N - P.s);
            return {AnalyticShape::Bubble, (p - s_hs) / (p - 1), (N - p) / (p - s_hs)};
        }
        case FamilyKind::T11: {
            if (P.regime != Regime::C2) throw mismatch("needs regime C2");
            return {AnalyticShape::Bubble, P.mu + 2 - P.s, 1 / (P.q - 2)};
        }
    }
    throw mismatch("unknown family");
}

namespace {

// (A, B) of the closed form; A1 and HSE carry (c, lambda) instead.
std::pair<double, double> closed_form_scales(const OptimizerFamily& f, double gamma) {
    if (f.kind == FamilyKind::A1 || f.kind == FamilyKind::HSE) {
        if (!(f.B > 0)) throw Error("bad-scale", "lambda must be positive");
        return {f.A * std::pow(f.B, -gamma), 1 / f.B};
    }
    return {f.A, f.B};
}

}  // namespace

RadialProfile make_optimizer(const OptimizerFamily& family, const CknParams& P) {
    const auto ex = family_exponents(family.kind, P);
    if (!(family.B > 0)) throw Error("bad-scale", "scale must be positive");
    const auto [A, B] = closed_form_scales(family, ex.gamma);
    RadialProfile g = ex.shape == AnalyticShape::Compact ? make_compact(A, B, ex.beta, ex.gamma)
                                                         : make_bubble(A, B, ex.beta, ex.gamma);
    auto kind = std::get<AnalyticKind>(g.kind());
    kind.family = family.kind;
    return g.with_kind(kind);
}

}  // namespace ckn

namespace ckn {

RadialProfile make_grid_profile(std::vector<double> nodes, std::vector<double> values,
                                double origin_order, double tail_order, GridInterp interp) {
    if (nodes.size() < 8) throw Error("bad-grid", "at least 8 nodes are required");
    if (values.size() != nodes.size()) throw Error("bad-grid", "nodes and values differ in length");
    if (!(nodes.front() > 0)) throw Error("bad-grid", "nodes must be positive");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1]) || !std::isfinite(nodes[i])) {
            throw Error("bad-grid", "nodes must be finite and strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0) throw Error("bad-grid", "values must be finite and >= 0");
        if (interp == GridInterp::LogValue && v <= 0) {
            throw Error("bad-grid", "log interpolation needs positive values");
        }
    }
    if (!std::isfinite(origin_order) || !std::isfinite(tail_order)) {
        throw Error("bad-grid", "tail orders must be finite");
    }

    std::vector<double> tau(nodes.size()), y(values.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        tau[i] = std::log(nodes[i]);
        y[i] = interp == GridInterp::LogValue ? std::log(values[i]) : values[i];
    }

    ProfileShape sh;
    const bool zero_head = values.front() == 0, zero_tail = values.back() == 0;
    sh.origin_order = zero_head ? HUGE_VAL : origin_order;
    sh.tail_order = zero_tail ? -HUGE_VAL : tail_order;
    sh.deriv_origin_order = (zero_head || origin_order == 0) ? HUGE_VAL : origin_order - 1;
    sh.deriv_tail_order = (zero_tail || tail_order == 0) ? -HUGE_VAL : tail_order - 1;
    sh.breakpoints = nodes;
    sh.center = std::sqrt(nodes.front() * nodes.back());

    auto impl = std::make_shared<GridImpl>(std::move(tau), std::move(y), origin_order, tail_order,
                                           interp);
    return {impl, sh, GridKind{std::move(nodes), std::move(values), origin_order, tail_order, interp}};
}

RadialProfile compose(const RadialProfile& g, double scale, double dilation, double exponent) {
    if (!(scale != 0 && std::isfinite(scale))) throw Error("bad-scale", "scale must be nonzero");
    if (!(dilation > 0 && exponent > 0)) {
        throw Error("bad-scale", "dilation and exponent must be positive");
    }
    if (const auto* inner = std::get_if<CompositionKind>(&g.kind())) {
        // kappa * [k' b(l' s^e')](l rho^e) = kappa k' b(l' l^e' rho^(e e'))
        return compose(*inner->base, scale * inner->scale,
                       inner->dilation * std::pow(dilation, inner->exponent),
                       exponent * inner->exponent);
    }
    constexpr double tight = 8 * DBL_EPSILON;
    if (std::abs(scale - 1) <= tight && std::abs(dilation - 1) <= tight &&
        std::abs(exponent - 1) <= tight) {
        return g;
    }

    const ProfileShape& b = g.shape();
    const double e = exponent;
    // Points map back through rho = (sigma / lambda)^(1/e).
    const auto pull = [&](double sigma) { return std::pow(sigma / dilation, 1 / e); };
    ProfileShape sh;
    sh.origin_order = scaled_order(e, b.origin_order);
    sh.tail_order = scaled_order(e, b.tail_order);
    sh.deriv_origin_order = scaled_deriv_order(e, b.deriv_origin_order);
    sh.deriv_tail_order = scaled_deriv_order(e, b.deriv_tail_order);
    if (b.edge) sh.edge = pull(*b.edge);
    sh.edge_order = b.edge_order;
    sh.deriv_edge_order = b.deriv_edge_order;
    for (double x : b.breakpoints) sh.breakpoints.push_back(pull(x));
    sh.center = pull(b.center);

    auto base = std::make_shared<const RadialProfile>(g);
    return {std::make_shared<CompositionImpl>(g, scale, dilation, exponent), sh,
            CompositionKind{base, scale, dilation, exponent}};
}

double analytic_moment(const MomentShape& m, double c) {
    using boost::math::lgamma;
    if (!(m.B > 0 && m.beta > 0)) throw Error("bad-scale", "moment needs B > 0 and beta > 0");
    const double x = c / m.beta;
    const double lead = -x * std::log(m.B) - std::log(m.beta);
    const auto divergent = [] { return Error("divergent-moment", "a Gamma argument is not positive"); };
    switch (m.shape) {
        case AnalyticShape::Bubble:
            if (!(x > 0 && m.gamma - x > 0)) throw divergent();
            return std::exp(lead + lgamma(x) + lgamma(m.gamma - x) - lgamma(m.gamma));
        case AnalyticShape::Compact:
            if (!(x > 0 && m.gamma + 1 > 0)) throw divergent();
            return std::exp(lead + lgamma(x) + lgamma(m.gamma + 1) - lgamma(x + m.gamma + 1));
        case AnalyticShape::StretchedExp:
            if (!(x > 0)) throw divergent();
            return std::exp(lead + lgamma(x));
    }
    throw divergent();
}

double analytic_moment(const OptimizerFamily& family, double c, const CknParams& P) {
    const auto ex = family_exponents(family.kind, P);
    const auto [A, B] = closed_form_scales(family, ex.gamma);
    return std::abs(A) * analytic_moment(MomentShape{ex.shape, B, ex.beta, ex.gamma}, c);
}

}  // namespace ckn
