#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ckn/params.hpp"

namespace ckn {

// sign * exp(log_abs); sign 0 encodes an exact zero (log_abs = -inf).
struct LogValue {
    double log_abs = -HUGE_VAL;
    int sign = 0;

    [[nodiscard]] double value() const;
    [[nodiscard]] static LogValue of(double x);
};

[[nodiscard]] LogValue operator*(LogValue a, LogValue b);
[[nodiscard]] LogValue operator+(LogValue a, LogValue b);

// Asymptotic description of a profile; quadrature needs it to detect divergence and to
// place its cuts.
struct ProfileShape {
    double origin_order = 0;        // g ~ rho^origin_order as rho -> 0
    double tail_order = 0;          // g ~ rho^tail_order as rho -> infinity
    double deriv_origin_order = 0;  // same for g'; +inf when g' vanishes identically near 0
    double deriv_tail_order = 0;    // -inf when g' vanishes identically near infinity
    std::optional<double> edge;     // support (0, edge] for compact profiles
    double edge_order = 0;          // g ~ (edge - rho)^edge_order
    double deriv_edge_order = 0;
    std::vector<double> breakpoints;  // rho values where g is not analytic
    double center = 1;                // rho where the profile changes shape
};

// Evaluation interface in log form, tau = log(rho).
class ProfileImpl {
public:
    virtual ~ProfileImpl() = default;
    [[nodiscard]] virtual LogValue value(double tau) const = 0;
    [[nodiscard]] virtual LogValue slope(double tau) const = 0;  // g'(rho)
};

enum class FamilyKind { T5, T6, A1, T11, HSE, GN_DPD, GN_DPD_compact };

[[nodiscard]] std::string_view to_string(FamilyKind f);
[[nodiscard]] FamilyKind family_from_string(std::string_view s);

// For A1 and HSE, A is the amplitude c and B the additive scale lambda.
struct OptimizerFamily {
    FamilyKind kind = FamilyKind::T5;
    double A = 1;
    double B = 1;
};

// Closed-form shapes the families reduce to.
enum class AnalyticShape {
    Bubble,        // A (1 + B rho^beta)^(-gamma)
    Compact,       // A (1 - B rho^beta)_+^gamma
    StretchedExp,  // A exp(-B rho^beta)
};

struct AnalyticKind {
    AnalyticShape shape;
    double A, B, beta, gamma;
    std::optional<FamilyKind> family;
};

enum class GridInterp { Value, LogValue };

struct GridKind {
    std::vector<double> nodes, values;
    double origin_order, tail_order;
    GridInterp interp;
};

class RadialProfile;

// kappa * g(lambda * rho^e)
struct CompositionKind {
    std::shared_ptr<const RadialProfile> base;
    double scale, dilation, exponent;
};

struct OpaqueKind {
    std::string label;
};

using ProfileKind = std::variant<AnalyticKind, GridKind, CompositionKind, OpaqueKind>;

class RadialProfile {
public:
    RadialProfile(std::shared_ptr<const ProfileImpl> impl, ProfileShape shape, ProfileKind kind);

    [[nodiscard]] double eval(double rho) const;
    [[nodiscard]] double deriv(double rho) const;
    [[nodiscard]] LogValue value_at(double tau) const { return impl_->value(tau); }
    [[nodiscard]] LogValue slope_at(double tau) const { return impl_->slope(tau); }

    [[nodiscard]] const ProfileShape& shape() const { return shape_; }
    [[nodiscard]] const ProfileKind& kind() const { return kind_; }

    // Same function, different descriptor (used to tag family profiles).
    [[nodiscard]] RadialProfile with_kind(ProfileKind kind) const;

private:
    std::shared_ptr<const ProfileImpl> impl_;
    ProfileShape shape_;
    ProfileKind kind_;
};

[[nodiscard]] RadialProfile make_bubble(double A, double B, double beta, double gamma);
[[nodiscard]] RadialProfile make_compact(double A, double B, double beta, double gamma);
[[nodiscard]] RadialProfile make_stretched_exp(double A, double B, double beta);

// Exponents (beta, gamma) of the family's closed form under the given parameters, after
// checking that the family belongs to the parameters' regime.
struct FamilyExponents {
    AnalyticShape shape;
    double beta, gamma;
};
[[nodiscard]] FamilyExponents family_exponents(FamilyKind kind, const CknParams& P);

// Throws "family-regime-mismatch" or "bad-scale".
[[nodiscard]] RadialProfile make_optimizer(const OptimizerFamily& family, const CknParams& P);

// Throws "bad-grid" for fewer than 8 nodes, non-increasing or non-positive nodes, negative
// or non-finite values, or non-positive values in log interpolation.
[[nodiscard]] RadialProfile make_grid_profile(std::vector<double> nodes,
                                              std::vector<double> values, double origin_order,
                                              double tail_order,
                                              GridInterp interp = GridInterp::Value);

// kappa * g(lambda * rho^e); nested compositions are folded into one.
[[nodiscard]] RadialProfile compose(const RadialProfile& g, double scale, double dilation,
                                    double exponent);

// Shape descriptor for int_0^inf rho^(c-1) (1 + B rho^beta)^(-gamma) d rho (Bubble) or
// int_0^R rho^(c-1) (1 - B rho^beta)^gamma d rho (Compact).
struct MomentShape {
    AnalyticShape shape;
    double B, beta, gamma;
};

// Gamma/Beta closed form; throws "divergent-moment" when a Gamma argument is not positive.
[[nodiscard]] double analytic_moment(const MomentShape& m, double c);

// The family's own moment: shape and exponents taken from make_optimizer's closed form.
[[nodiscard]] double analytic_moment(const OptimizerFamily& family, double c, const CknParams& P);

}  // namespace ckn
