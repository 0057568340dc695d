#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ckn/functionals.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

struct TransformSpec {
    double d = 1;
    double p = 2;
    double N = 3;

    [[nodiscard]] double scale() const;  // (1/d)^((p-1)/p)
};

// rho -> d^(-(p-1)/p) g(rho^d)
[[nodiscard]] RadialProfile forward(const RadialProfile& g, const TransformSpec& spec);
// rho -> d^((p-1)/p) g(rho^(1/d))
[[nodiscard]] RadialProfile inverse(const RadialProfile& g, const TransformSpec& spec);

// Gradient weight power d(p+mu-N)+N-p of the transformed side.
[[nodiscard]] double transformed_gradient_weight(const TransformSpec& spec, double mu);
// Weight power N+td-Nd that a weight |x|^-t becomes after the transform.
[[nodiscard]] double transformed_weight(const TransformSpec& spec, double t);

struct JacobianCheck {
    double formula = 0;
    double finite_difference = 0;
};

// det of the Jacobian of x -> |x|^(d-1) x: closed form d|x|^(N(d-1)) against central differences.
[[nodiscard]] JacobianCheck verify_jacobian(std::span<const double> x, double d);

struct IdentitySides {
    double lhs = 0, rhs = 0;
    double lhs_error = 0, rhs_error = 0;
};

// lhs = int |d^(-(p-1)/p) u|^k |x|^-t,  rhs = d int |Du|^k |x|^-(N+td-Nd).
[[nodiscard]] IdentitySides verify_measure_identity(const RadialProfile& g, double k, double t,
                                                    const TransformSpec& spec,
                                                    double tolerance = kDefaultTolerance);

// Radial case: lhs = int |grad Du|^p |x|^-(d(p+mu-N)+N-p),  rhs = int |grad u|^p |x|^-mu.
[[nodiscard]] IdentitySides verify_gradient_relation(const RadialProfile& g,
                                                     const TransformSpec& spec, double mu,
                                                     double tolerance = kDefaultTolerance);

// Smooth field on R^N with its exact gradient.
struct NonRadialField {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
};

// Ten fixed non-radial fields; gradients come from forward-mode differentiation.
[[nodiscard]] const std::vector<NonRadialField>& field_catalog();

struct McRelation {
    double lhs = 0, lhs_se = 0, rhs = 0, rhs_se = 0;

    // lhs <= rhs + 3 combined standard errors
    [[nodiscard]] bool holds() const;
};

// Monte Carlo version of the gradient relation for a non-radial field, N in {2,3,4}.
[[nodiscard]] McRelation verify_gradient_relation_mc(const NonRadialField& field,
                                                     const TransformSpec& spec, double mu,
                                                     std::size_t samples, std::uint64_t seed);

}  // namespace ckn
