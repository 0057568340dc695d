#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckn/params.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

constexpr double kDefaultTolerance = 1e-10;

struct IntegralValue {
    double value = 0;
    double error = 0;  // absolute
};

// S * int_0^inf |g|^k rho^(N-1-t) d rho, with S the sphere measure (N omega_N by default).
[[nodiscard]] IntegralValue power_integral(const RadialProfile& g, double k, double t, double N,
                                           double tolerance = kDefaultTolerance,
                                           std::optional<double> sphere = std::nullopt);

// S * int_0^inf |g'|^p rho^(N-1-mu) d rho.
[[nodiscard]] IntegralValue gradient_integral(const RadialProfile& g, double p, double mu, double N,
                                              double tolerance = kDefaultTolerance,
                                              std::optional<double> sphere = std::nullopt);

[[nodiscard]] double weighted_norm(const RadialProfile& g, double k, double t, double N,
                                   double tolerance = kDefaultTolerance);
[[nodiscard]] double gradient_norm(const RadialProfile& g, double p, double mu, double N,
                                   double tolerance = kDefaultTolerance);

// Weight powers of the target, gradient and interpolation integrals.
struct Weights {
    double s = 0, mu = 0, theta = 0;
};

struct QuotientSetup {
    double N = 3, p = 2, q = 2, r = 2, a = 1;
    Weights w;
    std::optional<double> sphere;  // defaults to N omega_N
    double tolerance = kDefaultTolerance;
};

[[nodiscard]] QuotientSetup setup_from(const CknParams& P, double tolerance = kDefaultTolerance);

struct QuotientReport {
    double target_norm = 0, grad_norm = 0, quotient = 0;
    std::optional<double> interp_norm;  // absent when a = 1 (its power vanishes)
    double target_error = 0, grad_error = 0;
    std::optional<double> interp_error;
    double quotient_error = 0;  // first-order bound from the three integral errors
    std::vector<std::string> flags;
};

[[nodiscard]] QuotientReport quotient(const RadialProfile& g, const QuotientSetup& setup);
[[nodiscard]] QuotientReport ckn_quotient(const CknParams& P, const RadialProfile& g,
                                          double tolerance = kDefaultTolerance);

struct EnergyParts {
    double A_part = 0, B_part = 0, I = 0, lambda0 = 0, I_min = 0;
    double m = 0, n = 0;
};

// Energy (1/p) int |grad u|^p + (1/q) int |u|^q |x|^-(N+theta d-Nd) in regime C1.
[[nodiscard]] EnergyParts energy(const RadialProfile& g, const CknParams& P,
                                 double tolerance = kDefaultTolerance);

// u_l(x) = l^((Nd-sd)/r) u(l x).
[[nodiscard]] RadialProfile energy_rescale(const RadialProfile& g, const CknParams& P,
                                           double lambda);

}  // namespace ckn
