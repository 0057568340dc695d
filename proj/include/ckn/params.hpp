#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ckn {

enum class Regime { C1, C2, C3, General, Invalid };

[[nodiscard]] std::string_view to_string(Regime r);

// Unvalidated tuple as read from input. `a` is optional and only cross-checked.
struct RawParams {
    double N = 0, p = 0, q = 0, r = 0, s = 0, mu = 0, theta = 0;
    std::optional<double> a;
};

struct CknParams {
    double N = 0, p = 0, q = 0, r = 0, s = 0, mu = 0, theta = 0;
    double a = 0;
    Regime regime = Regime::Invalid;
    std::string reason;           // violated constraints when Invalid
    bool hardy_endpoint = false;  // C3 with s = p + mu (r = p)
};

enum class Branch { T5, T6 };

struct DerivedExponents {
    double d = 1;
    double delta = 0;
    double m = 0;
    double n = 0;
    double prefactor_exp = 0;
};

// a = [(N-theta) r - (N-s) q] p / ([(N-theta) p - (N-mu-p) q] r).
// Throws "degenerate-denominator" when the denominator vanishes.
[[nodiscard]] double interpolation_exponent(double N, double p, double q, double r, double s,
                                            double mu, double theta);

// d = (N-p)/(N-p-mu); throws "hardy-denominator" when N-p-mu <= 0.
[[nodiscard]] double transform_power(double N, double p, double mu);

// Exponent of d relating the weighted quotient to its transformed counterpart.
[[nodiscard]] double prefactor_exponent(double p, double q, double r, double a);

// Exponents m, n of the dilation u_l(x) = l^{(Nd-sd)/r} u(l x) acting on the energy.
struct ScalingExponents {
    double m, n;
};
[[nodiscard]] ScalingExponents scaling_exponents(const CknParams& P, double d);

[[nodiscard]] CknParams validate(const RawParams& raw);
[[nodiscard]] DerivedExponents derive(const CknParams& P, Branch branch);

// Relative comparison used for the equality constraints between exponents.
[[nodiscard]] bool nearly_equal(double x, double y, double rel = 1e-12);

}  // namespace ckn
