#pragma once

#include <cstdint>
#include <span>

#include "ckn/functionals.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

// l^rho norm on R^N; rho = +inf is the max norm.
struct Gauge {
    double rho = 2;
    int N = 3;
    double kappa_N = 0;   // volume of the unit ball
    double dual_rho = 2;  // rho/(rho-1), with 1 <-> inf

    [[nodiscard]] bool smooth() const { return rho > 1 && std::isfinite(rho); }
};

// Throws "not-a-norm" for rho < 1 and "non-integer-dimension" for N outside [1, 64].
[[nodiscard]] Gauge make_gauge(double rho, double N);

// 2^N Gamma(1+1/rho)^N / Gamma(1+N/rho), or 2^N for rho = inf.
[[nodiscard]] double ball_volume(const Gauge& g);

[[nodiscard]] double gauge_norm(const Gauge& g, std::span<const double> x);
[[nodiscard]] double dual_norm(const Gauge& g, std::span<const double> x);

// Monte Carlo estimate of the unit-ball volume.
[[nodiscard]] McEstimate ball_volume_mc(const Gauge& g, std::size_t samples, std::uint64_t seed);

// Quotient of u(x) = g(|x|_rho): the sphere measure becomes N kappa_N and the dual norm of the
// gradient is |g'|. Flags "non-smooth-gauge" for rho in {1, inf}.
[[nodiscard]] QuotientReport gauge_quotient(const CknParams& P, const RadialProfile& g,
                                            const Gauge& gauge,
                                            double tolerance = kDefaultTolerance);

struct TransferResult {
    double q1 = 0;  // transformed weights at the forward-transformed profile
    double q2 = 0;  // original weights at the profile
    double ratio = 0;
    double expected_ratio = 0;  // d^prefactor_exp
    std::vector<std::string> flags;
};

// Requires a in (0, 1] and N - p - mu > 0.
[[nodiscard]] TransferResult t10_transfer(const CknParams& P, const RadialProfile& g,
                                          const Gauge& gauge,
                                          double tolerance = kDefaultTolerance);

}  // namespace ckn
