#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ckn {

// One-dimensional job  int_0^R f(rho) rho^c d rho  with R = infinity or a finite edge.
// The integrand is supplied in log form as a function of tau = log(rho), which keeps
// evaluations finite far into the power-law tails.
struct RadialIntegral {
    std::function<double(double)> log_integrand;  // tau -> log|f(e^tau)|, -inf for zeros
    double power = 0;                             // c
    double origin_order = 0;                      // f ~ rho^origin_order as rho -> 0
    double tail_order = 0;                        // f ~ rho^tail_order as rho -> infinity
    std::optional<double> edge;                   // support (0, edge] when set
    double edge_order = 0;                        // f ~ (edge - rho)^edge_order at the edge
    std::vector<double> breakpoints;              // rho values where f is not smooth
    double center = 1;                            // rho where f carries its mass
    double tolerance = 1e-10;                     // relative
};

// Convenience for an integrand given directly as rho -> f(rho).
[[nodiscard]] RadialIntegral radial_job(std::function<double(double)> f, double power,
                                        double origin_order, double tail_order);

struct QuadratureResult {
    double value = 0;
    double error = 0;  // difference of the last two refinement levels (with a roundoff floor)
    int levels = 0;
    std::size_t evaluations = 0;
};

// Double-exponential quadrature after rho = e^tau. Throws "divergent-integral" naming the
// offending endpoint and "tolerance-unmet" carrying the best estimate.
[[nodiscard]] QuadratureResult integrate_radial(const RadialIntegral& job);

// Surface measure of the unit sphere, N omega_N = 2 pi^{N/2} / Gamma(N/2); N may be real.
[[nodiscard]] double sphere_measure(double N);

// ---- Monte Carlo ----------------------------------------------------------------------

struct McOptions {
    double radial_scale = 1;   // sigma of the sampling law rho/sigma ~ BetaPrime(N-t, kappa)
    double tail_exponent = 2;  // kappa; larger values sample lighter tails
};

struct McEstimate {
    double estimate = 0;
    double std_error = 0;
};

using Field = std::function<double(std::span<const double>)>;

// Estimates int_{R^N} fn(x) |x|^{-t} dx by importance sampling from a radial density that
// carries the same |x|^{-t} singularity. Deterministic for a given seed.
[[nodiscard]] McEstimate integrate_mc(const Field& fn, double t, double N, std::size_t samples,
                                      std::uint64_t seed, const McOptions& opts = {});

// Throws "non-integer-dimension" unless N is an integer in [lo, hi].
int require_integer_dimension(double N, int lo, int hi);

}  // namespace ckn
