#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ckn/error.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

int require_integer_dimension(double N, int lo, int hi) {
    if (N != std::floor(N)) {
        throw Error("non-integer-dimension", "this operation needs an integer dimension");
    }
    if (N < lo || N > hi) {
        throw Error("bad-dimension", "dimension outside the supported range");
    }
    return static_cast<int>(N);
}

McEstimate integrate_mc(const Field& fn, double t, double N, std::size_t samples,
                        std::uint64_t seed, const McOptions& opts) {
    const int dim = require_integer_dimension(N, 2, 6);
    if (!(t < N)) throw Error("divergent-weight", "weight |x|^-t needs t < N");
    if (samples < 2) throw Error("bad-job", "at least two samples are needed");
    if (!(opts.radial_scale > 0 && opts.tail_exponent > 0)) {
        throw Error("bad-job", "sampling law parameters must be positive");
    }

    // rho/sigma = X/Y with X ~ Gamma(N-t), Y ~ Gamma(kappa) is BetaPrime(N-t, kappa); the ratio
    // |x|^-t / density(x) is then bounded at the origin.
    const double shape = N - t, kappa = opts.tail_exponent, sigma = opts.radial_scale;
    const double log_norm = std::log(sphere_measure(N)) + shape * std::log(sigma) +
                            std::log(boost::math::beta(shape, kappa));

    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gx(shape, 1.0), gy(kappa, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> x(dim);
    double mean = 0, m2 = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double ratio = gx(rng) / gy(rng);
        double norm2 = 0;
        for (auto& xi : x) {
            xi = normal(rng);
            norm2 += xi * xi;
        }
        const double scale = sigma * ratio / std::sqrt(norm2);
        for (auto& xi : x) xi *= scale;

        const double f = fn(x);
        const double w = f * std::exp(log_norm + (shape + kappa) * std::log1p(ratio));
        require_finite(w, "Monte Carlo sample");
        const double delta = w - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (w - mean);
    }
    const double n = static_cast<double>(samples);
    return {mean, std::sqrt(m2 / (n - 1) / n)};
}

}  // namespace ckn
