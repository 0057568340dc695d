#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ckn::pchip {

// Shape-preserving cubic Hermite slopes (Fritsch-Butland weighted harmonic mean, with the
// three-point one-sided formula at the ends).
[[nodiscard]] std::vector<double> slopes(std::span<const double> x, std::span<const double> y);

// Slope at node k only; lets callers refresh a few slopes after a local change of y.
[[nodiscard]] double slope_at(std::span<const double> x, std::span<const double> y, std::size_t k);

struct Sample {
    double value, derivative;
};

// Hermite cubic on [x0, x1] with end values y0, y1 and end slopes d0, d1.
[[nodiscard]] Sample hermite(double x0, double x1, double y0, double y1, double d0, double d1,
                             double x);

}  // namespace ckn::pchip
