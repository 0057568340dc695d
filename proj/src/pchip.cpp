#include "ckn/pchip.hpp"

#include <cmath>

namespace ckn::pchip {

namespace {

double end_slope(double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (std::signbit(d) != std::signbit(m0) || m0 == 0) {
        d = 0;
    } else if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > 3 * std::abs(m0)) {
        d = 3 * m0;
    }
    return d;
}

}  // namespace

double slope_at(std::span<const double> x, std::span<const double> y, std::size_t k) {
    const std::size_t n = x.size();
    if (n == 2) return (y[1] - y[0]) / (x[1] - x[0]);
    if (k == 0) {
        const double h0 = x[1] - x[0], h1 = x[2] - x[1];
        return end_slope(h0, h1, (y[1] - y[0]) / h0, (y[2] - y[1]) / h1);
    }
    if (k == n - 1) {
        const double h0 = x[n - 1] - x[n - 2], h1 = x[n - 2] - x[n - 3];
        return end_slope(h0, h1, (y[n - 1] - y[n - 2]) / h0, (y[n - 2] - y[n - 3]) / h1);
    }
    const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
    const double m0 = (y[k] - y[k - 1]) / h0, m1 = (y[k + 1] - y[k]) / h1;
    if (m0 * m1 <= 0) return 0;
    const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
    return (w1 + w2) / (w1 / m0 + w2 / m1);
}

std::vector<double> slopes(std::span<const double> x, std::span<const double> y) {
    std::vector<double> d(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) d[k] = slope_at(x, y, k);
    return d;
}

Sample hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
    const double deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    return {value, deriv};
}

}  // namespace ckn::pchip
