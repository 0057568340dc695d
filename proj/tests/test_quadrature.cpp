#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/quadrature.hpp"

using namespace ckn;

namespace {

double beta_fn(double a, double b) { return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b); }

// Midpoint sum on [0, L] with n cells.
template <class F>
double midpoint(F f, double L, int n) {
    double s = 0;
    const double h = L / n;
    for (int i = 0; i < n; ++i) s += f((i + 0.5) * h);
    return s * h;
}

}  // namespace

TEST_CASE("bubble moment by substitution") {
    const auto r = integrate_radial(radial_job([](double x) { return std::pow(1 + x * x, -2); }, 1, 0, -4));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.error <= 1e-10);
}

TEST_CASE("quartic exponential against a Riemann sum") {
    const auto f = [](double x) { return std::exp(-2 * std::pow(x, 4)); };
    const auto r = integrate_radial(radial_job(f, 3, 0, -HUGE_VAL));
    CHECK(r.value == doctest::Approx(0.125).epsilon(1e-12));
    const double riemann = midpoint([&](double x) { return f(x) * x * x * x; }, 4, 40000);
    CHECK(r.value == doctest::Approx(riemann).epsilon(1e-7));
}

TEST_CASE("log divergence is reported") {
    CHECK_THROWS_WITH_AS((void)integrate_radial(radial_job([](double) { return 1.0; }, -1, 0, 0)),
                         doctest::Contains("divergent-integral"), Error);
}

TEST_CASE("origin singularity against the Beta function") {
    // int_0^inf rho^(c) (1 + rho^2)^-3 with c = -0.7: (1/2) B((c+1)/2, 3 - (c+1)/2).
    const double c = -0.7;
    const auto r = integrate_radial(radial_job([](double x) { return std::pow(1 + x * x, -3); }, c, 0, -6));
    CHECK(r.value == doctest::Approx(0.5 * beta_fn((c + 1) / 2, 3 - (c + 1) / 2)).epsilon(1e-11));
}

TEST_CASE("compact support with a singular edge") {
    RadialIntegral job;
    job.log_integrand = [](double tau) {
        const double x = std::exp(tau);
        return x < 1 ? 0.3 * std::log1p(-x) : -HUGE_VAL;
    };
    job.power = 2;
    job.edge = 1;
    job.edge_order = 0.3;
    const auto r = integrate_radial(job);
    CHECK(r.value == doctest::Approx(beta_fn(3, 1.3)).epsilon(1e-10));
}

TEST_CASE("halving the tolerance stays within the previous error estimate") {
    auto job = radial_job([](double x) { return std::pow(1 + std::pow(x, 1.5), -3.1); }, 0.4, 0, -4.65);
    job.tolerance = 1e-6;
    const auto coarse = integrate_radial(job);
    job.tolerance = 5e-7;
    const auto fine = integrate_radial(job);
    CHECK(std::abs(fine.value - coarse.value) <= coarse.error + 1e-15);
}

TEST_CASE("sphere measure") {
    CHECK(sphere_measure(2) == doctest::Approx(2 * M_PI).epsilon(1e-15));
    CHECK(sphere_measure(3) == doctest::Approx(4 * M_PI).epsilon(1e-15));
}

TEST_CASE("Monte Carlo examples") {
    const auto gauss = [](std::span<const double> x) {
        double r2 = 0;
        for (double v : x) r2 += v * v;
        return std::exp(-r2);
    };
    const auto g2 = integrate_mc(gauss, 0, 2, 200000, 11);
    CHECK(std::abs(g2.estimate - M_PI) <= 3 * g2.std_error);
    const auto ball = integrate_mc(
        [](std::span<const double> x) {
            double r2 = 0;
            for (double v : x) r2 += v * v;
            return r2 <= 1 ? 1.0 : 0.0;
        },
        0, 3, 200000, 12);
    CHECK(std::abs(ball.estimate - 4 * M_PI / 3) <= 3 * ball.std_error);
    const auto w = integrate_mc(gauss, 1, 2, 200000, 13);
    CHECK(std::abs(w.estimate - std::pow(M_PI, 1.5)) <= 3 * w.std_error);
}

TEST_CASE("Monte Carlo agrees with the radial reduction") {
    int misses = 0;
    for (int i = 0; i < 20; ++i) {
        const int N = 2 + i % 4;
        const double t = 0.15 * (i % 5) * N;
        const double b = 0.5 + 0.1 * i;
        const auto fn = [b](std::span<const double> x) {
            double r2 = 0;
            for (double v : x) r2 += v * v;
            return std::exp(-b * r2);
        };
        const auto mc = integrate_mc(fn, t, N, 100000, 100 + i);
        const double exact =
            sphere_measure(N) * integrate_radial(radial_job([b](double r) { return std::exp(-b * r * r); }, N - 1 - t, 0,
                                                            -HUGE_VAL))
                                    .value;
        if (std::abs(mc.estimate - exact) > 3 * mc.std_error) ++misses;
    }
    // 3-sigma intervals; at most one miss among 20 is expected by chance.
    CHECK(misses <= 1);
}

TEST_CASE("Monte Carlo is deterministic and rejects bad weights") {
    const auto f = [](std::span<const double> x) { return std::exp(-x[0] * x[0] - x[1] * x[1]); };
    const auto a = integrate_mc(f, 0.5, 2, 5000, 3), b = integrate_mc(f, 0.5, 2, 5000, 3);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    CHECK_THROWS_WITH_AS((void)integrate_mc(f, 2, 2, 10, 0), doctest::Contains("divergent-weight"), Error);
}
