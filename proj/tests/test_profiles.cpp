#include <doctest.h>

#include <cmath>
#include <random>

#include "ckn/error.hpp"
#include "ckn/functionals.hpp"
#include "ckn/profiles.hpp"

using namespace ckn;

namespace {

double bubble_moment(double B, double beta, double gamma, double c) {
    return std::pow(B, -c / beta) * std::tgamma(c / beta) * std::tgamma(gamma - c / beta) /
           (beta * std::tgamma(gamma));
}

double compact_moment(double B, double beta, double gamma, double c) {
    return std::pow(B, -c / beta) * std::tgamma(c / beta) * std::tgamma(gamma + 1) /
           (beta * std::tgamma(c / beta + gamma + 1));
}

double fd(const RadialProfile& g, double x) {
    const double h = 1e-5 * x;
    return (g.eval(x + h) - g.eval(x - h)) / (2 * h);
}

CknParams t5(double N, double p, double q, double mu) {
    const double crit = N * mu / (N - p);
    return validate({N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
}

CknParams t6(double N, double p, double r, double mu) {
    const double crit = N * mu / (N - p);
    return validate({N, p, p * (r - 1) / (p - 1), r, crit, mu, crit, {}});
}

}  // namespace

TEST_CASE("bubble family at mu = 0, p = 2, q = 3") {
    const auto g = make_optimizer({FamilyKind::T5, 1, 1}, t5(3, 2, 3, 0));
    for (double x : {0.01, 0.5, 1.0, 3.0, 100.0}) {
        CHECK(g.eval(x) == doctest::Approx(1 / (1 + x * x)).epsilon(1e-14));
        CHECK(g.deriv(x) == doctest::Approx(-2 * x / ((1 + x * x) * (1 + x * x))).epsilon(1e-13));
    }
}

TEST_CASE("A1 family at mu = s = 0 is the bubble") {
    const double N = 3, p = 2;
    const auto P = validate({N, p, 1, N * p / (N - p), 0, 0, 0, {}});
    REQUIRE(P.regime == Regime::C3);
    const double c = 1.7, lambda = 0.6;
    const auto g = make_optimizer({FamilyKind::A1, c, lambda}, P);
    for (double x : {0.1, 1.0, 4.0}) {
        const double expect = c * std::pow(lambda + std::pow(x, p / (p - 1)), -(N - p) / p);
        CHECK(g.eval(x) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("compact family needs r < p and vanishes beyond its edge") {
    CHECK_THROWS_AS((void)make_optimizer({FamilyKind::T6, 1, 1}, t5(3, 2, 3, 0)), Error);
    const auto P = t6(3, 2, 1.7, 0.3);
    REQUIRE(P.regime == Regime::C1);
    const auto g = make_optimizer({FamilyKind::T6, 1, 2}, P);
    REQUIRE(g.shape().edge);
    const double R = *g.shape().edge;
    CHECK(g.eval(R * 1.0001) == 0);
    CHECK(g.eval(R * 3) == 0);
    CHECK(g.eval(R * 0.999) > 0);
    CHECK(g.eval(R * 0.5) > 0);
}

TEST_CASE("bad scale") {
    CHECK_THROWS_WITH_AS((void)make_optimizer({FamilyKind::T5, 1, 0}, t5(3, 2, 3, 0)), doctest::Contains("bad-scale"),
                         Error);
}

TEST_CASE("grid interpolation of the rational profile") {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(std::pow(10.0, -3 + 6.0 * i / 199));
        y.push_back(1 / (1 + x.back() * x.back()));
    }
    for (const auto mode : {GridInterp::Value, GridInterp::LogValue}) {
        const auto g = make_grid_profile(x, y, 0, -2, mode);
        for (double r = 0.1; r <= 10; r *= 1.07) CHECK(g.eval(r) == doctest::Approx(1 / (1 + r * r)).epsilon(1e-4));
        // power-law extension
        CHECK(g.eval(1e4) == doctest::Approx(y.back() * std::pow(1e4 / x.back(), -2)).epsilon(1e-12));
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_WITH_AS((void)make_grid_profile({1, 2}, {1, 1}, 0, -2), doctest::Contains("bad-grid"), Error);
    std::vector<double> x(10), y(10, 1.0);
    for (int i = 0; i < 10; ++i) x[i] = 1 + i;
    x[5] = x[4];
    CHECK_THROWS_WITH_AS((void)make_grid_profile(x, y, 0, -2), doctest::Contains("bad-grid"), Error);
}

TEST_CASE("non-decaying grid profile diverges when integrated") {
    std::vector<double> x(10), y(10, 1.0);
    for (int i = 0; i < 10; ++i) x[i] = std::pow(2.0, i);
    const auto g = make_grid_profile(x, y, 0, 0);
    CHECK_THROWS_WITH_AS((void)weighted_norm(g, 1, 0, 3), doctest::Contains("divergent-integral"), Error);
}

TEST_CASE("analytic moments") {
    CHECK(analytic_moment(MomentShape{AnalyticShape::Bubble, 1, 2, 2}, 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_WITH_AS((void)analytic_moment(MomentShape{AnalyticShape::Bubble, 1, 2, 1}, 2),
                         doctest::Contains("divergent-moment"), Error);
    CHECK(analytic_moment(MomentShape{AnalyticShape::Compact, 1, 1, 1}, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("derivatives agree with finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 100; ++i) {
        const double A = 0.5 + U(rng), B = 0.3 + 2 * U(rng);
        const double beta = 0.8 + 2 * U(rng), gamma = 0.4 + 2 * U(rng);
        const RadialProfile gs[] = {make_bubble(A, B, beta, gamma), make_compact(A, B, beta, gamma),
                                    make_stretched_exp(A, B, beta)};
        for (const auto& g : gs) {
            const double edge = g.shape().edge.value_or(HUGE_VAL);
            for (double x : {0.3, 0.8, 1.5}) {
                const double r = std::min(x, 0.9 * edge);
                CHECK(g.deriv(r) == doctest::Approx(fd(g, r)).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("family moments match the Gamma oracle through quadrature") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 20; ++i) {
        const double B = 0.3 + 2 * U(rng), beta = 0.8 + 2 * U(rng), gamma = 1 + 3 * U(rng);
        const double c = (0.1 + 0.8 * U(rng)) * beta * gamma;
        const double N = 3, t = N - c;
        const double bq = power_integral(make_bubble(1, B, beta, gamma), 1, t, N, 1e-11, 1.0).value;
        CHECK(bq == doctest::Approx(bubble_moment(B, beta, gamma, c)).epsilon(1e-9));
        CHECK(analytic_moment(MomentShape{AnalyticShape::Bubble, B, beta, gamma}, c) ==
              doctest::Approx(bubble_moment(B, beta, gamma, c)).epsilon(1e-12));
        const double cq = power_integral(make_compact(1, B, beta, gamma), 1, t, N, 1e-11, 1.0).value;
        CHECK(cq == doctest::Approx(compact_moment(B, beta, gamma, c)).epsilon(1e-9));
    }
}

TEST_CASE("tail metadata matches the decay") {
    const auto P = t5(4, 2.5, 3, 0.3);
    const auto g = make_optimizer({FamilyKind::T5, 1, 1}, P);
    const double k = g.shape().tail_order;
    const double a = g.eval(1e6) * std::pow(1e6, -k), b = g.eval(1e9) * std::pow(1e9, -k);
    CHECK(a == doctest::Approx(b).epsilon(1e-5));
    CHECK(a > 0);
}
