#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/gauge.hpp"
#include "ckn/search.hpp"

using namespace ckn;

namespace {

CknParams t5(double N, double p, double q, double mu) {
    const double crit = N * mu / (N - p);
    return validate({N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
}

}  // namespace

TEST_CASE("ball volumes") {
    CHECK(make_gauge(1, 2).kappa_N == doctest::Approx(2).epsilon(1e-14));
    CHECK(make_gauge(HUGE_VAL, 3).kappa_N == 8);
    CHECK(make_gauge(2, 3).kappa_N == doctest::Approx(4 * M_PI / 3).epsilon(1e-14));
    CHECK(make_gauge(1, 3).kappa_N == doctest::Approx(4.0 / 3).epsilon(1e-14));
    CHECK_THROWS_WITH_AS((void)make_gauge(0.5, 2), doctest::Contains("not-a-norm"), Error);
}

TEST_CASE("dual exponents and norms") {
    CHECK(make_gauge(1, 2).dual_rho == HUGE_VAL);
    CHECK(make_gauge(HUGE_VAL, 2).dual_rho == 1);
    CHECK(make_gauge(3, 2).dual_rho == doctest::Approx(1.5));
    const auto G = make_gauge(3, 3);
    const double x[] = {1, -2, 2};
    CHECK(gauge_norm(G, x) == doctest::Approx(std::cbrt(17.0)).epsilon(1e-15));
    CHECK(dual_norm(G, x) == doctest::Approx(std::pow(1 + 2 * std::pow(2.0, 1.5), 1 / 1.5)).epsilon(1e-14));
}

TEST_CASE("ball volumes against Monte Carlo") {
    for (int N = 2; N <= 4; ++N) {
        for (double rho : {1.0, 1.5, 2.0, 3.0, HUGE_VAL}) {
            const auto G = make_gauge(rho, N);
            const auto mc = ball_volume_mc(G, 200000, 17 + N);
            CHECK(std::abs(mc.estimate - G.kappa_N) <= 3 * mc.std_error);
        }
    }
}

TEST_CASE("Euclidean specialization and the kappa factor") {
    const auto P = t5(3, 2, 3, 0.4);
    const auto g = make_bubble(1, 1, 2.5, 1.1);
    const auto e = ckn_quotient(P, g);
    const auto q2 = gauge_quotient(P, g, make_gauge(2, 3));
    CHECK(q2.quotient == doctest::Approx(e.quotient).epsilon(1e-12));
    CHECK(q2.flags.empty());
    const auto G1 = make_gauge(1.5, 3), G3 = make_gauge(3, 3);
    const double k = 1 / P.r - P.a / P.p - (1 - P.a) / P.q;
    const double ratio = gauge_quotient(P, g, G1).quotient / gauge_quotient(P, g, G3).quotient;
    CHECK(ratio == doctest::Approx(std::pow(G1.kappa_N / G3.kappa_N, k)).epsilon(1e-12));
    const auto q1 = gauge_quotient(P, g, make_gauge(1, 3));
    CHECK(q1.flags == std::vector<std::string>{"non-smooth-gauge"});
    CHECK_THROWS_WITH_AS((void)gauge_quotient(P, g, make_gauge(2, 4)), doctest::Contains("dimension-mismatch"), Error);
}

TEST_CASE("transfer ratio") {
    const auto P0 = t5(3, 2, 3, 0);
    const auto t0 = t10_transfer(P0, make_stretched_exp(1, 1, 2), make_gauge(2, 3));
    CHECK(t0.ratio == doctest::Approx(1).epsilon(1e-12));
    const auto P = t5(3, 2, 3, 0.4);
    const auto g = make_optimizer({FamilyKind::T5, 1, 1}, P);
    for (double rho : {2.0, 1.5}) {
        const auto t = t10_transfer(P, g, make_gauge(rho, 3));
        CHECK(t.ratio == doctest::Approx(t.expected_ratio).epsilon(1e-9));
        CHECK(t.expected_ratio > 1);
    }
}

TEST_CASE("gauge optimizer is stationary") {
    // The gauge quotient is the Euclidean one times a kappa power, so relative gains agree.
    const auto P = t5(3, 2, 3, 0.4);
    const auto g = make_optimizer({FamilyKind::T5, 1, 1}, P);
    StationarityOptions o;
    o.trials = 10;
    CHECK(stationarity_check(P, g, o).stationary);
    const auto G = make_gauge(1.5, 3);
    const double c = gauge_quotient(P, g, G).quotient / ckn_quotient(P, g).quotient;
    const auto h = make_stretched_exp(1, 1, 2);
    CHECK(gauge_quotient(P, h, G).quotient / ckn_quotient(P, h).quotient == doctest::Approx(c).epsilon(1e-12));
}
