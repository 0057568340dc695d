#include <doctest.h>

#include <cmath>
#include <random>

#include "ckn/constants.hpp"
#include "ckn/error.hpp"
#include "ckn/functionals.hpp"
#include "ckn/profiles.hpp"

using namespace ckn;

namespace {

// int_0^inf rho^(c-1) (1 + rho^2)^-gamma
double m2(double c, double gamma) {
    return std::tgamma(c / 2) * std::tgamma(gamma - c / 2) / (2 * std::tgamma(gamma));
}

CknParams t5(double N, double p, double q, double mu) {
    const double crit = N * mu / (N - p);
    return validate({N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
}

}  // namespace

TEST_CASE("weighted norm of the rational profile") {
    const auto g = make_bubble(1, 1, 2, 1);
    const double expect = std::pow(4 * M_PI * m2(3, 6), 1.0 / 6);
    CHECK(weighted_norm(g, 6, 0, 3) == doctest::Approx(expect).epsilon(1e-9));
    CHECK_THROWS_WITH_AS((void)weighted_norm(g, 6, 3, 3), doctest::Contains("divergent-integral"), Error);
}

TEST_CASE("ball indicator through a grid profile") {
    std::vector<double> x, y;
    for (int i = 0; i < 4000; ++i) {
        x.push_back(std::pow(10.0, -3 + 4.0 * i / 3999));
        y.push_back(x.back() <= 1 ? 1.0 : 0.0);
    }
    const auto g = make_grid_profile(x, y, 0, 0);
    CHECK(weighted_norm(g, 1, 0, 3, 1e-8) == doctest::Approx(4 * M_PI / 3).epsilon(5e-3));
}

TEST_CASE("gradient norm of the square-root bubble") {
    const auto g = make_bubble(1, 1, 2, 0.5);
    const double expect = std::sqrt(4 * M_PI * m2(5, 3));
    CHECK(gradient_norm(g, 2, 0, 3) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("quotient at the rational profile from Beta moments") {
    const auto P = t5(3, 2, 3, 0);
    const auto rep = ckn_quotient(P, make_optimizer({FamilyKind::T5, 1, 1}, P));
    const double S = 4 * M_PI;
    const double target = std::pow(S * m2(3, 4), 0.25);
    const double grad = std::sqrt(S * 4 * m2(5, 4));
    const double interp = std::pow(S * m2(3, 3), 1.0 / 3);
    const double expect = target / (std::sqrt(grad) * std::sqrt(interp));
    CHECK(rep.target_norm == doctest::Approx(target).epsilon(1e-10));
    CHECK(rep.grad_norm == doctest::Approx(grad).epsilon(1e-10));
    REQUIRE(rep.interp_norm);
    CHECK(*rep.interp_norm == doctest::Approx(interp).epsilon(1e-10));
    CHECK(rep.quotient == doctest::Approx(expect).epsilon(1e-9));
    CHECK(rep.quotient_error < 1e-8);
}

TEST_CASE("dilation and amplitude invariance") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0, 1);
    const auto P = t5(4, 2.5, 3, 0.3);
    const auto g = make_bubble(1, 1, 2.2, 1.3);
    const double q0 = ckn_quotient(P, g).quotient;
    for (int i = 0; i < 100; ++i) {
        const double lambda = std::pow(10.0, -3 + 6 * U(rng));
        CHECK(ckn_quotient(P, compose(g, 1, lambda, 1)).quotient == doctest::Approx(q0).epsilon(1e-9));
    }
    for (double c : {-3.0, 0.01, 7.0}) {
        CHECK(ckn_quotient(P, compose(g, c, 1, 1)).quotient == doctest::Approx(q0).epsilon(1e-12));
    }
}

TEST_CASE("energy reduction") {
    const auto P = t5(3, 2, 3, 0.4);
    const auto g = make_stretched_exp(1.3, 0.7, 1.8);
    const auto E = energy(g, P);
    CHECK(E.I == doctest::Approx(E.A_part + E.B_part).epsilon(1e-14));
    CHECK(E.lambda0 == doctest::Approx(std::pow(E.n * E.B_part / (E.m * E.A_part), 1 / (E.m + E.n))).epsilon(1e-13));
    const double closed = ((E.m + E.n) / E.m) * std::pow(E.n / E.m, -E.n / (E.m + E.n)) *
                          std::pow(E.A_part, E.n / (E.m + E.n)) * std::pow(E.B_part, E.m / (E.m + E.n));
    CHECK(E.I_min == doctest::Approx(closed).epsilon(1e-10));
    CHECK(E.I_min <= E.I);
    // explicit rescaling
    const auto E0 = energy(energy_rescale(g, P, E.lambda0), P);
    CHECK(E0.I == doctest::Approx(E.I_min).epsilon(1e-8));
    // scan
    double best = HUGE_VAL;
    int arg = -1, nearest = -1;
    double nd = HUGE_VAL;
    for (int j = 0; j < 50; ++j) {
        const double ll = std::log(E.lambda0) - 1.13 + 2.0 * j / 49;
        const double I = energy(energy_rescale(g, P, std::exp(ll)), P).I;
        if (I < best) best = I, arg = j;
        if (std::abs(ll - std::log(E.lambda0)) < nd) nd = std::abs(ll - std::log(E.lambda0)), nearest = j;
    }
    CHECK(arg == nearest);
}

TEST_CASE("trial profiles stay below the sharp constant") {
    const auto P = t5(3, 2, 3, 0.4);
    const double C = sharp_constant_t5(P).value;
    const RadialProfile trials[] = {make_stretched_exp(1, 1, 2), make_stretched_exp(1, 1, 1.2),
                                    make_bubble(1, 1, 2, 2), make_compact(1, 1, 2, 2),
                                    make_bubble(1, 3, 1.5, 3)};
    for (const auto& g : trials) CHECK(ckn_quotient(P, g).quotient <= C * (1 + 1e-6));
}

TEST_CASE("a = 1 drops the interpolation norm") {
    const auto P = validate({4, 2, 3, 2, 3, 1, 3, {}});
    const auto rep = ckn_quotient(P, make_stretched_exp(1, 1, 2));
    CHECK_FALSE(rep.interp_norm.has_value());
}
