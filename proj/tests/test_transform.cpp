#include <doctest.h>

#include <cmath>
#include <random>

#include "ckn/error.hpp"
#include "ckn/transform.hpp"

using namespace ckn;

TEST_CASE("scale factor") {
    CHECK(TransformSpec{3, 2.5, 3}.scale() == doctest::Approx(std::pow(1.0 / 3, 1.5 / 2.5)).epsilon(1e-15));
}

TEST_CASE("d = 1 is the identity") {
    const auto g = make_bubble(1.2, 0.7, 1.6, 0.9);
    const auto f = forward(g, {1, 2.3, 3});
    const auto b = inverse(g, {1, 2.3, 3});
    for (double x : {0.01, 0.7, 5.0}) {
        CHECK(f.eval(x) == doctest::Approx(g.eval(x)).epsilon(1e-15));
        CHECK(b.eval(x) == doctest::Approx(g.eval(x)).epsilon(1e-15));
    }
}

TEST_CASE("Gaussian under d = 2, p = 2") {
    const auto g = make_stretched_exp(1, 1, 2);
    const auto f = forward(g, {2, 2, 2});
    const auto b = inverse(g, {2, 2, 2});
    for (double x : {0.1, 0.8, 1.3}) {
        CHECK(f.eval(x) == doctest::Approx(std::exp(-std::pow(x, 4)) / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(f.deriv(x) ==
              doctest::Approx(-4 * std::pow(x, 3) * std::exp(-std::pow(x, 4)) / std::sqrt(2.0)).epsilon(1e-13));
        CHECK(b.eval(x) == doctest::Approx(std::sqrt(2.0) * std::exp(-x)).epsilon(1e-14));
    }
}

TEST_CASE("round trips") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 20; ++i) {
        const TransformSpec spec{0.5 + 2.5 * U(rng), 1.2 + 2 * U(rng), 3};
        const auto g = make_bubble(1, 0.5 + U(rng), 1 + 2 * U(rng), 0.5 + U(rng));
        const auto a = inverse(forward(g, spec), spec), b = forward(inverse(g, spec), spec);
        for (double x : {1e-3, 0.2, 1.0, 7.0, 1e3}) {
            CHECK(a.eval(x) == doctest::Approx(g.eval(x)).epsilon(1e-12));
            CHECK(b.eval(x) == doctest::Approx(g.eval(x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("Jacobian determinant") {
    const double x2[] = {1, 0};
    auto j = verify_jacobian(x2, 2);
    CHECK(j.formula == doctest::Approx(2).epsilon(1e-15));
    CHECK(j.finite_difference == doctest::Approx(2).epsilon(1e-6));
    const double x3[] = {0.3, -0.7, 1.1};
    j = verify_jacobian(x3, 1);
    CHECK(j.formula == doctest::Approx(1).epsilon(1e-15));
    CHECK(j.finite_difference == doctest::Approx(1).epsilon(1e-9));
    std::mt19937_64 rng(8);
    std::normal_distribution<double> G;
    for (int i = 0; i < 10; ++i) {
        double u[3] = {G(rng), G(rng), G(rng)};
        const double n = std::hypot(u[0], u[1], u[2]);
        for (double& v : u) v /= n;
        j = verify_jacobian(u, 1.5);
        // closed form, written out: d |x|^(N(d-1)) with |x| = 1
        CHECK(j.formula == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(j.finite_difference == doctest::Approx(j.formula).epsilon(1e-6));
    }
}

TEST_CASE("measure identity examples") {
    auto id = verify_measure_identity(make_stretched_exp(1, 1, 2), 2, 0, {2, 2, 2});
    CHECK(std::abs(id.lhs - M_PI / 4) <= 1e-10);
    CHECK(std::abs(id.rhs - M_PI / 4) <= 1e-10);
    id = verify_measure_identity(make_bubble(1, 1, 2, 2), 2, 1, {1, 2, 3});
    CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-14));

    const double N = 3, p = 2, mu = 0.4, q = 3;
    const double crit = N * mu / (N - p);
    const auto P = validate({N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
    const auto g = make_optimizer({FamilyKind::T5, 1, 1}, P);
    id = verify_measure_identity(g, P.r, P.s, {transform_power(N, p, mu), p, N});
    CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-9));
}

TEST_CASE("radial gradient relation") {
    const double N = 4, p = 2.5, mu = 0.6;
    const TransformSpec spec{transform_power(N, p, mu), p, N};
    CHECK(transformed_gradient_weight(spec, mu) == doctest::Approx(0).epsilon(1e-14));
    for (const auto& g : {make_stretched_exp(1, 1, 2), make_bubble(1, 1, 2, 2), make_compact(1, 1, 2, 2)}) {
        const auto id = verify_gradient_relation(g, spec, mu);
        CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-9));
    }
    const auto id = verify_gradient_relation(make_bubble(1, 1, 2, 2), {1, p, N}, mu);
    CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-14));
}

TEST_CASE("non-radial fields obey the inequality") {
    const auto& cat = field_catalog();
    REQUIRE(cat.size() == 10);
    const double N = 3, p = 2, mu = 0.5;
    const TransformSpec spec{transform_power(N, p, mu), p, N};
    for (const auto& f : cat) {
        const auto m = verify_gradient_relation_mc(f, spec, mu, 50000, 1);
        CHECK_MESSAGE(m.holds(), f.name);
    }
    // The ratio field has a visible gap.
    const auto m = verify_gradient_relation_mc(cat.front(), spec, mu, 200000, 2);
    CHECK(m.lhs + 3 * std::hypot(m.lhs_se, m.rhs_se) < m.rhs);
}

TEST_CASE("catalog gradients match finite differences") {
    const double x[3] = {0.4, -0.3, 0.9};
    for (const auto& f : field_catalog()) {
        double g[3];
        f.gradient(x, g);
        for (int k = 0; k < 3; ++k) {
            double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
            xp[k] += 1e-6;
            xm[k] -= 1e-6;
            const double fd = (f.value(xp) - f.value(xm)) / 2e-6;
            CHECK_MESSAGE(g[k] == doctest::Approx(fd).epsilon(1e-6).scale(1), f.name);
        }
    }
}

TEST_CASE("Monte Carlo gradient relation rejects non-integer dimension") {
    CHECK_THROWS_AS((void)verify_gradient_relation_mc(field_catalog().front(), {1.5, 2, 3.5}, 0.3, 100, 0), Error);
}
