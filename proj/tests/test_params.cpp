#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/params.hpp"

using namespace ckn;

namespace {

bool has(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("interpolation exponent by direct arithmetic") {
    const auto P = validate({3, 2, 3, 4, 0, 0, 0, {}});
    CHECK(P.a == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(P.regime == Regime::C1);
}

TEST_CASE("a = 1 endpoint is classified C3") {
    const auto P = validate({4, 2, 3, 2, 3, 1, 3, {}});
    CHECK(P.regime == Regime::C3);
    CHECK(P.a == 1);
    CHECK(P.hardy_endpoint);
}

TEST_CASE("q < r is strict") {
    const auto P = validate({3, 2, 5, 4, 0, 0, 0, {}});
    CHECK(P.regime == Regime::Invalid);
    CHECK(has(P.reason, "q < r violated"));
    CHECK(validate({3, 2, 4, 4, 0, 0, 0, {}}).regime == Regime::Invalid);
}

TEST_CASE("boundary s = N mu/(N-p) is inside C1 despite rounding") {
    // 3 * 0.4 / 1 rounds above 1.2.
    const auto P = validate({3, 2, 3, 4, 1.2, 0.4, 1.2, {}});
    CHECK(P.regime == Regime::C1);
}

TEST_CASE("supplied a is cross-checked") {
    CHECK(validate({3, 2, 3, 4, 0, 0, 0, 0.5}).regime == Regime::C1);
    const auto bad = validate({3, 2, 3, 4, 0, 0, 0, 0.4});
    CHECK(bad.regime == Regime::Invalid);
    CHECK(has(bad.reason, "supplied a"));
}

TEST_CASE("degenerate denominator") {
    // (N - theta) p = (N - mu - p) q
    CHECK_THROWS_WITH_AS((void)interpolation_exponent(4, 2, 4, 3, 0, 0, 0), doctest::Contains("degenerate-denominator"),
                         Error);
}

TEST_CASE("derived exponents") {
    CHECK(transform_power(4, 2, 1) == 2);
    CHECK_THROWS_AS((void)transform_power(3, 2, 1), Error);
    const auto P = validate({3, 2, 3, 4, 0, 0, 0, {}});
    const auto e = derive(P, Branch::T5);
    CHECK(e.delta == 3);
    CHECK(e.d == 1);
    CHECK(std::pow(e.d, e.prefactor_exp) == 1);
    CHECK_THROWS_WITH_AS((void)derive(P, Branch::T6), doctest::Contains("branch-mismatch"), Error);
}

TEST_CASE("d exceeds 1 exactly when mu > 0") {
    for (double mu : {0.0, 0.1, 0.5, 0.9}) {
        const double d = transform_power(3, 2, mu);
        CHECK((d > 1) == (mu > 0));
    }
}

TEST_CASE("balance and scaling properties on C1 tuples") {
    for (double N : {3.0, 4.0, 5.0}) {
        for (double mu : {0.0, 0.3, 0.7}) {
            for (double f : {0.2, 0.5, 0.8}) {
                const double p = 2;
                const double crit = N * mu / (N - p);
                const double q = p + f * (p * (N - 1) / (N - p) - p);
                const double r = p * (q - 1) / (p - 1);
                const auto P = validate({N, p, q, r, crit, mu, crit, {}});
                REQUIRE(P.regime == Regime::C1);
                // Dilation balance of the three norms.
                const double lhs = (N - P.s) / P.r;
                const double rhs = P.a * (N - P.mu - p) / p + (1 - P.a) * (N - P.theta) / P.q;
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
                const auto e = derive(P, Branch::T5);
                CHECK(e.m > 0);
                CHECK(e.n > 0);
                const double ratio = (e.n / (e.m + e.n)) / (e.m / (e.m + e.n));
                CHECK(ratio == doctest::Approx((P.a / p) / ((1 - P.a) / q)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("classification is pure") {
    const RawParams raw{4, 2, 2.5, 3, 1.1, 0.5, 1.1, {}};
    const auto a = validate(raw), b = validate(raw);
    CHECK(a.regime == b.regime);
    CHECK(a.a == b.a);
    CHECK(a.reason == b.reason);
}

TEST_CASE("C2 tuples need p = 2 and r = 2(q-1)") {
    const double N = 4, mu = 0.5, q = 2.5, s = 1.2;
    CHECK(validate({N, 2, q, 2 * (q - 1), s, mu, s, {}}).regime == Regime::C2);
    CHECK(validate({N, 2, q, 2 * (q - 1) + 0.1, s, mu, s, {}}).regime != Regime::C2);
}
