#include <doctest.h>

#include <cmath>

#include "ckn/constants.hpp"
#include "ckn/error.hpp"
#include "ckn/search.hpp"

using namespace ckn;

namespace {

CknParams t5(double N, double p, double q, double mu) {
    const double crit = N * mu / (N - p);
    return validate({N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
}

CknParams c2(double N, double q, double mu, double frac) {
    const double lo = N * mu / (N - 2), hi = N - (q - 1) * (N - 2 - mu);
    const double s = lo + frac * (hi - lo);
    return validate({N, 2, q, 2 * (q - 1), s, mu, s, {}});
}

}  // namespace

TEST_CASE("exact optimizer is already converged") {
    const auto P = t5(3, 2, 3, 0);
    const auto res = maximize_quotient(P, sample_profile(P, make_optimizer({FamilyKind::T5, 1, 1}, P)));
    CHECK(res.converged);
    CHECK(res.accepted_steps == 0);
    REQUIRE(res.family_fit);
    CHECK(res.family_fit->residual < 1e-6);
}

TEST_CASE("perturbed optimizer is recovered") {
    const auto P = t5(4, 2.5, 3, 0.3);
    const double C = sharp_constant_t5(P).value;
    const auto init = perturbed_profile(P, make_optimizer({FamilyKind::T5, 1, 1}, P), 0.2, 3);
    const auto res = maximize_quotient(P, init);
    CHECK(res.converged);
    CHECK(std::abs(res.best_quotient - C) / C <= 1e-6);
    CHECK(res.best_quotient <= C * (1 + 1e-6));
    for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] >= res.history[i - 1]);
}

TEST_CASE("random start reaches the constant and the family") {
    const auto P = t5(3, 2, 3, 0.4);
    const double C = sharp_constant_t5(P).value;
    SearchOptions o;
    o.seed = 5;
    const auto res = maximize_quotient(P, random_initial_profile(P, 5, o), o);
    const double gap = (res.best_quotient - C) / C;
    CHECK(gap <= 1e-6);
    CHECK(gap >= -1e-3);
    REQUIRE(res.family_fit);
    CHECK(res.family_fit->family == FamilyKind::T5);
    CHECK(res.family_fit->residual < 1e-2);
}

TEST_CASE("seeded searches are bit-identical") {
    const auto P = t5(3, 2, 3, 0);
    SearchOptions o;
    o.nodes = 80;
    o.max_iterations = 200;
    const auto a = maximize_from_seeds(P, {7, 8}, o, 2);
    const auto b = maximize_from_seeds(P, {7, 8}, o, 1);
    for (int k = 0; k < 2; ++k) {
        CHECK(a[k].best_quotient == b[k].best_quotient);
        CHECK(a[k].iterations == b[k].iterations);
        const auto& ga = std::get<GridKind>(a[k].best_profile.kind());
        const auto& gb = std::get<GridKind>(b[k].best_profile.kind());
        CHECK(ga.values == gb.values);
    }
}

TEST_CASE("family fitting") {
    const auto P = t5(4, 2.5, 3, 0.3);
    const auto exact = fit_family(sample_profile(P, make_optimizer({FamilyKind::T5, 1.3, 0.7}, P)), FamilyKind::T5, P);
    CHECK(exact.residual < 1e-12);
    CHECK(exact.A == doctest::Approx(1.3).epsilon(1e-10));
    CHECK(exact.B == doctest::Approx(0.7).epsilon(1e-10));
    const auto gauss = fit_family(sample_profile(P, make_stretched_exp(1, 1, 0.5)), FamilyKind::T5, P);
    CHECK(gauss.residual > 0.05);
    const auto negative = compose(make_optimizer({FamilyKind::T5, 1, 1}, P), -1, 1, 1);
    CHECK_THROWS_WITH_AS((void)fit_family(negative, FamilyKind::T5, P), doctest::Contains("unfittable"), Error);
}

TEST_CASE("stationarity of optimizers and non-optimizers") {
    const auto P = t5(3, 2, 3, 0);
    StationarityOptions o;
    o.trials = 20;
    const auto st = stationarity_check(P, make_optimizer({FamilyKind::T5, 1, 1}, P), o);
    CHECK(st.stationary);
    CHECK(st.max_gain <= 1e-8 * o.epsilon);
    o.epsilon = 1e-2;
    const auto gs = stationarity_check(P, make_stretched_exp(1, 1, 2), o);
    CHECK_FALSE(gs.stationary);
    CHECK(gs.max_gain > 1e-4);
    o.epsilon = 0.1;
    CHECK_THROWS_WITH_AS((void)stationarity_check(P, make_stretched_exp(1, 1, 2), o), doctest::Contains("bad-amplitude"),
                         Error);
}

TEST_CASE("candidate in regime C2 is stationary") {
    const auto P = c2(4, 2.5, 0.5, 0.1);
    REQUIRE(P.regime == Regime::C2);
    StationarityOptions o;
    o.trials = 20;
    CHECK(stationarity_check(P, make_optimizer({FamilyKind::T11, 1, 1}, P), o).stationary);
}

TEST_CASE("search input errors") {
    const auto bad = validate({3, 2, 5, 4, 0, 0, 0, {}});
    CHECK_THROWS_WITH_AS((void)maximize_quotient(bad, make_stretched_exp(1, 1, 2)), doctest::Contains("invalid-params"),
                         Error);
    const auto P = t5(3, 2, 3, 0);
    CHECK_THROWS_WITH_AS((void)sample_profile(P, make_compact(1, 1, 2, 2)), doctest::Contains("bad-grid"), Error);
}
