#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/json_io.hpp"
#include "ckn/transform.hpp"

using namespace ckn;

TEST_CASE("params round trip") {
    const auto j = parse_json_text(R"({"N":3,"p":2,"q":3,"r":4,"s":0,"mu":0,"theta":0})");
    const auto P = validate(raw_params_from_json(j));
    const auto out = to_json(P);
    CHECK(out["regime"] == "C1");
    CHECK(out["a"].get<double>() == 0.5);
    CHECK(out["derived"]["T5"]["delta"].get<double>() == 3);
    CHECK_FALSE(out["derived"].contains("T6"));
}

TEST_CASE("malformed params") {
    CHECK_THROWS_WITH_AS((void)raw_params_from_json(parse_json_text(R"({"N":3})")),
                         doctest::Contains("malformed-input"), Error);
    CHECK_THROWS_WITH_AS((void)raw_params_from_json(parse_json_text(
                             R"({"N":"x","p":2,"q":3,"r":4,"s":0,"mu":0,"theta":0})")),
                         doctest::Contains("malformed-input"), Error);
    CHECK_THROWS_WITH_AS((void)parse_json_text("{"), doctest::Contains("malformed-input"), Error);
    CHECK_THROWS_WITH_AS((void)read_json_file("/nonexistent/file.json"), doctest::Contains("malformed-input"), Error);
}

TEST_CASE("invalid params carry their reason") {
    const auto out = to_json(validate({3, 2, 5, 4, 0, 0, 0, {}}));
    CHECK(out["regime"] == "Invalid");
    CHECK(out["reason"].get<std::string>().find("q < r") != std::string::npos);
}

TEST_CASE("profile round trips") {
    const auto P = validate({3, 2, 3, 4, 0, 0, 0, {}});
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(std::pow(1.5, i - 15));
        y.push_back(1 / (1 + x.back() * x.back()));
    }
    const RadialProfile profiles[] = {
        make_grid_profile(x, y, 0, -2, GridInterp::LogValue),
        make_bubble(1.5, 0.5, 2, 1.2),
        make_compact(1, 2, 1.5, 2.5),
        make_stretched_exp(2, 1, 1.5),
        make_optimizer({FamilyKind::T5, 2, 3}, P),
        forward(make_bubble(1, 1, 2, 1), {2, 2, 3}),
    };
    for (const auto& g : profiles) {
        const auto j = to_json(g);
        const auto back = profile_from_json(parse_json_text(j.dump()));
        for (double r : {0.05, 0.7, 2.0, 30.0}) CHECK(back.eval(r) == doctest::Approx(g.eval(r)).epsilon(1e-15));
    }
}

TEST_CASE("family profiles need params") {
    const auto j = parse_json_text(R"({"kind":"family","family":"T5","A":1,"B":2})");
    CHECK_THROWS_WITH_AS((void)profile_from_json(j), doctest::Contains("malformed-input"), Error);
    const auto P = validate({3, 2, 3, 4, 0, 0, 0, {}});
    const auto g = profile_from_json(j, P);
    CHECK(g.eval(1) == doctest::Approx(make_optimizer({FamilyKind::T5, 1, 2}, P).eval(1)));
    CHECK_THROWS_AS((void)profile_from_json(parse_json_text(R"({"kind":"spline"})")), Error);
    CHECK_THROWS_AS((void)profile_from_json(parse_json_text(
                        R"({"kind":"grid","points":[[1,2,3]],"origin_order":0,"tail_order":-1})")),
                    Error);
}

TEST_CASE("gauges") {
    const auto G = gauge_from_json(parse_json_text(R"({"rho":"inf"})"), 3);
    CHECK(G.kappa_N == 8);
    const auto j = to_json(G);
    CHECK(j["rho"] == "inf");
    CHECK(j["dual_rho"].get<double>() == 1);
    CHECK_THROWS_WITH_AS((void)gauge_from_json(parse_json_text(R"({"rho":0.5})"), 3), doctest::Contains("not-a-norm"),
                         Error);
    CHECK_THROWS_WITH_AS((void)gauge_from_json(parse_json_text(R"({"rho":"big"})"), 3),
                         doctest::Contains("malformed-input"), Error);
}

TEST_CASE("non-finite numbers become strings") {
    CHECK(number(HUGE_VAL) == "inf");
    CHECK(number(-HUGE_VAL) == "-inf");
    CHECK(number(NAN) == "nan");
    CHECK(number(1.5) == 1.5);
}
