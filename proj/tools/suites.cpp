#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "ckn/constants.hpp"
#include "ckn/error.hpp"
#include "ckn/gauge.hpp"
#include "ckn/search.hpp"
#include "ckn/transform.hpp"
#include "cli.hpp"

namespace ckn::cli {

namespace {

class Suite {
public:
    Suite(std::string name, std::uint64_t seed) : name_(std::move(name)), seed_(seed) {}

    void add(const std::string& check, bool ok, Json detail) {
        passed_ = passed_ && ok;
        std::fprintf(stderr, "%s  %s\n", ok ? "PASS" : "FAIL", check.c_str());
        Json entry{{"check", check}, {"passed", ok}};
        entry.update(detail);
        checks_.push_back(std::move(entry));
    }

    // Runs body; an exception fails the check and is logged with its code.
    void guarded(const std::string& check, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            add(check, false, Json{{"error", e.code()}, {"detail", e.what()}});
        }
    }

    SuiteOutcome finish() {
        return {Json{{"suite", name_}, {"seed", seed_}, {"passed", passed_}, {"checks", checks_}},
                passed_};
    }

private:
    std::string name_;
    std::uint64_t seed_;
    Json checks_ = Json::array();
    bool passed_ = true;
};

double rel(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::uint64_t next() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

CknParams t5_params(Draw& D) {
    const double N = D.integer(3, 5);
    const double p = D.uniform(1.3, std::min(2.8, N - 0.6));
    const double mu = D.uniform(0, 0.6) * (N - p);
    const double qmax = p * (N - 1) / (N - p);
    const double q = p + D.uniform(0.1, 0.9) * (qmax - p);
    const double crit = N * mu / (N - p);
    return validate(RawParams{N, p, q, p * (q - 1) / (p - 1), crit, mu, crit, {}});
}

CknParams t6_params(Draw& D) {
    const double N = D.integer(3, 5);
    const double p = D.uniform(1.5, std::min(3.0, N - 0.6));
    const double mu = D.uniform(0, 0.6) * (N - p);
    const double r = (2 - 1 / p) + D.uniform(0.1, 0.9) * (p - (2 - 1 / p));
    const double crit = N * mu / (N - p);
    return validate(RawParams{N, p, p * (r - 1) / (p - 1), r, crit, mu, crit, {}});
}

// a = 1 holds for any (q, theta) once r = (N-s)p/(N-mu-p); s ranges over [N mu/(N-p), p+mu).
CknParams c3_params(Draw& D, bool endpoint) {
    const double N = D.integer(3, 5);
    const double p = D.uniform(1.4, std::min(2.8, N - 0.6));
    const double mu = D.uniform(0, 0.5) * (N - p);
    const double lo = N * mu / (N - p), hi = p + mu;
    const double s = endpoint ? hi : lo + D.uniform(0.05, 0.9) * (hi - lo);
    return validate(RawParams{N, p, 1, (N - s) * p / (N - mu - p), s, mu, 0, {}});
}

// Profiles with finite quotient under C1 params: stretched exponentials, compact bumps and
// bubbles with tails at least as fast as the family's own.
RadialProfile random_profile(Draw& D, const CknParams& P) {
    switch (D.integer(0, 3)) {
        case 0: return make_stretched_exp(D.uniform(0.5, 2), D.uniform(0.5, 2), D.uniform(1, 3));
        case 1: return make_compact(D.uniform(0.5, 2), D.uniform(0.5, 2), D.uniform(1.5, 3), D.uniform(1.5, 3));
        case 2: {
            const auto ex = family_exponents(FamilyKind::T5, P);
            const double beta = ex.beta * D.uniform(1, 1.5);
            const double decay = ex.beta * ex.gamma * D.uniform(1.05, 1.6);
            return make_bubble(D.uniform(0.5, 2), D.uniform(0.5, 2), beta, decay / beta);
        }
        default: return random_initial_profile(P, D.next());
    }
}

// Decays fast enough for both energy integrals, whose weights live on the transformed side.
RadialProfile energy_profile(Draw& D, const CknParams& P) {
    switch (D.integer(0, 2)) {
        case 0: return make_stretched_exp(D.uniform(0.5, 2), D.uniform(0.5, 2), D.uniform(1, 3));
        case 1: return make_compact(D.uniform(0.5, 2), D.uniform(0.5, 2), D.uniform(1.5, 3), D.uniform(1.5, 3));
        default: {
            const double beta = D.uniform(1, 3);
            return make_bubble(D.uniform(0.5, 2), D.uniform(0.5, 2), beta, (2 * P.N + D.uniform(2, 4)) / beta);
        }
    }
}

SuiteOutcome transforms_suite(std::uint64_t seed, double k) {
    Suite S("transforms", seed);
    Draw D(seed);

    S.guarded("jacobian", [&] {
        double worst = 0;
        for (int i = 0; i < 30; ++i) {
            const int N = D.integer(2, 4);
            std::vector<double> x(N);
            for (auto& v : x) v = D.uniform(-1.5, 1.5);
            const auto c = verify_jacobian(x, D.uniform(0.5, 3));
            worst = std::max(worst, rel(c.finite_difference, c.formula));
        }
        S.add("jacobian", worst <= k * 1e-6, Json{{"max_rel", number(worst)}});
    });

    S.guarded("measure-identity", [&] {
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            const double N = D.integer(2, 5);
            const TransformSpec spec{D.uniform(0.6, 3), D.uniform(1.3, 3), N};
            const double power = D.uniform(1, 4), t = D.uniform(0, 0.8) * N;
            const RadialProfile g = D.integer(0, 1) == 0
                                        ? make_stretched_exp(D.uniform(0.5, 2), D.uniform(0.5, 2), D.uniform(1, 3))
                                        : make_compact(1, D.uniform(0.5, 2), D.uniform(1.5, 3), D.uniform(1, 3));
            const auto id = verify_measure_identity(g, power, t, spec);
            worst = std::max(worst, rel(id.lhs, id.rhs));
        }
        S.add("measure-identity", worst <= k * 1e-9, Json{{"max_rel", number(worst)}});
    });

    S.guarded("gaussian-example", [&] {
        const auto id = verify_measure_identity(make_stretched_exp(1, 1, 2), 2, 0, {2, 2, 2});
        const double err = std::max(std::abs(id.lhs - M_PI / 4), std::abs(id.rhs - M_PI / 4));
        S.add("gaussian-example", err <= k * 1e-10, Json{{"lhs", number(id.lhs)}, {"rhs", number(id.rhs)}});
    });

    S.guarded("gradient-relation", [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const CknParams P = t5_params(D);
            const TransformSpec spec{transform_power(P.N, P.p, P.mu), P.p, P.N};
            const auto id = verify_gradient_relation(random_profile(D, P), spec, P.mu);
            worst = std::max(worst, rel(id.lhs, id.rhs));
        }
        S.add("gradient-relation", worst <= k * 1e-9, Json{{"max_rel", number(worst)}});
    });

    S.guarded("round-trip", [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const TransformSpec spec{D.uniform(0.5, 3), D.uniform(1.3, 3), 3};
            const RadialProfile g = make_bubble(1, D.uniform(0.5, 2), D.uniform(1, 3), D.uniform(0.5, 2));
            const RadialProfile back = inverse(forward(g, spec), spec);
            for (int j = 0; j < 20; ++j) {
                const double rho = std::exp(D.uniform(-4, 4));
                worst = std::max(worst, rel(back.eval(rho), g.eval(rho)));
            }
        }
        S.add("round-trip", worst <= k * 1e-12, Json{{"max_rel", number(worst)}});
    });

    S.guarded("nonradial-gradient", [&] {
        const double N = 3, p = 2, mu = 0.5;
        const TransformSpec spec{transform_power(N, p, mu), p, N};
        Json fields = Json::array();
        bool ok = true;
        for (const auto& f : field_catalog()) {
            const auto m = verify_gradient_relation_mc(f, spec, mu, 100000, seed);
            ok = ok && m.holds();
            fields.push_back(Json{{"field", f.name},
                                  {"lhs", number(m.lhs)},
                                  {"rhs", number(m.rhs)},
                                  {"holds", m.holds()}});
        }
        S.add("nonradial-gradient", ok, Json{{"fields", fields}});
    });
    return S.finish();
}

SuiteOutcome constants_suite(std::uint64_t seed, double k) {
    Suite S("constants", seed);
    Draw D(seed);

    const auto branch_check = [&](const std::string& name, auto make, ConstantBranch b, double tol) {
        S.guarded(name, [&] {
            double worst = 0, worst_pref = 0;
            bool flagged = false;
            for (int i = 0; i < 8; ++i) {
                const CknParams P = make(D);
                const auto rep = sharp_constant(P, b);
                worst = std::max(worst, rel(*rep.oracle_quotient, rep.value));
                flagged = flagged || !rep.flags.empty();
                const auto ex = derive(P, b == ConstantBranch::T5 ? Branch::T5 : Branch::T6);
                worst_pref = std::max(worst_pref, rel(rep.components.front().second,
                                                      std::pow(ex.d, ex.prefactor_exp)));
            }
            S.add(name, worst <= k * tol && !flagged && worst_pref <= k * 1e-13,
                  Json{{"max_rel", number(worst)}, {"prefactor_rel", number(worst_pref)}});
        });
    };
    branch_check("t5-formula-vs-optimizer", t5_params, ConstantBranch::T5, 1e-8);
    branch_check("t6-formula-vs-optimizer", t6_params, ConstantBranch::T6, 1e-7);

    S.guarded("a1-invariance-and-factorization", [&] {
        double worst_inv = 0, worst_fact = 0;
        for (int i = 0; i < 5; ++i) {
            const CknParams P = c3_params(D, false);
            const auto rep = sharp_constant_a1(P);
            for (int j = 0; j < 3; ++j) {
                const auto g = make_optimizer({FamilyKind::A1, D.uniform(0.3, 3), D.uniform(0.3, 3)}, P);
                worst_inv = std::max(worst_inv, rel(ckn_quotient(P, g).quotient, rep.value));
            }
            const double d = transform_power(P.N, P.p, P.mu);
            const TransformSpec spec{d, P.p, P.N};
            const auto g = make_optimizer({FamilyKind::A1, 1, 1}, P);
            QuotientSetup hs;
            hs.N = P.N;
            hs.p = P.p;
            hs.q = P.q;
            hs.r = P.r;
            hs.a = 1;
            hs.w = {transformed_weight(spec, P.s), 0, 0};
            const double unweighted = quotient(forward(g, spec), hs).quotient;
            worst_fact = std::max(worst_fact, rel(std::pow(d, a1_prefactor_exponent(P)) * unweighted, rep.value));
        }
        S.add("a1-invariance-and-factorization", worst_inv <= k * 1e-9 && worst_fact <= k * 1e-9,
              Json{{"invariance_rel", number(worst_inv)}, {"factorization_rel", number(worst_fact)}});
    });

    S.guarded("hardy-endpoint", [&] {
        const CknParams P = c3_params(D, true);
        const auto rep = hardy_constant(P);
        const bool exact = rep.value == P.p / (P.N - P.p - P.mu) && !rep.attained;
        double best = 0;
        for (int i = 0; i < 5; ++i) {
            const auto g = make_stretched_exp(1, D.uniform(0.5, 2), D.uniform(1, 3));
            best = std::max(best, ckn_quotient(P, g).quotient);
        }
        S.add("hardy-endpoint", exact && best < rep.value,
              Json{{"constant", number(rep.value)}, {"best_trial", number(best)}});
    });
    return S.finish();
}

SuiteOutcome invariants_suite(std::uint64_t seed, double k) {
    Suite S("invariants", seed);
    Draw D(seed);

    S.guarded("scaling-invariance", [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const CknParams P = t5_params(D);
            const RadialProfile g = random_profile(D, P);
            const double q0 = ckn_quotient(P, g).quotient;
            const double q1 = ckn_quotient(P, compose(g, D.uniform(0.2, 5), D.uniform(0.2, 5), 1)).quotient;
            worst = std::max(worst, rel(q1, q0));
        }
        S.add("scaling-invariance", worst <= k * 1e-9, Json{{"max_rel", number(worst)}});
    });

    S.guarded("energy-reduction", [&] {
        double worst = 0;
        bool located = true;
        for (int i = 0; i < 5; ++i) {
            const CknParams P = t5_params(D);
            const RadialProfile g = energy_profile(D, P);
            const auto E = energy(g, P);
            const double closed = ((E.m + E.n) / E.m) * std::pow(E.n / E.m, -E.n / (E.m + E.n)) *
                                  std::pow(E.A_part, E.n / (E.m + E.n)) * std::pow(E.B_part, E.m / (E.m + E.n));
            worst = std::max(worst, rel(E.I_min, closed));
            const double offset = D.uniform(-0.02, 0.02);
            int arg = 0;
            double best = HUGE_VAL, best_dist = HUGE_VAL;
            int nearest = 0;
            for (int j = 0; j < 50; ++j) {
                const double ll = std::log(E.lambda0) + offset - 1 + 2.0 * j / 49;
                const double I = energy(energy_rescale(g, P, std::exp(ll)), P).I;
                if (I < best) best = I, arg = j;
                const double dist = std::abs(ll - std::log(E.lambda0));
                if (dist < best_dist) best_dist = dist, nearest = j;
            }
            located = located && arg == nearest;
        }
        S.add("energy-reduction", worst <= k * 1e-8 && located, Json{{"max_rel", number(worst)}});
    });

    S.guarded("optimizer-stationary", [&] {
        const CknParams P = t5_params(D);
        StationarityOptions o;
        o.trials = 10;
        o.seed = seed;
        const auto st = stationarity_check(P, make_optimizer({FamilyKind::T5, 1, 1}, P), o);
        o.epsilon = 1e-2;
        const auto gs = stationarity_check(P, make_stretched_exp(1, 1, 2), o);
        S.add("optimizer-stationary", st.stationary && !gs.stationary && gs.max_first_order * k > 1e-6,
              Json{{"optimizer", to_json(st)}, {"gaussian", to_json(gs)}});
    });

    S.guarded("search-no-beat", [&] {
        const CknParams P = t5_params(D);
        const double C = sharp_constant_t5(P).value;
        SearchOptions o;
        o.nodes = 120;
        o.seed = seed;
        const auto res = maximize_quotient(P, random_initial_profile(P, seed, o), o);
        const double gap = (res.best_quotient - C) / C;
        S.add("search-no-beat", gap <= k * 1e-6 && gap >= -k * 1e-3,
              Json{{"constant", number(C)}, {"best", number(res.best_quotient)}, {"rel_gap", number(gap)}});
    });
    return S.finish();
}

SuiteOutcome gauge_suite(std::uint64_t seed, double k) {
    Suite S("gauge", seed);
    Draw D(seed);
    const double rhos[] = {1, 1.5, 2, 3, HUGE_VAL};

    S.guarded("ball-volume-mc", [&] {
        double worst_z = 0;
        for (int N = 2; N <= 4; ++N) {
            for (double rho : rhos) {
                const Gauge G = make_gauge(rho, N);
                const auto mc = ball_volume_mc(G, 100000, seed + N);
                worst_z = std::max(worst_z, std::abs(mc.estimate - G.kappa_N) / mc.std_error);
            }
        }
        S.add("ball-volume-mc", worst_z <= k * 3, Json{{"max_z", number(worst_z)}});
    });

    S.guarded("euclidean-specialization", [&] {
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            const CknParams P = t5_params(D);
            const RadialProfile g = random_profile(D, P);
            worst = std::max(worst, rel(gauge_quotient(P, g, make_gauge(2, P.N)).quotient,
                                        ckn_quotient(P, g).quotient));
        }
        S.add("euclidean-specialization", worst <= k * 1e-12, Json{{"max_rel", number(worst)}});
    });

    S.guarded("kappa-dependence", [&] {
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            const CknParams P = t5_params(D);
            const RadialProfile g = random_profile(D, P);
            const Gauge G1 = make_gauge(1.5, P.N), G2 = make_gauge(3, P.N);
            const double e = 1 / P.r - P.a / P.p - (1 - P.a) / P.q;
            const double ratio = gauge_quotient(P, g, G1).quotient / gauge_quotient(P, g, G2).quotient;
            worst = std::max(worst, rel(ratio, std::pow(G1.kappa_N / G2.kappa_N, e)));
        }
        S.add("kappa-dependence", worst <= k * 1e-10, Json{{"max_rel", number(worst)}});
    });

    S.guarded("transfer-ratio", [&] {
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            const CknParams P = t5_params(D);
            const RadialProfile g = random_profile(D, P);
            for (double rho : {1.5, 2.0, 3.0}) {
                const auto t = t10_transfer(P, g, make_gauge(rho, P.N));
                worst = std::max(worst, rel(t.ratio, t.expected_ratio));
            }
        }
        S.add("transfer-ratio", worst <= k * 1e-9, Json{{"max_rel", number(worst)}});
    });
    return S.finish();
}

}  // namespace

SuiteOutcome run_suite(const std::string& name, std::uint64_t seed, double tolerance_scale) {
    if (name == "transforms") return transforms_suite(seed, tolerance_scale);
    if (name == "constants") return constants_suite(seed, tolerance_scale);
    if (name == "invariants") return invariants_suite(seed, tolerance_scale);
    if (name == "gauge") return gauge_suite(seed, tolerance_scale);
    throw Error("malformed-input", "unknown suite '" + name + "'");
}

}  // namespace ckn::cli
