#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "ckn/constants.hpp"
#include "ckn/error.hpp"
#include "ckn/gauge.hpp"
#include "ckn/json_io.hpp"
#include "ckn/search.hpp"
#include "ckn/transform.hpp"
#include "cli.hpp"

namespace {

using namespace ckn;

constexpr int kExitFailedCheck = 1;
constexpr int kExitBadInput = 2;

CknParams load_params(const std::string& path) {
    const CknParams P = validate(raw_params_from_json(read_json_file(path)));
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);
    return P;
}

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_constant(const std::string& params_path, const std::string& branch, bool oracle,
                 double tolerance) {
    const CknParams P = load_params(params_path);
    ConstantOptions opts;
    opts.check_oracle = oracle;
    opts.tolerance = tolerance;
    Json out = to_json(sharp_constant(P, constant_branch_from_string(branch), opts));
    out["params"] = to_json(P);
    emit(out);
    return 0;
}

int cmd_quotient(const std::string& params_path, const std::string& profile_path,
                 const std::string& gauge, double tolerance) {
    const CknParams P = load_params(params_path);
    const RadialProfile g = profile_from_json(read_json_file(profile_path), P);
    Json out;
    if (gauge.empty()) {
        out = to_json(ckn_quotient(P, g, tolerance));
    } else {
        const Json gj{{"rho", gauge == "inf" ? Json("inf") : parse_json_text(gauge)}};
        const Gauge G = gauge_from_json(gj, P.N);
        out = to_json(gauge_quotient(P, g, G, tolerance));
        out["gauge"] = to_json(G);
    }
    out["params"] = to_json(P);
    emit(out);
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, double scale) {
    if (!(scale >= 0)) throw Error("malformed-input", "--tolerance-scale must be non-negative");
    const auto res = cli::run_suite(suite, seed, scale);
    emit(res.log);
    std::cerr << "suite " << suite << ": " << (res.passed ? "PASS" : "FAIL") << '\n';
    return res.passed ? 0 : kExitFailedCheck;
}

int cmd_search(const std::string& params_path, int seeds, std::uint64_t base_seed, int nodes,
               int max_iterations, unsigned threads) {
    if (seeds < 1) throw Error("malformed-input", "--seeds must be positive");
    const CknParams P = load_params(params_path);
    SearchOptions opts;
    opts.nodes = nodes;
    opts.max_iterations = max_iterations;
    std::vector<std::uint64_t> seed_list(static_cast<std::size_t>(seeds));
    std::iota(seed_list.begin(), seed_list.end(), base_seed);
    const auto results = maximize_from_seeds(P, seed_list, opts, threads);

    std::size_t best = 0;
    Json arr = Json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].best_quotient > results[best].best_quotient) best = i;
        arr.push_back(to_json(results[i]));
    }
    emit(Json{{"params", to_json(P)}, {"best_index", best}, {"results", arr}});

    const auto& b = results[best];
    std::fprintf(stderr, "best quotient %.17g (seed %llu, %s)\n", b.best_quotient,
                 static_cast<unsigned long long>(b.seed), b.converged ? "converged" : "not converged");
    if (b.family_fit) {
        std::fprintf(stderr, "fitted %s family: A=%.12g B=%.12g residual=%.3e\n",
                     std::string(to_string(b.family_fit->family)).c_str(), b.family_fit->A,
                     b.family_fit->B, b.family_fit->residual);
    } else {
        std::fprintf(stderr, "no closed-form family for this regime\n");
    }
    return 0;
}

int cmd_transform(const std::string& profile_path, const std::string& params_path, double d,
                  double p, const std::string& direction) {
    std::optional<CknParams> P;
    if (!params_path.empty()) P = load_params(params_path);
    if (!(d > 0) || !(p > 1)) throw Error("malformed-input", "needs d > 0 and p > 1");
    const RadialProfile g = profile_from_json(read_json_file(profile_path), P);
    const TransformSpec spec{d, p, P ? P->N : 3.0};
    emit(to_json(direction == "fwd" ? forward(g, spec) : inverse(g, spec)));
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& output, unsigned threads) {
    const Json spec = read_json_file(spec_path);
    if (threads == 0 && spec.contains("threads")) {
        const Json& t = spec["threads"];
        if (!t.is_number_unsigned() || t.get<unsigned>() < 1) {
            throw Error("malformed-input", "threads must be a positive integer");
        }
        threads = t.get<unsigned>();
    }
    if (threads == 0) threads = cli::default_threads();
    std::string out = output;
    if (out.empty() && spec.contains("output")) {
        if (!spec["output"].is_string()) throw Error("malformed-input", "output must be a string");
        out = spec["output"].get<std::string>();
    }
    cli::run_sweep(spec, out, threads);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted interpolation inequalities: sharp constants, quotients and searches"};
    app.require_subcommand(1);

    std::string params_path, profile_path, branch, gauge, suite, direction = "fwd", spec_path,
                                                                output;
    double tolerance = kDefaultTolerance, d = 1, p = 2;
    double tolerance_scale = 1;
    bool no_oracle = false;
    std::uint64_t seed = 0;
    int seeds = 5, nodes = 200, max_iterations = 3000;
    unsigned threads = 0;

    auto* constant = app.add_subcommand("constant", "Sharp constant of a branch");
    constant->add_option("--params", params_path, "Parameter JSON file")->required();
    constant->add_option("--branch", branch, "t5, t6, a1 or hardy")
        ->required()
        ->check(CLI::IsMember({"t5", "t6", "a1", "hardy"}));
    constant->add_flag("--no-oracle", no_oracle, "Skip the quotient at the family optimizer");
    constant->add_option("--tolerance", tolerance, "Relative quadrature tolerance");

    auto* quot = app.add_subcommand("quotient", "Quotient of a radial profile");
    quot->add_option("--params", params_path, "Parameter JSON file")->required();
    quot->add_option("--profile", profile_path, "Profile JSON file")->required();
    quot->add_option("--gauge", gauge, "l^rho gauge exponent, a number >= 1 or inf");
    quot->add_option("--tolerance", tolerance, "Relative quadrature tolerance");

    auto* verify = app.add_subcommand("verify", "Run a property suite");
    verify->add_option("--suite", suite, "transforms, constants, invariants or gauge")
        ->required()
        ->check(CLI::IsMember({"transforms", "constants", "invariants", "gauge"}));
    verify->add_option("--seed", seed, "Random seed");
    verify->add_option("--tolerance-scale", tolerance_scale, "Multiplier on every pass threshold");

    auto* search = app.add_subcommand("search", "Maximize the quotient from random profiles");
    search->add_option("--params", params_path, "Parameter JSON file")->required();
    search->add_option("--seeds", seeds, "Number of random starts");
    search->add_option("--seed", seed, "First seed; starts use seed, seed+1, ...");
    search->add_option("--nodes", nodes, "Grid nodes");
    search->add_option("--max-iterations", max_iterations, "Iteration cap per start");
    search->add_option("--threads", threads, "Parallel starts (default from CKN_THREADS)");

    auto* transform = app.add_subcommand("transform", "Apply the radial power transform");
    transform->add_option("--profile", profile_path, "Profile JSON file")->required();
    transform->add_option("--params", params_path, "Parameter JSON file, for family profiles");
    transform->add_option("--d", d, "Transform power")->required();
    transform->add_option("--p", p, "Gradient exponent")->required();
    transform->add_option("--direction", direction, "fwd or inv")->check(CLI::IsMember({"fwd", "inv"}));

    auto* sweep = app.add_subcommand("sweep", "Evaluate a parameter grid to CSV");
    sweep->add_option("--spec", spec_path, "Sweep spec JSON file")->required();
    sweep->add_option("--output", output, "CSV path, overriding the spec");
    sweep->add_option("--threads", threads, "Parallel rows (default from CKN_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (*constant) return cmd_constant(params_path, branch, !no_oracle, tolerance);
        if (*quot) return cmd_quotient(params_path, profile_path, gauge, tolerance);
        if (*verify) return cmd_verify(suite, seed, tolerance_scale);
        if (*search) {
            return cmd_search(params_path, seeds, seed, nodes, max_iterations,
                              threads == 0 ? cli::default_threads() : threads);
        }
        if (*transform) return cmd_transform(profile_path, params_path, d, p, direction);
        if (*sweep) return cmd_sweep(spec_path, output, threads);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    return kExitBadInput;
}
