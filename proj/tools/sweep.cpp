#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include "ckn/constants.hpp"
#include "ckn/error.hpp"
#include "ckn/search.hpp"
#include "cli.hpp"

namespace ckn::cli {

namespace {

constexpr const char* kHeader =
    "N,p,q,r,s,mu,theta,a,regime,branch,constant,quotient_at_optimizer,rel_gap,search_best,"
    "search_gap,error_bound";

constexpr const char* kFields[] = {"N", "p", "q", "r", "s", "mu", "theta"};

[[noreturn]] void malformed(const std::string& what) { throw Error("malformed-input", what); }

struct Range {
    std::string field;
    std::vector<double> values;
};

struct SweepSpec {
    std::map<std::string, double> fixed;
    std::vector<Range> ranges;  // in kFields order; the first varies slowest
    ConstantBranch branch = ConstantBranch::T5;
    std::uint64_t seed = 0;
    int search_seeds = 0;
    int search_nodes = 120;
};

SweepSpec parse_spec(const Json& j) {
    if (!j.is_object()) malformed("sweep spec must be an object");
    SweepSpec S;
    const Json fixed = j.value("fixed", Json::object());
    const Json ranges = j.value("ranges", Json::object());
    if (!fixed.is_object() || !ranges.is_object()) malformed("fixed and ranges must be objects");
    for (const auto& [key, _] : fixed.items()) {
        if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) {
            malformed("unknown fixed field '" + key + "'");
        }
    }
    for (const auto& [key, _] : ranges.items()) {
        if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) {
            malformed("unknown range field '" + key + "'");
        }
        if (fixed.contains(key)) malformed("'" + key + "' is both fixed and ranged");
    }
    for (const char* f : kFields) {
        if (fixed.contains(f)) S.fixed[f] = read_number(fixed, f);
        if (!ranges.contains(f)) continue;
        const Json& r = ranges[f];
        const double a = read_number(r, "start"), b = read_number(r, "stop");
        const Json& steps = r.contains("steps") ? r["steps"] : Json();
        if (!steps.is_number_integer() || steps.get<long>() < 1 || steps.get<long>() > 100000) {
            malformed(std::string("range '") + f + "' needs an integer steps in [1, 100000]");
        }
        const long n = steps.get<long>();
        Range R{f, {}};
        for (long i = 0; i < n; ++i) R.values.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
        S.ranges.push_back(std::move(R));
    }
    if (!j.contains("branch") || !j["branch"].is_string()) malformed("branch must be a string");
    try {
        S.branch = constant_branch_from_string(j["branch"].get<std::string>());
    } catch (const Error& e) {
        malformed(e.what());
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) malformed("seed must be a non-negative integer");
        S.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("search")) {
        const Json& s = j["search"];
        if (!s.is_object()) malformed("search must be an object");
        S.search_seeds = s.value("seeds", 0);
        S.search_nodes = s.value("nodes", 120);
        if (S.search_seeds < 0 || S.search_nodes < 8) malformed("search needs seeds >= 0 and nodes >= 8");
    }
    return S;
}

// Fills the fields the branch determines from the others.
RawParams complete(std::map<std::string, double> v, ConstantBranch branch) {
    const auto has = [&](const char* k) { return v.count(k) > 0; };
    for (const char* k : {"N", "p", "mu"}) {
        if (!has(k)) malformed(std::string("field '") + k + "' is required");
    }
    const double N = v["N"], p = v["p"], mu = v["mu"];
    switch (branch) {
        case ConstantBranch::T5:
        case ConstantBranch::T6: {
            const double crit = N * mu / (N - p);
            if (!has("s")) v["s"] = crit;
            if (!has("theta")) v["theta"] = crit;
            const bool t5 = branch == ConstantBranch::T5;
            // T5: r = p(q-1)/(p-1); T6: q = p(r-1)/(p-1).
            const char* known = t5 ? "q" : "r";
            const char* derived = t5 ? "r" : "q";
            if (has(known) && !has(derived)) {
                v[derived] = p * (v[known] - 1) / (p - 1);
            } else if (!has(known) && has(derived)) {
                v[known] = 1 + v[derived] * (p - 1) / p;
            }
            break;
        }
        case ConstantBranch::A1:
        case ConstantBranch::Hardy:
            if (!has("s") && branch == ConstantBranch::Hardy) v["s"] = p + mu;
            if (has("s") && !has("r")) v["r"] = (N - v["s"]) * p / (N - mu - p);
            if (!has("q")) v["q"] = 1;
            if (!has("theta")) v["theta"] = 0;
            break;
    }
    for (const char* k : kFields) {
        if (!has(k)) malformed(std::string("field '") + k + "' is neither given nor derivable");
    }
    return RawParams{v["N"], v["p"], v["q"], v["r"], v["s"], v["mu"], v["theta"], {}};
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

std::optional<FamilyKind> branch_family(ConstantBranch b) {
    switch (b) {
        case ConstantBranch::T5: return FamilyKind::T5;
        case ConstantBranch::T6: return FamilyKind::T6;
        case ConstantBranch::A1: return FamilyKind::A1;
        case ConstantBranch::Hardy: return std::nullopt;
    }
    return std::nullopt;
}

std::string evaluate_row(const SweepSpec& S, const RawParams& raw, std::size_t index) {
    const CknParams P = validate(raw);
    std::optional<double> constant, qopt, gap, best, search_gap, bound;
    if (P.regime != Regime::Invalid) {
        try {
            ConstantOptions opts;
            opts.check_oracle = false;
            constant = sharp_constant(P, S.branch, opts).value;
        } catch (const Error&) {
        }
        if (const auto fam = branch_family(S.branch)) {
            try {
                const auto rep = ckn_quotient(P, make_optimizer({*fam, 1, 1}, P));
                qopt = rep.quotient;
                bound = rep.quotient_error / rep.quotient;
            } catch (const Error&) {
            }
        }
        if (constant && qopt) gap = std::abs(*qopt - *constant) / *constant;
        if (S.search_seeds > 0 && S.branch != ConstantBranch::T6 && S.branch != ConstantBranch::Hardy) {
            try {
                SearchOptions o;
                o.nodes = S.search_nodes;
                std::vector<std::uint64_t> seeds;
                for (int k = 0; k < S.search_seeds; ++k) seeds.push_back(S.seed + 1000003ull * index + k);
                double b = -HUGE_VAL;
                for (const auto& r : maximize_from_seeds(P, seeds, o, 1)) b = std::max(b, r.best_quotient);
                best = b;
                if (constant) search_gap = (b - *constant) / *constant;
            } catch (const Error&) {
            }
        }
    }
    std::string line;
    for (double x : {P.N, P.p, P.q, P.r, P.s, P.mu, P.theta}) line += fmt(x) + ",";
    line += (P.regime == Regime::Invalid ? std::string() : fmt(P.a)) + ",";
    line += std::string(to_string(P.regime)) + "," + std::string(to_string(S.branch)) + ",";
    for (const auto& x : {constant, qopt, gap, best, search_gap}) line += fmt(x) + ",";
    line += fmt(bound);
    return line;
}

}  // namespace

unsigned default_threads() {
    if (const char* env = std::getenv("CKN_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0 && n <= 1024) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_sweep(const Json& spec, const std::string& output, unsigned threads) {
    const SweepSpec S = parse_spec(spec);

    std::vector<RawParams> rows;
    std::vector<std::size_t> idx(S.ranges.size(), 0);
    for (;;) {
        auto v = S.fixed;
        for (std::size_t k = 0; k < S.ranges.size(); ++k) v[S.ranges[k].field] = S.ranges[k].values[idx[k]];
        rows.push_back(complete(v, S.branch));
        std::size_t k = S.ranges.size();
        while (k > 0 && ++idx[k - 1] == S.ranges[k - 1].values.size()) idx[--k] = 0;
        if (k == 0) break;
    }

    std::vector<std::string> lines(rows.size());
    std::vector<std::exception_ptr> errors(rows.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i; (i = next++) < rows.size();) {
            try {
                lines[i] = evaluate_row(S, rows[i], i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::max(1u, threads); ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    if (output.empty()) {
        std::cout << kHeader << '\n';
        for (const auto& l : lines) std::cout << l << '\n';
        return;
    }
    const std::string tmp = output + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) malformed("cannot write '" + tmp + "'");
        out << kHeader << '\n';
        for (const auto& l : lines) out << l << '\n';
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            malformed("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, output, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        malformed("cannot rename onto '" + output + "': " + ec.message());
    }
}

}  // namespace ckn::cli
