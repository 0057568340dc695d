#include "ckn/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ckn/error.hpp"
#include "ckn/transform.hpp"

namespace ckn {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error("malformed-input", what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) malformed("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing key '") + key + "'");
    return *it;
}

double as_number(const Json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
        if (s == "nan") return NAN;
    }
    malformed(what + " must be a number");
}

double finite_number(const Json& j, const char* key) {
    const double x = read_number(j, key);
    if (!std::isfinite(x)) malformed(std::string(key) + " must be finite");
    return x;
}

double number_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? finite_number(j, key) : fallback;
}

std::string_view shape_name(AnalyticShape s) {
    switch (s) {
        case AnalyticShape::Bubble: return "bubble";
        case AnalyticShape::Compact: return "compact";
        case AnalyticShape::StretchedExp: return "stretched_exp";
    }
    return "?";
}

Json exponents_json(const DerivedExponents& e) {
    return Json{{"d", number(e.d)},
                {"delta", number(e.delta)},
                {"m", number(e.m)},
                {"n", number(e.n)},
                {"prefactor_exp", number(e.prefactor_exp)}};
}

Json flags_json(const std::vector<std::string>& flags) {
    Json a = Json::array();
    for (const auto& f : flags) a.push_back(f);
    return a;
}

// Sampling range for opaque profiles.
constexpr int kOpaqueNodes = 200;

}  // namespace

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double read_number(const Json& j, const char* key) { return as_number(field(j, key), key); }

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        malformed(std::string("JSON syntax: ") + e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) malformed("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str());
}

RawParams raw_params_from_json(const Json& j) {
    RawParams raw;
    raw.N = finite_number(j, "N");
    raw.p = finite_number(j, "p");
    raw.q = finite_number(j, "q");
    raw.r = finite_number(j, "r");
    raw.s = finite_number(j, "s");
    raw.mu = finite_number(j, "mu");
    raw.theta = finite_number(j, "theta");
    if (j.contains("a") && !j["a"].is_null()) raw.a = finite_number(j, "a");
    return raw;
}

Json to_json(const CknParams& P) {
    Json j{{"N", number(P.N)},         {"p", number(P.p)},   {"q", number(P.q)},
           {"r", number(P.r)},         {"s", number(P.s)},   {"mu", number(P.mu)},
           {"theta", number(P.theta)}, {"a", number(P.a)},   {"regime", to_string(P.regime)}};
    if (P.regime == Regime::Invalid) {
        j["reason"] = P.reason;
        return j;
    }
    j["hardy_endpoint"] = P.hardy_endpoint;
    if (P.N - P.p - P.mu > 0) {
        const double d = transform_power(P.N, P.p, P.mu);
        j["d"] = number(d);
        j["prefactor_exp"] = number(prefactor_exponent(P.p, P.q, P.r, P.a));
    }
    Json derived = Json::object();
    for (const auto& [branch, name] : {std::pair{Branch::T5, "T5"}, std::pair{Branch::T6, "T6"}}) {
        try {
            derived[name] = exponents_json(derive(P, branch));
        } catch (const Error&) {
            // The branch does not apply to this tuple.
        }
    }
    if (!derived.empty()) j["derived"] = derived;
    return j;
}

RadialProfile profile_from_json(const Json& j, const std::optional<CknParams>& params) {
    const Json& kind_j = field(j, "kind");
    if (!kind_j.is_string()) malformed("profile kind must be a string");
    const auto kind = kind_j.get<std::string>();

    if (kind == "grid") {
        const Json& pts = field(j, "points");
        if (!pts.is_array()) malformed("grid points must be an array");
        std::vector<double> nodes, values;
        for (const auto& pt : pts) {
            if (!pt.is_array() || pt.size() != 2) malformed("grid points must be [rho, g] pairs");
            nodes.push_back(as_number(pt[0], "grid node"));
            values.push_back(as_number(pt[1], "grid value"));
        }
        GridInterp interp = GridInterp::Value;
        if (j.contains("interp")) {
            const auto s = j["interp"].is_string() ? j["interp"].get<std::string>() : "";
            if (s == "log") {
                interp = GridInterp::LogValue;
            } else if (s != "value") {
                malformed("interp must be \"value\" or \"log\"");
            }
        }
        return make_grid_profile(std::move(nodes), std::move(values), finite_number(j, "origin_order"),
                                 finite_number(j, "tail_order"), interp);
    }
    if (kind == "analytic") {
        const Json& sh = field(j, "shape");
        const auto s = sh.is_string() ? sh.get<std::string>() : "";
        const double A = finite_number(j, "A"), B = finite_number(j, "B");
        const double beta = finite_number(j, "beta");
        if (s == "bubble") return make_bubble(A, B, beta, finite_number(j, "gamma"));
        if (s == "compact") return make_compact(A, B, beta, finite_number(j, "gamma"));
        if (s == "stretched_exp") return make_stretched_exp(A, B, beta);
        malformed("unknown analytic shape '" + s + "'");
    }
    if (kind == "family") {
        if (!params) malformed("family profiles need params");
        const Json& f = field(j, "family");
        if (!f.is_string()) malformed("family must be a string");
        FamilyKind fk;
        try {
            fk = family_from_string(f.get<std::string>());
        } catch (const Error& e) {
            malformed(e.what());
        }
        return make_optimizer({fk, number_or(j, "A", 1), number_or(j, "B", 1)}, *params);
    }
    if (kind == "composition") {
        const RadialProfile base = profile_from_json(field(j, "base"), params);
        return compose(base, finite_number(j, "scale"), finite_number(j, "dilation"),
                       finite_number(j, "exponent"));
    }
    malformed("unknown profile kind '" + kind + "'");
}

Json to_json(const RadialProfile& g) {
    const auto& k = g.kind();
    if (const auto* a = std::get_if<AnalyticKind>(&k)) {
        Json j{{"kind", "analytic"},
               {"shape", shape_name(a->shape)},
               {"A", number(a->A)},
               {"B", number(a->B)},
               {"beta", number(a->beta)}};
        if (a->shape != AnalyticShape::StretchedExp) j["gamma"] = number(a->gamma);
        if (a->family) j["family"] = to_string(*a->family);
        return j;
    }
    if (const auto* c = std::get_if<CompositionKind>(&k)) {
        return Json{{"kind", "composition"},
                    {"base", to_json(*c->base)},
                    {"scale", number(c->scale)},
                    {"dilation", number(c->dilation)},
                    {"exponent", number(c->exponent)}};
    }
    std::vector<double> nodes, values;
    double origin_order = g.shape().origin_order, tail_order = g.shape().tail_order;
    GridInterp interp = GridInterp::LogValue;
    if (const auto* gr = std::get_if<GridKind>(&k)) {
        nodes = gr->nodes;
        values = gr->values;
        origin_order = gr->origin_order;
        tail_order = gr->tail_order;
        interp = gr->interp;
    } else {
        const double c = std::log(g.shape().center);
        for (int i = 0; i < kOpaqueNodes; ++i) {
            const double rho = std::exp(c - 7 + 14.0 * i / (kOpaqueNodes - 1));
            nodes.push_back(rho);
            values.push_back(g.eval(rho));
        }
    }
    Json pts = Json::array();
    for (std::size_t i = 0; i < nodes.size(); ++i) pts.push_back({number(nodes[i]), number(values[i])});
    return Json{{"kind", "grid"},
                {"points", pts},
                {"origin_order", number(origin_order)},
                {"tail_order", number(tail_order)},
                {"interp", interp == GridInterp::LogValue ? "log" : "value"}};
}

Gauge gauge_from_json(const Json& j, double N) {
    const double rho = read_number(j, "rho");
    if (std::isnan(rho) || rho == -HUGE_VAL) malformed("rho must be a number or \"inf\"");
    return make_gauge(rho, N);
}

Json to_json(const Gauge& g) {
    return Json{{"rho", number(g.rho)},
                {"N", g.N},
                {"kappa_N", number(g.kappa_N)},
                {"dual_rho", number(g.dual_rho)},
                {"smooth", g.smooth()}};
}

Json to_json(const QuotientReport& r) {
    Json j{{"target_norm", number(r.target_norm)},
           {"grad_norm", number(r.grad_norm)},
           {"interp_norm", r.interp_norm ? number(*r.interp_norm) : Json(nullptr)},
           {"quotient", number(r.quotient)},
           {"target_error", number(r.target_error)},
           {"grad_error", number(r.grad_error)},
           {"interp_error", r.interp_error ? number(*r.interp_error) : Json(nullptr)},
           {"quotient_error", number(r.quotient_error)},
           {"flags", flags_json(r.flags)}};
    return j;
}

Json to_json(const SharpConstantReport& r) {
    Json comps = Json::object();
    for (const auto& [name, v] : r.components) comps[name] = number(v);
    return Json{{"branch", to_string(r.branch)},
                {"value", number(r.value)},
                {"attained", r.attained},
                {"components", comps},
                {"oracle_quotient", r.oracle_quotient ? number(*r.oracle_quotient) : Json(nullptr)},
                {"flags", flags_json(r.flags)}};
}

Json to_json(const FamilyFit& f) {
    return Json{{"family", to_string(f.family)},
                {"A", number(f.A)},
                {"B", number(f.B)},
                {"residual", number(f.residual)}};
}

Json to_json(const SearchResult& r) {
    return Json{{"best_quotient", number(r.best_quotient)},
                {"best_quotient_error", number(r.best_quotient_error)},
                {"iterations", r.iterations},
                {"accepted_steps", r.accepted_steps},
                {"converged", r.converged},
                {"seed", r.seed},
                {"family_fit", r.family_fit ? to_json(*r.family_fit) : Json(nullptr)},
                {"flags", flags_json(r.flags)},
                {"best_profile", to_json(r.best_profile)}};
}

Json to_json(const StationarityReport& r) {
    return Json{{"base_quotient", number(r.base_quotient)},
                {"max_gain", number(r.max_gain)},
                {"max_first_order", number(r.max_first_order)},
                {"quadratic_fit", number(r.quadratic_fit)},
                {"trials", r.trials},
                {"epsilon", number(r.epsilon)},
                {"stationary", r.stationary}};
}

Json to_json(const TransferResult& r) {
    return Json{{"q1", number(r.q1)},
                {"q2", number(r.q2)},
                {"ratio", number(r.ratio)},
                {"expected_ratio", number(r.expected_ratio)},
                {"flags", flags_json(r.flags)}};
}

}  // namespace ckn
