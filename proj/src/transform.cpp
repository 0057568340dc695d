#include "ckn/transform.hpp"

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "ckn/error.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

double TransformSpec::scale() const { return std::pow(1 / d, (p - 1) / p); }

RadialProfile forward(const RadialProfile& g, const TransformSpec& spec) {
    return compose(g, spec.scale(), 1, spec.d);
}

RadialProfile inverse(const RadialProfile& g, const TransformSpec& spec) {
    return compose(g, 1 / spec.scale(), 1, 1 / spec.d);
}

double transformed_gradient_weight(const TransformSpec& spec, double mu) {
    return spec.d * (spec.p + mu - spec.N) + spec.N - spec.p;
}

double transformed_weight(const TransformSpec& spec, double t) {
    return spec.N + t * spec.d - spec.N * spec.d;
}

namespace {

double norm(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

JacobianCheck verify_jacobian(std::span<const double> x, double d) {
    const int N = require_integer_dimension(static_cast<double>(x.size()), 1, 64);
    const double r = norm(x);
    if (r < 1e-8) throw Error("near-singular-point", "|x| is below 1e-8");

    const auto L = [d](std::span<const double> y, std::span<double> out) {
        const double f = std::pow(norm(y), d - 1);
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = f * y[i];
    };
    const double h = 1e-4 * r;
    Eigen::MatrixXd J(N, N);
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end()), lp(N), lm(N);
    for (int j = 0; j < N; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        L(xp, lp);
        L(xm, lm);
        for (int i = 0; i < N; ++i) J(i, j) = (lp[i] - lm[i]) / (2 * h);
        xp[j] = xm[j] = x[j];
    }
    return {d * std::pow(r, N * (d - 1)), J.determinant()};
}

IdentitySides verify_measure_identity(const RadialProfile& g, double k, double t,
                                      const TransformSpec& spec, double tolerance) {
    const auto left = power_integral(g, k, t, spec.N, tolerance);
    const auto right = power_integral(forward(g, spec), k, transformed_weight(spec, t), spec.N,
                                      tolerance);
    const double c = std::pow(spec.scale(), k);
    return {c * left.value, spec.d * right.value, c * left.error, spec.d * right.error};
}

IdentitySides verify_gradient_relation(const RadialProfile& g, const TransformSpec& spec,
                                       double mu, double tolerance) {
    const auto left = gradient_integral(forward(g, spec), spec.p,
                                        transformed_gradient_weight(spec, mu), spec.N, tolerance);
    const auto right = gradient_integral(g, spec.p, mu, spec.N, tolerance);
    return {left.value, right.value, left.error, right.error};
}

// ---- non-radial fields ---------------------------------------------------------------------

namespace {

// Forward-mode scalar carrying one directional derivative.
struct Dual {
    double v = 0, d = 0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
Dual operator*(double c, Dual a) { return {c * a.v, c * a.d}; }
Dual operator+(double c, Dual a) { return {c + a.v, a.d}; }
Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
}
Dual sqrt(Dual a) {
    const double s = std::sqrt(a.v);
    return {s, a.d / (2 * s)};
}
Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
Dual pow(Dual a, double k) {
    const double p = std::pow(a.v, k);
    return {p, k * std::pow(a.v, k - 1) * a.d};
}

using X = std::array<Dual, 6>;

Dual sq_norm(const X& x, int n) {
    Dual s;
    for (int i = 0; i < n; ++i) s = s + x[i] * x[i];
    return s;
}

Dual shifted_sq(const X& x, int n, double a0, double a1) {
    Dual s;
    for (int i = 0; i < n; ++i) {
        const double a = i == 0 ? a0 : (i == 1 ? a1 : 0.0);
        const Dual y{x[i].v - a, x[i].d};
        s = s + y * y;
    }
    return s;
}

using Recipe = Dual (*)(const X&, int);

const std::array<std::pair<const char*, Recipe>, 10> kRecipes = {{
    {"gauss_times_ratio",
     [](const X& x, int n) {
         const Dual r = sqrt(sq_norm(x, n));
         return exp(Dual{} - sq_norm(x, n)) * (1.0 + x[0] / (2.0 + r));
     }},
    {"gauss_times_bilinear",
     [](const X& x, int n) { return exp(Dual{} - sq_norm(x, n)) * (1.0 + 0.5 * (x[0] * x[1])); }},
    {"shifted_gauss", [](const X& x, int n) { return exp(Dual{} - shifted_sq(x, n, 0.3, 0.1)); }},
    {"algebraic_times_sine",
     [](const X& x, int n) { return pow(1.0 + sq_norm(x, n), -2) * (1.0 + 0.3 * sin(x[0])); }},
    {"anisotropic_gauss",
     [](const X& x, int n) {
         Dual s;
         for (int i = 0; i < n; ++i) s = s + (0.5 * (i + 1)) * (x[i] * x[i]);
         return exp(Dual{} - s);
     }},
    {"gauss_times_quadratic",
     [](const X& x, int n) {
         return exp(Dual{} - sq_norm(x, n)) * (1.0 + (x[0] * x[0] - x[1] * x[1]));
     }},
    {"shifted_algebraic",
     [](const X& x, int n) { return pow(1.0 + shifted_sq(x, n, -0.4, 0.2), -3); }},
    {"gauss_times_cosine",
     [](const X& x, int n) { return exp(Dual{} - sq_norm(x, n)) * cos(x[0] + x[1]); }},
    {"two_gauss",
     [](const X& x, int n) {
         return exp(Dual{} - sq_norm(x, n)) + 0.5 * exp(Dual{} - shifted_sq(x, n, 0.5, -0.5));
     }},
    {"gauss_times_cubic",
     [](const X& x, int n) {
         const Dual z = x[n - 1];
         return exp(Dual{} - sq_norm(x, n)) * (1.0 + 0.2 * (z * z * z));
     }},
}};

NonRadialField make_field(const char* name, Recipe f) {
    NonRadialField out;
    out.name = name;
    out.value = [f](std::span<const double> x) {
        X v{};
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = {x[i], 0};
        return f(v, static_cast<int>(x.size())).v;
    };
    out.gradient = [f](std::span<const double> x, std::span<double> grad) {
        X v{};
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = {x[i], 0};
        for (std::size_t j = 0; j < x.size(); ++j) {
            v[j].d = 1;
            grad[j] = f(v, static_cast<int>(x.size())).d;
            v[j].d = 0;
        }
    };
    return out;
}

}  // namespace

const std::vector<NonRadialField>& field_catalog() {
    static const std::vector<NonRadialField> catalog = [] {
        std::vector<NonRadialField> c;
        for (const auto& [name, f] : kRecipes) c.push_back(make_field(name, f));
        return c;
    }();
    return catalog;
}

bool McRelation::holds() const {
    return lhs <= rhs + 3 * std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
}

McRelation verify_gradient_relation_mc(const NonRadialField& field, const TransformSpec& spec,
                                       double mu, std::size_t samples, std::uint64_t seed) {
    const int N = require_integer_dimension(spec.N, 2, 4);
    const double p = spec.p, d = spec.d, c = spec.scale();
    const double w = transformed_gradient_weight(spec, mu);
    McOptions opts;
    opts.tail_exponent = 3;

    const auto grad_power = [&](std::span<const double> y) {
        std::array<double, 6> g{};
        field.gradient(y, std::span<double>(g.data(), N));
        double s = 0;
        for (int i = 0; i < N; ++i) s += g[i] * g[i];
        return std::pow(s, p / 2);
    };
    const auto transformed = [&](std::span<const double> x) {
        const double r = norm(x);
        const double f = std::pow(r, d - 1);
        std::array<double, 6> y{}, g{};
        for (int i = 0; i < N; ++i) y[i] = f * x[i];
        field.gradient(std::span<const double>(y.data(), N), std::span<double>(g.data(), N));
        // grad(Du)(x) = c |x|^(d-1) (grad u(y) + (d-1)(xhat . grad u(y)) xhat)
        double radial = 0;
        for (int i = 0; i < N; ++i) radial += g[i] * x[i] / r;
        double s = 0;
        for (int i = 0; i < N; ++i) {
            const double comp = c * f * (g[i] + (d - 1) * radial * x[i] / r);
            s += comp * comp;
        }
        return std::pow(s, p / 2);
    };

    const auto lhs = integrate_mc(transformed, w, N, samples, seed, opts);
    const auto rhs = integrate_mc(grad_power, mu, N, samples, seed ^ 0x9e3779b97f4a7c15ULL, opts);
    return {lhs.estimate, lhs.std_error, rhs.estimate, rhs.std_error};
}

}  // namespace ckn
