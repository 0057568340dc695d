#include "ckn/search.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "ckn/error.hpp"
#include "ckn/pchip.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

double natural_exponent(const CknParams& P) {
    double b = 0;
    switch (P.regime) {
        case Regime::C1: b = ((P.N - P.p - P.mu) / (P.N - P.p)) * P.p / (P.p - 1); break;
        case Regime::C2: b = P.mu + 2 - P.s; break;
        default: b = (P.p + P.mu - P.s) / (P.p - 1); break;
    }
    return b > 0 && std::isfinite(b) ? b : 1.0;
}

std::optional<FamilyKind> expected_family(const CknParams& P) {
    switch (P.regime) {
        case Regime::C1: {
            const double crit = P.N * P.mu / (P.N - P.p);
            if (!nearly_equal(P.s, crit) || !nearly_equal(P.theta, crit)) return std::nullopt;
            if (P.q > P.p && nearly_equal(P.r, P.p * (P.q - 1) / (P.p - 1))) return FamilyKind::T5;
            if (P.r < P.p && P.r > 2 - 1 / P.p && nearly_equal(P.q, P.p * (P.r - 1) / (P.p - 1))) {
                return FamilyKind::T6;
            }
            return std::nullopt;
        }
        case Regime::C2: return FamilyKind::T11;
        case Regime::C3:
            if (P.hardy_endpoint) return std::nullopt;
            return FamilyKind::A1;
        default: return std::nullopt;
    }
}

namespace {

struct Triple {
    double T = 0, G = 0, J = 0;
};

Triple operator+(Triple a, Triple b) { return {a.T + b.T, a.G + b.G, a.J + b.J}; }
Triple operator-(Triple a, Triple b) { return {a.T - b.T, a.G - b.G, a.J - b.J}; }

struct Rule {
    std::array<double, 7> x, w;
};

const Rule& gauss7() {
    static const Rule rule = [] {
        using G = boost::math::quadrature::gauss<double, 7>;
        Rule r{};
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        std::size_t k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            r.x[k] = a[i];
            r.w[k++] = w[i];
            if (a[i] != 0) {
                r.x[k] = -a[i];
                r.w[k++] = w[i];
            }
        }
        return r;
    }();
    return rule;
}

// Power exponents of the three integrals after rho = e^tau:
//   T = int e^{rY + cT tau},  G = int |Y'|^p e^{pY + cG tau},  J = int e^{qY + cJ tau}.
struct Powers {
    double p, q, r, a, cT, cG, cJ;
    bool useG, useJ;
    double sphere;
    double tail_limit;  // tail slopes must stay below this for all three to converge

    explicit Powers(const CknParams& P)
        : p(P.p), q(P.q), r(P.r), a(P.a), cT(P.N - P.s), cG(P.N - P.mu - P.p),
          cJ(P.N - P.theta), useG(P.a > 0), useJ(P.a < 1), sphere(sphere_measure(P.N)) {
        tail_limit = -cT / r;
        if (useG) tail_limit = std::min(tail_limit, -cG / p);
        if (useJ) tail_limit = std::min(tail_limit, -cJ / q);
    }
};

double ls_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo,
                std::size_t hi) {
    const double n = static_cast<double>(hi - lo);
    double sx = 0, sy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// -log Q of the log-value PCHIP profile through (tau_i, y_i) with refitted power tails,
// integrated with 7-point Gauss per panel and closed forms beyond the nodes. Keeps per-panel
// contributions so that single-node changes cost O(1) panels.
class GridObjective {
public:
    GridObjective(const CknParams& P, std::vector<double> tau, std::vector<double> y)
        : P_(P), w_(P), tau_(std::move(tau)), y_(std::move(y)) {
        window_ = std::max<std::size_t>(3, tau_.size() / 10);
        recompute();
    }

    [[nodiscard]] double f() const { return f_; }
    [[nodiscard]] const std::vector<double>& tau() const { return tau_; }
    [[nodiscard]] const std::vector<double>& y() const { return y_; }
    [[nodiscard]] double origin_order() const { return k0_; }
    [[nodiscard]] double tail_order() const { return k1_; }
    [[nodiscard]] bool clamped() const { return clamped_; }

    void set_y(std::vector<double> y) {
        y_ = std::move(y);
        recompute();
    }

    // f(y + h e_i) - f(y)
    [[nodiscard]] double partial(std::size_t i, double h) const {
        const std::size_t n = y_.size();
        const auto y_at = [&](std::size_t k) { return k == i ? y_[k] + h : y_[k]; };

        std::size_t klo = i == 0 ? 0 : i - 1, khi = std::min(n - 1, i + 1);
        if (i <= 2) klo = 0;
        if (i + 3 >= n) khi = n - 1;
        std::array<double, 3> local{};
        const auto slope_new = [&](std::size_t k) {
            const std::size_t a = k == 0 ? 0 : (k == n - 1 ? n - 3 : k - 1);
            for (std::size_t m = 0; m < 3; ++m) local[m] = y_at(a + m);
            return pchip::slope_at(std::span<const double>(tau_.data() + a, 3),
                                   std::span<const double>(local.data(), 3), k - a);
        };
        std::vector<double> dn(khi - klo + 1);
        for (std::size_t k = klo; k <= khi; ++k) dn[k - klo] = slope_new(k);
        const auto d_at = [&](std::size_t k) { return k >= klo && k <= khi ? dn[k - klo] : d_[k]; };

        Triple delta;
        const std::size_t jlo = klo == 0 ? 0 : klo - 1, jhi = std::min(n - 2, khi);
        for (std::size_t j = jlo; j <= jhi; ++j) {
            delta = delta + (panel(j, y_at(j), y_at(j + 1), d_at(j), d_at(j + 1)) - panels_[j]);
        }
        if (i < window_) {
            const double k0 = fit_origin(y_at);
            delta = delta + (head(y_at(0), k0) - head_);
        }
        if (i + window_ >= n) {
            bool dummy = false;
            const double k1 = fit_tail(y_at, dummy);
            delta = delta + (tail(y_at(n - 1), k1) - tail_);
        }
        const double dl = (1 / w_.r) * std::log1p(delta.T / sum_.T) -
                          (w_.useG ? (w_.a / w_.p) * std::log1p(delta.G / sum_.G) : 0.0) -
                          (w_.useJ ? ((1 - w_.a) / w_.q) * std::log1p(delta.J / sum_.J) : 0.0);
        return -dl;
    }

    // Inverse of the diagonal of the Hessian (second differences), floored; used as the
    // initial inverse-Hessian of the quasi-Newton model.
    [[nodiscard]] std::vector<double> inverse_curvature() const {
        std::vector<double> h(y_.size());
        double hmax = 0;
        for (std::size_t i = 0; i < y_.size(); ++i) {
            const double e = 1e-3 * (1 + std::abs(y_[i]));
            h[i] = std::abs(partial(i, e) + partial(i, -e)) / (e * e);
            hmax = std::max(hmax, h[i]);
        }
        for (double& v : h) v = 1 / std::max(v, 1e-3 * hmax);
        return h;
    }

    void gradient(std::vector<double>& g) const {
        g.resize(y_.size());
        for (std::size_t i = 0; i < y_.size(); ++i) {
            const double h = 1e-6 * (1 + std::abs(y_[i]));
            g[i] = partial(i, h) / h;
        }
    }

    // Scales the amplitude so that S int |u|^r |x|^-s = 1.
    void normalize() {
        const double shift = -std::log(w_.sphere * sum_.T) / w_.r;
        for (double& v : y_) v += shift;
        recompute();
    }

    // Dilates the profile (moving the nodes) so that the scaling direction is pinned: the
    // energy dilation parameter becomes 1 in C1, and the target mass median sits at rho = 1
    // elsewhere.
    void recenter() {
        double shift = 0;
        if (P_.regime == Regime::C1 && w_.useG && w_.useJ) {
            const double d = transform_power(P_.N, P_.p, P_.mu);
            const auto mn = scaling_exponents(P_, d);
            const double c = std::pow(d, -(P_.p - 1) / P_.p);
            const double A = w_.sphere * sum_.G / P_.p;
            const double B = w_.sphere * std::pow(c, P_.q) * sum_.J / (P_.q * d);
            const double lambda0 = std::pow(mn.n * B / (mn.m * A), 1 / (mn.m + mn.n));
            shift = d * std::log(lambda0);
        } else {
            shift = mass_median();
        }
        if (!std::isfinite(shift) || shift == 0) return;
        for (double& t : tau_) t -= shift;
        recompute();
    }

    [[nodiscard]] double log_quotient() const { return -f_; }

private:
    Triple panel(std::size_t j, double y0, double y1, double d0, double d1) const {
        const Rule& g = gauss7();
        const double t0 = tau_[j], t1 = tau_[j + 1];
        const double hw = (t1 - t0) / 2, mid = (t0 + t1) / 2;
        Triple out;
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            const double t = mid + hw * g.x[k];
            const auto s = pchip::hermite(t0, t1, y0, y1, d0, d1, t);
            out.T += g.w[k] * std::exp(w_.r * s.value + w_.cT * t);
            if (w_.useG && s.derivative != 0) {
                out.G += g.w[k] * std::exp(w_.p * (std::log(std::abs(s.derivative)) + s.value) +
                                           w_.cG * t);
            }
            if (w_.useJ) out.J += g.w[k] * std::exp(w_.q * s.value + w_.cJ * t);
        }
        out.T *= hw;
        out.G *= hw;
        out.J *= hw;
        return out;
    }

    Triple head(double y0, double k0) const {
        const double t0 = tau_.front();
        Triple out;
        out.T = std::exp(w_.r * y0 + w_.cT * t0) / (w_.r * k0 + w_.cT);
        if (w_.useG && k0 > 0) {
            out.G = std::exp(w_.p * (std::log(k0) + y0) + w_.cG * t0) / (w_.p * k0 + w_.cG);
        }
        if (w_.useJ) out.J = std::exp(w_.q * y0 + w_.cJ * t0) / (w_.q * k0 + w_.cJ);
        return out;
    }

    Triple tail(double yn, double k1) const {
        const double tn = tau_.back();
        Triple out;
        out.T = std::exp(w_.r * yn + w_.cT * tn) / -(w_.r * k1 + w_.cT);
        if (w_.useG) {
            out.G = std::exp(w_.p * (std::log(-k1) + yn) + w_.cG * tn) / -(w_.p * k1 + w_.cG);
        }
        if (w_.useJ) out.J = std::exp(w_.q * yn + w_.cJ * tn) / -(w_.q * k1 + w_.cJ);
        return out;
    }

    template <class Y>
    double fit_origin(const Y& y_at) const {
        std::vector<double> yy(window_);
        for (std::size_t k = 0; k < window_; ++k) yy[k] = y_at(k);
        std::vector<double> tt(tau_.begin(), tau_.begin() + static_cast<long>(window_));
        return std::max(0.0, ls_slope(tt, yy, 0, window_));
    }

    template <class Y>
    double fit_tail(const Y& y_at, bool& clamped) const {
        const std::size_t n = y_.size(), lo = n - window_;
        std::vector<double> yy(window_), tt(window_);
        for (std::size_t k = 0; k < window_; ++k) {
            yy[k] = y_at(lo + k);
            tt[k] = tau_[lo + k];
        }
        const double limit = w_.tail_limit * 1.01;
        const double k1 = ls_slope(tt, yy, 0, window_);
        clamped = !(k1 <= limit);
        return clamped ? limit : k1;
    }

    double mass_median() const {
        double acc = head_.T;
        const double half = sum_.T / 2;
        if (acc >= half) return tau_.front();
        for (std::size_t j = 0; j < panels_.size(); ++j) {
            if (acc + panels_[j].T >= half) {
                const double frac = (half - acc) / panels_[j].T;
                return tau_[j] + frac * (tau_[j + 1] - tau_[j]);
            }
            acc += panels_[j].T;
        }
        return tau_.back();
    }

    void recompute() {
        const std::size_t n = y_.size();
        d_ = pchip::slopes(tau_, y_);
        panels_.resize(n - 1);
        Triple s;
        const auto y_at = [this](std::size_t k) { return y_[k]; };
        k0_ = fit_origin(y_at);
        k1_ = fit_tail(y_at, clamped_);
        head_ = head(y_.front(), k0_);
        tail_ = tail(y_.back(), k1_);
        s = head_ + tail_;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            panels_[j] = panel(j, y_[j], y_[j + 1], d_[j], d_[j + 1]);
            s = s + panels_[j];
        }
        sum_ = s;
        const double S = std::log(w_.sphere);
        double lq = (1 / w_.r) * (S + std::log(s.T));
        if (w_.useG) lq -= (w_.a / w_.p) * (S + std::log(s.G));
        if (w_.useJ) lq -= ((1 - w_.a) / w_.q) * (S + std::log(s.J));
        f_ = std::isfinite(lq) ? -lq : HUGE_VAL;
    }

    CknParams P_;
    Powers w_;
    std::vector<double> tau_, y_, d_;
    std::vector<Triple> panels_;
    Triple head_, tail_, sum_;
    double k0_ = 0, k1_ = 0, f_ = 0;
    bool clamped_ = false;
    std::size_t window_;
};

std::vector<double> node_taus(double center_tau, double half_width, int n) {
    if (n < 8) throw Error("bad-grid", "at least 8 nodes are required");
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[i] = center_tau - half_width + 2 * half_width * i / (n - 1);
    return t;
}

RadialProfile grid_from_logs(const std::vector<double>& tau, const std::vector<double>& y,
                             double k0, double k1) {
    std::vector<double> nodes(tau.size()), values(y.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        nodes[i] = std::exp(tau[i]);
        values[i] = std::exp(y[i]);
    }
    return make_grid_profile(std::move(nodes), std::move(values), k0, k1, GridInterp::LogValue);
}

void require_searchable(const CknParams& P) {
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);
    if (!(P.N - P.p - P.mu > 0)) throw Error("invalid-params", "needs N - p - mu > 0");
}

struct Sampled {
    std::vector<double> tau, y;
    double k0, k1;
};

Sampled sample_logs(const CknParams& P, const RadialProfile& g, const SearchOptions& opts) {
    const double half = opts.span / natural_exponent(P);
    Sampled s;
    s.tau = node_taus(std::log(g.shape().center), half, opts.nodes);
    s.y.resize(s.tau.size());
    for (std::size_t i = 0; i < s.tau.size(); ++i) {
        const auto v = g.value_at(s.tau[i]);
        if (v.sign <= 0) throw Error("bad-grid", "the search needs a positive profile on its nodes");
        s.y[i] = v.log_abs;
    }
    const auto& sh = g.shape();
    s.k0 = std::isfinite(sh.origin_order) ? std::max(0.0, sh.origin_order) : 0.0;
    s.k1 = std::isfinite(sh.tail_order) ? sh.tail_order : Powers(P).tail_limit * 1.5;
    return s;
}

}  // namespace

RadialProfile sample_profile(const CknParams& P, const RadialProfile& g, const SearchOptions& opts) {
    const auto s = sample_logs(P, g, opts);
    return grid_from_logs(s.tau, s.y, s.k0, s.k1);
}

RadialProfile random_initial_profile(const CknParams& P, std::uint64_t seed,
                                     const SearchOptions& opts) {
    require_searchable(P);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    const double beta = natural_exponent(P);
    const double k = Powers(P).tail_limit * (1.3 + 0.7 * U(rng));
    const double b = beta * (0.6 + 0.8 * U(rng));
    const double tc = (-1 + 2 * U(rng)) / beta;
    std::array<double, 3> c{}, t{}, w{};
    for (std::size_t j = 0; j < 3; ++j) {
        c[j] = 0.3 * U(rng);
        t[j] = (-2 + 4 * U(rng)) / beta;
        w[j] = (0.3 + 0.7 * U(rng)) / beta;
    }
    const auto tau = node_taus(0, opts.span / beta, opts.nodes);
    std::vector<double> y(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double x = b * (tau[i] - tc);
        const double softplus = x > 30 ? x : std::log1p(std::exp(x));
        double v = (k / b) * softplus;
        for (std::size_t j = 0; j < 3; ++j) v -= c[j] * 0.5 * (1 + std::tanh((tau[i] - t[j]) / w[j]));
        y[i] = v;
    }
    return grid_from_logs(tau, y, 0, k);
}

RadialProfile perturbed_profile(const CknParams& P, const RadialProfile& g, double amplitude,
                                std::uint64_t seed, const SearchOptions& opts) {
    if (!(amplitude >= 0 && amplitude <= 0.5)) {
        throw Error("bad-amplitude", "perturbation amplitude must lie in [0, 0.5]");
    }
    auto s = sample_logs(P, g, opts);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    std::array<double, 4> coef{};
    double norm = 0;
    for (double& v : coef) {
        v = U(rng);
        norm += std::abs(v);
    }
    const double t0 = s.tau.front(), L = s.tau.back() - t0;
    for (std::size_t i = 0; i < s.tau.size(); ++i) {
        double noise = 0;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            noise += coef[j] * std::sin((j + 1) * M_PI * (s.tau[i] - t0) / L);
        }
        s.y[i] += std::log1p(amplitude * noise / norm);
    }
    return grid_from_logs(s.tau, s.y, s.k0, s.k1);
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct Pair {
    std::vector<double> s, y;
    double rho;
};

// H g by the two-loop recursion, with H0 = gamma D.
std::vector<double> apply_inverse(const std::deque<Pair>& mem, const std::vector<double>& D,
                                  const std::vector<double>& g) {
    std::vector<double> q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
        alpha[k] = mem[k].rho * dot(mem[k].s, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * mem[k].y[i];
    }
    const auto& last = mem.back();
    double yDy = 0;
    for (std::size_t i = 0; i < q.size(); ++i) yDy += last.y[i] * D[i] * last.y[i];
    const double gamma = dot(last.s, last.y) / yDy;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] *= gamma * D[i];
    for (std::size_t k = 0; k < mem.size(); ++k) {
        const double b = mem[k].rho * dot(mem[k].y, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += mem[k].s[i] * (alpha[k] - b);
    }
    return q;
}

}  // namespace

SearchResult maximize_quotient(const CknParams& P, const RadialProfile& init,
                               const SearchOptions& opts) {
    require_searchable(P);
    const auto s0 = sample_logs(P, init, opts);
    GridObjective obj(P, s0.tau, s0.y);
    if (!std::isfinite(obj.f())) throw Error("divergent-integral", "initial profile has a divergent quotient");
    obj.normalize();
    obj.recenter();

    std::vector<std::string> flags;
    if (P.regime == Regime::General) flags.emplace_back("exploratory");

    std::vector<double> g, g_new;
    obj.gradient(g);
    std::deque<Pair> mem;
    std::vector<double> D = obj.inverse_curvature();
    std::vector<double> history{std::exp(obj.log_quotient())};
    std::vector<double> log_hist{obj.log_quotient()};

    int iterations = 0, accepted = 0;
    bool converged = false;
    bool fresh = true;  // memory was just reset
    constexpr double kWindowTol = 1e-10;
    constexpr double kPredictedTol = 1e-12;

    while (iterations < opts.max_iterations) {
        ++iterations;
        std::vector<double> dir;
        if (mem.empty()) {
            // Diagonal Newton step, capped.
            dir.resize(g.size());
            double dmax = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                dir[i] = -D[i] * g[i];
                dmax = std::max(dmax, std::abs(dir[i]));
            }
            if (dmax == 0) {
                converged = true;
                break;
            }
            if (dmax > 0.5) {
                for (double& v : dir) v *= 0.5 / dmax;
            }
        } else {
            dir = apply_inverse(mem, D, g);
            for (double& v : dir) v = -v;
        }
        // Trust cap on the largest log-value change.
        double dmax = 0;
        for (double v : dir) dmax = std::max(dmax, std::abs(v));
        if (dmax > 1) {
            for (double& v : dir) v /= dmax;
        }
        double gd = dot(g, dir);
        if (!(gd < 0)) {
            mem.clear();
            fresh = true;
            --iterations;
            continue;
        }

        const double f0 = obj.f();
        const std::vector<double> y0 = obj.y();
        double alpha = 1;
        bool ok = false;
        std::vector<double> yt(y0.size());
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t i = 0; i < yt.size(); ++i) yt[i] = y0[i] + alpha * dir[i];
            obj.set_y(yt);
            const double ft = obj.f();
            if (bt == 0 && std::isfinite(ft)) {
                // Best gain the quadratic model along dir predicts; stop when it is negligible.
                const double curv = 2 * (ft - f0 - alpha * gd) / (alpha * alpha);
                const double predicted = curv > 0 ? gd * gd / (2 * curv) : HUGE_VAL;
                // Gain the forward-difference bias alone would suggest at a stationary point:
                // the bias is h_i f_ii / 2 per node, worth sum h_i^2 f_ii / 8.
                double bias_gain = 0;
                for (std::size_t i = 0; i < y0.size(); ++i) {
                    const double h = 1e-6 * (1 + std::abs(y0[i]));
                    bias_gain += h * h / (8 * D[i]);
                }
                if (predicted < std::max(kPredictedTol, bias_gain)) {
                    obj.set_y(y0);
                    converged = true;
                    break;
                }
            }
            if (std::isfinite(ft) && ft <= f0 + 1e-4 * alpha * gd) {
                ok = true;
                break;
            }
            const double denom = 2 * (ft - f0 - gd * alpha);
            double next = std::isfinite(ft) && denom > 0 ? -gd * alpha * alpha / denom : 0.5 * alpha;
            alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
        }
        if (converged) break;
        if (!ok) {
            obj.set_y(y0);
            if (fresh) {
                flags.emplace_back("stalled");
                converged = true;
                break;
            }
            mem.clear();
            fresh = true;
            D = obj.inverse_curvature();
            continue;
        }

        ++accepted;
        std::vector<double> step(yt.size());
        for (std::size_t i = 0; i < yt.size(); ++i) step[i] = yt[i] - y0[i];
        // Normalizing and recentering leave Q unchanged up to rounding; keep the accepted
        // point when rounding would make the recorded quotient drop.
        const GridObjective accepted_state = obj;
        obj.normalize();
        obj.recenter();
        if (obj.f() > accepted_state.f()) obj = accepted_state;
        obj.gradient(g_new);
        std::vector<double> dg(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) dg[i] = g_new[i] - g[i];
        const double sy = dot(step, dg);
        if (sy > 1e-16 * std::sqrt(dot(step, step) * dot(dg, dg))) {
            mem.push_back({std::move(step), std::move(dg), 1 / sy});
            if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
            fresh = false;
        }
        g.swap(g_new);
        if (accepted % 100 == 0) D = obj.inverse_curvature();

        log_hist.push_back(obj.log_quotient());
        history.push_back(std::exp(obj.log_quotient()));
        if (log_hist.size() > 20 &&
            log_hist.back() - log_hist[log_hist.size() - 21] < kWindowTol) {
            converged = true;
            break;
        }
    }

    if (obj.clamped()) flags.emplace_back("tail-clamped");
    auto profile = grid_from_logs(obj.tau(), obj.y(), obj.origin_order(), obj.tail_order());
    const auto rep = ckn_quotient(P, profile, opts.tolerance);

    SearchResult res{.best_profile = profile};
    res.best_quotient = rep.quotient;
    res.best_quotient_error = rep.quotient_error;
    res.iterations = iterations;
    res.accepted_steps = accepted;
    res.converged = converged;
    res.flags = std::move(flags);
    res.seed = opts.seed;
    res.history = std::move(history);
    if (const auto fam = expected_family(P); fam && *fam != FamilyKind::T6) {
        res.family_fit = fit_family(profile, *fam, P);
    }
    return res;
}

std::vector<SearchResult> maximize_from_seeds(const CknParams& P,
                                              const std::vector<std::uint64_t>& seeds,
                                              const SearchOptions& opts, unsigned threads) {
    require_searchable(P);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));
    std::vector<std::optional<SearchResult>> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t k; (k = next++) < seeds.size();) {
            try {
                SearchOptions o = opts;
                o.seed = seeds[k];
                out[k] = maximize_quotient(P, random_initial_profile(P, seeds[k], o), o);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<SearchResult> res;
    res.reserve(out.size());
    for (auto& r : out) res.push_back(std::move(*r));
    return res;
}

// ---- family fit ----------------------------------------------------------------------------

FamilyFit fit_family(const RadialProfile& g, FamilyKind family, const CknParams& P,
                     double mass_quantile) {
    const auto ex = family_exponents(family, P);
    if (ex.shape == AnalyticShape::StretchedExp) throw Error("unfittable", "no two-scale family");
    const bool compact = ex.shape == AnalyticShape::Compact;

    std::vector<double> rho;
    if (const auto* grid = std::get_if<GridKind>(&g.kind())) {
        rho = grid->nodes;
    } else {
        const double half = 13.815510557964274 / natural_exponent(P);
        for (double t : node_taus(std::log(g.shape().center), half, 201)) rho.push_back(std::exp(t));
        if (g.shape().edge) {
            std::erase_if(rho, [&](double x) { return x > *g.shape().edge; });
        }
    }
    std::vector<double> v(rho.size());
    double vmax = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        v[i] = g.eval(rho[i]);
        if (!std::isfinite(v[i]) || v[i] < 0) throw Error("unfittable", "profile values must be non-negative");
        vmax = std::max(vmax, v[i]);
    }
    if (vmax == 0) throw Error("unfittable", "profile vanishes on the fit nodes");

    // Interior nodes: those between the q and 1-q quantiles of the target mass
    // |g|^r rho^(N-s) d tau. Outside this band the quotient barely constrains the profile.
    std::vector<double> cum(rho.size(), 0.0);
    for (std::size_t i = 1; i < rho.size(); ++i) {
        const auto dens = [&](std::size_t k) {
            return v[k] == 0 ? 0.0 : std::exp(P.r * std::log(v[k] / vmax) + (P.N - P.s) * std::log(rho[k]));
        };
        cum[i] = cum[i - 1] + 0.5 * (dens(i) + dens(i - 1)) * std::log(rho[i] / rho[i - 1]);
    }
    const double total = cum.back();
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double F = total > 0 ? cum[i] / total : 0.5;
        if (v[i] > 0 && F >= mass_quantile && F <= 1 - mass_quantile) pos.push_back(i);
    }
    if (pos.size() < 3) throw Error("unfittable", "too few positive interior values");
    vmax = 0;
    for (std::size_t i : pos) vmax = std::max(vmax, v[i]);

    const double beta = ex.beta, gamma = ex.gamma;
    // u = B rho^beta; bubble: log A - gamma log(1+u); compact: log A + gamma log(1-u).
    const auto model = [&](double la, double lb, std::size_t i, double* dlb) {
        const double u = std::exp(lb + beta * std::log(rho[i]));
        if (compact) {
            if (u >= 1) return -HUGE_VAL;
            if (dlb) *dlb = -gamma * u / (1 - u);
            return la + gamma * std::log1p(-u);
        }
        if (dlb) *dlb = -gamma * u / (1 + u);
        return la - gamma * std::log1p(u);
    };

    // Initial guess from the value near the origin and the half-height point.
    const std::size_t i0 = pos.front();
    double la = std::log(v[i0]), lb = 0;
    {
        std::size_t ih = pos.front();
        for (std::size_t i : pos) {
            if (std::abs(v[i] - v[i0] / 2) < std::abs(v[ih] - v[i0] / 2)) ih = i;
        }
        const double ratio = v[ih] / v[i0];
        const double u = compact ? 1 - std::pow(ratio, 1 / gamma) : std::pow(ratio, -1 / gamma) - 1;
        lb = std::log(std::max(u, 1e-12)) - beta * std::log(rho[ih]);
        if (compact) {
            // Keep every positive node inside the support.
            const double lim = -beta * std::log(rho[pos.back()]);
            lb = std::min(lb, lim - 1e-6);
        }
    }

    const auto cost = [&](double a, double b) {
        double c = 0;
        for (std::size_t i : pos) {
            const double m = model(a, b, i, nullptr);
            if (!std::isfinite(m)) return HUGE_VAL;
            const double wgt = v[i] / vmax;
            c += wgt * (m - std::log(v[i])) * (m - std::log(v[i]));
        }
        return c;
    };

    double lm = 1e-3, c = cost(la, lb);
    for (int it = 0; it < 300 && std::isfinite(c); ++it) {
        Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        for (std::size_t i : pos) {
            double dlb = 0;
            const double m = model(la, lb, i, &dlb);
            const double wgt = v[i] / vmax, res = m - std::log(v[i]);
            const Eigen::Vector2d Jr(1, dlb);
            H += wgt * Jr * Jr.transpose();
            grad += wgt * res * Jr;
        }
        bool improved = false;
        for (int k = 0; k < 30; ++k) {
            Eigen::Matrix2d Hd = H;
            Hd.diagonal() *= 1 + lm;
            const Eigen::Vector2d step = Hd.ldlt().solve(-grad);
            const double cn = cost(la + step(0), lb + step(1));
            if (cn < c) {
                la += step(0);
                lb += step(1);
                const bool small = c - cn <= 1e-30 + 1e-15 * c;
                c = cn;
                lm = std::max(lm / 10, 1e-12);
                improved = !small;
                break;
            }
            lm *= 10;
        }
        if (!improved) break;
    }

    double resid = 0;
    for (std::size_t i : pos) {
        const double m = model(la, lb, i, nullptr);
        const double fit = std::isfinite(m) ? std::exp(m) : 0.0;
        resid = std::max(resid, std::abs(fit - v[i]));
    }
    FamilyFit out;
    out.family = family;
    out.residual = resid / vmax;
    out.A = std::exp(la);
    out.B = std::exp(lb);
    if (family == FamilyKind::A1 || family == FamilyKind::HSE) {
        const double lambda = 1 / out.B;
        out.B = lambda;
        out.A = out.A * std::pow(lambda, gamma);
    }
    return out;
}

// ---- stationarity ---------------------------------------------------------------------------

namespace {

struct Bump {
    double c, w;

    [[nodiscard]] bool inside(double t) const { return std::abs(t - c) < w; }
    // exp(1 - 1/(1-z^2)) and its tau-derivative
    [[nodiscard]] std::pair<double, double> eval(double t) const {
        const double z = (t - c) / w;
        if (std::abs(z) >= 1) return {0, 0};
        const double one = 1 - z * z;
        const double b = std::exp(1 - 1 / one);
        return {b, b * (-2 * z / (one * one)) / w};
    }
};

double log_sigma(const RadialProfile& g, double t) {
    // sigma = rho g'/g
    const auto v = g.value_at(t);
    const auto s = g.slope_at(t);
    if (v.sign == 0 || s.sign == 0) return 0;
    return s.sign * v.sign * std::exp(s.log_abs + t - v.log_abs);
}

// psi = b - alpha b2 - beta sigma b2; zero outside b2's support.
struct Direction {
    RadialProfile g;
    Bump b, b2;
    double alpha = 0, beta = 0;

    [[nodiscard]] double sigma(double t) const { return log_sigma(g, t); }

    [[nodiscard]] std::pair<double, double> psi(double t) const {
        if (!b2.inside(t)) return {0, 0};
        const auto [bv, bd] = b.eval(t);
        const auto [cv, cd] = b2.eval(t);
        const double s = sigma(t);
        constexpr double h = 1e-3;
        const double ds = (-sigma(t + 2 * h) + 8 * sigma(t + h) - 8 * sigma(t - h) + sigma(t - 2 * h)) / (12 * h);
        return {bv - alpha * cv - beta * s * cv, bd - alpha * cd - beta * (ds * cv + s * cd)};
    }
};

class PerturbedImpl final : public ProfileImpl {
public:
    PerturbedImpl(const Direction& dir, double eps) : dir_(dir), eps_(eps) {}

    LogValue value(double t) const override {
        const auto [ps, dps] = dir_.psi(t);
        return dir_.g.value_at(t) * LogValue::of(1 + eps_ * ps);
    }
    LogValue slope(double t) const override {
        const auto [ps, dps] = dir_.psi(t);
        const auto base = dir_.g.slope_at(t) * LogValue::of(1 + eps_ * ps);
        if (dps == 0) return base;
        return base + dir_.g.value_at(t) * LogValue::of(eps_ * dps) * LogValue{-t, 1};
    }

private:
    const Direction& dir_;
    double eps_;
};

Direction make_direction(const RadialProfile& g, Bump b, Bump b2) {
    Direction d{g, b, b2};
    // Local least squares against the amplitude (b2) and dilation (sigma b2) directions.
    constexpr int M = 801;
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    const double lo = b2.c - b2.w, step = 2 * b2.w / (M - 1);
    for (int i = 1; i < M - 1; ++i) {
        const double t = lo + i * step;
        const double e1 = b2.eval(t).first;
        const Eigen::Vector2d basis(e1, d.sigma(t) * e1);
        A += basis * basis.transpose();
        rhs += b.eval(t).first * basis;
    }
    const Eigen::Vector2d coef = A.completeOrthogonalDecomposition().solve(rhs);
    d.alpha = coef(0);
    d.beta = coef(1);
    return d;
}

}  // namespace

StationarityReport stationarity_check(const CknParams& P, const RadialProfile& g,
                                      const StationarityOptions& opts) {
    if (!(opts.epsilon >= 1e-4 && opts.epsilon <= 1e-2)) {
        throw Error("bad-amplitude", "epsilon must lie in [1e-4, 1e-2]");
    }
    if (opts.trials < 1) throw Error("bad-amplitude", "at least one trial is required");
    if (P.regime == Regime::Invalid) throw Error("invalid-params", P.reason);

    // The tight default tolerance is out of reach when a perturbation makes |u'|^p kink (p < 2
    // and u' changing sign); loosen it stepwise. A looser value adds about tol/eps of noise to
    // the first-order estimate.
    const auto quotient_at = [&](const RadialProfile& u) {
        for (double tol = opts.tolerance;; tol *= 10) {
            try {
                return ckn_quotient(P, u, tol).quotient;
            } catch (const Error& e) {
                if (e.code() != "tolerance-unmet" || tol >= 1e-9) throw;
            }
        }
    };

    StationarityReport rep;
    rep.trials = opts.trials;
    rep.epsilon = opts.epsilon;
    const double Q0 = quotient_at(g);
    rep.base_quotient = Q0;

    const double beta = natural_exponent(P);
    const double tc = std::log(g.shape().center);
    const std::optional<double> t_edge =
        g.shape().edge ? std::optional<double>(std::log(*g.shape().edge)) : std::nullopt;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> U(0, 1);

    const double eps = opts.epsilon;
    bool ok = true;
    rep.max_gain = -HUGE_VAL;
    rep.quadratic_fit = -HUGE_VAL;
    for (int trial = 0; trial < opts.trials; ++trial) {
        double c = 0, w = 0;
        for (;;) {
            w = (0.4 + 0.8 * U(rng)) / beta;
            c = tc + (-2.5 + 5 * U(rng)) / beta;
            if (!t_edge || c + 2 * w < *t_edge - 0.05 / beta) break;
        }
        const Direction dir = make_direction(g, {c, w}, {c, 2 * w});

        const auto Q = [&](double e) {
            ProfileShape sh = g.shape();
            for (double t : {c - 2 * w, c - w, c + w, c + 2 * w}) sh.breakpoints.push_back(std::exp(t));
            std::sort(sh.breakpoints.begin(), sh.breakpoints.end());
            const RadialProfile u(std::make_shared<PerturbedImpl>(dir, e), sh, OpaqueKind{"perturbed"});
            return quotient_at(u);
        };
        const double qp = Q(eps), qm = Q(-eps), qp2 = Q(eps / 2), qm2 = Q(-eps / 2);
        const double D1 = (qp - qm) / (2 * eps), D2 = (qp2 - qm2) / eps;
        const double first = ((4 * D2 - D1) / 3) / Q0;
        const double quad = (qp + qm - 2 * Q0) / (2 * eps * eps * Q0);
        const double gain = (std::max(qp, qm) - Q0) / Q0;

        rep.max_gain = std::max(rep.max_gain, gain);
        rep.max_first_order = std::max(rep.max_first_order, std::abs(first));
        rep.quadratic_fit = std::max(rep.quadratic_fit, quad);
        // The four samples fit Q0 + c1 e + c2 e^2 + c3 e^3 exactly; c1 is the Richardson value, so
        // the gain left after the higher-order terms is first * eps.
        if (std::abs(first) > opts.first_order_tolerance) ok = false;
    }
    rep.stationary = ok;
    return rep;
}

}  // namespace ckn
