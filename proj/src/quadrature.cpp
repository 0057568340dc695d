#include "ckn/quadrature.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ckn/error.hpp"

namespace ckn {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr double kScanStep = 1.0 / 16;
constexpr int kFirstLevel = 1;  // h = 1/2
constexpr int kMaxLevel = 9;    // h = 1/512

// A piece of the tau line mapped onto t in R by an exp-sinh (half lines) or tanh-sinh
// (finite panels) substitution.
struct Piece {
    enum class Kind { Left, Right, Panel } kind;
    double a = 0, b = 0;  // Left uses b as its upper end, Right uses a as its lower end
    double t_lo = 0, t_hi = 0;
};

struct Node {
    double tau, weight;
};

Node map_node(const Piece& pc, double t) {
    switch (pc.kind) {
        case Piece::Kind::Right: {
            const double x = std::exp(kHalfPi * std::sinh(t));
            return {pc.a + x, x * kHalfPi * std::cosh(t)};
        }
        case Piece::Kind::Left: {
            const double x = std::exp(kHalfPi * std::sinh(t));
            return {pc.b - x, x * kHalfPi * std::cosh(t)};
        }
        case Piece::Kind::Panel: {
            const double half = 0.5 * (pc.b - pc.a);
            const double y = kHalfPi * std::sinh(t);
            // Distances to the nearer endpoint are formed directly to keep them accurate.
            const double tau = t >= 0 ? pc.b - 2 * half / (1 + std::exp(2 * y))
                                      : pc.a + 2 * half / (1 + std::exp(-2 * y));
            const double ch = std::cosh(y);
            return {tau, half * kHalfPi * std::cosh(t) / (ch * ch)};
        }
    }
    return {0, 0};
}

class Evaluator {
public:
    explicit Evaluator(const RadialIntegral& job) : job_(job), shift_(job.power + 1) {}

    double term(const Piece& pc, double t) {
        const Node nd = map_node(pc, t);
        if (nd.weight == 0 || !std::isfinite(nd.tau)) return 0;
        ++count_;
        const double lf = job_.log_integrand(nd.tau);
        if (std::isnan(lf) || lf == HUGE_VAL) {
            std::ostringstream os;
            os << "integrand is not finite at rho = " << std::exp(nd.tau);
            throw Error("non-finite", os.str());
        }
        if (lf == -HUGE_VAL) return 0;
        const double v = std::exp(lf + shift_ * nd.tau) * nd.weight;
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "integrand overflows at rho = " << std::exp(nd.tau);
            throw Error("non-finite", os.str());
        }
        return v;
    }

    [[nodiscard]] std::size_t count() const { return count_; }

private:
    const RadialIntegral& job_;
    double shift_;
    std::size_t count_ = 0;
};

// Walks outward from t = 0 until terms are negligible against what has accumulated.
double scan_limit(Evaluator& ev, Piece& pc, double dir, double cap) {
    double acc = 0;
    int quiet = 0;
    double t = 0;
    for (int k = 1;; ++k) {
        t = dir * k * kScanStep;
        if (std::abs(t) >= cap) return dir * cap;
        const double v = std::abs(ev.term(pc, t));
        acc += v * kScanStep;
        if (std::abs(t) >= 1 && v <= 1e-18 * acc) {
            if (++quiet >= 4) return t;
        } else if (acc == 0 && std::abs(t) >= 3) {
            return t;
        } else {
            quiet = 0;
        }
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

RadialIntegral radial_job(std::function<double(double)> f, double power, double origin_order,
                          double tail_order) {
    RadialIntegral job;
    job.log_integrand = [f = std::move(f)](double tau) {
        return std::log(std::abs(f(std::exp(tau))));
    };
    job.power = power;
    job.origin_order = origin_order;
    job.tail_order = tail_order;
    return job;
}

double sphere_measure(double N) {
    return 2 * std::pow(std::numbers::pi, N / 2) / std::tgamma(N / 2);
}

QuadratureResult integrate_radial(const RadialIntegral& job) {
    if (!job.log_integrand) throw Error("bad-job", "integrand missing");
    if (!(job.tolerance >= 1e-13)) throw Error("bad-job", "tolerance below 1e-13");

    const double c1 = job.power + 1;
    if (!(c1 + job.origin_order > 0)) {
        throw Error("divergent-integral",
                    "endpoint 0: integrand order " + fmt(job.origin_order) + " against rho^" +
                        fmt(job.power));
    }
    double tau_edge = HUGE_VAL;
    if (job.edge) {
        if (!(*job.edge > 0)) throw Error("bad-job", "support edge must be positive");
        if (!(job.edge_order > -1)) {
            throw Error("divergent-integral", "endpoint R_edge = " + fmt(*job.edge));
        }
        tau_edge = std::log(*job.edge);
    } else if (!(c1 + job.tail_order < 0)) {
        throw Error("divergent-integral",
                    "endpoint infinity: integrand order " + fmt(job.tail_order) +
                        " against rho^" + fmt(job.power));
    }

    std::vector<double> cuts;
    for (double b : job.breakpoints) {
        if (b > 0 && std::isfinite(b)) {
            const double t = std::log(b);
            if (t < tau_edge - 1e-12) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty()) {
        double split = std::log(job.center > 0 ? job.center : 1.0);
        if (split > tau_edge - 0.25) split = tau_edge - 1;
        cuts.push_back(split);
    }

    std::vector<Piece> pieces;
    pieces.push_back({Piece::Kind::Left, 0, cuts.front()});
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        pieces.push_back({Piece::Kind::Panel, cuts[i], cuts[i + 1]});
    }
    if (job.edge) {
        pieces.push_back({Piece::Kind::Panel, cuts.back(), tau_edge});
    } else {
        pieces.push_back({Piece::Kind::Right, cuts.back(), 0});
    }

    Evaluator ev(job);
    for (auto& pc : pieces) {
        const double cap = pc.kind == Piece::Kind::Panel ? 4.5 : 4.0;
        pc.t_lo = scan_limit(ev, pc, -1, pc.kind == Piece::Kind::Panel ? cap : 4.5);
        pc.t_hi = scan_limit(ev, pc, +1, cap);
    }

    // Nested trapezoid levels: level L adds the odd multiples of h = 2^-L.
    std::vector<double> sums(pieces.size(), 0.0);
    std::vector<double> abs_sums(pieces.size(), 0.0);
    double prev = 0;
    for (int L = kFirstLevel; L <= kMaxLevel; ++L) {
        const double h = std::ldexp(1.0, -L);
        double total = 0, total_abs = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const Piece& pc = pieces[i];
            const long k_lo = static_cast<long>(std::ceil(pc.t_lo / h));
            const long k_hi = static_cast<long>(std::floor(pc.t_hi / h));
            double s = 0, sa = 0;
            const bool first = L == kFirstLevel;
            for (long k = k_lo; k <= k_hi; ++k) {
                if (!first && k % 2 == 0) continue;
                const double v = ev.term(pc, k * h);
                s += v;
                sa += std::abs(v);
            }
            sums[i] = first ? s * h : 0.5 * sums[i] + s * h;
            abs_sums[i] = first ? sa * h : 0.5 * abs_sums[i] + sa * h;
            total += sums[i];
            total_abs += abs_sums[i];
        }
        if (L > kFirstLevel) {
            const double diff = std::abs(total - prev);
            const double floor = 16 * DBL_EPSILON * total_abs;
            if (diff <= job.tolerance * std::abs(total) || diff <= floor) {
                return {total, std::max(diff, floor), L, ev.count()};
            }
            if (L == kMaxLevel) {
                throw Error("tolerance-unmet",
                            "relative change " + fmt(diff / std::abs(total)) +
                                " after the final refinement",
                            total);
            }
        }
        prev = total;
    }
    return {prev, 0, kMaxLevel, ev.count()};
}

}  // namespace ckn
