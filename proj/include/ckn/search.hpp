#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ckn/functionals.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

struct FamilyFit {
    FamilyKind family = FamilyKind::T5;
    double A = 1, B = 1;  // (c, lambda) for A1 and HSE
    double residual = 0;  // max |fit - g| / max |g| over the fit nodes
};

struct SearchOptions {
    int nodes = 200;
    int max_iterations = 3000;
    std::uint64_t seed = 0;
    // Node span in units of the regime's natural exponent: tau in +-span/beta. The default
    // gives rho in [1e-3, 1e3] when the exponent is 2.
    double span = 13.815510557964274;
    int memory = 12;  // L-BFGS pairs
    double tolerance = kDefaultTolerance;  // for the final quotient
};

struct SearchResult {
    RadialProfile best_profile;
    double best_quotient = 0;
    double best_quotient_error = 0;
    int iterations = 0;
    int accepted_steps = 0;
    bool converged = false;
    std::optional<FamilyFit> family_fit{};
    std::vector<std::string> flags{};  // "exploratory", "tail-clamped", "stalled"
    std::uint64_t seed = 0;
    std::vector<double> history{};  // quotient after each accepted step (internal evaluator)
};

// Exponent setting the natural radial scale: beta for C1, mu+2-s for C2, (p+mu-s)/(p-1)
// otherwise.
[[nodiscard]] double natural_exponent(const CknParams& P);

// Family whose closed form the regime's maximizers take, if any.
[[nodiscard]] std::optional<FamilyKind> expected_family(const CknParams& P);

// Log-spaced grid profile (log-value interpolation) through samples of g.
// Throws "bad-grid" when g vanishes at a node.
[[nodiscard]] RadialProfile sample_profile(const CknParams& P, const RadialProfile& g,
                                           const SearchOptions& opts = {});

// Positive decreasing grid profile with random shape and admissible tails.
[[nodiscard]] RadialProfile random_initial_profile(const CknParams& P, std::uint64_t seed,
                                                   const SearchOptions& opts = {});

// Multiplies g by 1 + amplitude * (smooth random field), sampled on the search grid.
[[nodiscard]] RadialProfile perturbed_profile(const CknParams& P, const RadialProfile& g,
                                              double amplitude, std::uint64_t seed,
                                              const SearchOptions& opts = {});

// Ascent on log-values at fixed log-spaced nodes. Throws "invalid-params" outside the
// admissible regimes and propagates "divergent-integral".
[[nodiscard]] SearchResult maximize_quotient(const CknParams& P, const RadialProfile& init,
                                             const SearchOptions& opts = {});

// Independent searches from random initial profiles, one per seed, run concurrently.
[[nodiscard]] std::vector<SearchResult> maximize_from_seeds(const CknParams& P,
                                                            const std::vector<std::uint64_t>& seeds,
                                                            const SearchOptions& opts = {},
                                                            unsigned threads = 0);

// Weighted least squares in log space over the interior nodes, those between the
// mass_quantile and 1 - mass_quantile quantiles of the target mass. The residual is taken over
// the same nodes. Throws "unfittable" for negative values or too few interior nodes.
[[nodiscard]] FamilyFit fit_family(const RadialProfile& g, FamilyKind family, const CknParams& P,
                                   double mass_quantile = 1e-3);

struct StationarityOptions {
    int trials = 100;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
    double tolerance = 1e-13;
    double first_order_tolerance = 1e-8;  // relative
};

struct StationarityReport {
    double base_quotient = 0;
    double max_gain = 0;          // max over trials and signs of (Q(u + eps phi) - Q(u)) / Q(u)
    double max_first_order = 0;   // max |dQ/d eps| / Q
    double quadratic_fit = 0;     // largest fitted second-order coefficient
    int trials = 0;
    double epsilon = 0;
    bool stationary = false;
};

// Random bump perturbations u (1 + eps psi), with psi orthogonal to the local amplitude and
// dilation directions. Throws "bad-amplitude" for eps outside [1e-4, 1e-2].
[[nodiscard]] StationarityReport stationarity_check(const CknParams& P, const RadialProfile& g,
                                                    const StationarityOptions& opts = {});

}  // namespace ckn
