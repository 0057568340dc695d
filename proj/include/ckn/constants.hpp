#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ckn/functionals.hpp"
#include "ckn/params.hpp"

namespace ckn {

enum class ConstantBranch { T5, T6, A1, Hardy };

[[nodiscard]] std::string_view to_string(ConstantBranch b);
[[nodiscard]] ConstantBranch constant_branch_from_string(std::string_view s);

struct SharpConstantReport {
    double value = 0;
    ConstantBranch branch = ConstantBranch::T5;
    bool attained = true;
    // Factors whose product is `value`, in display order.
    std::vector<std::pair<std::string, double>> components;
    // Quotient at the branch's own optimizer, when computed.
    std::optional<double> oracle_quotient;
    std::vector<std::string> flags;  // "formula-discrepancy"
};

struct ConstantOptions {
    bool check_oracle = true;
    double tolerance = kDefaultTolerance;
    double discrepancy_threshold = 1e-5;  // relative
};

// Product formula for the bubble branch r = p(q-1)/(p-1), q > p.
[[nodiscard]] SharpConstantReport sharp_constant_t5(const CknParams& P,
                                                    const ConstantOptions& opts = {});
// Product formula for the compact branch q = p(r-1)/(p-1), 2 - 1/p < r < p.
[[nodiscard]] SharpConstantReport sharp_constant_t6(const CknParams& P,
                                                    const ConstantOptions& opts = {});
// a = 1, s < p + mu: quotient at the extremal, split into the d-power and the implied
// unweighted constant.
[[nodiscard]] SharpConstantReport sharp_constant_a1(const CknParams& P,
                                                    double tolerance = kDefaultTolerance);
// s = p + mu: p/(N-p-mu), never attained.
[[nodiscard]] SharpConstantReport hardy_constant(const CknParams& P);

[[nodiscard]] SharpConstantReport sharp_constant(const CknParams& P, ConstantBranch branch,
                                                 const ConstantOptions& opts = {});

// Exponent of d linking the a = 1 constant to the unweighted one.
[[nodiscard]] double a1_prefactor_exponent(const CknParams& P);

}  // namespace ckn
