#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ckn {

// Failure with a stable machine-readable code ("divergent-integral", ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail,
          std::optional<double> best_estimate = std::nullopt);

    [[nodiscard]] const std::string& code() const noexcept { return code_; }
    [[nodiscard]] std::optional<double> best_estimate() const noexcept { return best_; }

private:
    std::string code_;
    std::optional<double> best_;
};

// Throws "non-finite" when x is NaN or infinite.
double require_finite(double x, const char* what);

}  // namespace ckn
