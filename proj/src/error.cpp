#include "ckn/error.hpp"

#include <cmath>

namespace ckn {

Error::Error(std::string code, const std::string& detail, std::optional<double> best_estimate)
    : std::runtime_error(code + ": " + detail), code_(std::move(code)), best_(best_estimate) {}

double require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw Error("non-finite", std::string(what) + " is not finite");
    }
    return x;
}

}  // namespace ckn
