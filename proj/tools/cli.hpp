#pragma once

#include <cstdint>
#include <string>

#include "ckn/json_io.hpp"

namespace ckn::cli {

struct SuiteOutcome {
    Json log;
    bool passed = true;
};

// Runs one property suite; per-check PASS/FAIL lines go to standard error. Every numeric
// threshold is multiplied by tolerance_scale. Throws "malformed-input" for an unknown suite.
[[nodiscard]] SuiteOutcome run_suite(const std::string& name, std::uint64_t seed,
                                     double tolerance_scale = 1);

// Evaluates a sweep spec and writes its CSV, to `output` (write-then-rename) or, when
// empty, to standard output.
void run_sweep(const Json& spec, const std::string& output, unsigned threads);

// Parallelism degree from CKN_THREADS, else the hardware concurrency.
[[nodiscard]] unsigned default_threads();

}  // namespace ckn::cli
