#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coeq {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Desk-scale reproduction suite: benchmark scenarios with pinned bounds,
/// solver tightness against a brute-force oracle, certificate checks, and
/// the robustness cases. Each criterion reports one pass/fail line. Expect
/// minutes of runtime; progress goes to the optional stream.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

}  // namespace coeq
