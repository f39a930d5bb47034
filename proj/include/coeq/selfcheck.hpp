#pragma once

#include <string>
#include <vector>

namespace coeq {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Fast property suite: lifting identities, moment-model oracles, cost-family
/// identities, gradient checks, metric invariances, the analytic circle
/// instance, and pipeline determinism. Runs in seconds.
std::vector<CheckResult> run_selfchecks();

}  // namespace coeq
