#pragma once

#include <string>
#include <vector>

namespace roikit {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // failure description, empty on pass
};

// The embedded oracle-equivalence and invariant suites: ball query vs
// brute force, pooling and forward-math oracles, the zero-weight fusion
// closed form, the fusion gradient check, and geometry invariants.
// Deterministic (fixed seeds). inject_fault appends a check that always
// fails, for exercising the failure path.
std::vector<CheckResult> run_selfcheck(bool inject_fault = false);

}  // namespace roikit
