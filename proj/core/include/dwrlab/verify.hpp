#pragma once

#include <string>
#include <vector>

namespace dwrlab {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    /// One line per check: "CHECK <name> <measured> <tol> PASS|FAIL".
    std::string text() const;
};

/// Runs every oracle cross-check: transpose identities, inverse-row adjoint,
/// finite-difference Jacobians, dual-form identities, primal/dual estimate
/// equivalence, march-vs-monolithic, checkpointing, injection losslessness.
/// Randomized vectors are fixed by the seed (CLI reads DWRLAB_SEED).
/// `mutate` is a test hook; "adjoint_sign_flip" flips the adjoint right-hand
/// side inside the dual-form check so the suite must fail.
VerifyReport run_verify(unsigned long seed = 20240817ul, const std::string& mutate = "");

} // namespace dwrlab
