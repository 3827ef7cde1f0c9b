#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cvclone {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::vector<int> clone_counts = {2, 3, 4, 5};
    // Replaces every check's built-in tolerance when set (testing hook).
    std::optional<double> tolerance_override;
};

// Full invariant suite: symplectic identities, physicality/purity, circuit vs
// closed form, fidelity and noise tables, output symmetry, sampled-vs-exact
// channel agreement, determinism.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace cvclone
