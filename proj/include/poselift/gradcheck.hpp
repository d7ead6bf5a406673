// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselift {

struct GradCheckConfig {
    int trials = 120;
    std::uint64_t seed = 1;
    double fd_step = 1e-5;
    double tolerance = 1e-4;
    std::string inject_sign_flip;  // test hook: corrupt one component by name
};

struct ComponentResult {
    std::string name;
    double max_rel_err = 0.0;
    int trials = 0;
    bool passed = false;
};

struct GradCheckReport {
    std::vector<ComponentResult> components;
    bool all_passed = false;
};

// Certifies every analytic gradient in the library against central finite
// differences: the ratio-loss depth gradient, the heatmap loss gradient, and
// end-to-end regressor parameter gradients through the depth-regression,
// ratio-loss and aux-heatmap branches.
GradCheckReport run_gradcheck(const GradCheckConfig& config);

}  // namespace poselift
