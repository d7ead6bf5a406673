// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "poselift/gradcheck.hpp"

namespace poselift::cli {

int run_gradcheck(const GradcheckOptions& opt) {
    GradCheckConfig cfg;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.inject_sign_flip = opt.inject;

    const GradCheckReport report = run_gradcheck(cfg);
    for (const ComponentResult& c : report.components) {
        std::printf("%-18s max_rel_err %.3e over %d trials  [%s]\n", c.name.c_str(),
                    c.max_rel_err, c.trials, c.passed ? "ok" : "FAIL");
    }
    if (!report.all_passed) {
        std::cout << "gradcheck: FAILED (tolerance " << cfg.tolerance << ")\n";
        return 1;
    }
    std::cout << "gradcheck: all components below " << cfg.tolerance << "\n";
    return 0;
}

}  // namespace poselift::cli
