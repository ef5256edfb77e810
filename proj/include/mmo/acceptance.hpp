#pragma once

#include <string>
#include <vector>

namespace mmo {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::string detail;
};

// Runs the ten release criteria in order.  Each criterion is independent:
// a failure (or an exception, which is caught and recorded) never stops the
// suite.  The whole run stays within a few minutes on desktop hardware.
std::vector<CriterionResult> run_acceptance();

}  // namespace mmo
