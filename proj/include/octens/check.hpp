#pragma once

#include <string>

namespace octens {

// One named pass/fail line of a self-check or fixture report.
struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

}  // namespace octens
