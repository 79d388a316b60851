#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "octens/check.hpp"

namespace octens {

struct ReportedBranchWeight {
    std::string_view branch_id;
    double weight;
};

// Best-performing branch weights reported for the five-branch ensemble:
// EfficientNetV2-M and MaxViT-base trained on TREX+PRIME, both on TREX only,
// EfficientNetV2-M on PRIME only.
inline constexpr std::array<ReportedBranchWeight, 5> kReportedWeights{{
    {"effv2m_trex_prime", 0.10},
    {"maxvit_trex_prime", 0.45},
    {"effv2m_trex", 0.10},
    {"maxvit_trex", 0.25},
    {"effv2m_prime", 0.10},
}};

struct FixtureReport {
    std::vector<CheckOutcome> checks;
    bool normalized = false;  // weight file did not sum to exactly 1
    bool passed() const;
};

// Expects weights.csv, one <branch_id>.csv score file per weight row,
// golden_combined.csv and golden_pred.csv in `dir`. Missing files throw
// Error(Io); content problems throw Error(Format). Golden mismatches are
// reported as failed checks.
FixtureReport run_fixture(const std::string& dir);

}  // namespace octens
