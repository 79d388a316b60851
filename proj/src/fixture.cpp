#include "octens/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "octens/ensemble.hpp"
#include "octens/error.hpp"
#include "text.hpp"

namespace octens {

bool FixtureReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

FixtureReport run_fixture(const std::string& dir) {
    const std::filesystem::path root(dir);
    FixtureReport report;
    auto record = [&](std::string name, bool ok, std::string detail) {
        report.checks.push_back({std::move(name), ok, std::move(detail)});
    };

    const WeightTable table = read_weights((root / "weights.csv").string());
    report.normalized = !table.sums_to_one;
    record("weights_sum_to_one", true,
           table.sums_to_one ? "exact" : "sum " + text::fixed6(table.weights.sum()) + ", normalized before use");

    const WeightVector unit = table.weights.normalized();
    bool table_ok = table.branch_ids.size() == kReportedWeights.size();
    for (std::size_t k = 0; table_ok && k < kReportedWeights.size(); ++k)
        table_ok = table.branch_ids[k] == kReportedWeights[k].branch_id &&
                   std::abs(unit[k] - kReportedWeights[k].weight) <= 1e-12;
    record("weights_match_reported_table", table_ok,
           table_ok ? "5 branches in reported order" : "branch ids or weights differ from the reported table");

    std::vector<Branch> branches;
    for (const auto& id : table.branch_ids)
        branches.push_back({id, read_scores((root / (id + ".csv")).string())});
    std::vector<std::string> dropped;
    const BranchSet set = BranchSet::aligned(std::move(branches), &dropped);
    record("branches_aligned", dropped.empty(), std::to_string(set.samples()) + " samples, " +
                                                    std::to_string(dropped.size()) + " dropped");

    const std::string combined = format_scores(combine(set, table.weights));
    const std::string pred = format_labels(predict(set, table.weights, kDefaultThreshold));
    const std::string golden_combined = text::read_file((root / "golden_combined.csv").string());
    const std::string golden_pred = text::read_file((root / "golden_pred.csv").string());
    record("combined_matches_golden", combined == golden_combined,
           combined == golden_combined ? "byte-identical" : "combined scores differ from golden_combined.csv");
    record("pred_matches_golden", pred == golden_pred,
           pred == golden_pred ? "byte-identical" : "predicted labels differ from golden_pred.csv");
    return report;
}

}  // namespace octens
