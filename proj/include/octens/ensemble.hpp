#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "octens/data.hpp"
#include "octens/metrics.hpp"

namespace octens {

// One parallel branch: a (model, training subset) pair and its scores.
struct Branch {
    std::string id;
    ScoreMatrix scores;
};

class BranchSet {
public:
    // All branches must already share sample ids (same order).
    explicit BranchSet(std::vector<Branch> branches);

    // Restricts every branch to the ids common to all of them, sorted.
    // Ids missing from at least one branch are appended to `dropped`.
    static BranchSet aligned(std::vector<Branch> branches, std::vector<std::string>* dropped = nullptr);

    std::size_t size() const noexcept { return branches_.size(); }
    std::size_t samples() const noexcept { return branches_.front().scores.rows(); }
    const Branch& operator[](std::size_t k) const { return branches_[k]; }
    const std::vector<std::string>& sample_ids() const { return branches_.front().scores.sample_ids(); }
    std::vector<std::string> ids() const;

private:
    std::vector<Branch> branches_;
};

// Non-negative branch weights with positive sum. Stored as given; every
// consumer normalizes.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> weights);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t k) const { return w_[k]; }
    const std::vector<double>& values() const noexcept { return w_; }
    double sum() const;
    WeightVector normalized() const;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> w_;
};

enum class SearchMethod { ExhaustiveGrid, CoordinateAscent };

struct SearchConfig {
    double step = 0.05;
    SearchMethod method = SearchMethod::ExhaustiveGrid;
    int max_rounds = 50;
    double threshold = kDefaultThreshold;

    // Number of lattice steps in the unit interval; throws unless 1/step is
    // an integer.
    int lattice_units() const;
    void validate() const;
};

// A labelled validation pool: the branch scores and the aligned truth.
struct ValidationSet {
    BranchSet branches;
    LabelMatrix truth;
};

// Aligns branches and truth on the ids all of them share (sorted). Ids lost on
// any side are appended to `dropped`.
ValidationSet make_validation_set(std::vector<Branch> branches, const LabelMatrix& truth,
                                  std::vector<std::string>* dropped = nullptr);

struct SearchResult {
    WeightVector weights;
    double objective = 0.0;
    std::size_t evaluations = 0;
    bool degenerate = false;  // some validation set had fewer than 2 samples
};

// out = sum_k (w_k / sum w) * scores_k, cell by cell.
ScoreMatrix combine(const BranchSet& branches, const WeightVector& w);
LabelMatrix predict(const BranchSet& branches, const WeightVector& w, double threshold = kDefaultThreshold);

// Every composition of 1/step into n_branches non-negative parts, scaled by
// step. The first coordinate runs from 1 down to 0, then the second, etc.
std::vector<WeightVector> enumerate_simplex(std::size_t n_branches, double step);

// Visits the integer compositions of `units` into `parts` in the same order as
// enumerate_simplex.
void for_each_composition(std::size_t parts, int units, const std::function<void(std::span<const int>)>& fn);

// Mean macro F1 of thresholded ensemble predictions over the validation sets.
double ensemble_objective(std::span<const ValidationSet> sets, const WeightVector& w, double threshold);

// Exhaustive grid: lattice argmax, ties to the lexicographically smallest
// vector. Coordinate ascent: from uniform weights, sweep coordinates trying
// every lattice value with the rest rescaled onto the lattice, keep strict
// improvements, stop on a quiet sweep or after max_rounds.
SearchResult optimize_weights(std::span<const ValidationSet> sets, const SearchConfig& cfg);
SearchResult optimize_weights(const BranchSet& branches, const LabelMatrix& truth, const SearchConfig& cfg);

// `branch_id,weight` CSV.
struct WeightTable {
    std::vector<std::string> branch_ids;
    WeightVector weights;
    // True when the decimal values in the file add up to exactly 1.
    bool sums_to_one = false;
};

WeightTable parse_weights(std::string_view content, const std::string& origin = "<memory>");
WeightTable read_weights(const std::string& path);
std::string format_weights(const std::vector<std::string>& branch_ids, const WeightVector& w);
void write_weights(const std::vector<std::string>& branch_ids, const WeightVector& w, const std::string& path);

// Reorders table weights to match `branch_ids`; the id sets must be equal.
WeightVector weights_for(const WeightTable& table, const std::vector<std::string>& branch_ids);

}  // namespace octens
