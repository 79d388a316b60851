#include "octens/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "octens/error.hpp"
#include "text.hpp"

namespace octens {

BranchSet::BranchSet(std::vector<Branch> branches) : branches_(std::move(branches)) {
    require(!branches_.empty(), "branch set needs at least one branch");
    for (const auto& b : branches_) {
        require(!b.id.empty(), "empty branch id");
        require(b.scores.sample_ids() == branches_.front().scores.sample_ids(),
                "branch `" + b.id + "` is not aligned with `" + branches_.front().id + "`");
    }
    require(branches_.front().scores.rows() > 0, "branches have no samples");
}

BranchSet BranchSet::aligned(std::vector<Branch> branches, std::vector<std::string>* dropped) {
    require(!branches.empty(), "branch set needs at least one branch");
    std::map<std::string, std::size_t> seen;
    for (const auto& b : branches)
        for (const auto& id : b.scores.sample_ids()) ++seen[id];

    std::vector<std::string> common;
    for (const auto& [id, count] : seen) {
        if (count == branches.size()) common.push_back(id);
        else if (dropped) dropped->push_back(id);
    }
    if (common.empty()) fail(ErrorKind::Parameter, "branches have no sample ids in common");

    std::vector<Branch> out;
    for (auto& b : branches) {
        std::unordered_map<std::string_view, std::size_t> index;
        for (std::size_t i = 0; i < b.scores.rows(); ++i) index.emplace(b.scores.sample_ids()[i], i);
        std::vector<ScoreRow> rows;
        rows.reserve(common.size());
        for (const auto& id : common) rows.push_back(b.scores.row(index.at(id)));
        out.push_back({std::move(b.id), ScoreMatrix(common, std::move(rows))});
    }
    return BranchSet(std::move(out));
}

std::vector<std::string> BranchSet::ids() const {
    std::vector<std::string> out;
    for (const auto& b : branches_) out.push_back(b.id);
    return out;
}

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    require(!w_.empty(), "weight vector is empty");
    for (double v : w_) require(std::isfinite(v) && v >= 0.0, "weights must be finite and >= 0");
    require(sum() > 0.0, "weights must not all be zero");
}

double WeightVector::sum() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

WeightVector WeightVector::normalized() const {
    const double s = sum();
    std::vector<double> out(w_.size());
    for (std::size_t k = 0; k < w_.size(); ++k) out[k] = w_[k] / s;
    return WeightVector(std::move(out));
}

int SearchConfig::lattice_units() const {
    require(std::isfinite(step) && step > 0.0 && step <= 1.0, "step must be in (0,1]");
    const double units = std::round(1.0 / step);
    require(std::abs(units * step - 1.0) <= 1e-9, "1/step must be an integer");
    return static_cast<int>(units);
}

void SearchConfig::validate() const {
    lattice_units();
    require(max_rounds >= 1, "max_rounds must be >= 1");
    require(std::isfinite(threshold) && threshold > 0.0 && threshold < 1.0, "threshold must be in (0,1)");
}

namespace {

void check_weights(const BranchSet& branches, const WeightVector& w) {
    require(w.size() == branches.size(), "weight count (" + std::to_string(w.size()) + ") does not match branch count (" +
                                             std::to_string(branches.size()) + ")");
}

// The single arithmetic path for ensemble cells, shared by combine() and the
// search objective so both see identical values.
double combine_cell(const BranchSet& branches, std::span<const double> unit_weights, std::size_t i, std::size_t j) {
    double acc = 0.0;
    double lo = 1.0, hi = 0.0;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const double v = branches[k].scores.row(i)[j];
        acc += unit_weights[k] * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(acc, lo, hi);
}

double set_objective(const ValidationSet& set, std::span<const double> unit_weights, double threshold) {
    const auto& b = set.branches;
    std::array<ConfusionCounts, kNumLabels> counts{};
    for (std::size_t i = 0; i < b.samples(); ++i) {
        const auto& truth = set.truth.row(i);
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            const bool p = combine_cell(b, unit_weights, i, j) >= threshold;
            auto& c = counts[j];
            if (p && truth[j]) ++c.tp;
            else if (p) ++c.fp;
            else if (truth[j]) ++c.fn;
            else ++c.tn;
        }
    }
    std::array<double, kNumLabels> f1{};
    for (std::size_t j = 0; j < kNumLabels; ++j) f1[j] = f1_from_counts(counts[j]);
    return macro_average(f1);
}

double mean_objective(std::span<const ValidationSet> sets, std::span<const double> unit_weights, double threshold) {
    double sum = 0.0;
    for (const auto& s : sets) sum += set_objective(s, unit_weights, threshold);
    return sum / static_cast<double>(sets.size());
}

void check_sets(std::span<const ValidationSet> sets) {
    require(!sets.empty(), "no validation sets");
    const std::size_t n = sets.front().branches.size();
    for (const auto& s : sets) {
        require(s.branches.size() == n, "validation sets disagree on branch count");
        require(s.truth.rows() > 0, "truth is empty");
        require(s.truth.sample_ids() == s.branches.sample_ids(), "truth is not aligned with branch scores");
    }
}

std::vector<double> lattice_point(std::span<const int> units, int m) {
    std::vector<double> w(units.size());
    for (std::size_t k = 0; k < units.size(); ++k) w[k] = static_cast<double>(units[k]) / m;
    return w;
}

void compose(std::size_t part, int remaining, std::vector<int>& acc,
             const std::function<void(std::span<const int>)>& fn) {
    if (part + 1 == acc.size()) {
        acc[part] = remaining;
        fn(acc);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        acc[part] = v;
        compose(part + 1, remaining - v, acc, fn);
    }
}

SearchResult grid_search(std::span<const ValidationSet> sets, const SearchConfig& cfg) {
    const int m = cfg.lattice_units();
    const std::size_t n = sets.front().branches.size();
    std::vector<int> best_units;
    double best = -1.0;
    std::size_t evaluations = 0;
    for_each_composition(n, m, [&](std::span<const int> units) {
        ++evaluations;
        const auto w = lattice_point(units, m);
        const double obj = mean_objective(sets, WeightVector(w).normalized().values(), cfg.threshold);
        const bool better = obj > best ||
                            (obj == best && std::lexicographical_compare(units.begin(), units.end(),
                                                                         best_units.begin(), best_units.end()));
        if (better) {
            best = obj;
            best_units.assign(units.begin(), units.end());
        }
    });
    return {WeightVector(lattice_point(best_units, m)), best, evaluations, false};
}

// Sets coordinate k to v/m and spreads the remaining m - v units over the other
// coordinates in proportion to their current weights, rounding by largest
// remainder (ties to the lower index). Zero mass elsewhere spreads evenly.
std::vector<double> lattice_move(std::span<const double> w, std::size_t k, int v, int m) {
    const std::size_t n = w.size();
    std::vector<double> out(n, 0.0);
    out[k] = static_cast<double>(v) / m;
    if (n == 1) return out;
    const int rest = m - v;
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) mass += w[j];
    std::vector<double> share(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) share[j] = mass > 0.0 ? rest * (w[j] / mass) : static_cast<double>(rest) / (n - 1);

    std::vector<int> units(n, 0);
    int assigned = 0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) {
            units[j] = static_cast<int>(std::floor(share[j] + 1e-12));
            assigned += units[j];
        }
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (share[a] - units[a]) > (share[b] - units[b]);
    });
    for (std::size_t i = 0; assigned < rest; i = (i + 1) % order.size(), ++assigned) ++units[order[i]];
    for (std::size_t j = 0; j < n; ++j)
        if (j != k) out[j] = static_cast<double>(units[j]) / m;
    return out;
}

SearchResult coordinate_ascent(std::span<const ValidationSet> sets, const SearchConfig& cfg) {
    const int m = cfg.lattice_units();
    const std::size_t n = sets.front().branches.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    auto score = [&](const std::vector<double>& cand) {
        return mean_objective(sets, WeightVector(cand).normalized().values(), cfg.threshold);
    };
    double best = score(w);
    std::size_t evaluations = 1;
    for (int round = 0; round < cfg.max_rounds; ++round) {
        bool improved = false;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> best_cand;
            for (int v = 0; v <= m; ++v) {
                if (n == 1 && v != m) continue;
                auto cand = lattice_move(w, k, v, m);
                ++evaluations;
                const double obj = score(cand);
                if (obj > best) {
                    best = obj;
                    best_cand = std::move(cand);
                }
            }
            if (!best_cand.empty()) {
                w = std::move(best_cand);
                improved = true;
            }
        }
        if (!improved) break;
    }
    return {WeightVector(w), best, evaluations, false};
}

}  // namespace

ScoreMatrix combine(const BranchSet& branches, const WeightVector& w) {
    check_weights(branches, w);
    const auto unit = w.normalized();
    std::vector<ScoreRow> rows(branches.samples());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < kNumLabels; ++j) rows[i][j] = combine_cell(branches, unit.values(), i, j);
    return ScoreMatrix(branches.sample_ids(), std::move(rows));
}

LabelMatrix predict(const BranchSet& branches, const WeightVector& w, double threshold) {
    return binarize(combine(branches, w), threshold);
}

void for_each_composition(std::size_t parts, int units, const std::function<void(std::span<const int>)>& fn) {
    require(parts >= 1, "need at least one part");
    require(units >= 0, "units must be >= 0");
    std::vector<int> acc(parts, 0);
    compose(0, units, acc, fn);
}

std::vector<WeightVector> enumerate_simplex(std::size_t n_branches, double step) {
    SearchConfig cfg;
    cfg.step = step;
    const int m = cfg.lattice_units();
    std::vector<WeightVector> out;
    for_each_composition(n_branches, m, [&](std::span<const int> units) { out.emplace_back(lattice_point(units, m)); });
    return out;
}

double ensemble_objective(std::span<const ValidationSet> sets, const WeightVector& w, double threshold) {
    check_sets(sets);
    for (const auto& s : sets) check_weights(s.branches, w);
    require(std::isfinite(threshold) && threshold > 0.0 && threshold < 1.0, "threshold must be in (0,1)");
    return mean_objective(sets, w.normalized().values(), threshold);
}

SearchResult optimize_weights(std::span<const ValidationSet> sets, const SearchConfig& cfg) {
    cfg.validate();
    check_sets(sets);
    auto result = cfg.method == SearchMethod::ExhaustiveGrid ? grid_search(sets, cfg) : coordinate_ascent(sets, cfg);
    result.degenerate = std::any_of(sets.begin(), sets.end(), [](const auto& s) { return s.truth.rows() < 2; });
    return result;
}

SearchResult optimize_weights(const BranchSet& branches, const LabelMatrix& truth, const SearchConfig& cfg) {
    const ValidationSet set{branches, truth};
    return optimize_weights(std::span(&set, 1), cfg);
}

ValidationSet make_validation_set(std::vector<Branch> branches, const LabelMatrix& truth,
                                  std::vector<std::string>* dropped) {
    std::vector<std::string> lost;
    BranchSet set = BranchSet::aligned(std::move(branches), &lost);
    auto pair = align(set[0].scores, truth);
    lost.insert(lost.end(), pair.dropped.begin(), pair.dropped.end());

    std::vector<Branch> restricted;
    if (pair.first.rows() == set.samples()) {
        for (std::size_t k = 0; k < set.size(); ++k) restricted.push_back(set[k]);
    } else {
        std::unordered_map<std::string_view, std::size_t> index;
        for (std::size_t i = 0; i < set.samples(); ++i) index.emplace(set.sample_ids()[i], i);
        for (std::size_t k = 0; k < set.size(); ++k) {
            std::vector<ScoreRow> rows;
            for (const auto& id : pair.second.sample_ids()) rows.push_back(set[k].scores.row(index.at(id)));
            restricted.push_back({set[k].id, ScoreMatrix(pair.second.sample_ids(), std::move(rows))});
        }
    }
    if (dropped) {
        std::sort(lost.begin(), lost.end());
        lost.erase(std::unique(lost.begin(), lost.end()), lost.end());
        dropped->insert(dropped->end(), lost.begin(), lost.end());
    }
    return {BranchSet(std::move(restricted)), std::move(pair.second)};
}

WeightTable parse_weights(std::string_view content, const std::string& origin) {
    const auto lines = text::lines(content);
    if (lines.empty() || lines[0] != "branch_id,weight")
        fail(ErrorKind::Format, origin + ":1: header must be `branch_id,weight`");
    WeightTable table;
    std::vector<double> values;
    long long micro_sum = 0;  // 1e-12 units
    bool exact = true;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const int line = static_cast<int>(li) + 1;
        const std::string ctx = origin + ":" + std::to_string(line);
        const auto fields = text::split(lines[li], ',');
        if (fields.size() != 2) fail(ErrorKind::Format, ctx + ": expected 2 columns");
        if (fields[0].empty()) fail(ErrorKind::Format, ctx + ": empty branch_id");
        if (std::find(table.branch_ids.begin(), table.branch_ids.end(), fields[0]) != table.branch_ids.end())
            fail(ErrorKind::Format, ctx + ": duplicate branch_id `" + std::string(fields[0]) + "`");
        double v;
        try {
            v = text::parse_double(fields[1], line);
        } catch (const Error&) {
            fail(ErrorKind::Format, ctx + ": weight is not a number");
        }
        if (!(std::isfinite(v) && v >= 0.0)) fail(ErrorKind::Format, ctx + ": weight must be >= 0");
        const double scaled = v * 1e12;
        if (scaled > 1e15 || std::abs(scaled - std::round(scaled)) > 1e-3) exact = false;
        else micro_sum += std::llround(scaled);
        table.branch_ids.emplace_back(fields[0]);
        values.push_back(v);
    }
    if (values.empty()) fail(ErrorKind::Format, origin + ": no weights");
    if (std::accumulate(values.begin(), values.end(), 0.0) <= 0.0)
        fail(ErrorKind::Format, origin + ": weights must not all be zero");
    table.weights = WeightVector(std::move(values));
    table.sums_to_one = exact && micro_sum == 1'000'000'000'000LL;
    return table;
}

WeightTable read_weights(const std::string& path) { return parse_weights(text::read_file(path), path); }

std::string format_weights(const std::vector<std::string>& branch_ids, const WeightVector& w) {
    require(branch_ids.size() == w.size(), "branch id count does not match weight count");
    std::string out = "branch_id,weight\n";
    for (std::size_t k = 0; k < w.size(); ++k) out += branch_ids[k] + "," + text::fixed6(w[k]) + "\n";
    return out;
}

void write_weights(const std::vector<std::string>& branch_ids, const WeightVector& w, const std::string& path) {
    text::write_file(path, format_weights(branch_ids, w));
}

WeightVector weights_for(const WeightTable& table, const std::vector<std::string>& branch_ids) {
    if (table.branch_ids.size() != branch_ids.size())
        fail(ErrorKind::Parameter, "weight file has " + std::to_string(table.branch_ids.size()) + " rows for " +
                                       std::to_string(branch_ids.size()) + " branches");
    std::vector<double> out;
    for (const auto& id : branch_ids) {
        auto it = std::find(table.branch_ids.begin(), table.branch_ids.end(), id);
        if (it == table.branch_ids.end()) fail(ErrorKind::Parameter, "no weight for branch `" + id + "`");
        out.push_back(table.weights[static_cast<std::size_t>(it - table.branch_ids.begin())]);
    }
    return WeightVector(std::move(out));
}

}  // namespace octens
