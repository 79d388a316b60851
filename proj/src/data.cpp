#include "octens/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "octens/error.hpp"
#include "octens/rng.hpp"
#include "text.hpp"

namespace octens {

namespace {

const std::string kMatrixHeader = "sample_id,IRHRF,PAVF,FAVF,IRF,DRT_ME,VD";
const std::string kManifestHeader = "sample_id,eye_id";

void check_unique(const std::vector<std::string>& ids) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (id.empty()) fail(ErrorKind::Format, "empty sample_id");
        if (!seen.insert(id).second) fail(ErrorKind::Format, "duplicate sample_id `" + id + "`");
    }
}

std::string at_line(const std::string& origin, int line) { return origin + ":" + std::to_string(line); }

// Shared row reader for score and label files. `cell` converts one value and
// throws with the row/column context on violation.
template <typename Row, typename Cell>
std::pair<std::vector<std::string>, std::vector<Row>> parse_matrix(std::string_view content, const std::string& origin,
                                                                   Cell&& cell) {
    const auto lines = text::lines(content);
    if (lines.empty() || lines[0] != kMatrixHeader)
        fail(ErrorKind::Format, at_line(origin, 1) + ": header must be `" + kMatrixHeader + "`");
    std::vector<std::string> ids;
    std::vector<Row> rows;
    std::unordered_map<std::string, int> first_seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const int line = static_cast<int>(li) + 1;
        const auto fields = text::split(lines[li], ',');
        if (fields.size() != kNumLabels + 1)
            fail(ErrorKind::Format, at_line(origin, line) + ": expected " + std::to_string(kNumLabels + 1) +
                                        " columns, found " + std::to_string(fields.size()));
        std::string id(fields[0]);
        if (id.empty()) fail(ErrorKind::Format, at_line(origin, line) + ": empty sample_id");
        if (auto [it, fresh] = first_seen.emplace(id, line); !fresh)
            fail(ErrorKind::Format, at_line(origin, line) + ": duplicate sample_id `" + id + "` (first on line " +
                                        std::to_string(it->second) + ")");
        Row row{};
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            const std::string ctx = at_line(origin, line) + ", column " + std::string(kLabelNames[j]);
            row[j] = cell(fields[j + 1], line, ctx);
        }
        ids.push_back(std::move(id));
        rows.push_back(row);
    }
    return {std::move(ids), std::move(rows)};
}

double score_cell(std::string_view s, int line, const std::string& ctx) {
    double v;
    try {
        v = text::parse_double(s, line);
    } catch (const Error&) {
        fail(ErrorKind::Format, ctx + ": not a number: `" + std::string(s) + "`");
    }
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Format, ctx + ": value " + std::string(s) + " outside [0,1]");
    return v;
}

std::uint8_t label_cell(std::string_view s, int line, const std::string& ctx) {
    double v;
    try {
        v = text::parse_double(s, line);
    } catch (const Error&) {
        fail(ErrorKind::Format, ctx + ": not a number: `" + std::string(s) + "`");
    }
    if (v != 0.0 && v != 1.0) fail(ErrorKind::Format, ctx + ": label " + std::string(s) + " is not 0 or 1");
    return static_cast<std::uint8_t>(v);
}

template <typename Matrix>
Aligned<Matrix> align_impl(const ScoreMatrix& a, const Matrix& b) {
    if (a.rows() == 0 || b.rows() == 0) fail(ErrorKind::Parameter, "cannot align an empty matrix");
    std::map<std::string_view, std::size_t> in_a, in_b;
    for (std::size_t i = 0; i < a.rows(); ++i) in_a.emplace(a.sample_ids()[i], i);
    for (std::size_t i = 0; i < b.rows(); ++i) in_b.emplace(b.sample_ids()[i], i);

    std::vector<std::string> ids, dropped;
    std::vector<ScoreRow> rows_a;
    std::vector<typename std::decay_t<decltype(b.values())>::value_type> rows_b;
    for (const auto& [id, ia] : in_a) {
        if (auto it = in_b.find(id); it != in_b.end()) {
            ids.emplace_back(id);
            rows_a.push_back(a.row(ia));
            rows_b.push_back(b.row(it->second));
        } else {
            dropped.emplace_back(id);
        }
    }
    for (const auto& [id, ib] : in_b)
        if (!in_a.contains(id)) dropped.emplace_back(id);
    std::sort(dropped.begin(), dropped.end());
    if (ids.empty()) fail(ErrorKind::Parameter, "no sample ids in common");
    return {ScoreMatrix(ids, std::move(rows_a)), Matrix(std::move(ids), std::move(rows_b)), std::move(dropped)};
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::vector<std::string> sample_ids, std::vector<ScoreRow> rows)
    : ids_(std::move(sample_ids)), rows_(std::move(rows)) {
    if (ids_.size() != rows_.size()) fail(ErrorKind::Format, "row count does not match sample_id count");
    check_unique(ids_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (std::size_t j = 0; j < kNumLabels; ++j)
            if (!(rows_[i][j] >= 0.0 && rows_[i][j] <= 1.0))
                fail(ErrorKind::Format, "score for `" + ids_[i] + "`, column " + std::string(kLabelNames[j]) +
                                            " outside [0,1]");
}

LabelMatrix::LabelMatrix(std::vector<std::string> sample_ids, std::vector<LabelRow> rows)
    : ids_(std::move(sample_ids)), rows_(std::move(rows)) {
    if (ids_.size() != rows_.size()) fail(ErrorKind::Format, "row count does not match sample_id count");
    check_unique(ids_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (auto v : rows_[i])
            if (v > 1) fail(ErrorKind::Format, "label for `" + ids_[i] + "` is not binary");
}

SampleManifest::SampleManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    std::unordered_set<std::string> seen;
    for (const auto& e : entries_) {
        if (e.sample_id.empty() || e.eye_id.empty()) fail(ErrorKind::Format, "empty id in manifest");
        if (!seen.insert(e.sample_id).second) fail(ErrorKind::Format, "duplicate sample_id `" + e.sample_id + "`");
    }
}

ScoreMatrix parse_scores(std::string_view content, const std::string& origin) {
    auto [ids, rows] = parse_matrix<ScoreRow>(content, origin, score_cell);
    return ScoreMatrix(std::move(ids), std::move(rows));
}

LabelMatrix parse_labels(std::string_view content, const std::string& origin) {
    auto [ids, rows] = parse_matrix<LabelRow>(content, origin, label_cell);
    return LabelMatrix(std::move(ids), std::move(rows));
}

SampleManifest parse_manifest(std::string_view content, const std::string& origin) {
    const auto lines = text::lines(content);
    if (lines.empty() || lines[0] != kManifestHeader)
        fail(ErrorKind::Format, at_line(origin, 1) + ": header must be `" + kManifestHeader + "`");
    std::vector<ManifestEntry> entries;
    std::unordered_map<std::string, int> first_seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const int line = static_cast<int>(li) + 1;
        const auto fields = text::split(lines[li], ',');
        if (fields.size() != 2)
            fail(ErrorKind::Format, at_line(origin, line) + ": expected 2 columns, found " +
                                        std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty()) fail(ErrorKind::Format, at_line(origin, line) + ": empty id");
        std::string id(fields[0]);
        if (auto [it, fresh] = first_seen.emplace(id, line); !fresh)
            fail(ErrorKind::Format, at_line(origin, line) + ": duplicate sample_id `" + id + "` (first on line " +
                                        std::to_string(it->second) + ")");
        entries.push_back({std::move(id), std::string(fields[1])});
    }
    return SampleManifest(std::move(entries));
}

ScoreMatrix read_scores(const std::string& path) { return parse_scores(text::read_file(path), path); }
LabelMatrix read_labels(const std::string& path) { return parse_labels(text::read_file(path), path); }
SampleManifest read_manifest(const std::string& path) { return parse_manifest(text::read_file(path), path); }

std::string format_scores(const ScoreMatrix& m) {
    std::string out = kMatrixHeader + "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += m.sample_ids()[i];
        for (double v : m.row(i)) out += "," + text::fixed6(v);
        out += "\n";
    }
    return out;
}

std::string format_labels(const LabelMatrix& m) {
    std::string out = kMatrixHeader + "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += m.sample_ids()[i];
        for (auto v : m.row(i)) out += v ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

std::string format_split(const SampleManifest& manifest, const SplitResult& split) {
    const std::unordered_set<std::string> val(split.val_ids.begin(), split.val_ids.end());
    std::string out = "sample_id,split\n";
    for (const auto& e : manifest.entries()) out += e.sample_id + (val.contains(e.sample_id) ? ",val\n" : ",train\n");
    return out;
}

void write_scores(const ScoreMatrix& m, const std::string& path) { text::write_file(path, format_scores(m)); }
void write_labels(const LabelMatrix& m, const std::string& path) { text::write_file(path, format_labels(m)); }
void write_split(const SampleManifest& manifest, const SplitResult& split, const std::string& path) {
    text::write_file(path, format_split(manifest, split));
}

Aligned<ScoreMatrix> align(const ScoreMatrix& a, const ScoreMatrix& b) { return align_impl(a, b); }
Aligned<LabelMatrix> align(const ScoreMatrix& a, const LabelMatrix& b) { return align_impl(a, b); }

SplitResult eyewise_split(const SampleManifest& manifest, double val_fraction, std::uint64_t seed) {
    require(std::isfinite(val_fraction) && val_fraction > 0.0 && val_fraction < 1.0, "val_fraction must be in (0,1)");

    // eyes in order of first appearance, with their sample counts
    std::vector<std::string> eyes;
    std::unordered_map<std::string, std::size_t> eye_index;
    std::vector<std::size_t> counts;
    for (const auto& e : manifest.entries()) {
        auto [it, fresh] = eye_index.emplace(e.eye_id, eyes.size());
        if (fresh) {
            eyes.push_back(e.eye_id);
            counts.push_back(0);
        }
        ++counts[it->second];
    }
    require(eyes.size() >= 2, "eye-wise split needs at least 2 distinct eye ids");

    std::vector<std::size_t> order(eyes.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    const double target = val_fraction * static_cast<double>(manifest.size());
    std::vector<char> is_val(eyes.size(), 0);
    std::size_t taken = 0;
    // the last eye in shuffled order always stays in train
    for (std::size_t k = 0; k + 1 < order.size() && static_cast<double>(taken) < target; ++k) {
        is_val[order[k]] = 1;
        taken += counts[order[k]];
    }

    SplitResult out;
    for (const auto& e : manifest.entries())
        (is_val[eye_index.at(e.eye_id)] ? out.val_ids : out.train_ids).push_back(e.sample_id);
    return out;
}

}  // namespace octens
