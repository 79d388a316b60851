#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace octens {

inline constexpr std::size_t kNumLabels = 6;
inline constexpr std::array<std::string_view, kNumLabels> kLabelNames{"IRHRF", "PAVF", "FAVF", "IRF", "DRT_ME", "VD"};

using ScoreRow = std::array<double, kNumLabels>;
using LabelRow = std::array<std::uint8_t, kNumLabels>;

// Per-sample biomarker probabilities; rows are in sample_ids order.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    // Validates ranges and id uniqueness.
    ScoreMatrix(std::vector<std::string> sample_ids, std::vector<ScoreRow> rows);

    std::size_t rows() const noexcept { return ids_.size(); }
    const std::vector<std::string>& sample_ids() const noexcept { return ids_; }
    const std::vector<ScoreRow>& values() const noexcept { return rows_; }
    const ScoreRow& row(std::size_t i) const { return rows_[i]; }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<ScoreRow> rows_;
};

class LabelMatrix {
public:
    LabelMatrix() = default;
    LabelMatrix(std::vector<std::string> sample_ids, std::vector<LabelRow> rows);

    std::size_t rows() const noexcept { return ids_.size(); }
    const std::vector<std::string>& sample_ids() const noexcept { return ids_; }
    const std::vector<LabelRow>& values() const noexcept { return rows_; }
    const LabelRow& row(std::size_t i) const { return rows_[i]; }

    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<LabelRow> rows_;
};

struct ManifestEntry {
    std::string sample_id;
    std::string eye_id;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

class SampleManifest {
public:
    SampleManifest() = default;
    explicit SampleManifest(std::vector<ManifestEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }

private:
    std::vector<ManifestEntry> entries_;
};

struct SplitResult {
    std::vector<std::string> train_ids;  // manifest order
    std::vector<std::string> val_ids;    // manifest order
};

template <typename Matrix>
struct Aligned {
    ScoreMatrix first;
    Matrix second;
    std::vector<std::string> dropped;  // ids present on only one side, sorted
};

ScoreMatrix read_scores(const std::string& path);
LabelMatrix read_labels(const std::string& path);
SampleManifest read_manifest(const std::string& path);

ScoreMatrix parse_scores(std::string_view content, const std::string& origin = "<memory>");
LabelMatrix parse_labels(std::string_view content, const std::string& origin = "<memory>");
SampleManifest parse_manifest(std::string_view content, const std::string& origin = "<memory>");

std::string format_scores(const ScoreMatrix& m);
std::string format_labels(const LabelMatrix& m);
std::string format_split(const SampleManifest& manifest, const SplitResult& split);

void write_scores(const ScoreMatrix& m, const std::string& path);
void write_labels(const LabelMatrix& m, const std::string& path);
void write_split(const SampleManifest& manifest, const SplitResult& split, const std::string& path);

// Restricts both matrices to their common ids, sorted lexicographically.
Aligned<ScoreMatrix> align(const ScoreMatrix& a, const ScoreMatrix& b);
Aligned<LabelMatrix> align(const ScoreMatrix& a, const LabelMatrix& b);

// Seeded shuffle of eyes, then greedy fill of the validation side until it
// holds at least val_fraction of all samples.
SplitResult eyewise_split(const SampleManifest& manifest, double val_fraction, std::uint64_t seed);

}  // namespace octens
