// extern "C" surface over the octens core. Each handle owns one core value;
// exceptions never cross this boundary.

#include "octens/octens.h"

#include <new>
#include <optional>
#include <string>
#include <vector>

#include "octens/blocks.hpp"
#include "octens/data.hpp"
#include "octens/ensemble.hpp"
#include "octens/error.hpp"
#include "octens/fixture.hpp"
#include "octens/image.hpp"
#include "octens/metrics.hpp"

struct octens_image {
    octens::ImageGray value;
};
struct octens_rng {
    octens::Rng value;
};
struct octens_scores {
    octens::ScoreMatrix value;
};
struct octens_labels {
    octens::LabelMatrix value;
};
struct octens_manifest {
    octens::SampleManifest value;
};
struct octens_split {
    octens::SplitResult value;
};
struct octens_branchset {
    octens::BranchSet value;
};
struct octens_validation_set {
    octens::ValidationSet value;
};
struct octens_weights {
    octens::WeightTable value;
};

namespace {

thread_local std::string last_error;

octens_status set_error(octens_status status, const char* what) {
    last_error = what;
    return status;
}

octens_status status_of(octens::ErrorKind kind) {
    switch (kind) {
        case octens::ErrorKind::Parameter: return OCTENS_ERR_PARAMETER;
        case octens::ErrorKind::Format: return OCTENS_ERR_FORMAT;
        case octens::ErrorKind::Io: return OCTENS_ERR_IO;
        case octens::ErrorKind::Mismatch: return OCTENS_ERR_MISMATCH;
    }
    return OCTENS_ERR_INTERNAL;
}

template <typename F>
octens_status guard(F&& body) {
    try {
        body();
        return OCTENS_OK;
    } catch (const octens::Error& e) {
        return set_error(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(OCTENS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(OCTENS_ERR_INTERNAL, e.what());
    }
}

void need(const void* p, const char* name) {
    if (!p) octens::fail(octens::ErrorKind::Parameter, std::string(name) + " must not be NULL");
}

template <typename Handle, typename Value>
void emit(Handle** out, Value&& v) {
    *out = new Handle{std::forward<Value>(v)};
}

octens::AugmentSpec to_core(const octens_augment_spec& s) {
    octens::AugmentSpec spec;
    spec.crop_fraction = s.crop_fraction;
    spec.hflip_probability = s.hflip_probability;
    spec.blur_sigma_range = {s.blur_sigma_lo, s.blur_sigma_hi};
    spec.perspective_distortion = s.perspective_distortion;
    spec.affine_max_rotation = s.affine_max_rotation;
    spec.affine_max_translate_fraction = s.affine_max_translate_fraction;
    spec.affine_scale_range = {s.affine_scale_lo, s.affine_scale_hi};
    spec.background_threshold = s.background_threshold;
    spec.seed = s.seed;
    return spec;
}

octens_augment_spec from_core(const octens::AugmentSpec& spec) {
    octens_augment_spec s{};
    s.crop_fraction = spec.crop_fraction;
    s.hflip_probability = spec.hflip_probability;
    s.blur_sigma_lo = spec.blur_sigma_range.first;
    s.blur_sigma_hi = spec.blur_sigma_range.second;
    s.perspective_distortion = spec.perspective_distortion;
    s.affine_max_rotation = spec.affine_max_rotation;
    s.affine_max_translate_fraction = spec.affine_max_translate_fraction;
    s.affine_scale_lo = spec.affine_scale_range.first;
    s.affine_scale_hi = spec.affine_scale_range.second;
    s.background_threshold = spec.background_threshold;
    s.seed = spec.seed;
    return s;
}

std::vector<octens::Branch> collect_branches(size_t n, const char* const* ids, const octens_scores* const* scores) {
    need(ids, "branch_ids");
    need(scores, "scores");
    std::vector<octens::Branch> branches;
    for (size_t k = 0; k < n; ++k) {
        need(ids[k], "branch id");
        need(scores[k], "branch scores");
        branches.push_back({ids[k], scores[k]->value});
    }
    return branches;
}

octens::WeightVector weight_vector(const double* weights, size_t n) {
    need(weights, "weights");
    return octens::WeightVector(std::vector<double>(weights, weights + n));
}

std::vector<octens::ValidationSet> collect_sets(const octens_validation_set* const* sets, size_t n) {
    need(sets, "sets");
    std::vector<octens::ValidationSet> out;
    for (size_t i = 0; i < n; ++i) {
        need(sets[i], "validation set");
        out.push_back(sets[i]->value);
    }
    return out;
}

void report(const std::vector<octens::CheckOutcome>& checks, octens_check_callback cb, void* user) {
    if (!cb) return;
    for (const auto& c : checks) cb(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
}

}  // namespace

extern "C" {

const char* octens_last_error(void) { return last_error.c_str(); }
const char* octens_version(void) { return "1.0.0"; }

const char* octens_label_name(size_t column) {
    return column < octens::kNumLabels ? octens::kLabelNames[column].data() : nullptr;
}

// ---- images

octens_status octens_image_create(int width, int height, const uint8_t* pixels, octens_image** out) {
    return guard([&] {
        need(out, "out");
        need(pixels, "pixels");
        if (width < 1 || height < 1) octens::fail(octens::ErrorKind::Parameter, "image dimensions must be >= 1");
        const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
        emit(out, octens::ImageGray(width, height, std::vector<uint8_t>(pixels, pixels + n)));
    });
}

octens_status octens_image_read_png(const char* path, octens_image** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        emit(out, octens::read_png(path));
    });
}

octens_status octens_image_write_png(const octens_image* img, const char* path) {
    return guard([&] {
        need(img, "img");
        need(path, "path");
        octens::write_png(img->value, path);
    });
}

int octens_image_width(const octens_image* img) { return img ? img->value.width() : 0; }
int octens_image_height(const octens_image* img) { return img ? img->value.height() : 0; }
const uint8_t* octens_image_pixels(const octens_image* img) { return img ? img->value.pixels().data() : nullptr; }
void octens_image_free(octens_image* img) { delete img; }

octens_status octens_rng_create(uint64_t seed, octens_rng** out) {
    return guard([&] {
        need(out, "out");
        *out = new octens_rng{octens::Rng(seed)};
    });
}

void octens_rng_free(octens_rng* rng) { delete rng; }

void octens_augment_spec_default(octens_augment_spec* spec) {
    if (spec) *spec = from_core(octens::AugmentSpec{});
}

octens_status octens_augment_spec_read(const char* path, octens_augment_spec* out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = from_core(octens::read_augment_spec(path));
    });
}

octens_status octens_linear_transform(const octens_image* img, double alpha, double beta, octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(out, "out");
        emit(out, octens::linear_transform(img->value, {alpha, beta}));
    });
}

octens_status octens_blacken_background(const octens_image* img, int threshold, octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(out, "out");
        emit(out, octens::blacken_background(img->value, threshold));
    });
}

octens_status octens_preprocess(const octens_image* img, double alpha, double beta, int threshold,
                                octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(out, "out");
        emit(out, octens::preprocess(img->value, {alpha, beta}, threshold));
    });
}

octens_status octens_random_crop(const octens_image* img, double crop_fraction, octens_rng* rng, octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(rng, "rng");
        need(out, "out");
        emit(out, octens::random_crop(img->value, crop_fraction, rng->value));
    });
}

octens_status octens_horizontal_flip(const octens_image* img, octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(out, "out");
        emit(out, octens::horizontal_flip(img->value));
    });
}

octens_status octens_gaussian_blur(const octens_image* img, double sigma, octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(out, "out");
        emit(out, octens::gaussian_blur(img->value, sigma));
    });
}

octens_status octens_random_perspective(const octens_image* img, double distortion, octens_rng* rng,
                                        octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(rng, "rng");
        need(out, "out");
        emit(out, octens::random_perspective(img->value, distortion, rng->value));
    });
}

octens_status octens_random_affine(const octens_image* img, const octens_augment_spec* spec, octens_rng* rng,
                                   octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(spec, "spec");
        need(rng, "rng");
        need(out, "out");
        emit(out, octens::random_affine(img->value, to_core(*spec), rng->value));
    });
}

octens_status octens_augment(const octens_image* img, const octens_augment_spec* spec, octens_rng* rng,
                             octens_image** out) {
    return guard([&] {
        need(img, "img");
        need(spec, "spec");
        need(rng, "rng");
        need(out, "out");
        emit(out, octens::augment(img->value, to_core(*spec), rng->value));
    });
}

// ---- data files

octens_status octens_scores_create(size_t rows, const char* const* sample_ids, const double* values,
                                   octens_scores** out) {
    return guard([&] {
        need(out, "out");
        std::vector<std::string> ids;
        std::vector<octens::ScoreRow> data(rows);
        if (rows > 0) {
            need(sample_ids, "sample_ids");
            need(values, "values");
        }
        for (size_t i = 0; i < rows; ++i) {
            need(sample_ids[i], "sample id");
            ids.emplace_back(sample_ids[i]);
            for (size_t j = 0; j < octens::kNumLabels; ++j) data[i][j] = values[i * octens::kNumLabels + j];
        }
        emit(out, octens::ScoreMatrix(std::move(ids), std::move(data)));
    });
}

octens_status octens_scores_read(const char* path, octens_scores** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        emit(out, octens::read_scores(path));
    });
}

octens_status octens_scores_write(const octens_scores* scores, const char* path) {
    return guard([&] {
        need(scores, "scores");
        need(path, "path");
        octens::write_scores(scores->value, path);
    });
}

size_t octens_scores_rows(const octens_scores* scores) { return scores ? scores->value.rows() : 0; }

const char* octens_scores_sample_id(const octens_scores* scores, size_t row) {
    if (!scores || row >= scores->value.rows()) return nullptr;
    return scores->value.sample_ids()[row].c_str();
}

double octens_scores_value(const octens_scores* scores, size_t row, size_t column) {
    if (!scores || row >= scores->value.rows() || column >= octens::kNumLabels) return -1.0;
    return scores->value.row(row)[column];
}

void octens_scores_free(octens_scores* scores) { delete scores; }

octens_status octens_labels_create(size_t rows, const char* const* sample_ids, const uint8_t* values,
                                   octens_labels** out) {
    return guard([&] {
        need(out, "out");
        std::vector<std::string> ids;
        std::vector<octens::LabelRow> data(rows);
        if (rows > 0) {
            need(sample_ids, "sample_ids");
            need(values, "values");
        }
        for (size_t i = 0; i < rows; ++i) {
            need(sample_ids[i], "sample id");
            ids.emplace_back(sample_ids[i]);
            for (size_t j = 0; j < octens::kNumLabels; ++j) data[i][j] = values[i * octens::kNumLabels + j];
        }
        emit(out, octens::LabelMatrix(std::move(ids), std::move(data)));
    });
}

octens_status octens_labels_read(const char* path, octens_labels** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        emit(out, octens::read_labels(path));
    });
}

octens_status octens_labels_write(const octens_labels* labels, const char* path) {
    return guard([&] {
        need(labels, "labels");
        need(path, "path");
        octens::write_labels(labels->value, path);
    });
}

size_t octens_labels_rows(const octens_labels* labels) { return labels ? labels->value.rows() : 0; }

const char* octens_labels_sample_id(const octens_labels* labels, size_t row) {
    if (!labels || row >= labels->value.rows()) return nullptr;
    return labels->value.sample_ids()[row].c_str();
}

int octens_labels_value(const octens_labels* labels, size_t row, size_t column) {
    if (!labels || row >= labels->value.rows() || column >= octens::kNumLabels) return -1;
    return labels->value.row(row)[column];
}

void octens_labels_free(octens_labels* labels) { delete labels; }

octens_status octens_align(const octens_scores* a, const octens_labels* b, octens_scores** out_a,
                           octens_labels** out_b, size_t* n_dropped) {
    return guard([&] {
        need(a, "a");
        need(b, "b");
        need(out_a, "out_a");
        need(out_b, "out_b");
        auto aligned = octens::align(a->value, b->value);
        auto* first = new octens_scores{std::move(aligned.first)};
        try {
            emit(out_b, std::move(aligned.second));
        } catch (...) {
            delete first;
            throw;
        }
        *out_a = first;
        if (n_dropped) *n_dropped = aligned.dropped.size();
    });
}

octens_status octens_manifest_read(const char* path, octens_manifest** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        emit(out, octens::read_manifest(path));
    });
}

size_t octens_manifest_size(const octens_manifest* manifest) { return manifest ? manifest->value.size() : 0; }
void octens_manifest_free(octens_manifest* manifest) { delete manifest; }

octens_status octens_eyewise_split(const octens_manifest* manifest, double val_fraction, uint64_t seed,
                                   octens_split** out) {
    return guard([&] {
        need(manifest, "manifest");
        need(out, "out");
        emit(out, octens::eyewise_split(manifest->value, val_fraction, seed));
    });
}

void octens_split_counts(const octens_split* split, size_t* train, size_t* val) {
    if (train) *train = split ? split->value.train_ids.size() : 0;
    if (val) *val = split ? split->value.val_ids.size() : 0;
}

octens_status octens_split_write(const octens_manifest* manifest, const octens_split* split, const char* path) {
    return guard([&] {
        need(manifest, "manifest");
        need(split, "split");
        need(path, "path");
        octens::write_split(manifest->value, split->value, path);
    });
}

void octens_split_free(octens_split* split) { delete split; }

// ---- metrics

octens_status octens_binarize(const octens_scores* scores, double threshold, octens_labels** out) {
    return guard([&] {
        need(scores, "scores");
        need(out, "out");
        emit(out, octens::binarize(scores->value, threshold));
    });
}

octens_status octens_evaluate(const octens_labels* pred, const octens_labels* truth, octens_metric_report* out) {
    return guard([&] {
        need(pred, "pred");
        need(truth, "truth");
        need(out, "out");
        const auto r = octens::evaluate(pred->value, truth->value);
        octens_metric_report m{};
        for (size_t j = 0; j < octens::kNumLabels; ++j) {
            m.per_label_f1[j] = r.per_label_f1[j];
            m.tp[j] = r.counts[j].tp;
            m.fp[j] = r.counts[j].fp;
            m.fn[j] = r.counts[j].fn;
            m.tn[j] = r.counts[j].tn;
        }
        m.macro_f1 = r.macro_f1;
        *out = m;
    });
}

// ---- ensemble

octens_status octens_branchset_create(size_t n_branches, const char* const* branch_ids,
                                      const octens_scores* const* scores, octens_branchset** out, size_t* n_dropped) {
    return guard([&] {
        need(out, "out");
        std::vector<std::string> dropped;
        emit(out, octens::BranchSet::aligned(collect_branches(n_branches, branch_ids, scores), &dropped));
        if (n_dropped) *n_dropped = dropped.size();
    });
}

size_t octens_branchset_size(const octens_branchset* set) { return set ? set->value.size() : 0; }
size_t octens_branchset_samples(const octens_branchset* set) { return set ? set->value.samples() : 0; }

const char* octens_branchset_id(const octens_branchset* set, size_t branch) {
    if (!set || branch >= set->value.size()) return nullptr;
    return set->value[branch].id.c_str();
}

void octens_branchset_free(octens_branchset* set) { delete set; }

octens_status octens_combine(const octens_branchset* set, const double* weights, size_t n_weights,
                             octens_scores** out) {
    return guard([&] {
        need(set, "set");
        need(out, "out");
        emit(out, octens::combine(set->value, weight_vector(weights, n_weights)));
    });
}

octens_status octens_predict(const octens_branchset* set, const double* weights, size_t n_weights, double threshold,
                             octens_labels** out) {
    return guard([&] {
        need(set, "set");
        need(out, "out");
        emit(out, octens::predict(set->value, weight_vector(weights, n_weights), threshold));
    });
}

octens_status octens_validation_set_create(size_t n_branches, const char* const* branch_ids,
                                           const octens_scores* const* scores, const octens_labels* truth,
                                           octens_validation_set** out, size_t* n_dropped) {
    return guard([&] {
        need(truth, "truth");
        need(out, "out");
        std::vector<std::string> dropped;
        emit(out, octens::make_validation_set(collect_branches(n_branches, branch_ids, scores), truth->value, &dropped));
        if (n_dropped) *n_dropped = dropped.size();
    });
}

size_t octens_validation_set_samples(const octens_validation_set* set) {
    return set ? set->value.truth.rows() : 0;
}

void octens_validation_set_free(octens_validation_set* set) { delete set; }

void octens_search_config_default(octens_search_config* cfg) {
    if (!cfg) return;
    const octens::SearchConfig d;
    cfg->step = d.step;
    cfg->method = OCTENS_SEARCH_GRID;
    cfg->max_rounds = d.max_rounds;
    cfg->threshold = d.threshold;
}

octens_status octens_optimize(const octens_validation_set* const* sets, size_t n_sets, const octens_search_config* cfg,
                              double* weights_out, size_t n_weights, octens_search_result* result) {
    return guard([&] {
        need(cfg, "cfg");
        need(weights_out, "weights_out");
        const auto core_sets = collect_sets(sets, n_sets);
        octens::SearchConfig c;
        c.step = cfg->step;
        c.max_rounds = cfg->max_rounds;
        c.threshold = cfg->threshold;
        switch (cfg->method) {
            case OCTENS_SEARCH_GRID: c.method = octens::SearchMethod::ExhaustiveGrid; break;
            case OCTENS_SEARCH_COORDINATE: c.method = octens::SearchMethod::CoordinateAscent; break;
            default: octens::fail(octens::ErrorKind::Parameter, "unknown search method");
        }
        if (!core_sets.empty() && core_sets.front().branches.size() != n_weights)
            octens::fail(octens::ErrorKind::Parameter, "n_weights does not match the branch count");
        const auto r = octens::optimize_weights(core_sets, c);
        for (size_t k = 0; k < n_weights; ++k) weights_out[k] = r.weights[k];
        if (result) *result = {r.objective, r.evaluations, r.degenerate ? 1 : 0};
    });
}

octens_status octens_objective(const octens_validation_set* const* sets, size_t n_sets, const double* weights,
                               size_t n_weights, double threshold, double* out) {
    return guard([&] {
        need(out, "out");
        *out = octens::ensemble_objective(collect_sets(sets, n_sets), weight_vector(weights, n_weights), threshold);
    });
}

octens_status octens_weights_read(const char* path, octens_weights** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        emit(out, octens::read_weights(path));
    });
}

size_t octens_weights_size(const octens_weights* w) { return w ? w->value.branch_ids.size() : 0; }

const char* octens_weights_id(const octens_weights* w, size_t k) {
    if (!w || k >= w->value.branch_ids.size()) return nullptr;
    return w->value.branch_ids[k].c_str();
}

double octens_weights_value(const octens_weights* w, size_t k) {
    if (!w || k >= w->value.branch_ids.size()) return -1.0;
    return w->value.weights[k];
}

int octens_weights_sum_to_one(const octens_weights* w) { return w && w->value.sums_to_one ? 1 : 0; }

octens_status octens_weights_for(const octens_weights* w, const octens_branchset* set, double* out, size_t n_out) {
    return guard([&] {
        need(w, "w");
        need(set, "set");
        need(out, "out");
        if (n_out != set->value.size()) octens::fail(octens::ErrorKind::Parameter, "n_out does not match the branch count");
        const auto ordered = octens::weights_for(w->value, set->value.ids());
        for (size_t k = 0; k < n_out; ++k) out[k] = ordered[k];
    });
}

octens_status octens_weights_write(size_t n, const char* const* branch_ids, const double* weights, const char* path) {
    return guard([&] {
        need(branch_ids, "branch_ids");
        need(path, "path");
        std::vector<std::string> ids;
        for (size_t k = 0; k < n; ++k) {
            need(branch_ids[k], "branch id");
            ids.emplace_back(branch_ids[k]);
        }
        octens::write_weights(ids, weight_vector(weights, n), path);
    });
}

void octens_weights_free(octens_weights* w) { delete w; }

// ---- self-checks

octens_status octens_attention_op_count(int height, int width, int channels, int heads,
                                        octens_attention_variant variant, int window, int grid, uint64_t* out) {
    return guard([&] {
        need(out, "out");
        const auto v = variant == OCTENS_ATTENTION_DENSE ? octens::blocks::AttentionVariant::Dense
                                                         : octens::blocks::AttentionVariant::MaxSa;
        *out = octens::blocks::attention_op_count(height, width, channels, heads, v, window, grid);
    });
}

octens_status octens_blocks_selfcheck(uint64_t seed, int size, const char* weights_path, octens_check_callback cb,
                                      void* user, int* all_passed) {
    return guard([&] {
        std::optional<std::vector<double>> weights;
        if (weights_path) weights = octens::blocks::read_f64_file(weights_path);
        const auto checks = octens::blocks::selfcheck(seed, size, weights);
        report(checks, cb, user);
        bool ok = true;
        for (const auto& c : checks) ok = ok && c.passed;
        if (all_passed) *all_passed = ok ? 1 : 0;
    });
}

octens_status octens_fixture_run(const char* dir, octens_check_callback cb, void* user, int* passed,
                                 int* normalized) {
    return guard([&] {
        need(dir, "dir");
        const auto r = octens::run_fixture(dir);
        report(r.checks, cb, user);
        if (passed) *passed = r.passed() ? 1 : 0;
        if (normalized) *normalized = r.normalized ? 1 : 0;
        if (!r.passed()) octens::fail(octens::ErrorKind::Mismatch, "fixture check failed");
    });
}

}  // extern "C"
