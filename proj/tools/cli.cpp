#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "octens/octens.h"

#ifndef OCTENS_FIXTURE_DIR
#define OCTENS_FIXTURE_DIR "fixtures/reported"
#endif

namespace fs = std::filesystem;

namespace octens::cli {

namespace {

// Carries a C API failure up to the dispatcher.
struct Failure : std::runtime_error {
    int code;
    Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void check(octens_status s) {
    if (s == OCTENS_OK) return;
    throw Failure(s == OCTENS_ERR_IO ? kIoError : kInvalid, octens_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};

using Image = std::unique_ptr<octens_image, Deleter<octens_image, octens_image_free>>;
using Rng = std::unique_ptr<octens_rng, Deleter<octens_rng, octens_rng_free>>;
using Scores = std::unique_ptr<octens_scores, Deleter<octens_scores, octens_scores_free>>;
using Labels = std::unique_ptr<octens_labels, Deleter<octens_labels, octens_labels_free>>;
using Manifest = std::unique_ptr<octens_manifest, Deleter<octens_manifest, octens_manifest_free>>;
using Split = std::unique_ptr<octens_split, Deleter<octens_split, octens_split_free>>;
using BranchSet = std::unique_ptr<octens_branchset, Deleter<octens_branchset, octens_branchset_free>>;
using ValidationSet = std::unique_ptr<octens_validation_set, Deleter<octens_validation_set, octens_validation_set_free>>;
using Weights = std::unique_ptr<octens_weights, Deleter<octens_weights, octens_weights_free>>;

template <typename Handle, typename F>
Handle make(F&& f) {
    typename Handle::pointer raw = nullptr;
    check(f(&raw));
    return Handle(raw);
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    if (out.empty()) throw Failure(kInvalid, "empty file list");
    return out;
}

std::vector<fs::path> png_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Failure(kIoError, "not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Failure(kIoError, "cannot create directory: " + dir);
}

struct LoadedBranches {
    std::vector<std::string> ids;
    std::vector<Scores> scores;

    std::vector<const char*> id_ptrs() const {
        std::vector<const char*> out;
        for (const auto& s : ids) out.push_back(s.c_str());
        return out;
    }
    std::vector<const octens_scores*> score_ptrs() const {
        std::vector<const octens_scores*> out;
        for (const auto& s : scores) out.push_back(s.get());
        return out;
    }
};

LoadedBranches load_branches(const std::string& list) {
    LoadedBranches b;
    for (const auto& path : split_list(list)) {
        b.ids.push_back(fs::path(path).stem().string());
        b.scores.push_back(make<Scores>([&](auto** o) { return octens_scores_read(path.c_str(), o); }));
    }
    return b;
}

int cmd_preprocess(const Options& o, std::ostream&, std::ostream& err) {
    ensure_dir(o.out_dir);
    const auto files = png_files(o.in_dir);
    for (const auto& f : files) {
        const auto img = make<Image>([&](auto** p) { return octens_image_read_png(f.string().c_str(), p); });
        const auto out = make<Image>([&](auto** p) { return octens_preprocess(img.get(), o.alpha, o.beta, o.bg_threshold, p); });
        check(octens_image_write_png(out.get(), (fs::path(o.out_dir) / f.filename()).string().c_str()));
    }
    err << "preprocessed " << files.size() << " images\n";
    return kOk;
}

int cmd_augment(const Options& o, std::ostream&, std::ostream& err) {
    octens_augment_spec spec;
    check(octens_augment_spec_read(o.spec_file.c_str(), &spec));
    spec.seed = o.seed;
    ensure_dir(o.out_dir);
    const auto rng = make<Rng>([&](auto** p) { return octens_rng_create(o.seed, p); });
    const auto files = png_files(o.in_dir);
    for (const auto& f : files) {
        const auto img = make<Image>([&](auto** p) { return octens_image_read_png(f.string().c_str(), p); });
        const auto out = make<Image>([&](auto** p) { return octens_augment(img.get(), &spec, rng.get(), p); });
        check(octens_image_write_png(out.get(), (fs::path(o.out_dir) / f.filename()).string().c_str()));
    }
    err << "augmented " << files.size() << " images\n";
    return kOk;
}

int cmd_split(const Options& o, std::ostream&, std::ostream& err) {
    const auto manifest = make<Manifest>([&](auto** p) { return octens_manifest_read(o.manifest.c_str(), p); });
    const auto split = make<Split>([&](auto** p) { return octens_eyewise_split(manifest.get(), o.val_frac, o.seed, p); });
    check(octens_split_write(manifest.get(), split.get(), o.out_file.c_str()));
    size_t train = 0, val = 0;
    octens_split_counts(split.get(), &train, &val);
    err << "train " << train << ", val " << val << " (achieved val fraction "
        << fixed6(static_cast<double>(val) / static_cast<double>(train + val)) << ")\n";
    return kOk;
}

int cmd_combine(const Options& o, std::ostream&, std::ostream& err) {
    if (o.scores.size() != 1) throw Failure(kInvalid, "combine takes exactly one --scores list");
    const auto branches = load_branches(o.scores.front());
    const auto ids = branches.id_ptrs();
    const auto scores = branches.score_ptrs();
    size_t dropped = 0;
    const auto set = make<BranchSet>(
        [&](auto** p) { return octens_branchset_create(ids.size(), ids.data(), scores.data(), p, &dropped); });
    if (dropped) err << "dropped " << dropped << " sample ids not shared by every branch\n";

    const auto table = make<Weights>([&](auto** p) { return octens_weights_read(o.weights.c_str(), p); });
    if (!octens_weights_sum_to_one(table.get())) err << "weights do not sum to 1; normalizing\n";
    std::vector<double> w(ids.size());
    check(octens_weights_for(table.get(), set.get(), w.data(), w.size()));

    const auto combined = make<Scores>([&](auto** p) { return octens_combine(set.get(), w.data(), w.size(), p); });
    check(octens_scores_write(combined.get(), o.out_file.c_str()));
    if (!o.pred_out.empty()) {
        const auto pred = make<Labels>([&](auto** p) { return octens_binarize(combined.get(), o.threshold, p); });
        check(octens_labels_write(pred.get(), o.pred_out.c_str()));
    }
    return kOk;
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.scores.size() != o.labels.size())
        throw Failure(kInvalid, "each --scores list needs a matching --labels file");
    octens_search_config cfg;
    octens_search_config_default(&cfg);
    cfg.step = o.step;
    cfg.method = o.method == "coord" ? OCTENS_SEARCH_COORDINATE : OCTENS_SEARCH_GRID;
    cfg.max_rounds = o.max_rounds;
    cfg.threshold = o.threshold;

    std::vector<ValidationSet> sets;
    std::vector<std::string> branch_ids;
    for (size_t s = 0; s < o.scores.size(); ++s) {
        const auto branches = load_branches(o.scores[s]);
        if (s == 0) branch_ids = branches.ids;
        else if (branches.ids.size() != branch_ids.size())
            throw Failure(kInvalid, "validation sets list different numbers of branches");
        const auto truth = make<Labels>([&](auto** p) { return octens_labels_read(o.labels[s].c_str(), p); });
        const auto ids = branches.id_ptrs();
        const auto scores = branches.score_ptrs();
        size_t dropped = 0;
        sets.push_back(make<ValidationSet>([&](auto** p) {
            return octens_validation_set_create(ids.size(), ids.data(), scores.data(), truth.get(), p, &dropped);
        }));
        if (dropped) err << "validation set " << s + 1 << ": dropped " << dropped << " unmatched sample ids\n";
    }

    std::vector<const octens_validation_set*> ptrs;
    for (const auto& s : sets) ptrs.push_back(s.get());
    std::vector<double> w(branch_ids.size());
    octens_search_result result{};
    check(octens_optimize(ptrs.data(), ptrs.size(), &cfg, w.data(), w.size(), &result));
    if (result.degenerate) err << "warning: a validation set has fewer than 2 samples\n";

    std::vector<const char*> id_ptrs;
    for (const auto& id : branch_ids) id_ptrs.push_back(id.c_str());
    check(octens_weights_write(w.size(), id_ptrs.data(), w.data(), o.out_file.c_str()));
    err << "evaluated " << result.evaluations << " weight vectors\n";
    out << "objective," << fixed6(result.objective) << "\n";
    return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    const auto pred_scores = make<Scores>([&](auto** p) { return octens_scores_read(o.pred.c_str(), p); });
    const auto truth = make<Labels>([&](auto** p) { return octens_labels_read(o.labels.front().c_str(), p); });
    Scores aligned_pred;
    Labels aligned_truth;
    {
        octens_scores* a = nullptr;
        octens_labels* b = nullptr;
        size_t dropped = 0;
        check(octens_align(pred_scores.get(), truth.get(), &a, &b, &dropped));
        aligned_pred.reset(a);
        aligned_truth.reset(b);
        if (dropped) err << "dropped " << dropped << " sample ids present in only one file\n";
    }
    const auto pred = make<Labels>([&](auto** p) { return octens_binarize(aligned_pred.get(), o.threshold, p); });
    octens_metric_report report;
    check(octens_evaluate(pred.get(), aligned_truth.get(), &report));
    for (size_t j = 0; j < OCTENS_NUM_LABELS; ++j) out << octens_label_name(j) << "," << fixed6(report.per_label_f1[j]) << "\n";
    out << "macro," << fixed6(report.macro_f1) << "\n";
    return kOk;
}

void print_check(const char* name, int passed, const char* detail, void* user) {
    auto& out = *static_cast<std::ostream*>(user);
    out << (passed ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
}

int cmd_selfcheck(const Options& o, std::ostream& out, std::ostream& err) {
    int all = 0;
    check(octens_blocks_selfcheck(o.seed, o.size, o.weights.empty() ? nullptr : o.weights.c_str(), print_check, &out,
                                  &all));
    if (!all) {
        err << "blocks selfcheck: failures above\n";
        return kInvalid;
    }
    return kOk;
}

int cmd_fixture(const Options& o, std::ostream& out, std::ostream& err) {
    int passed = 0, normalized = 0;
    const std::string dir = o.fixture_dir.empty() ? OCTENS_FIXTURE_DIR : o.fixture_dir;
    const octens_status s = octens_fixture_run(dir.c_str(), print_check, &out, &passed, &normalized);
    if (normalized) err << "note: fixture weights did not sum to exactly 1 and were normalized\n";
    if (s == OCTENS_ERR_MISMATCH) {
        err << "fixture: " << octens_last_error() << "\n";
        return kInvalid;
    }
    check(s);
    out << "fixture " << (passed ? "passed" : "failed") << "\n";
    return passed ? kOk : kInvalid;
}

}  // namespace

std::unique_ptr<CLI::App> make_app(Options& o) {
    auto app = std::make_unique<CLI::App>("Parallel-branch ensemble toolkit for OCT biomarker prediction", "octens");
    app->require_subcommand(1);

    auto* pre = app->add_subcommand("preprocess", "Contrast/brightness transform and background blackening of PNG slices");
    pre->add_option("--in", o.in_dir, "Input directory of 8-bit grayscale PNGs")->required();
    pre->add_option("--out", o.out_dir, "Output directory")->required();
    pre->add_option("--alpha", o.alpha, "Contrast gain (> 0)")->capture_default_str();
    pre->add_option("--beta", o.beta, "Brightness offset")->capture_default_str();
    pre->add_option("--bg-threshold", o.bg_threshold, "Background threshold 0..255")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();

    auto* aug = app->add_subcommand("augment", "Seeded augmentation of PNG slices");
    aug->add_option("--in", o.in_dir, "Input directory of 8-bit grayscale PNGs")->required();
    aug->add_option("--out", o.out_dir, "Output directory")->required();
    aug->add_option("--spec", o.spec_file, "Augmentation config (key = value)")->required();
    aug->add_option("--seed", o.seed, "Generator seed")->required();

    auto* split = app->add_subcommand("split", "Eye-wise train/validation split of a manifest");
    split->add_option("--manifest", o.manifest, "CSV with sample_id,eye_id")->required();
    split->add_option("--val-frac", o.val_frac, "Target validation fraction in (0,1)")->required();
    split->add_option("--seed", o.seed, "Shuffle seed")->required();
    split->add_option("--out", o.out_file, "Output CSV with sample_id,split")->required();

    auto* comb = app->add_subcommand("combine", "Weighted average of branch score files");
    comb->add_option("--scores", o.scores, "Comma-separated branch score files; branch id = file stem")
        ->required()
        ->expected(1);
    comb->add_option("--weights", o.weights, "CSV with branch_id,weight")->required();
    comb->add_option("--out", o.out_file, "Output combined score CSV")->required();
    comb->add_option("--pred-out", o.pred_out, "Optional binarized label CSV");
    comb->add_option("--threshold", o.threshold, "Binarization threshold for --pred-out")->capture_default_str();

    auto* opt = app->add_subcommand("optimize", "Search branch weights maximizing macro F1");
    opt->add_option("--scores", o.scores,
                    "Comma-separated branch score files; repeat once per validation set")
        ->required()
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    opt->add_option("--labels", o.labels, "Truth label CSV; repeat once per validation set")
        ->required()
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    opt->add_option("--step", o.step, "Lattice step; 1/step must be an integer")->capture_default_str();
    opt->add_option("--method", o.method, "grid or coord")
        ->check(CLI::IsMember({"grid", "coord"}))
        ->capture_default_str();
    opt->add_option("--max-rounds", o.max_rounds, "Sweep limit for coord")->capture_default_str();
    opt->add_option("--threshold", o.threshold, "Binarization threshold")->capture_default_str();
    opt->add_option("--out", o.out_file, "Output CSV with branch_id,weight")->required();

    auto* ev = app->add_subcommand("eval", "Per-label and macro F1 of predictions against labels");
    ev->add_option("--pred", o.pred, "Prediction CSV (scores or 0/1 labels)")->required();
    ev->add_option("--labels", o.labels, "Truth label CSV")->required()->expected(1);
    ev->add_option("--threshold", o.threshold, "Binarization threshold for score inputs")->capture_default_str();

    auto* blocks = app->add_subcommand("blocks", "Attention and convolution block checks");
    blocks->require_subcommand(1);
    auto* sc = blocks->add_subcommand("selfcheck", "Run the block equivalence and invariant checks");
    sc->add_option("--seed", o.seed, "Weight and input seed")->capture_default_str();
    sc->add_option("--size", o.size, "Feature map height and width (even)")->capture_default_str();
    sc->add_option("--weights", o.weights, "Flat little-endian float64 attention weights (4 x 4 x 4 values)");

    auto* fx = app->add_subcommand("fixture", "Check the shipped five-branch weight fixture against golden outputs");
    fx->add_option("--dir", o.fixture_dir, "Fixture directory")->default_str(OCTENS_FIXTURE_DIR);
    return app;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    auto app = make_app(o);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app->parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app->help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app->help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        // help for a subcommand surfaces as CallForHelp from that subcommand
        err << e.what() << "\n";
        return kInvalid;
    }

    try {
        auto used = [&](const char* name) { return app->got_subcommand(name); };
        if (used("preprocess")) return cmd_preprocess(o, out, err);
        if (used("augment")) return cmd_augment(o, out, err);
        if (used("split")) return cmd_split(o, out, err);
        if (used("combine")) return cmd_combine(o, out, err);
        if (used("optimize")) return cmd_optimize(o, out, err);
        if (used("eval")) return cmd_eval(o, out, err);
        if (used("blocks")) return cmd_selfcheck(o, out, err);
        if (used("fixture")) return cmd_fixture(o, out, err);
    } catch (const Failure& f) {
        err << "error: " << f.what() << "\n";
        return f.code;
    }
    return kInvalid;
}

}  // namespace octens::cli
