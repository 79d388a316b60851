// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "octens/blocks.hpp"
#include "octens/data.hpp"
#include "octens/ensemble.hpp"
#include "octens/image.hpp"
#include "octens/metrics.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace octens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
    void fail(const std::string& why) {
        if (passed) detail = why;
        passed = false;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Decimal string to an integer count of 1e-6 units; no floating point.
bool parse_micro(const std::string& s, long long& out) {
    const auto dot = s.find('.');
    const std::string whole = s.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (whole.empty() || frac.size() > 6) return false;
    frac.resize(6, '0');
    for (char c : whole + frac)
        if (c < '0' || c > '9') return false;
    out = std::stoll(whole) * 1'000'000 + std::stoll(frac);
    return true;
}

Outcome criterion1() {
    Outcome o;
    const auto t0 = Clock::now();
    const fs::path dir = OCTENS_FIXTURE_DIR;
    std::ifstream in(dir / "weights.csv");
    std::string line;
    std::getline(in, line);
    if (line != "branch_id,weight") o.fail("bad weights.csv header");
    const std::vector<std::pair<std::string, long long>> table{{"effv2m_trex_prime", 100000},
                                                               {"maxvit_trex_prime", 450000},
                                                               {"effv2m_trex", 100000},
                                                               {"maxvit_trex", 250000},
                                                               {"effv2m_prime", 100000}};
    std::size_t row = 0;
    long long sum = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        long long micro = 0;
        if (comma == std::string::npos || !parse_micro(line.substr(comma + 1), micro)) {
            o.fail("unparseable weight row: " + line);
            break;
        }
        if (row >= table.size() || line.substr(0, comma) != table[row].first || micro != table[row].second)
            o.fail("row " + std::to_string(row + 1) + " differs from the reported table");
        sum += micro;
        ++row;
    }
    if (row != table.size()) o.fail("expected 5 weight rows");
    if (sum != 1'000'000) o.fail("weights do not sum to exactly 1");

    std::ostringstream out, err;
    const int code = cli::run({"fixture", "--dir", dir.string()}, out, err);
    if (code != 0) o.fail("octens fixture exited " + std::to_string(code) + ": " + err.str());
    if (out.str().find("FAIL") != std::string::npos) o.fail("fixture reported a failed check");
    if (out.str().find("PASS combined_matches_golden (byte-identical)") == std::string::npos ||
        out.str().find("PASS pred_matches_golden (byte-identical)") == std::string::npos)
        o.fail("golden outputs not byte-identical");
    const double secs = seconds_since(t0);
    if (secs >= 1.0) o.fail("runtime " + fmt("%.3f", secs) + " s");
    if (o.passed) o.detail = "table matches, exact sum 1, golden byte-identical, " + fmt("%.3f", secs) + " s";
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 gen(20240601);
    const int instances = 50;
    std::size_t lattice_checked = 0;
    for (int t = 0; t < instances && o.passed; ++t) {
        const auto inst = synth::random_instance(gen, 5, 200);
        const std::vector<ValidationSet> sets{synth::to_validation_set(inst)};
        SearchConfig cfg;
        cfg.step = 0.05;
        const SearchResult grid = optimize_weights(sets, cfg);
        for (const auto& units : oracle::compositions(inst.branches, 20)) {
            ++lattice_checked;
            const double obj = synth::objective(inst, units);
            if (grid.objective < obj - 1e-12) {
                o.fail("instance " + std::to_string(t) + ": lattice point beats grid result");
                break;
            }
        }
        cfg.method = SearchMethod::CoordinateAscent;
        const SearchResult coord = optimize_weights(sets, cfg);
        const double uniform = synth::objective(inst, std::vector<int>(static_cast<std::size_t>(inst.branches), 1));
        if (coord.objective < uniform - 1e-12) o.fail("instance " + std::to_string(t) + ": coordinate ascent below uniform");
    }
    const double secs = seconds_since(t0);
    if (secs >= 60.0) o.fail("runtime " + fmt("%.1f", secs) + " s");
    if (o.passed)
        o.detail = std::to_string(instances) + " instances, " + std::to_string(lattice_checked) +
                   " lattice points checked, " + fmt("%.1f", secs) + " s";
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::mt19937_64 gen(3);
    for (int t = 0; t < 1000 && o.passed; ++t) {
        const int n = 1 + static_cast<int>(gen() % 20);
        std::vector<std::string> ids;
        std::vector<LabelRow> p, q;
        std::vector<std::vector<int>> pi, qi;
        for (int i = 0; i < n; ++i) {
            ids.push_back("s" + std::to_string(i));
            LabelRow a{}, b{};
            std::vector<int> ai, bi;
            for (std::size_t j = 0; j < kNumLabels; ++j) {
                a[j] = static_cast<std::uint8_t>(gen() & 1);
                b[j] = static_cast<std::uint8_t>(gen() & 1);
                ai.push_back(a[j]);
                bi.push_back(b[j]);
            }
            p.push_back(a);
            q.push_back(b);
            pi.push_back(ai);
            qi.push_back(bi);
        }
        const MetricReport r = evaluate(LabelMatrix(ids, p), LabelMatrix(ids, q));
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            std::vector<int> pc, qc;
            for (int i = 0; i < n; ++i) {
                pc.push_back(pi[i][j]);
                qc.push_back(qi[i][j]);
            }
            const auto c = oracle::count(pc, qc);
            const auto& got = r.counts[j];
            if (got.tp != static_cast<std::size_t>(c.tp) || got.fp != static_cast<std::size_t>(c.fp) ||
                got.fn != static_cast<std::size_t>(c.fn) || got.tn != static_cast<std::size_t>(c.tn) ||
                r.per_label_f1[j] != oracle::f1(c))
                o.fail("instance " + std::to_string(t) + " label " + std::to_string(j) + " differs");
        }
        if (r.macro_f1 != oracle::macro_f1(pi, qi)) o.fail("instance " + std::to_string(t) + ": macro F1 differs");
    }
    const std::vector<std::uint8_t> pa{1, 1, 0, 0}, ta{1, 0, 0, 0}, pb{1, 1, 0, 0}, tb{1, 1, 1, 0};
    const std::vector<double> f1{f1_from_counts(count_confusion(pa, ta)), f1_from_counts(count_confusion(pb, tb))};
    const double macro = macro_average(f1);
    if (std::abs(macro - 11.0 / 15.0) > 1e-12) o.fail("11/15 example gives " + fmt("%.15f", macro));
    if (o.passed) o.detail = "1000 instances exact, 11/15 example error " + fmt("%.1e", std::abs(macro - 11.0 / 15.0));
    return o;
}

Outcome criterion4() {
    Outcome o;
    std::mt19937_64 gen(4);
    double worst_slack = 1.0;
    for (int t = 0; t < 1000 && o.passed; ++t) {
        const int eyes = 2 + static_cast<int>(gen() % 40);
        std::vector<ManifestEntry> entries;
        std::map<std::string, int> eye_size;
        int sid = 0;
        for (int e = 0; e < eyes; ++e) {
            const int count = 1 + static_cast<int>(gen() % 15);
            const std::string eye = "eye" + std::to_string(e);
            for (int i = 0; i < count; ++i) entries.push_back({"slice" + std::to_string(sid++), eye});
            eye_size[eye] = count;
        }
        std::shuffle(entries.begin(), entries.end(), gen);
        const double frac = std::uniform_real_distribution<double>(0.01, 0.99)(gen);
        const auto split = eyewise_split(SampleManifest(entries), frac, gen());

        std::map<std::string, std::string> eye_of;
        for (const auto& e : entries) eye_of[e.sample_id] = e.eye_id;
        std::set<std::string> train, val;
        for (const auto& id : split.train_ids) train.insert(eye_of.at(id));
        for (const auto& id : split.val_ids) val.insert(eye_of.at(id));
        for (const auto& e : val)
            if (train.contains(e)) o.fail("trial " + std::to_string(t) + ": eye " + e + " on both sides");
        if (split.train_ids.size() + split.val_ids.size() != entries.size()) o.fail("samples lost");

        int max_eye = 0;
        for (const auto& [e, n] : eye_size) max_eye = std::max(max_eye, n);
        const double total = static_cast<double>(entries.size());
        const double achieved = static_cast<double>(split.val_ids.size()) / total;
        const double bound = max_eye / total;
        if (std::abs(achieved - frac) > bound + 1e-12) o.fail("trial " + std::to_string(t) + ": fraction off target");
        worst_slack = std::min(worst_slack, bound - std::abs(achieved - frac));
    }
    if (o.passed) o.detail = "1000 pairs, no eye overlap, minimum slack to bound " + fmt("%.4f", worst_slack);
    return o;
}

Outcome criterion5() {
    using namespace octens::blocks;
    Outcome o;
    std::mt19937_64 gen(5);
    double worst = 0.0, worst_row = 0.0;
    const int sizes[] = {1, 2, 4, 6, 8};
    const int channels[] = {4, 8, 16};
    for (int t = 0; t < 100 && o.passed; ++t) {
        const int s = sizes[gen() % 5];
        const int c = channels[gen() % 3];
        const int heads = 1 << (gen() % 3);  // 1, 2 or 4; all divide 4, 8, 16
        const FeatureMap x = FeatureMap::random(s, s, c, gen());
        const AttentionParams p = AttentionParams::seeded(c, heads, s, s, gen());
        const Matrix dense = dense_attention(x, p).tokens();
        const double eb = max_relative_error(block_attention(x, p).tokens(), dense);
        const double eg = max_relative_error(grid_attention(x, p).tokens(), dense);
        worst = std::max({worst, eb, eg});
        if (eb > 1e-9 || eg > 1e-9) o.fail("input " + std::to_string(t) + ": relative error " + fmt("%.2e", std::max(eb, eg)));
        for (const Matrix& m : attention_maps(x, p))
            for (Eigen::Index r = 0; r < m.rows(); ++r) worst_row = std::max(worst_row, std::abs(m.row(r).sum() - 1.0));
        if (worst_row > 1e-12) o.fail("softmax row sum off by " + fmt("%.2e", worst_row));
    }
    if (o.passed)
        o.detail = "100 inputs, max relative error " + fmt("%.2e", worst) + ", max row-sum error " + fmt("%.2e", worst_row);
    return o;
}

Outcome criterion6() {
    using namespace octens::blocks;
    Outcome o;
    struct Case {
        int h, w, c, p, g;
    };
    for (const Case k : {Case{8, 8, 16, 2, 2}, Case{4, 4, 8, 2, 2}, Case{16, 16, 32, 4, 4}, Case{8, 16, 4, 4, 2}}) {
        const double d1 = static_cast<double>(attention_op_count(k.h, k.w, k.c, 1, AttentionVariant::Dense, k.p, k.g));
        const double d2 = static_cast<double>(attention_op_count(k.h, 2 * k.w, k.c, 1, AttentionVariant::Dense, k.p, k.g));
        const double m1 = static_cast<double>(attention_op_count(k.h, k.w, k.c, 1, AttentionVariant::MaxSa, k.p, k.g));
        const double m2 = static_cast<double>(attention_op_count(k.h, 2 * k.w, k.c, 1, AttentionVariant::MaxSa, k.p, k.g));
        if (d2 / d1 != 4.0) o.fail("dense ratio " + fmt("%.6f", d2 / d1));
        if (m2 / m1 != 2.0) o.fail("max_sa ratio " + fmt("%.6f", m2 / m1));
    }
    if (o.passed) o.detail = "dense ratio 4.0, max_sa ratio 2.0 on 4 configurations";
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 gen(7);
    auto random_image = [&](int w, int h) {
        std::vector<std::uint8_t> v(static_cast<std::size_t>(w * h));
        for (auto& p : v) p = gen() % 3 ? static_cast<std::uint8_t>(235 + gen() % 21) : static_cast<std::uint8_t>(gen() % 256);
        return ImageGray(w, h, v);
    };
    for (int t = 0; t < 20; ++t) {
        const ImageGray img = random_image(1 + static_cast<int>(gen() % 40), 1 + static_cast<int>(gen() % 40));
        if (!(linear_transform(img, {1.0, 0.0}) == img)) o.fail("identity transform changed pixels");
    }
    const ImageGray px(1, 1, std::vector<std::uint8_t>{250});
    if (linear_transform(px, {1.5, -20.0}).at(0, 0) != 255) o.fail("1.5 x 250 - 20 did not clamp to 255");

    ImageGray impulse(21, 21);
    impulse.at(10, 10) = 255;
    const ImageGray blurred = gaussian_blur(impulse, 1.0);
    const auto k = oracle::gaussian(1.0);
    const int r = static_cast<int>(k.size() / 2);
    double worst = 0.0;
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x) {
            const int dx = x - 10, dy = y - 10;
            const double want = std::abs(dx) <= r && std::abs(dy) <= r ? 255.0 * k[dx + r] * k[dy + r] : 0.0;
            worst = std::max(worst, std::abs(blurred.at(x, y) - want));
        }
    if (worst > 1.0) o.fail("impulse response off by " + fmt("%.3f", worst));

    for (int t = 0; t < 100; ++t) {
        const ImageGray img = random_image(1 + static_cast<int>(gen() % 32), 1 + static_cast<int>(gen() % 32));
        const ImageGray once = blacken_background(img, 240);
        if (!(blacken_background(once, 240) == once)) o.fail("blacken_background not idempotent");
    }
    const std::vector<std::uint8_t> fixture{255, 255, 255, 255, 255, 255, 255, 10, 255, 255, 255, 10, 255,
                                            10,  255, 255, 255, 10,  255, 255, 255, 255, 255, 255, 255};
    const std::vector<std::uint8_t> want{0, 0, 0, 0, 0, 0, 0, 10, 0, 0, 0, 10, 255, 10, 0, 0, 0, 10, 0, 0, 0, 0, 0, 0, 0};
    const ImageGray out = blacken_background(ImageGray(5, 5, fixture), 240);
    if (std::vector<std::uint8_t>(out.pixels().begin(), out.pixels().end()) != want) o.fail("5x5 fixture mismatch");
    if (o.passed) o.detail = "identity exact, clamp 255, impulse within " + fmt("%.3f", worst) + ", 100 idempotent, 5x5 exact";
    return o;
}

Outcome criterion8() {
    using namespace octens::blocks;
    Outcome o;
    double worst = 0.0;
    for (const auto& [h, w, c, e, r] : std::vector<std::array<int, 5>>{{3, 3, 1, 1, 1}, {4, 4, 4, 4, 4}, {5, 7, 8, 2, 4}, {8, 8, 16, 4, 8}}) {
        const FeatureMap x = FeatureMap::random(h, w, c, static_cast<std::uint64_t>(h * 100 + c));
        const ConvBlockParams z = ConvBlockParams::zeros(c, c, e, r);
        worst = std::max({worst, max_relative_error(mbconv(x, z).tokens(), x.tokens()),
                          max_relative_error(fused_mbconv(x, z).tokens(), x.tokens())});
    }
    if (worst > 1e-12) o.fail("residual identity error " + fmt("%.2e", worst));
    if (o.passed) o.detail = "4 shapes, max relative error " + fmt("%.1e", worst);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"reported weight fixture", criterion1},      {"ensemble search oracle", criterion2},
        {"metrics oracle", criterion3},            {"eye-wise split safety", criterion4},
        {"attention equivalence", criterion5},     {"attention op-count ratios", criterion6},
        {"image pipeline", criterion7},            {"blocks residual identity", criterion8},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::printf("%s criterion %zu: %s (%s)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.passed;
    }
    return failed == 0 ? 0 : 1;
}
