#include <doctest.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "octens/image.hpp"

namespace fs = std::filesystem;
using octens::cli::run;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("octens_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kHeader = "sample_id,IRHRF,PAVF,FAVF,IRF,DRT_ME,VD\n";

// truth, its complement, and the matching labels
void write_pair(const fs::path& dir) {
    write(dir / "truth.csv", kHeader + "a,1,0,1,0,1,0\nb,0,1,0,1,0,1\nc,1,1,0,0,1,1\n");
    write(dir / "good.csv", kHeader + "a,0.9,0.1,0.9,0.1,0.9,0.1\nb,0.1,0.9,0.1,0.9,0.1,0.9\nc,0.9,0.9,0.1,0.1,0.9,0.9\n");
    write(dir / "bad.csv", kHeader + "a,0.1,0.9,0.1,0.9,0.1,0.9\nb,0.9,0.1,0.9,0.1,0.9,0.1\nc,0.1,0.1,0.9,0.9,0.1,0.1\n");
}

}  // namespace

TEST_CASE("every registered flag appears in its help text") {
    octens::cli::Options o;
    auto app = octens::cli::make_app(o);
    std::vector<CLI::App*> stack{app.get()};
    int checked = 0;
    while (!stack.empty()) {
        CLI::App* a = stack.back();
        stack.pop_back();
        const std::string help = a->help();
        for (const CLI::Option* opt : a->get_options()) {
            for (const auto& name : opt->get_lnames()) {
                INFO(a->get_name() << " --" << name);
                CHECK(help.find("--" + name) != std::string::npos);
                ++checked;
            }
        }
        for (CLI::App* sub : a->get_subcommands({})) stack.push_back(sub);
    }
    CHECK(checked > 30);
    for (const char* sub : {"preprocess", "augment", "split", "combine", "optimize", "eval", "blocks", "fixture"})
        CHECK(app->help().find(sub) != std::string::npos);
}

TEST_CASE("help and usage errors") {
    CHECK(invoke({"--help"}).code == 0);
    const auto sub = invoke({"optimize", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--step") != std::string::npos);
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"split", "--manifest", "m.csv"}).code == 1);
    CHECK(invoke({"optimize", "--scores", "a.csv", "--labels", "b.csv", "--out", "w.csv", "--method", "nope"}).code == 1);
}

TEST_CASE("eval: perfect predictions give macro 1") {
    const auto dir = temp_dir("eval");
    write_pair(dir);
    const auto r = invoke({"eval", "--pred", (dir / "truth.csv").string(), "--labels", (dir / "truth.csv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("macro,1.000000\n") != std::string::npos);
    CHECK(r.out.find("IRHRF,1.000000\n") == 0);
    const auto bad = invoke({"eval", "--pred", (dir / "bad.csv").string(), "--labels", (dir / "truth.csv").string()});
    CHECK(bad.out.find("macro,0.000000\n") != std::string::npos);
    CHECK(invoke({"eval", "--pred", (dir / "missing.csv").string(), "--labels", (dir / "truth.csv").string()}).code == 2);
    write(dir / "broken.csv", kHeader + "a,0.5\n");
    const auto fmt = invoke({"eval", "--pred", (dir / "broken.csv").string(), "--labels", (dir / "truth.csv").string()});
    CHECK(fmt.code == 1);
    CHECK(fmt.err.find("broken.csv:2") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("optimize and combine on the truth/complement pair") {
    const auto dir = temp_dir("opt");
    write_pair(dir);
    const std::string scores = (dir / "good.csv").string() + "," + (dir / "bad.csv").string();
    const auto w = (dir / "w.csv").string();
    auto r = invoke({"optimize", "--scores", scores, "--labels", (dir / "truth.csv").string(), "--out", w});
    CHECK(r.code == 0);
    CHECK(r.out == "objective,1.000000\n");
    CHECK(slurp(w) == "branch_id,weight\ngood,0.550000\nbad,0.450000\n");

    r = invoke({"optimize", "--scores", scores, "--labels", (dir / "truth.csv").string(), "--scores", scores,
                "--labels", (dir / "truth.csv").string(), "--method", "coord", "--out", w});
    CHECK(r.code == 0);
    CHECK(r.out == "objective,1.000000\n");
    CHECK(invoke({"optimize", "--scores", scores, "--labels", (dir / "truth.csv").string(), "--step", "0.3", "--out", w})
              .code == 1);
    CHECK(invoke({"optimize", "--scores", scores, "--scores", scores, "--labels", (dir / "truth.csv").string(), "--out", w})
              .code == 1);

    const auto out = (dir / "combined.csv").string();
    const auto pred = (dir / "pred.csv").string();
    r = invoke({"combine", "--scores", scores, "--weights", w, "--out", out, "--pred-out", pred});
    CHECK(r.code == 0);
    // 0.55 * 0.9 + 0.45 * 0.1 = 0.54
    CHECK(slurp(out) == kHeader + "a,0.540000,0.460000,0.540000,0.460000,0.540000,0.460000\n"
                                  "b,0.460000,0.540000,0.460000,0.540000,0.460000,0.540000\n"
                                  "c,0.540000,0.540000,0.460000,0.460000,0.540000,0.540000\n");
    CHECK(slurp(pred) == slurp(dir / "truth.csv"));
    write(dir / "w2.csv", "branch_id,weight\nbad,1\nother,1\n");
    CHECK(invoke({"combine", "--scores", scores, "--weights", (dir / "w2.csv").string(), "--out", out}).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("split writes one row per manifest entry") {
    const auto dir = temp_dir("split");
    write(dir / "m.csv", "sample_id,eye_id\ns1,e1\ns2,e1\ns3,e2\ns4,e3\ns5,e3\ns6,e4\ns7,e5\n");
    const auto out = (dir / "split.csv").string();
    const auto r = invoke({"split", "--manifest", (dir / "m.csv").string(), "--val-frac", "0.3", "--seed", "4", "--out", out});
    CHECK(r.code == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("sample_id,split\ns1,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 8);
    // s1 and s2 share an eye
    const auto side = [&](const std::string& id) { return text.substr(text.find(id + ",") + id.size() + 1, 3); };
    CHECK(side("s1") == side("s2"));
    CHECK(invoke({"split", "--manifest", (dir / "m.csv").string(), "--val-frac", "1.2", "--seed", "4", "--out", out}).code == 1);
    CHECK(invoke({"split", "--manifest", (dir / "none.csv").string(), "--val-frac", "0.2", "--seed", "4", "--out", out}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("preprocess and augment on a directory of PNGs") {
    const auto dir = temp_dir("img");
    fs::create_directories(dir / "in");
    octens::ImageGray img(16, 12, 250);
    for (int y = 3; y < 9; ++y)
        for (int x = 4; x < 12; ++x) img.at(x, y) = static_cast<std::uint8_t>(20 * (x + y) % 200);
    octens::write_png(img, (dir / "in" / "b.png").string());
    octens::write_png(octens::horizontal_flip(img), (dir / "in" / "a.png").string());

    auto r = invoke({"preprocess", "--in", (dir / "in").string(), "--out", (dir / "pre").string()});
    CHECK(r.code == 0);
    const auto pre = octens::read_png((dir / "pre" / "b.png").string());
    CHECK(pre == octens::preprocess(img, {}, 240));
    r = invoke({"preprocess", "--in", (dir / "in").string(), "--out", (dir / "pre2").string(), "--alpha", "1", "--beta",
                "0", "--bg-threshold", "255"});
    CHECK(octens::read_png((dir / "pre2" / "b.png").string()) == img);

    write(dir / "spec.txt", "crop_fraction = 0.75\nblur_sigma_range = 0.5, 1.0\n");
    for (const char* run_dir : {"aug1", "aug2"}) {
        r = invoke({"augment", "--in", (dir / "in").string(), "--out", (dir / run_dir).string(), "--spec",
                    (dir / "spec.txt").string(), "--seed", "42"});
        CHECK(r.code == 0);
    }
    for (const char* name : {"a.png", "b.png"}) {
        const auto x = octens::read_png((dir / "aug1" / name).string());
        CHECK(x == octens::read_png((dir / "aug2" / name).string()));
        CHECK(x.width() == 12);
        CHECK(x.height() == 9);
    }
    CHECK(invoke({"augment", "--in", (dir / "nowhere").string(), "--out", (dir / "x").string(), "--spec",
                  (dir / "spec.txt").string(), "--seed", "1"}).code == 2);
    write(dir / "bad_spec.txt", "crop_fraction = 2\n");
    CHECK(invoke({"augment", "--in", (dir / "in").string(), "--out", (dir / "x").string(), "--spec",
                  (dir / "bad_spec.txt").string(), "--seed", "1"}).code == 1);
    CHECK(invoke({"preprocess", "--in", (dir / "in").string(), "--out", (dir / "x").string(), "--alpha", "-1"}).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("blocks selfcheck and fixture") {
    auto r = invoke({"blocks", "selfcheck", "--seed", "7", "--size", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS block_full_window_equals_dense") != std::string::npos);
    CHECK(invoke({"blocks", "selfcheck", "--size", "5"}).code == 1);
    CHECK(invoke({"blocks"}).code == 1);

    r = invoke({"fixture"});
    CHECK(r.code == 0);
    CHECK(r.out.find("fixture passed") != std::string::npos);

    const auto dir = temp_dir("fixture");
    for (const auto& e : fs::directory_iterator(OCTENS_FIXTURE_DIR)) fs::copy(e.path(), dir / e.path().filename());
    std::string golden = slurp(dir / "golden_pred.csv");
    golden[golden.size() - 2] = golden[golden.size() - 2] == '0' ? '1' : '0';
    write(dir / "golden_pred.csv", golden);
    r = invoke({"fixture", "--dir", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL pred_matches_golden") != std::string::npos);
    CHECK(invoke({"fixture", "--dir", (dir / "nope").string()}).code == 2);
    fs::remove_all(dir);
}
