#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace octens::cli {

enum ExitCode { kOk = 0, kInvalid = 1, kIoError = 2 };

struct Options {
    std::string in_dir, out_dir, out_file;
    double alpha = 1.15;
    double beta = -15.0;
    int bg_threshold = 240;
    std::string spec_file;
    std::uint64_t seed = 0;
    std::string manifest;
    double val_frac = 0.2;
    std::vector<std::string> scores;  // comma lists, one per validation set
    std::vector<std::string> labels;
    std::string weights;
    std::string pred, pred_out;
    double step = 0.05;
    std::string method = "grid";
    int max_rounds = 50;
    double threshold = 0.5;
    int size = 4;
    std::string fixture_dir;
};

// Builds the full command tree bound to `opts`. Exposed so tests can check the
// registered flags against the help output.
std::unique_ptr<CLI::App> make_app(Options& opts);

// argv-style entry point; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace octens::cli
