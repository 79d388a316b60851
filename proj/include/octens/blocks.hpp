#pragma once

// Forward-only, toy-scale versions of the attention and convolution blocks the
// ensemble branches are built from. Tokens are stored row-major: token
// (y, x) is row y * width + x of an (H*W) x C matrix.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "octens/check.hpp"

namespace octens::blocks {

using Matrix = Eigen::MatrixXd;

class FeatureMap {
public:
    FeatureMap(int height, int width, int channels);
    FeatureMap(int height, int width, Matrix tokens);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return static_cast<int>(tokens_.cols()); }

    const Matrix& tokens() const noexcept { return tokens_; }
    Matrix& tokens() noexcept { return tokens_; }

    double& at(int y, int x, int c) { return tokens_(y * width_ + x, c); }
    double at(int y, int x, int c) const { return tokens_(y * width_ + x, c); }
    auto token(int y, int x) const { return tokens_.row(y * width_ + x); }

    static FeatureMap random(int height, int width, int channels, std::uint64_t seed);

private:
    int height_;
    int width_;
    Matrix tokens_;
};

// Projections act on row vectors: q = x * query, etc. All are C x C.
struct AttentionParams {
    int channels = 0;
    int heads = 1;
    int window = 1;  // P
    int grid = 1;    // G
    Matrix query, key, value, output;

    // Uniform [-0.5, 0.5] draws in declaration order (query, key, value,
    // output; each row-major).
    static AttentionParams seeded(int channels, int heads, int window, int grid, std::uint64_t seed);
    // Same layout as seeded(); needs exactly 4 * C * C values.
    static AttentionParams from_values(int channels, int heads, int window, int grid, std::span<const double> values);

    void validate() const;
};

// Standard multi-head softmax attention over all tokens.
FeatureMap dense_attention(const FeatureMap& x, const AttentionParams& p);
// Row-stochastic attention maps, one N x N matrix per head.
std::vector<Matrix> attention_maps(const FeatureMap& x, const AttentionParams& p);

// Attention inside non-overlapping P x P windows.
FeatureMap block_attention(const FeatureMap& x, const AttentionParams& p);
// Attention among the G x G tokens sharing a residue class modulo (H/G, W/G).
FeatureMap grid_attention(const FeatureMap& x, const AttentionParams& p);
// Window attention followed by grid attention.
FeatureMap max_sa(const FeatureMap& x, const AttentionParams& p);

enum class AttentionVariant { Dense, MaxSa };

// Multiply-accumulates of the score and value products, projections excluded.
std::uint64_t attention_op_count(int height, int width, int channels, int heads, AttentionVariant variant, int window,
                                 int grid);

struct SeParams {
    int channels = 0;
    int reduction = 1;
    Matrix reduce;  // C x C/r
    Matrix expand;  // C/r x C
};

// Squeeze-and-excitation: pool, ReLU bottleneck, logistic gate, rescale.
FeatureMap se_block(const FeatureMap& x, const SeParams& p);

struct ConvBlockParams {
    int channels_in = 0;
    int channels_out = 0;
    int expansion = 1;
    int reduction = 1;
    Matrix expand_pointwise;            // Cin x Ce, MBConv
    std::vector<Matrix> expand_full;    // 9 taps of Cin x Ce, Fused-MBConv
    Matrix depthwise;                   // 9 x Ce
    SeParams se;                        // on Ce channels
    Matrix project;                     // Ce x Cout

    int expanded() const { return channels_in * expansion; }

    // Uniform [-0.5, 0.5] draws in declaration order.
    static ConvBlockParams seeded(int channels_in, int channels_out, int expansion, int reduction, std::uint64_t seed);
    static ConvBlockParams zeros(int channels_in, int channels_out, int expansion, int reduction);
};

// 1x1 expand, ReLU, 3x3 depthwise, ReLU, SE, 1x1 project, residual add.
FeatureMap mbconv(const FeatureMap& x, const ConvBlockParams& p);
// 3x3 full expand, ReLU, SE, 1x1 project, residual add.
FeatureMap fused_mbconv(const FeatureMap& x, const ConvBlockParams& p);

// Flat little-endian float64 file.
std::vector<double> read_f64_file(const std::string& path);
void write_f64_file(std::span<const double> values, const std::string& path);

double max_relative_error(const Matrix& got, const Matrix& want);

// Equivalence and invariant checks on a size x size map. `size` must be even
// and >= 2. Optional attention weights use the from_values layout with
// 4 channels.
std::vector<CheckOutcome> selfcheck(std::uint64_t seed, int size, const std::optional<std::vector<double>>& weights);

inline constexpr int kSelfcheckChannels = 4;
inline constexpr int kSelfcheckHeads = 2;

}  // namespace octens::blocks
