#include "octens/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "octens/error.hpp"
#include "octens/rng.hpp"

namespace octens::blocks {

namespace {

Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform() - 0.5;
    return m;
}

double relu(double v) { return v > 0.0 ? v : 0.0; }
double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_divides(int part, int whole, const char* what) {
    require(part >= 1 && whole % part == 0,
            std::string(what) + " (" + std::to_string(part) + ") must divide " + std::to_string(whole));
}

// Gathers the listed token rows into a small map, attends, scatters back.
void attend_group(const FeatureMap& x, const AttentionParams& p, std::span<const int> rows, int gh, int gw,
                  FeatureMap& out) {
    Matrix tokens(static_cast<Eigen::Index>(rows.size()), x.channels());
    for (std::size_t i = 0; i < rows.size(); ++i) tokens.row(static_cast<Eigen::Index>(i)) = x.tokens().row(rows[i]);
    const FeatureMap y = dense_attention(FeatureMap(gh, gw, std::move(tokens)), p);
    for (std::size_t i = 0; i < rows.size(); ++i) out.tokens().row(rows[i]) = y.tokens().row(static_cast<Eigen::Index>(i));
}

Matrix conv3x3(const FeatureMap& x, const std::vector<Matrix>& taps, int out_channels) {
    Matrix out = Matrix::Zero(x.tokens().rows(), out_channels);
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sy = y + dy, sx = xx + dx;
                    if (sy < 0 || sx < 0 || sy >= x.height() || sx >= x.width()) continue;
                    out.row(y * x.width() + xx) += x.token(sy, sx) * taps[(dy + 1) * 3 + (dx + 1)];
                }
    return out;
}

Matrix depthwise3x3(const FeatureMap& x, const Matrix& kernel) {
    Matrix out = Matrix::Zero(x.tokens().rows(), x.channels());
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sy = y + dy, sx = xx + dx;
                    if (sy < 0 || sx < 0 || sy >= x.height() || sx >= x.width()) continue;
                    out.row(y * x.width() + xx) +=
                        x.token(sy, sx).cwiseProduct(kernel.row((dy + 1) * 3 + (dx + 1)));
                }
    return out;
}

void check_conv_params(const FeatureMap& x, const ConvBlockParams& p) {
    require(p.expansion >= 1 && p.reduction >= 1, "expansion and reduction ratios must be >= 1");
    require(x.channels() == p.channels_in, "input has " + std::to_string(x.channels()) + " channels, block expects " +
                                               std::to_string(p.channels_in));
    require(p.channels_out == p.channels_in, "residual connection needs channels_out == channels_in");
    require(x.height() >= 3 && x.width() >= 3, "spatial size must be at least the 3x3 kernel");
}

FeatureMap finish_block(const FeatureMap& x, const FeatureMap& expanded, const ConvBlockParams& p) {
    const FeatureMap gated = se_block(expanded, p.se);
    Matrix out = x.tokens() + gated.tokens() * p.project;
    return FeatureMap(x.height(), x.width(), std::move(out));
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int channels)
    : FeatureMap(height, width, Matrix::Zero(std::max(height, 0) * std::max(width, 0), std::max(channels, 1))) {
    require(channels >= 1, "channels must be >= 1");
}

FeatureMap::FeatureMap(int height, int width, Matrix tokens) : height_(height), width_(width), tokens_(std::move(tokens)) {
    require(height >= 1 && width >= 1, "feature map dimensions must be >= 1");
    require(tokens_.rows() == static_cast<Eigen::Index>(height) * width, "token count does not match height x width");
    require(tokens_.cols() >= 1, "channels must be >= 1");
    require(tokens_.allFinite(), "feature map values must be finite");
}

FeatureMap FeatureMap::random(int height, int width, int channels, std::uint64_t seed) {
    Rng rng(seed);
    return FeatureMap(height, width, uniform_matrix(rng, static_cast<Eigen::Index>(height) * width, channels));
}

AttentionParams AttentionParams::seeded(int channels, int heads, int window, int grid, std::uint64_t seed) {
    Rng rng(seed);
    AttentionParams p{channels, heads, window, grid, {}, {}, {}, {}};
    p.query = uniform_matrix(rng, channels, channels);
    p.key = uniform_matrix(rng, channels, channels);
    p.value = uniform_matrix(rng, channels, channels);
    p.output = uniform_matrix(rng, channels, channels);
    p.validate();
    return p;
}

AttentionParams AttentionParams::from_values(int channels, int heads, int window, int grid,
                                             std::span<const double> values) {
    require(channels >= 1, "channels must be >= 1");
    const std::size_t cc = static_cast<std::size_t>(channels) * channels;
    require(values.size() == 4 * cc, "attention weights need " + std::to_string(4 * cc) + " values, got " +
                                         std::to_string(values.size()));
    auto take = [&](std::size_t k) {
        Matrix m(channels, channels);
        for (int r = 0; r < channels; ++r)
            for (int c = 0; c < channels; ++c) m(r, c) = values[k * cc + static_cast<std::size_t>(r) * channels + c];
        return m;
    };
    AttentionParams p{channels, heads, window, grid, take(0), take(1), take(2), take(3)};
    p.validate();
    return p;
}

void AttentionParams::validate() const {
    require(channels >= 1, "channels must be >= 1");
    require(heads >= 1 && channels % heads == 0, "heads must divide channels");
    require(window >= 1 && grid >= 1, "window and grid sizes must be >= 1");
    for (const Matrix* m : {&query, &key, &value, &output})
        require(m->rows() == channels && m->cols() == channels, "projection matrices must be C x C");
}

std::vector<Matrix> attention_maps(const FeatureMap& x, const AttentionParams& p) {
    p.validate();
    require(x.channels() == p.channels, "input channels do not match attention params");
    const int d = p.channels / p.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const Matrix q = x.tokens() * p.query;
    const Matrix k = x.tokens() * p.key;
    std::vector<Matrix> maps;
    for (int h = 0; h < p.heads; ++h) {
        Matrix s = (q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose()) * scale;
        for (Eigen::Index r = 0; r < s.rows(); ++r) {
            const double mx = s.row(r).maxCoeff();
            s.row(r) = (s.row(r).array() - mx).exp().matrix();
            s.row(r) /= s.row(r).sum();
        }
        maps.push_back(std::move(s));
    }
    return maps;
}

FeatureMap dense_attention(const FeatureMap& x, const AttentionParams& p) {
    const auto maps = attention_maps(x, p);
    const int d = p.channels / p.heads;
    const Matrix v = x.tokens() * p.value;
    Matrix heads(v.rows(), v.cols());
    for (int h = 0; h < p.heads; ++h) heads.middleCols(h * d, d) = maps[h] * v.middleCols(h * d, d);
    return FeatureMap(x.height(), x.width(), heads * p.output);
}

FeatureMap block_attention(const FeatureMap& x, const AttentionParams& p) {
    p.validate();
    check_divides(p.window, x.height(), "window size");
    check_divides(p.window, x.width(), "window size");
    FeatureMap out(x.height(), x.width(), x.channels());
    std::vector<int> rows(static_cast<std::size_t>(p.window) * p.window);
    for (int wy = 0; wy < x.height(); wy += p.window)
        for (int wx = 0; wx < x.width(); wx += p.window) {
            std::size_t i = 0;
            for (int dy = 0; dy < p.window; ++dy)
                for (int dx = 0; dx < p.window; ++dx) rows[i++] = (wy + dy) * x.width() + (wx + dx);
            attend_group(x, p, rows, p.window, p.window, out);
        }
    return out;
}

FeatureMap grid_attention(const FeatureMap& x, const AttentionParams& p) {
    p.validate();
    check_divides(p.grid, x.height(), "grid size");
    check_divides(p.grid, x.width(), "grid size");
    const int sy = x.height() / p.grid, sx = x.width() / p.grid;
    FeatureMap out(x.height(), x.width(), x.channels());
    std::vector<int> rows(static_cast<std::size_t>(p.grid) * p.grid);
    for (int ry = 0; ry < sy; ++ry)
        for (int rx = 0; rx < sx; ++rx) {
            std::size_t i = 0;
            for (int a = 0; a < p.grid; ++a)
                for (int b = 0; b < p.grid; ++b) rows[i++] = (ry + a * sy) * x.width() + (rx + b * sx);
            attend_group(x, p, rows, p.grid, p.grid, out);
        }
    return out;
}

FeatureMap max_sa(const FeatureMap& x, const AttentionParams& p) { return grid_attention(block_attention(x, p), p); }

std::uint64_t attention_op_count(int height, int width, int channels, int heads, AttentionVariant variant, int window,
                                 int grid) {
    require(height >= 1 && width >= 1 && channels >= 1, "dimensions must be >= 1");
    require(heads >= 1 && channels % heads == 0, "heads must divide channels");
    const std::uint64_t n = static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
    const std::uint64_t c = static_cast<std::uint64_t>(channels);
    if (variant == AttentionVariant::Dense) return 2 * n * n * c;
    check_divides(window, height, "window size");
    check_divides(window, width, "window size");
    check_divides(grid, height, "grid size");
    check_divides(grid, width, "grid size");
    const std::uint64_t p2 = static_cast<std::uint64_t>(window) * window;
    const std::uint64_t g2 = static_cast<std::uint64_t>(grid) * grid;
    return 2 * n * p2 * c + 2 * n * g2 * c;
}

FeatureMap se_block(const FeatureMap& x, const SeParams& p) {
    require(p.reduction >= 1 && p.channels % p.reduction == 0, "SE reduction must divide channels");
    require(x.channels() == p.channels, "input channels do not match SE params");
    const int hidden = p.channels / p.reduction;
    require(p.reduce.rows() == p.channels && p.reduce.cols() == hidden, "SE reduce matrix must be C x C/r");
    require(p.expand.rows() == hidden && p.expand.cols() == p.channels, "SE expand matrix must be C/r x C");

    const Eigen::RowVectorXd pooled = x.tokens().colwise().mean();
    const Eigen::RowVectorXd squeezed = (pooled * p.reduce).unaryExpr(&relu);
    const Eigen::RowVectorXd gate = (squeezed * p.expand).unaryExpr(&logistic);
    Matrix out = x.tokens();
    out.array().rowwise() *= gate.array();
    return FeatureMap(x.height(), x.width(), std::move(out));
}

ConvBlockParams ConvBlockParams::zeros(int channels_in, int channels_out, int expansion, int reduction) {
    require(channels_in >= 1 && channels_out >= 1, "channels must be >= 1");
    require(expansion >= 1 && reduction >= 1, "expansion and reduction ratios must be >= 1");
    ConvBlockParams p;
    p.channels_in = channels_in;
    p.channels_out = channels_out;
    p.expansion = expansion;
    p.reduction = reduction;
    const int ce = p.expanded();
    require(ce % reduction == 0, "SE reduction must divide the expanded channel count");
    p.expand_pointwise = Matrix::Zero(channels_in, ce);
    p.expand_full.assign(9, Matrix::Zero(channels_in, ce));
    p.depthwise = Matrix::Zero(9, ce);
    p.se = {ce, reduction, Matrix::Zero(ce, ce / reduction), Matrix::Zero(ce / reduction, ce)};
    p.project = Matrix::Zero(ce, channels_out);
    return p;
}

ConvBlockParams ConvBlockParams::seeded(int channels_in, int channels_out, int expansion, int reduction,
                                        std::uint64_t seed) {
    ConvBlockParams p = zeros(channels_in, channels_out, expansion, reduction);
    Rng rng(seed);
    const int ce = p.expanded();
    p.expand_pointwise = uniform_matrix(rng, channels_in, ce);
    for (auto& tap : p.expand_full) tap = uniform_matrix(rng, channels_in, ce);
    p.depthwise = uniform_matrix(rng, 9, ce);
    p.se.reduce = uniform_matrix(rng, ce, ce / reduction);
    p.se.expand = uniform_matrix(rng, ce / reduction, ce);
    p.project = uniform_matrix(rng, ce, channels_out);
    return p;
}

FeatureMap mbconv(const FeatureMap& x, const ConvBlockParams& p) {
    check_conv_params(x, p);
    const FeatureMap expanded(x.height(), x.width(), (x.tokens() * p.expand_pointwise).unaryExpr(&relu));
    const FeatureMap spatial(x.height(), x.width(), depthwise3x3(expanded, p.depthwise).unaryExpr(&relu));
    return finish_block(x, spatial, p);
}

FeatureMap fused_mbconv(const FeatureMap& x, const ConvBlockParams& p) {
    check_conv_params(x, p);
    const FeatureMap expanded(x.height(), x.width(), conv3x3(x, p.expand_full, p.expanded()).unaryExpr(&relu));
    return finish_block(x, expanded, p);
}

std::vector<double> read_f64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) fail(ErrorKind::Format, path + ": size is not a multiple of 8 bytes");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
        std::memcpy(&out[i], &bits, sizeof bits);
    }
    return out;
}

void write_f64_file(std::span<const double> values, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

double max_relative_error(const Matrix& got, const Matrix& want) {
    require(got.rows() == want.rows() && got.cols() == want.cols(), "shape mismatch");
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace octens::blocks
