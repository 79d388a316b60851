#include "octens/image.hpp"

#include <png.h>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "octens/error.hpp"
#include "text.hpp"

namespace octens {

ImageGray::ImageGray(int width, int height, std::uint8_t fill)
    : ImageGray(width, height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                              static_cast<std::size_t>(std::max(height, 0)),
                                          fill)) {}

ImageGray::ImageGray(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    require(width >= 1 && height >= 1, "image dimensions must be >= 1");
    require(pixels_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
            "pixel count does not match width x height");
}

void AugmentSpec::validate() const {
    auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
    require(in(crop_fraction, 0.0, 1.0) && crop_fraction > 0.0, "crop_fraction must be in (0,1]");
    require(in(hflip_probability, 0.0, 1.0), "hflip_probability must be in [0,1]");
    require(std::isfinite(blur_sigma_range.first) && std::isfinite(blur_sigma_range.second) &&
                blur_sigma_range.first >= 0.0 && blur_sigma_range.first <= blur_sigma_range.second,
            "blur_sigma_range must satisfy 0 <= lo <= hi");
    require(in(perspective_distortion, 0.0, 0.5), "perspective_distortion must be in [0,0.5]");
    require(in(affine_max_rotation, 0.0, 45.0), "affine_max_rotation must be in [0,45]");
    require(in(affine_max_translate_fraction, 0.0, 0.3), "affine_max_translate_fraction must be in [0,0.3]");
    require(std::isfinite(affine_scale_range.first) && std::isfinite(affine_scale_range.second) &&
                affine_scale_range.first > 0.0 && affine_scale_range.first <= affine_scale_range.second,
            "affine_scale_range must satisfy 0 < lo <= hi");
    require(background_threshold >= 0 && background_threshold <= 255, "background_threshold must be in [0,255]");
}

std::uint8_t quantize(double v) {
    // std::round rounds half away from zero
    const double r = std::round(v);
    if (!(r > 0.0)) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

ImageGray linear_transform(const ImageGray& img, const LinearTransformParams& params) {
    require(std::isfinite(params.alpha) && params.alpha > 0.0, "alpha must be > 0");
    require(std::isfinite(params.beta), "beta must be finite");
    std::array<std::uint8_t, 256> lut{};
    for (int p = 0; p < 256; ++p) lut[p] = quantize(params.alpha * p + params.beta);
    ImageGray out = img;
    for (auto& px : out.pixels()) px = lut[px];
    return out;
}

ImageGray blacken_background(const ImageGray& img, int threshold) {
    require(threshold >= 0 && threshold <= 255, "background threshold must be in [0,255]");
    const int w = img.width(), h = img.height();
    ImageGray out = img;
    std::vector<char> seen(img.size(), 0);
    std::deque<std::pair<int, int>> queue;
    auto visit = [&](int x, int y) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (seen[i] || img.at(x, y) < threshold) return;
        seen[i] = 1;
        queue.emplace_back(x, y);
    };
    for (int x = 0; x < w; ++x) {
        visit(x, 0);
        visit(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        visit(0, y);
        visit(w - 1, y);
    }
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        out.at(x, y) = 0;
        if (x > 0) visit(x - 1, y);
        if (x + 1 < w) visit(x + 1, y);
        if (y > 0) visit(x, y - 1);
        if (y + 1 < h) visit(x, y + 1);
    }
    return out;
}

ImageGray random_crop(const ImageGray& img, double crop_fraction, Rng& rng) {
    require(std::isfinite(crop_fraction) && crop_fraction > 0.0 && crop_fraction <= 1.0,
            "crop_fraction must be in (0,1]");
    const int cw = std::max(1, static_cast<int>(std::round(crop_fraction * img.width())));
    const int ch = std::max(1, static_cast<int>(std::round(crop_fraction * img.height())));
    const int ox = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - cw + 1)));
    const int oy = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - ch + 1)));
    ImageGray out(cw, ch);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) out.at(x, y) = img.at(ox + x, oy + y);
    return out;
}

ImageGray horizontal_flip(const ImageGray& img) {
    ImageGray out = img;
    const int w = img.width();
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = img.at(w - 1 - x, y);
    return out;
}

namespace {

// Reflect without repeating the edge sample: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

double sample_bilinear(const ImageGray& img, double sx, double sy) {
    constexpr double eps = 1e-9;
    const int w = img.width(), h = img.height();
    if (!(sx >= -eps && sy >= -eps && sx <= (w - 1) + eps && sy <= (h - 1) + eps)) return 0.0;
    sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0, fy = sy - y0;
    const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
    const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
    return (1.0 - fy) * top + fy * bottom;
}

template <typename Map>
ImageGray warp(const ImageGray& img, Map&& to_source) {
    ImageGray out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const auto [sx, sy] = to_source(static_cast<double>(x), static_cast<double>(y));
            out.at(x, y) = quantize(sample_bilinear(img, sx, sy));
        }
    return out;
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
    require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be >= 0");
    if (sigma == 0.0) return {1.0};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

ImageGray gaussian_blur(const ImageGray& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    if (kernel.size() == 1) return img;
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width(), h = img.height();

    std::vector<double> rows(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img.at(reflect101(x + k, w), y);
            rows[static_cast<std::size_t>(y) * w + x] = acc;
        }

    ImageGray out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * rows[static_cast<std::size_t>(reflect101(y + k, h)) * w + x];
            out.at(x, y) = quantize(acc);
        }
    return out;
}

ImageGray random_perspective(const ImageGray& img, double distortion, Rng& rng) {
    require(std::isfinite(distortion) && distortion >= 0.0 && distortion <= 0.5,
            "perspective distortion must be in [0,0.5]");
    const double w = img.width(), h = img.height();
    const std::array<std::array<double, 2>, 4> corners{{{0, 0}, {w - 1, 0}, {w - 1, h - 1}, {0, h - 1}}};
    std::array<std::array<double, 2>, 4> moved{};
    for (std::size_t i = 0; i < 4; ++i) {
        moved[i][0] = corners[i][0] + rng.uniform(-distortion * w, distortion * w);
        moved[i][1] = corners[i][1] + rng.uniform(-distortion * h, distortion * h);
    }
    if (img.width() < 2 || img.height() < 2) return img;

    // Homography taking displaced corners back onto the source corners; output
    // pixels are pulled through it.
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const double u = moved[i][0], v = moved[i][1];
        const double x = corners[i][0], y = corners[i][1];
        a.row(2 * i) << u, v, 1, 0, 0, 0, -u * x, -v * x;
        a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -u * y, -v * y;
        b(2 * i) = x;
        b(2 * i + 1) = y;
    }
    const Eigen::Matrix<double, 8, 1> hm = a.fullPivLu().solve(b);
    return warp(img, [&](double x, double y) {
        const double d = hm(6) * x + hm(7) * y + 1.0;
        return std::pair{(hm(0) * x + hm(1) * y + hm(2)) / d, (hm(3) * x + hm(4) * y + hm(5)) / d};
    });
}

ImageGray affine_warp(const ImageGray& img, const AffineParams& params) {
    require(std::isfinite(params.scale) && params.scale > 0.0, "affine scale must be > 0");
    const double theta = params.rotation_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double cx = (img.width() - 1) / 2.0, cy = (img.height() - 1) / 2.0;
    // forward: dst = center + t + scale * R * (src - center); pull through the inverse
    return warp(img, [&](double x, double y) {
        const double dx = (x - cx - params.translate_x) / params.scale;
        const double dy = (y - cy - params.translate_y) / params.scale;
        return std::pair{cx + c * dx + s * dy, cy - s * dx + c * dy};
    });
}

ImageGray random_affine(const ImageGray& img, const AugmentSpec& spec, Rng& rng) {
    spec.validate();
    AffineParams p;
    p.rotation_degrees = rng.uniform(-spec.affine_max_rotation, spec.affine_max_rotation);
    const double tx = spec.affine_max_translate_fraction * img.width();
    const double ty = spec.affine_max_translate_fraction * img.height();
    p.translate_x = rng.uniform(-tx, tx);
    p.translate_y = rng.uniform(-ty, ty);
    p.scale = rng.uniform(spec.affine_scale_range.first, spec.affine_scale_range.second);
    return affine_warp(img, p);
}

ImageGray augment(const ImageGray& img, const AugmentSpec& spec, Rng& rng) {
    spec.validate();
    ImageGray out = blacken_background(img, spec.background_threshold);
    out = random_crop(out, spec.crop_fraction, rng);
    if (rng.bernoulli(spec.hflip_probability)) out = horizontal_flip(out);
    out = gaussian_blur(out, rng.uniform(spec.blur_sigma_range.first, spec.blur_sigma_range.second));
    out = random_perspective(out, spec.perspective_distortion, rng);
    return random_affine(out, spec, rng);
}

ImageGray preprocess(const ImageGray& img, const LinearTransformParams& params, int background_threshold) {
    return blacken_background(linear_transform(img, params), background_threshold);
}

ImageGray read_png(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) fail(ErrorKind::Io, "cannot open image: " + path);
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        fail(ErrorKind::Format, path + ": " + png.message);
    if (png.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR)) {
        png_image_free(&png);
        fail(ErrorKind::Format, path + ": expected an 8-bit single-channel PNG");
    }
    png.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr))
        fail(ErrorKind::Format, path + ": " + png.message);
    return ImageGray(static_cast<int>(png.width), static_cast<int>(png.height), std::move(pixels));
}

void write_png(const ImageGray& img, const std::string& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, img.pixels().data(), 0, nullptr))
        fail(ErrorKind::Io, path + ": " + png.message);
}

namespace {

std::pair<double, double> parse_range(std::string_view v, int line) {
    const auto comma = v.find(',');
    if (comma == std::string_view::npos)
        fail(ErrorKind::Format, "line " + std::to_string(line) + ": expected `lo, hi`");
    return {text::parse_double(text::trim(v.substr(0, comma)), line),
            text::parse_double(text::trim(v.substr(comma + 1)), line)};
}

}  // namespace

AugmentSpec parse_augment_spec(const std::string& content) {
    AugmentSpec spec;
    std::istringstream in(content);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = text::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorKind::Format, "line " + std::to_string(line) + ": expected `key = value`");
        const auto key = text::trim(s.substr(0, eq));
        const auto value = text::trim(s.substr(eq + 1));
        if (key == "crop_fraction") spec.crop_fraction = text::parse_double(value, line);
        else if (key == "hflip_probability") spec.hflip_probability = text::parse_double(value, line);
        else if (key == "blur_sigma_range") spec.blur_sigma_range = parse_range(value, line);
        else if (key == "perspective_distortion") spec.perspective_distortion = text::parse_double(value, line);
        else if (key == "affine_max_rotation") spec.affine_max_rotation = text::parse_double(value, line);
        else if (key == "affine_max_translate_fraction")
            spec.affine_max_translate_fraction = text::parse_double(value, line);
        else if (key == "affine_scale_range") spec.affine_scale_range = parse_range(value, line);
        else if (key == "background_threshold")
            spec.background_threshold = static_cast<int>(text::parse_u64(value, line));
        else if (key == "seed") spec.seed = text::parse_u64(value, line);
        else fail(ErrorKind::Format, "line " + std::to_string(line) + ": unknown key `" + std::string(key) + "`");
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Format, e.what());
    }
    return spec;
}

AugmentSpec read_augment_spec(const std::string& path) {
    return parse_augment_spec(text::read_file(path));
}

}  // namespace octens
