#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "octens/rng.hpp"

namespace octens {

// 8-bit single-channel raster, row-major.
class ImageGray {
public:
    ImageGray(int width, int height, std::uint8_t fill = 0);
    ImageGray(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
    std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    friend bool operator==(const ImageGray&, const ImageGray&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

struct LinearTransformParams {
    double alpha = 1.15;  // contrast gain
    double beta = -15.0;  // brightness offset
};

struct AugmentSpec {
    double crop_fraction = 0.9;
    double hflip_probability = 0.5;
    std::pair<double, double> blur_sigma_range{0.0, 1.0};
    double perspective_distortion = 0.1;
    double affine_max_rotation = 10.0;  // degrees
    double affine_max_translate_fraction = 0.05;
    std::pair<double, double> affine_scale_range{0.95, 1.05};
    int background_threshold = 240;
    std::uint64_t seed = 0;

    // Throws Error(Parameter) naming the first field out of range.
    void validate() const;
};

// Fully specified affine warp about the image center: rotate (degrees, in
// pixel coordinates with y pointing down), scale, then translate (pixels).
struct AffineParams {
    double rotation_degrees = 0.0;
    double translate_x = 0.0;
    double translate_y = 0.0;
    double scale = 1.0;
};

// Round half away from zero, clamp into [0, 255].
std::uint8_t quantize(double v);

ImageGray linear_transform(const ImageGray& img, const LinearTransformParams& params);

// Zeroes every pixel reachable from the border through 4-connected pixels
// with intensity >= threshold.
ImageGray blacken_background(const ImageGray& img, int threshold);

ImageGray random_crop(const ImageGray& img, double crop_fraction, Rng& rng);
ImageGray horizontal_flip(const ImageGray& img);

// Separable Gaussian, radius ceil(3 sigma), reflect-101 borders.
ImageGray gaussian_blur(const ImageGray& img, double sigma);
std::vector<double> gaussian_kernel(double sigma);

ImageGray random_perspective(const ImageGray& img, double distortion, Rng& rng);
ImageGray affine_warp(const ImageGray& img, const AffineParams& params);
ImageGray random_affine(const ImageGray& img, const AugmentSpec& spec, Rng& rng);

// Full augmentation chain in a fixed order: background, crop, flip, blur,
// perspective, affine. Every stage draws from the same generator.
ImageGray augment(const ImageGray& img, const AugmentSpec& spec, Rng& rng);

// Preprocessing chain: linear transform followed by background blackening.
ImageGray preprocess(const ImageGray& img, const LinearTransformParams& params, int background_threshold);

ImageGray read_png(const std::string& path);
void write_png(const ImageGray& img, const std::string& path);

// Flat `key = value` text; keys are the AugmentSpec field names, ranges are
// written `lo, hi`. Unknown keys are errors, missing keys keep defaults.
AugmentSpec parse_augment_spec(const std::string& text);
AugmentSpec read_augment_spec(const std::string& path);

}  // namespace octens
