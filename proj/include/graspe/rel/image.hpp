#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "graspe/core/types.hpp"

namespace graspe::rel {

// Luma-weighted grayscale, one byte per pixel.
inline std::vector<std::uint8_t> to_gray(const ImageRaster& img) {
    img.validate();
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(img.width) * img.height);
    if (img.channels == 1) {
        gray.assign(img.data.begin(), img.data.end());
        return gray;
    }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                0.114 * img.at(x, y, 2);
            gray[static_cast<std::size_t>(y) * img.width + x] =
                static_cast<std::uint8_t>(std::clamp<long>(std::lround(luma), 0, 255));
        }
    return gray;
}

// Histogram-RMS brightness: sqrt(sum_b hist(b) * b^2 / n) / 255, in [0,1].
inline double brightness(const ImageRaster& img) {
    const auto gray = to_gray(img);
    if (gray.empty()) throw std::invalid_argument("brightness: empty image");
    std::array<std::uint64_t, 256> hist{};
    for (std::uint8_t v : gray) ++hist[v];
    double sum_sq = 0.0;
    for (int b = 0; b < 256; ++b)
        sum_sq += static_cast<double>(hist[static_cast<std::size_t>(b)]) * b * b;
    return std::sqrt(sum_sq / static_cast<double>(gray.size())) / 255.0;
}

struct Corner {
    int x{0}, y{0};
    int score{0}; // max over qualifying arcs of (min |I(x)-I(p)| - t)
};

namespace detail {

// Bresenham circle of radius 3, 16 pixels, clockwise from 12 o'clock.
inline constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3},
                                                             {1, -3},
                                                             {2, -2},
                                                             {3, -1},
                                                             {3, 0},
                                                             {3, 1},
                                                             {2, 2},
                                                             {1, 3},
                                                             {0, 3},
                                                             {-1, 3},
                                                             {-2, 2},
                                                             {-3, 1},
                                                             {-3, 0},
                                                             {-3, -1},
                                                             {-2, -2},
                                                             {-1, -3}}};

// Segment-test score for one pixel. Returns primary score (spec definition)
// and the longest qualifying run length; <0 primary means not a corner.
struct SegScore {
    int primary{-1};
    int run_len{0};
    bool corner() const { return primary >= 0; }
    // NMS key: primary refined by run length so equal-contrast plateau
    // pixels still order deterministically and rotation-invariantly.
    long key() const { return static_cast<long>(primary) * 64 + run_len; }
};

inline SegScore segment_test(const std::vector<std::uint8_t>& gray, int w, int x, int y, int t,
                             int arc) {
    const int ip = gray[static_cast<std::size_t>(y) * w + x];
    std::array<int, 16> diff{};
    std::array<int, 16> cls{}; // +1 bright, -1 dark, 0 neither
    for (int k = 0; k < 16; ++k) {
        const int v = gray[static_cast<std::size_t>(y + kCircle[static_cast<std::size_t>(k)][1]) * w +
                           (x + kCircle[static_cast<std::size_t>(k)][0])];
        diff[static_cast<std::size_t>(k)] = v - ip;
        if (v > ip + t)
            cls[static_cast<std::size_t>(k)] = 1;
        else if (v < ip - t)
            cls[static_cast<std::size_t>(k)] = -1;
    }

    SegScore out;
    for (int want : {1, -1}) {
        // sliding window of length `arc` over the circular buffer
        for (int start = 0; start < 16; ++start) {
            int len = 0;
            int min_mag = 256;
            for (int k = 0; k < 16; ++k) {
                const int idx = (start + k) % 16;
                if (cls[static_cast<std::size_t>(idx)] != want) break;
                ++len;
                min_mag = std::min(min_mag, std::abs(diff[static_cast<std::size_t>(idx)]));
                if (len >= arc) {
                    out.primary = std::max(out.primary, min_mag - t);
                    out.run_len = std::max(out.run_len, len);
                }
            }
        }
    }
    return out;
}

} // namespace detail

// FAST segment test with 3x3 non-maximum suppression. A pixel is a corner iff
// at least `arc` contiguous circle pixels are all brighter than I(p)+t or all
// darker than I(p)-t; ties between adjacent maxima suppress both sides, which
// keeps the detector exactly symmetric under image rotation.
inline std::vector<Corner> fast_corners(const ImageRaster& img, int t = 20, int arc = 9) {
    const auto gray = to_gray(img);
    const int w = img.width, h = img.height;
    std::vector<Corner> out;
    if (w < 7 || h < 7) return out;

    std::vector<long> key(static_cast<std::size_t>(w) * h, -1);
    std::vector<int> primary(static_cast<std::size_t>(w) * h, -1);
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            const auto s = detail::segment_test(gray, w, x, y, t, arc);
            if (s.corner()) {
                key[static_cast<std::size_t>(y) * w + x] = s.key();
                primary[static_cast<std::size_t>(y) * w + x] = s.primary;
            }
        }

    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            const long k = key[static_cast<std::size_t>(y) * w + x];
            if (k < 0) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (key[static_cast<std::size_t>(ny) * w + nx] >= k) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) out.push_back({x, y, primary[static_cast<std::size_t>(y) * w + x]});
        }
    return out;
}

struct RelImageParams {
    double alpha_b{0.5};
    double alpha_c{0.5};
    double corner_norm{0.005}; // corner density that saturates r_corners
    int fast_threshold{20};
    int fast_arc{9};
};

struct ImageReliability {
    double r_bright{0.0};
    double r_corners{0.0};
    double r_img{0.0};
    int n_c{0};
};

inline ImageReliability image_reliability(const ImageRaster& img,
                                          const RelImageParams& params = RelImageParams{}) {
    if (params.alpha_b < 0.0 || params.alpha_c < 0.0 ||
        std::abs(params.alpha_b + params.alpha_c - 1.0) > 1e-9)
        throw std::invalid_argument("image_reliability: weights must be nonnegative and sum to 1");
    ImageReliability out;
    out.r_bright = brightness(img);
    out.n_c = static_cast<int>(fast_corners(img, params.fast_threshold, params.fast_arc).size());
    const double denom = params.corner_norm * img.width * img.height;
    out.r_corners = std::min(1.0, static_cast<double>(out.n_c) / denom);
    out.r_img = std::clamp(params.alpha_b * out.r_bright + params.alpha_c * out.r_corners, 0.0, 1.0);
    return out;
}

} // namespace graspe::rel
