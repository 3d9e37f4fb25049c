#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "graspe/core/matrix.hpp"
#include "graspe/core/rng.hpp"
#include "graspe/core/types.hpp"
#include "graspe/rel/image.hpp"

namespace graspe::enc {

enum class Modality : int { Img = 0, Point = 1, Vel = 2, Traj = 3 };

struct FeatureVector {
    Vec values;
    Modality tag{Modality::Img};
};

struct EncoderConfig {
    int img_dim{16};
    int point_dim{16};
    int vel_dim{8};
    int traj_dim{8};
    int img_hidden{48};
    int traj_hidden{48};
    int downsample{16}; // block-average grid side
    int image_width{64};
    int image_height{64};
    int hist_azimuth_bins{8};
    int hist_range_bins{8};
    double hist_max_range{10.0};
    double v_max{1.0};
    double omega_max{1.0};
    int horizon{10}; // T

    int total_dim() const { return img_dim + point_dim + traj_dim + vel_dim; }
    int block_count() const { return downsample * downsample; }
    int hist_bins() const { return hist_azimuth_bins * hist_range_bins; }
};

// Concatenation layout: [img | point | traj | vel].
struct ModalityRanges {
    int img_end{16};
    int point_end{32};
    int traj_end{40};
    int vel_end{48};

    static ModalityRanges from_config(const EncoderConfig& cfg) {
        ModalityRanges r;
        r.img_end = cfg.img_dim;
        r.point_end = r.img_end + cfg.point_dim;
        r.traj_end = r.point_end + cfg.traj_dim;
        r.vel_end = r.traj_end + cfg.vel_dim;
        return r;
    }

    Modality classify(int i) const {
        if (i < 0 || i >= vel_end) throw std::out_of_range("ModalityRanges::classify");
        if (i < img_end) return Modality::Img;
        if (i < point_end) return Modality::Point;
        if (i < traj_end) return Modality::Traj;
        return Modality::Vel;
    }

    int total() const { return vel_end; }
};

struct DenseLayer {
    Matrix w;
    Vec b;

    static DenseLayer init(int out_dim, int in_dim, Rng& rng, double scale = 1.0) {
        DenseLayer l;
        l.w = Matrix(out_dim, in_dim);
        const double bound = scale * std::sqrt(6.0 / (in_dim + out_dim));
        for (double& v : l.w.a) v = rng.uniform(-bound, bound);
        l.b.assign(static_cast<std::size_t>(out_dim), 0.0);
        return l;
    }
};

struct EncoderParams {
    DenseLayer img1, img2;   // blocks -> hidden -> img_dim
    DenseLayer point1;       // hist bins -> point_dim
    DenseLayer vel1;         // 2T -> vel_dim
    DenseLayer traj1, traj2; // blocks -> hidden -> traj_dim

    static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed) {
        Rng rng(mix_seed(seed, 0xE2CULL));
        EncoderParams p;
        p.img1 = DenseLayer::init(cfg.img_hidden, cfg.block_count(), rng);
        p.img2 = DenseLayer::init(cfg.img_dim, cfg.img_hidden, rng);
        // histogram and trajectory-raster inputs are tiny fractions of their
        // range; larger init keeps those branches live
        p.point1 = DenseLayer::init(cfg.point_dim, cfg.hist_bins(), rng, 4.0);
        p.vel1 = DenseLayer::init(cfg.vel_dim, 2 * cfg.horizon, rng);
        p.traj1 = DenseLayer::init(cfg.traj_hidden, cfg.block_count(), rng, 6.0);
        p.traj2 = DenseLayer::init(cfg.traj_dim, cfg.traj_hidden, rng);
        return p;
    }
};

// ---- fixed preprocessing (no trainable parameters) -------------------------

// Grayscale block-average, values in [0,1], row-major downsample x downsample.
inline Vec block_average(const ImageRaster& img, const EncoderConfig& cfg) {
    if (img.width != cfg.image_width || img.height != cfg.image_height)
        throw std::invalid_argument("block_average: image dims do not match config");
    const auto gray = rel::to_gray(img);
    const int n = cfg.downsample;
    Vec out(static_cast<std::size_t>(n) * n, 0.0);
    for (int by = 0; by < n; ++by) {
        const int y0 = by * img.height / n, y1 = (by + 1) * img.height / n;
        for (int bx = 0; bx < n; ++bx) {
            const int x0 = bx * img.width / n, x1 = (bx + 1) * img.width / n;
            double sum = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    sum += gray[static_cast<std::size_t>(y) * img.width + x];
            const int count = (y1 - y0) * (x1 - x0);
            out[static_cast<std::size_t>(by) * n + bx] = sum / (255.0 * count);
        }
    }
    return out;
}

// Azimuth x range occupancy histogram normalized by point count; exactly
// permutation-invariant. Out-of-range points clamp into the last range bin.
inline Vec polar_histogram(const PointCloud& cloud, const EncoderConfig& cfg) {
    Vec hist(static_cast<std::size_t>(cfg.hist_bins()), 0.0);
    if (cloud.size() == 0) return hist;
    for (const auto& p : cloud.points) {
        const double az = std::atan2(p.y, p.x); // [-pi, pi]
        int ab = static_cast<int>((az + kPi) / (2.0 * kPi) * cfg.hist_azimuth_bins);
        ab = std::clamp(ab, 0, cfg.hist_azimuth_bins - 1);
        const double r = std::hypot(p.x, p.y);
        int rb = static_cast<int>(r / cfg.hist_max_range * cfg.hist_range_bins);
        rb = std::clamp(rb, 0, cfg.hist_range_bins - 1);
        hist[static_cast<std::size_t>(ab) * cfg.hist_range_bins + rb] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(cloud.size());
    return hist;
}

// Commands flattened oldest-first as (v / v_max, omega / omega_max) pairs.
inline Vec velocity_features(const VelocityHistory& hist, const EncoderConfig& cfg) {
    if (hist.size() != cfg.horizon)
        throw std::invalid_argument("velocity_features: history length != horizon");
    Vec out;
    out.reserve(static_cast<std::size_t>(2 * cfg.horizon));
    for (const auto& c : hist.commands) {
        out.push_back(c.v / cfg.v_max);
        out.push_back(c.omega / cfg.omega_max);
    }
    return out;
}

// ---- trainable layers -------------------------------------------------------

inline Vec sigmoid(Vec z) {
    for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
    return z;
}

struct OneLayerCache {
    Vec input, z, out; // out = sigmoid(W input + b)
};

struct TwoLayerCache {
    Vec input, z1, t1, z2, out; // out = sigmoid(W2 tanh(W1 input + b1) + b2)
};

inline OneLayerCache one_layer_forward(const DenseLayer& l, Vec input) {
    OneLayerCache c;
    c.z = matvec(l.w, input);
    for (std::size_t i = 0; i < c.z.size(); ++i) c.z[i] += l.b[i];
    c.out = sigmoid(c.z);
    c.input = std::move(input);
    return c;
}

inline TwoLayerCache two_layer_forward(const DenseLayer& l1, const DenseLayer& l2, Vec input) {
    TwoLayerCache c;
    c.z1 = matvec(l1.w, input);
    for (std::size_t i = 0; i < c.z1.size(); ++i) c.z1[i] += l1.b[i];
    c.t1.resize(c.z1.size());
    for (std::size_t i = 0; i < c.z1.size(); ++i) c.t1[i] = std::tanh(c.z1[i]);
    c.z2 = matvec(l2.w, c.t1);
    for (std::size_t i = 0; i < c.z2.size(); ++i) c.z2[i] += l2.b[i];
    c.out = sigmoid(c.z2);
    c.input = std::move(input);
    return c;
}

// d_out is dL/d(out); gradients accumulate into g1/g2.
inline void one_layer_backward(const OneLayerCache& c, const DenseLayer& l, const Vec& d_out,
                               DenseLayer& grad) {
    Vec dz(c.z.size());
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = d_out[i] * c.out[i] * (1.0 - c.out[i]);
    for (std::size_t i = 0; i < dz.size(); ++i) {
        grad.b[i] += dz[i];
        double* grow = &grad.w.a[i * c.input.size()];
        for (std::size_t j = 0; j < c.input.size(); ++j) grow[j] += dz[i] * c.input[j];
    }
    (void)l;
}

inline void two_layer_backward(const TwoLayerCache& c, const DenseLayer& l1, const DenseLayer& l2,
                               const Vec& d_out, DenseLayer& g1, DenseLayer& g2) {
    Vec dz2(c.z2.size());
    for (std::size_t i = 0; i < dz2.size(); ++i) dz2[i] = d_out[i] * c.out[i] * (1.0 - c.out[i]);
    Vec dt1(c.t1.size(), 0.0);
    for (std::size_t i = 0; i < dz2.size(); ++i) {
        g2.b[i] += dz2[i];
        double* grow = &g2.w.a[i * c.t1.size()];
        const double* wrow = &l2.w.a[i * c.t1.size()];
        for (std::size_t j = 0; j < c.t1.size(); ++j) {
            grow[j] += dz2[i] * c.t1[j];
            dt1[j] += wrow[j] * dz2[i];
        }
    }
    Vec dz1(c.z1.size());
    for (std::size_t i = 0; i < dz1.size(); ++i) dz1[i] = dt1[i] * (1.0 - c.t1[i] * c.t1[i]);
    for (std::size_t i = 0; i < dz1.size(); ++i) {
        g1.b[i] += dz1[i];
        double* grow = &g1.w.a[i * c.input.size()];
        for (std::size_t j = 0; j < c.input.size(); ++j) grow[j] += dz1[i] * c.input[j];
    }
    (void)l1;
}

// ---- public encoder surface -------------------------------------------------

inline FeatureVector encode_image(const ImageRaster& image, const EncoderParams& params,
                                  const EncoderConfig& cfg) {
    const auto cache = two_layer_forward(params.img1, params.img2, block_average(image, cfg));
    return {cache.out, Modality::Img};
}

inline FeatureVector encode_cloud(const PointCloud& cloud, const EncoderParams& params,
                                  const EncoderConfig& cfg) {
    const auto cache = one_layer_forward(params.point1, polar_histogram(cloud, cfg));
    return {cache.out, Modality::Point};
}

inline FeatureVector encode_velocity(const VelocityHistory& hist, const EncoderParams& params,
                                     const EncoderConfig& cfg) {
    const auto cache = one_layer_forward(params.vel1, velocity_features(hist, cfg));
    return {cache.out, Modality::Vel};
}

inline FeatureVector encode_traj_image(const ImageRaster& traj_image, const EncoderParams& params,
                                       const EncoderConfig& cfg) {
    if (traj_image.channels != 1)
        throw std::invalid_argument("encode_traj_image: expected 1-channel raster");
    const auto cache = two_layer_forward(params.traj1, params.traj2, block_average(traj_image, cfg));
    return {cache.out, Modality::Traj};
}

// f_vec = [img | point | traj | vel] per the prediction model's node layout.
inline Vec concat_features(const FeatureVector& f_img, const FeatureVector& f_point,
                           const FeatureVector& f_vel, const FeatureVector& f_traj,
                           const EncoderConfig& cfg) {
    if (f_img.tag != Modality::Img || f_point.tag != Modality::Point ||
        f_vel.tag != Modality::Vel || f_traj.tag != Modality::Traj)
        throw std::invalid_argument("concat_features: modality tags out of order");
    if (static_cast<int>(f_img.values.size()) != cfg.img_dim ||
        static_cast<int>(f_point.values.size()) != cfg.point_dim ||
        static_cast<int>(f_vel.values.size()) != cfg.vel_dim ||
        static_cast<int>(f_traj.values.size()) != cfg.traj_dim)
        throw std::invalid_argument("concat_features: modality length mismatch");
    Vec out;
    out.reserve(static_cast<std::size_t>(cfg.total_dim()));
    out.insert(out.end(), f_img.values.begin(), f_img.values.end());
    out.insert(out.end(), f_point.values.begin(), f_point.values.end());
    out.insert(out.end(), f_traj.values.begin(), f_traj.values.end());
    out.insert(out.end(), f_vel.values.begin(), f_vel.values.end());
    return out;
}

} // namespace graspe::enc
