#pragma once

#include <cmath>
#include <stdexcept>

#include "graspe/core/matrix.hpp"
#include "graspe/enc/encoders.hpp"

namespace graspe::fus {

using enc::Modality;
using enc::ModalityRanges;

// Pairwise reliability factor between feature-graph nodes. Cross-modal edges
// touching the image (but not the point cloud) carry r_img; edges touching
// the point cloud (but not the image) carry r_point; image-point edges carry
// the average; everything else (same-modality, vel/traj pairs) is fully
// reliable.
inline double reliability_factor(int i, int j, const ModalityRanges& ranges, double r_img,
                                 double r_point) {
    if (i == j) throw std::invalid_argument("reliability_factor: i == j");
    const Modality mi = ranges.classify(i);
    const Modality mj = ranges.classify(j);
    const bool img_i = mi == Modality::Img, img_j = mj == Modality::Img;
    const bool pt_i = mi == Modality::Point, pt_j = mj == Modality::Point;
    if ((img_i && pt_j) || (pt_i && img_j)) return 0.5 * (r_img + r_point);
    if (img_i != img_j && !pt_i && !pt_j) return r_img;
    if (pt_i != pt_j && !img_i && !img_j) return r_point;
    return 1.0;
}

// Reliability-aware adjacency: W_ij = exp(-lambda * |f_i - f_j| * r_ij),
// zero diagonal. The inverted mode scales the similarity kernel by r_ij
// instead, so unreliable pairs decouple rather than saturate; default is the
// non-inverted form.
inline Matrix build_graph_w(const Vec& f_vec, const ModalityRanges& ranges, double r_img,
                            double r_point, double lambda, bool invert_reliability = false) {
    if (!(lambda > 0.0)) throw std::invalid_argument("build_graph_w: lambda must be positive");
    const int n = static_cast<int>(f_vec.size());
    if (n != ranges.total()) throw std::invalid_argument("build_graph_w: f_vec/ranges mismatch");
    Matrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double r = reliability_factor(i, j, ranges, r_img, r_point);
            const double df = std::abs(f_vec[static_cast<std::size_t>(i)] -
                                       f_vec[static_cast<std::size_t>(j)]);
            const double wij = invert_reliability ? r * std::exp(-lambda * df)
                                                  : std::exp(-lambda * df * r);
            w(i, j) = wij;
            w(j, i) = wij;
        }
    return w;
}

struct FeatureGraph {
    int n{0};
    Vec signal; // f_vec; value at node i
    Matrix w;   // symmetric, zero diagonal, entries in [0,1]
    ModalityRanges ranges;
};

inline FeatureGraph build_graph(const Vec& f_vec, const ModalityRanges& ranges, double r_img,
                                double r_point, double lambda, bool invert_reliability = false) {
    FeatureGraph g;
    g.n = static_cast<int>(f_vec.size());
    g.signal = f_vec;
    g.ranges = ranges;
    g.w = build_graph_w(f_vec, ranges, r_img, r_point, lambda, invert_reliability);
    return g;
}

} // namespace graspe::fus
