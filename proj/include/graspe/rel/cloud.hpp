#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "graspe/core/types.hpp"

namespace graspe::rel {

struct RelCloudParams {
    double c_max{0.5};  // edge threshold
    double c_min{0.05}; // planar threshold
    double beta_e{5.0};
    double beta_p{1.0};
    int neighborhood_m{5}; // same-ring index window half-width
    double origin_eps{1e-6};
};

struct CloudReliability {
    double r_edge{0.0};
    double r_planar{0.0};
    double r_point{0.0};
    int edge_count{0};
    int planar_count{0};
};

namespace detail {

// Per-ring point indices ordered by azimuth (ties by original index).
inline std::vector<std::vector<int>> ring_order(const PointCloud& cloud) {
    int max_ring = -1;
    for (const auto& p : cloud.points) max_ring = std::max(max_ring, p.ring);
    std::vector<std::vector<int>> rings(static_cast<std::size_t>(max_ring + 1));
    for (int i = 0; i < cloud.size(); ++i)
        rings[static_cast<std::size_t>(cloud.points[static_cast<std::size_t>(i)].ring)].push_back(i);
    for (auto& ring : rings)
        std::sort(ring.begin(), ring.end(), [&](int a, int b) {
            const auto& pa = cloud.points[static_cast<std::size_t>(a)];
            const auto& pb = cloud.points[static_cast<std::size_t>(b)];
            const double aa = std::atan2(pa.y, pa.x);
            const double ab = std::atan2(pb.y, pb.x);
            if (aa != ab) return aa < ab;
            return a < b;
        });
    return rings;
}

inline double norm3(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

// c_l over an explicit neighborhood given by ring positions.
inline std::optional<double> factor_at(const PointCloud& cloud, const std::vector<int>& ring,
                                       int pos, int m, double eps) {
    const int n = static_cast<int>(ring.size());
    const auto& pl = cloud.points[static_cast<std::size_t>(ring[static_cast<std::size_t>(pos)])];
    const double norm_l = norm3(pl.x, pl.y, pl.z);
    if (norm_l <= eps) return std::nullopt;
    const int lo = std::max(0, pos - m);
    const int hi = std::min(n - 1, pos + m);
    const int neighbors = hi - lo; // window members minus the point itself
    if (neighbors < 1) return std::nullopt;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (int k = lo; k <= hi; ++k) {
        if (k == pos) continue;
        const auto& pk = cloud.points[static_cast<std::size_t>(ring[static_cast<std::size_t>(k)])];
        sx += pl.x - pk.x;
        sy += pl.y - pk.y;
        sz += pl.z - pk.z;
    }
    const int m_size = neighbors + 1; // |M| includes l
    return norm3(sx, sy, sz) / (norm_l * static_cast<double>(m_size));
}

} // namespace detail

// Point feature evaluation factor for every point that has a valid
// neighborhood; result[i] is c_l for cloud.points[i] (nullopt if skipped).
inline std::vector<std::optional<double>> point_feature_factors(
    const PointCloud& cloud, const RelCloudParams& params = RelCloudParams{}) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(cloud.size()));
    const auto rings = detail::ring_order(cloud);
    for (const auto& ring : rings)
        for (int pos = 0; pos < static_cast<int>(ring.size()); ++pos)
            out[static_cast<std::size_t>(ring[static_cast<std::size_t>(pos)])] = detail::factor_at(
                cloud, ring, pos, params.neighborhood_m, params.origin_eps);
    return out;
}

// Single-point variant; throws if the point has no usable neighborhood.
inline double point_feature_factor(int index, const PointCloud& cloud,
                                   const RelCloudParams& params = RelCloudParams{}) {
    if (index < 0 || index >= cloud.size())
        throw std::out_of_range("point_feature_factor: index out of range");
    const auto all = point_feature_factors(cloud, params);
    const auto& c = all[static_cast<std::size_t>(index)];
    if (!c) throw std::invalid_argument("point_feature_factor: point has no valid neighborhood");
    return *c;
}

// Edge/planar fractions and the combined r_point score. An empty cloud is
// maximally unreliable (r_point = 0), not an error.
inline CloudReliability cloud_reliability(const PointCloud& cloud,
                                          const RelCloudParams& params = RelCloudParams{}) {
    if (params.beta_e < 0.0 || params.beta_p < 0.0)
        throw std::invalid_argument("cloud_reliability: negative weights");
    CloudReliability out;
    if (cloud.size() == 0) return out;
    const auto factors = point_feature_factors(cloud, params);
    for (const auto& c : factors) {
        if (!c) continue;
        if (*c >= params.c_max) ++out.edge_count;
        if (*c <= params.c_min) ++out.planar_count;
    }
    const double n = static_cast<double>(cloud.size());
    out.r_edge = static_cast<double>(out.edge_count) / n;
    out.r_planar = static_cast<double>(out.planar_count) / n;
    out.r_point = std::clamp(params.beta_e * out.r_edge + params.beta_p * out.r_planar, 0.0, 1.0);
    return out;
}

} // namespace graspe::rel
