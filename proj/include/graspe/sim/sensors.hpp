#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "graspe/core/rng.hpp"
#include "graspe/core/types.hpp"
#include "graspe/sim/terrain.hpp"

namespace graspe::sim {

struct CameraParams {
    int width{64};
    int height{64};
    double fov{kPi / 2.0};
    double max_view{12.0};  // meters; farther floor fades to sky
    double cam_height{0.4}; // meters above ground
};

struct LidarParams {
    int rings{4};
    int azimuths{180};
    double fov{2.0 * kPi / 3.0}; // forward cone
    double max_range{10.0};
    double min_range{0.9}; // VLP-16-like dead zone; nearer returns are culled
    double noise_sigma{0.01};     // Gaussian noise on solid hits, per axis
    double perturb_radius{0.5};   // scatter perturbation ball radius
    double p_scatter_pliable{0.6};
    double p_scatter_nontrav{0.8};
    std::array<double, 4> ring_elevations{-0.08, 0.0, 0.06, 0.12}; // radians
};

namespace palette {
inline constexpr std::array<std::uint8_t, 3> kSky{195, 200, 210};
inline constexpr std::array<std::uint8_t, 3> kGround{105, 100, 90};
inline constexpr std::array<std::uint8_t, 3> kSolid{45, 45, 45};
inline constexpr std::array<std::uint8_t, 3> kPliable{110, 180, 90};
inline constexpr std::array<std::uint8_t, 3> kNonTrav{40, 110, 40};
inline constexpr std::uint8_t kOcclusionFill = 8;

inline const std::array<std::uint8_t, 3>& cell_color(Cell c) {
    switch (c) {
        case Cell::Free: return kGround;
        case Cell::Solid: return kSolid;
        case Cell::Pliable: return kPliable;
        case Cell::NonTrav: return kNonTrav;
    }
    return kGround;
}
} // namespace palette

namespace detail {

// Obstacle height above ground, meters. Pliable grass sits below the camera
// so rays pass over it; solid walls and tall brush block the view.
inline double blocking_height(Cell c) {
    switch (c) {
        case Cell::Solid: return 1.2;
        case Cell::NonTrav: return 0.7;
        default: return 0.0;
    }
}

struct RayHit {
    bool hit{false};
    double distance{0.0};
    Cell cell{Cell::Free};
};

// Amanatides-Woo grid traversal; returns the first cell satisfying `blocks`.
template <typename BlockFn>
inline RayHit raycast(const TerrainGrid& g, double ox, double oy, double angle, double max_dist,
                      BlockFn blocks) {
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double cs = g.cell_size;
    int cx = static_cast<int>(std::floor(ox / cs));
    int cy = static_cast<int>(std::floor(oy / cs));

    const int step_x = dx > 0 ? 1 : -1;
    const int step_y = dy > 0 ? 1 : -1;
    const double inv_dx = dx != 0.0 ? 1.0 / dx : 0.0;
    const double inv_dy = dy != 0.0 ? 1.0 / dy : 0.0;
    double t_max_x = dx != 0.0 ? ((cx + (step_x > 0 ? 1 : 0)) * cs - ox) * inv_dx
                               : std::numeric_limits<double>::infinity();
    double t_max_y = dy != 0.0 ? ((cy + (step_y > 0 ? 1 : 0)) * cs - oy) * inv_dy
                               : std::numeric_limits<double>::infinity();
    const double t_delta_x = dx != 0.0 ? cs * std::abs(inv_dx) : std::numeric_limits<double>::infinity();
    const double t_delta_y = dy != 0.0 ? cs * std::abs(inv_dy) : std::numeric_limits<double>::infinity();

    double t = 0.0;
    if (g.in_bounds_cell(cx, cy) && blocks(g.at(cx, cy))) return {true, 0.01, g.at(cx, cy)};
    while (t <= max_dist) {
        if (t_max_x < t_max_y) {
            t = t_max_x;
            t_max_x += t_delta_x;
            cx += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            cy += step_y;
        }
        if (t > max_dist) break;
        if (!g.in_bounds_cell(cx, cy)) break;
        const Cell c = g.at(cx, cy);
        if (blocks(c)) return {true, t, c};
    }
    return {};
}

// Enumerates (t_entry, t_exit, cell) segments along a ray for the lidar.
struct CellSegment {
    double t_in{0.0}, t_out{0.0};
    Cell cell{Cell::Free};
};

inline void walk_segments(const TerrainGrid& g, double ox, double oy, double angle, double max_dist,
                          std::vector<CellSegment>& out) {
    out.clear();
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double cs = g.cell_size;
    int cx = static_cast<int>(std::floor(ox / cs));
    int cy = static_cast<int>(std::floor(oy / cs));
    const int step_x = dx > 0 ? 1 : -1;
    const int step_y = dy > 0 ? 1 : -1;
    const double inv_dx = dx != 0.0 ? 1.0 / dx : 0.0;
    const double inv_dy = dy != 0.0 ? 1.0 / dy : 0.0;
    double t_max_x = dx != 0.0 ? ((cx + (step_x > 0 ? 1 : 0)) * cs - ox) * inv_dx
                               : std::numeric_limits<double>::infinity();
    double t_max_y = dy != 0.0 ? ((cy + (step_y > 0 ? 1 : 0)) * cs - oy) * inv_dy
                               : std::numeric_limits<double>::infinity();
    const double t_delta_x = dx != 0.0 ? cs * std::abs(inv_dx) : std::numeric_limits<double>::infinity();
    const double t_delta_y = dy != 0.0 ? cs * std::abs(inv_dy) : std::numeric_limits<double>::infinity();

    double t = 0.0;
    while (t < max_dist) {
        const double t_next = std::min({t_max_x, t_max_y, max_dist});
        if (g.in_bounds_cell(cx, cy))
            out.push_back({t, t_next, g.at(cx, cy)});
        else
            break;
        if (t_next >= max_dist) break;
        if (t_max_x < t_max_y) {
            t = t_max_x;
            t_max_x += t_delta_x;
            cx += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            cy += step_y;
        }
    }
}

inline std::uint8_t scale_u8(std::uint8_t v, double s) {
    const double scaled = s * static_cast<double>(v);
    const long r = std::lround(scaled);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

} // namespace detail

// Forward-facing perspective render of the grid: column raycast for blocking
// cells, flat-floor projection below the horizon. Degradations applied in
// order: illumination scale, box blur, occlusion fill.
inline ImageRaster render_camera(const TerrainGrid& grid, const Pose2D& pose,
                                 const CameraParams& params = CameraParams{}) {
    const int w = params.width, h = params.height;
    ImageRaster img = ImageRaster::filled(w, h, 3, 0);
    const double focal = h / 2.0; // 90-degree vertical FOV

    for (int col = 0; col < w; ++col) {
        const double rel = params.fov * (0.5 - (col + 0.5) / w);
        const double ang = pose.theta + rel;
        const double cos_rel = std::cos(rel);
        const auto hit = detail::raycast(grid, pose.x, pose.y, ang, params.max_view,
                                         [](Cell c) { return detail::blocking_height(c) > 0.0; });

        double r_top_f = h / 2.0;
        double r_base_f = h / 2.0;
        double d_perp = std::numeric_limits<double>::infinity();
        if (hit.hit) {
            d_perp = std::max(0.05, hit.distance * cos_rel);
            r_base_f = h / 2.0 + focal * params.cam_height / d_perp;
            r_top_f = h / 2.0 - focal * (detail::blocking_height(hit.cell) - params.cam_height) / d_perp;
        }

        for (int row = 0; row < h; ++row) {
            const double rc = row + 0.5;
            const std::uint8_t* color = palette::kSky.data();
            if (hit.hit && rc >= r_top_f && rc < r_base_f) {
                color = palette::cell_color(hit.cell).data();
            } else if (rc >= std::max(r_base_f, h / 2.0 + 1e-9)) {
                const double d_floor_perp = focal * params.cam_height / (rc - h / 2.0);
                const double d_floor = d_floor_perp / cos_rel;
                if (d_floor <= params.max_view && d_floor_perp <= d_perp) {
                    const double fx = pose.x + d_floor * std::cos(ang);
                    const double fy = pose.y + d_floor * std::sin(ang);
                    color = palette::cell_color(grid.at_world(fx, fy)).data();
                }
            }
            for (int c = 0; c < 3; ++c) img.at(col, row, c) = color[c];
        }
    }

    // 1. illumination
    if (grid.illumination != 1.0)
        for (auto& v : img.data) v = detail::scale_u8(v, grid.illumination);

    // 2. box blur
    if (grid.blur_radius > 0) {
        const int r = grid.blur_radius;
        ImageRaster src = img;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) {
                    long sum = 0;
                    int count = 0;
                    for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                            sum += src.at(xx, yy, c);
                            ++count;
                        }
                    img.at(x, y, c) = static_cast<std::uint8_t>(
                        std::lround(static_cast<double>(sum) / count));
                }
    }

    // 3. occlusion patches
    for (const auto& o : grid.occlusions)
        for (int y = std::max(0, o.y); y < std::min(h, o.y + o.h); ++y)
            for (int x = std::max(0, o.x); x < std::min(w, o.x + o.w); ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = palette::kOcclusionFill;

    return img;
}

// Ray-cast lidar scan. Solid cells return exact boundary hits plus Gaussian
// noise; clutter cells scatter probabilistically, terminating the ray. All
// randomness comes from the caller-provided stream.
inline PointCloud render_lidar(const TerrainGrid& grid, const Pose2D& pose, Rng& rng,
                               const LidarParams& params = LidarParams{}) {
    PointCloud cloud;
    cloud.num_rings = params.rings;
    std::vector<detail::CellSegment> segments;

    const double cos_t = std::cos(pose.theta);
    const double sin_t = std::sin(pose.theta);
    auto to_sensor = [&](double wx, double wy, double z, int ring) {
        const double dx = wx - pose.x, dy = wy - pose.y;
        LidarPoint p;
        p.x = cos_t * dx + sin_t * dy;
        p.y = -sin_t * dx + cos_t * dy;
        p.z = z;
        p.ring = ring;
        return p;
    };

    for (int ring = 0; ring < params.rings; ++ring) {
        const double elev = params.ring_elevations[static_cast<std::size_t>(ring) %
                                                   params.ring_elevations.size()];
        for (int a = 0; a < params.azimuths; ++a) {
            const double rel = -params.fov / 2.0 + params.fov * (a + 0.5) / params.azimuths;
            const double ang = pose.theta + rel;
            detail::walk_segments(grid, pose.x, pose.y, ang, params.max_range, segments);

            for (const auto& seg : segments) {
                if (seg.cell == Cell::Solid) {
                    const double d = seg.t_in;
                    if (d < params.min_range) break;
                    LidarPoint p = to_sensor(pose.x + d * std::cos(ang), pose.y + d * std::sin(ang),
                                             d * std::tan(elev), ring);
                    if (params.noise_sigma > 0.0) {
                        p.x += rng.normal(0.0, params.noise_sigma);
                        p.y += rng.normal(0.0, params.noise_sigma);
                        p.z += rng.normal(0.0, params.noise_sigma);
                    }
                    cloud.points.push_back(p);
                    break;
                }
                if (seg.cell == Cell::Pliable || seg.cell == Cell::NonTrav) {
                    const double p_scatter = seg.cell == Cell::Pliable ? params.p_scatter_pliable
                                                                       : params.p_scatter_nontrav;
                    if (rng.next_double() < p_scatter) {
                        const double t_s = seg.t_in + rng.next_double() * (seg.t_out - seg.t_in);
                        LidarPoint p = to_sensor(pose.x + t_s * std::cos(ang),
                                                 pose.y + t_s * std::sin(ang), t_s * std::tan(elev),
                                                 ring);
                        // uniform perturbation inside a ball
                        const double radius = params.perturb_radius * std::cbrt(rng.next_double());
                        const double cz = 2.0 * rng.next_double() - 1.0;
                        const double phi = 2.0 * kPi * rng.next_double();
                        const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
                        p.x += radius * sz * std::cos(phi);
                        p.y += radius * sz * std::sin(phi);
                        p.z += radius * cz;
                        if (std::hypot(p.x, p.y) >= params.min_range) cloud.points.push_back(p);
                        break;
                    }
                }
            }
        }
    }
    return cloud;
}

// Binary per-step labels: 1 while the pose sits on free or pliable ground,
// 0 from the first failure onward (failure is absorbing). Poses outside the
// grid read as solid.
inline SuccessVector ground_truth_labels(const TerrainGrid& grid, const std::vector<Pose2D>& traj) {
    std::vector<double> labels(traj.size(), 0.0);
    bool failed = false;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (failed) break;
        const Cell c = grid.at_world(traj[k].x, traj[k].y);
        if (c == Cell::Free || c == Cell::Pliable)
            labels[k] = 1.0;
        else
            failed = true;
    }
    return SuccessVector(std::move(labels));
}

} // namespace graspe::sim
