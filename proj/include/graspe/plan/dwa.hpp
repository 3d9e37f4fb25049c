#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "graspe/core/types.hpp"

namespace graspe::plan {

struct PlannerConfig {
    double gamma1{0.8}; // heading weight
    double gamma2{0.1}; // obstacle-distance weight
    double gamma3{0.1}; // velocity weight
    double r_th{0.15};  // point-cloud reliability gate
    double e_th{0.5};   // veto threshold on min/mean of E
    double v_max{1.0};
    double omega_max{1.0};
    double accel_v{1.0};     // m/s^2
    double accel_omega{2.0}; // rad/s^2
    double dv{0.1};
    double domega{0.1};
    double dt{0.2};
    int horizon{10};      // T
    double clearance{0.3}; // admissibility clearance, meters
    double d_clip{3.0};    // obstacle-distance normalization, meters
    double window_m{4.0}; // trajectory raster metric window
};

// Constant-command unicycle rollout, T poses after the start (exact arc
// integration; straight-line for |omega| below 1e-6).
inline std::vector<Pose2D> predict_trajectory(const Pose2D& pose, const VelocityCommand& cmd,
                                              double dt, int horizon) {
    if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(cmd.v) ||
        !std::isfinite(cmd.omega))
        throw std::invalid_argument("predict_trajectory: non-finite input");
    std::vector<Pose2D> out;
    out.reserve(static_cast<std::size_t>(horizon));
    double x = pose.x, y = pose.y, th = pose.theta;
    for (int k = 0; k < horizon; ++k) {
        if (std::abs(cmd.omega) > 1e-6) {
            const double th_next = th + cmd.omega * dt;
            const double radius = cmd.v / cmd.omega;
            x += radius * (std::sin(th_next) - std::sin(th));
            y += radius * (-std::cos(th_next) + std::cos(th));
            th = th_next;
        } else {
            x += cmd.v * std::cos(th) * dt;
            y += cmd.v * std::sin(th) * dt;
        }
        th = normalize_angle(th);
        out.emplace_back(x, y, th);
    }
    return out;
}

// Top-down metric raster of a robot-frame trajectory: x forward in
// [0, window], y left in [-window/2, window/2]; robot at bottom-center; the
// polyline through the poses is drawn 1 pixel wide at intensity 255.
inline ImageRaster rasterize_trajectory(const std::vector<Pose2D>& traj, int width, int height,
                                        double window_m = 4.0) {
    if (traj.empty()) throw std::invalid_argument("rasterize_trajectory: empty trajectory");
    ImageRaster img = ImageRaster::filled(width, height, 1, 0);

    auto to_px = [&](const Pose2D& p, double& col_f, double& row_f) {
        col_f = (0.5 - p.y / window_m) * width - 0.5;
        row_f = (1.0 - p.x / window_m) * (height - 1);
    };
    auto plot = [&](double col_f, double row_f) {
        const long c = std::lround(col_f);
        const long r = std::lround(row_f);
        if (c >= 0 && c < width && r >= 0 && r < height)
            img.at(static_cast<int>(c), static_cast<int>(r), 0) = 255;
    };

    for (std::size_t k = 0; k + 1 < traj.size() || k == 0; ++k) {
        double c0, r0;
        to_px(traj[k], c0, r0);
        if (k + 1 >= traj.size()) {
            plot(c0, r0);
            break;
        }
        double c1, r1;
        to_px(traj[k + 1], c1, r1);
        const int steps =
            std::max(1, static_cast<int>(std::ceil(2.0 * std::max(std::abs(c1 - c0), std::abs(r1 - r0)))));
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            plot(c0 + t * (c1 - c0), r0 + t * (r1 - r0));
        }
    }
    return img;
}

struct VelocitySpace {
    struct Item {
        VelocityCommand cmd;
        bool in_vd{false};
        bool in_va{true};
        std::vector<Pose2D> rollout; // robot-frame
        double obstacle_dist{std::numeric_limits<double>::infinity()};
    };
    std::vector<Item> items; // the discretized V_s grid
    bool va_active{true};    // Eq.-8 gate state

    bool in_restricted(const Item& it) const { return it.in_vd && (!va_active || it.in_va); }

    int restricted_count() const {
        int n = 0;
        for (const auto& it : items) n += in_restricted(it) ? 1 : 0;
        return n;
    }
};

// Builds V_s (discrete grid), marks V_d (reachable under acceleration limits)
// and V_a (rollout stays `clearance` away from every cloud point); the
// admissibility constraint is dropped entirely when the point cloud is
// unreliable (r_point <= r_th), unless force_va_on pins it active.
inline VelocitySpace restricted_space(const VelocityCommand& current, double r_point,
                                      const PointCloud& cloud, const PlannerConfig& cfg,
                                      bool force_va_on = false) {
    VelocitySpace vs;
    vs.va_active = force_va_on || r_point > cfg.r_th;

    const int nv = static_cast<int>(std::lround(cfg.v_max / cfg.dv));
    const int nw = static_cast<int>(std::lround(cfg.omega_max / cfg.domega));
    const double dv_tol = 1e-9;

    for (int i = 0; i <= nv; ++i) {
        const double v = i * cfg.dv;
        for (int j = -nw; j <= nw; ++j) {
            const double omega = j * cfg.domega;
            VelocitySpace::Item item;
            item.cmd = {v, omega};
            item.in_vd = std::abs(v - current.v) <= cfg.accel_v * cfg.dt + dv_tol &&
                         std::abs(omega - current.omega) <= cfg.accel_omega * cfg.dt + dv_tol;
            if (!item.in_vd) {
                vs.items.push_back(std::move(item));
                continue;
            }
            item.rollout = predict_trajectory(Pose2D{}, item.cmd, cfg.dt, cfg.horizon);
            double min_d = std::numeric_limits<double>::infinity();
            for (const auto& pose : item.rollout)
                for (const auto& p : cloud.points) {
                    const double d = std::hypot(pose.x - p.x, pose.y - p.y);
                    min_d = std::min(min_d, d);
                }
            item.obstacle_dist = min_d;
            item.in_va = !(min_d < cfg.clearance);
            vs.items.push_back(std::move(item));
        }
    }
    return vs;
}

namespace detail {

inline double heading_term(const std::vector<Pose2D>& rollout, double goal_x, double goal_y) {
    const Pose2D& end = rollout.back();
    const double dx = goal_x - end.x, dy = goal_y - end.y;
    if (std::hypot(dx, dy) < 1e-9) return 1.0; // endpoint on the goal
    const double err = std::abs(normalize_angle(std::atan2(dy, dx) - end.theta));
    return 1.0 - err / kPi;
}

} // namespace detail

// Eq.-9 objective with identity smoothing: each term normalized to [0,1].
// `obstacle_dist` is the rollout's closest approach to any cloud point; pass
// +inf (or gate off) for the dist term to saturate at 1.
inline double objective_terms(double heading, double obstacle_dist, double v, bool va_active,
                              const PlannerConfig& cfg) {
    const double dist =
        va_active ? std::min(1.0, obstacle_dist / cfg.d_clip) : 1.0;
    const double vel = v / cfg.v_max;
    return cfg.gamma1 * heading + cfg.gamma2 * dist + cfg.gamma3 * vel;
}

// Scores one command against a robot-frame goal and cloud.
inline double objective(const VelocityCommand& cmd, const Pose2D& pose, double goal_x, double goal_y,
                        const PointCloud& cloud, const PlannerConfig& cfg, bool va_active = true) {
    const auto rollout = predict_trajectory(pose, cmd, cfg.dt, cfg.horizon);
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& p : rollout)
        for (const auto& q : cloud.points) min_d = std::min(min_d, std::hypot(p.x - q.x, p.y - q.y));
    return objective_terms(detail::heading_term(rollout, goal_x, goal_y), min_d, cmd.v, va_active,
                           cfg);
}

// Predictor contract used by the veto loop: candidate observation plus the
// already-computed reliability pair.
using Predictor = std::function<SuccessVector(const Observation&, double r_img, double r_point)>;

struct PlanResult {
    VelocityCommand cmd;
    bool recovery{false};
    int evaluations{0}; // predictor calls made
    int vetoes{0};
    double r_img{1.0};
    double r_point{1.0};
};

struct PlanInputs {
    Pose2D pose; // world frame
    VelocityCommand current_vel;
    double goal_x{0.0}, goal_y{0.0}; // world frame
    ImageRaster image;               // current camera frame
    PointCloud cloud;                // robot frame
    VelocityHistory vel_history;
    double r_img{1.0};
    double r_point{1.0};
};

// Veto-loop planning step. Repeatedly takes the DWA argmax over the remaining
// restricted space (ties: larger v, then smaller |omega|, then smaller omega),
// asks the predictor for the candidate trajectory's success vector, and
// accepts iff min and mean clear e_th. An exhausted space falls back to
// rotating in place toward the goal at omega_max/2.
inline PlanResult plan_step(const PlanInputs& in, const Predictor& predictor,
                            const PlannerConfig& cfg, bool force_va_on = false) {
    VelocitySpace vs = restricted_space(in.current_vel, in.r_point, in.cloud, cfg, force_va_on);

    // robot-frame goal
    const double dxw = in.goal_x - in.pose.x, dyw = in.goal_y - in.pose.y;
    const double cos_t = std::cos(in.pose.theta), sin_t = std::sin(in.pose.theta);
    const double gx = cos_t * dxw + sin_t * dyw;
    const double gy = -sin_t * dxw + cos_t * dyw;

    struct Scored {
        double q;
        const VelocitySpace::Item* item;
        bool removed{false};
    };
    std::vector<Scored> scored;
    for (const auto& item : vs.items) {
        if (!vs.in_restricted(item)) continue;
        const double q = objective_terms(detail::heading_term(item.rollout, gx, gy),
                                         item.obstacle_dist, item.cmd.v, vs.va_active, cfg);
        scored.push_back({q, &item, false});
    }

    PlanResult result;
    result.r_img = in.r_img;
    result.r_point = in.r_point;

    auto next_best = [&]() -> Scored* {
        Scored* best = nullptr;
        for (auto& s : scored) {
            if (s.removed) continue;
            if (best == nullptr) {
                best = &s;
                continue;
            }
            if (s.q > best->q)
                best = &s;
            else if (s.q == best->q) {
                if (s.item->cmd.v > best->item->cmd.v)
                    best = &s;
                else if (s.item->cmd.v == best->item->cmd.v) {
                    if (std::abs(s.item->cmd.omega) < std::abs(best->item->cmd.omega))
                        best = &s;
                    else if (std::abs(s.item->cmd.omega) == std::abs(best->item->cmd.omega) &&
                             s.item->cmd.omega < best->item->cmd.omega)
                        best = &s;
                }
            }
        }
        return best;
    };

    while (Scored* best = next_best()) {
        Observation obs;
        obs.image = in.image;
        obs.cloud = in.cloud;
        obs.vel_history = in.vel_history;
        obs.traj_image =
            rasterize_trajectory(best->item->rollout, in.image.width, in.image.height, cfg.window_m);
        const SuccessVector e = predictor(obs, in.r_img, in.r_point);
        ++result.evaluations;
        if (e.size() != cfg.horizon)
            throw std::runtime_error("plan_step: predictor returned wrong horizon");
        if (e.min() >= cfg.e_th && e.mean() >= cfg.e_th) {
            result.cmd = best->item->cmd;
            return result;
        }
        ++result.vetoes;
        best->removed = true;
    }

    // Recovery: rotate in place toward the goal for one step.
    const double bearing = normalize_angle(std::atan2(gy, gx));
    result.recovery = true;
    result.cmd = {0.0, (bearing >= 0.0 ? 1.0 : -1.0) * cfg.omega_max / 2.0};
    return result;
}

} // namespace graspe::plan
