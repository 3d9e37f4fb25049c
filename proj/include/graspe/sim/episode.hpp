#pragma once

#include <cmath>
#include <stdexcept>

#include "graspe/core/types.hpp"
#include "graspe/sim/terrain.hpp"

namespace graspe::sim {

enum class Status : int { Running = 0, ReachedGoal = 1, Collided = 2, Stuck = 3, Timeout = 4 };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Running: return "running";
        case Status::ReachedGoal: return "reached_goal";
        case Status::Collided: return "collided";
        case Status::Stuck: return "stuck";
        case Status::Timeout: return "timeout";
    }
    throw std::invalid_argument("status_name: bad value");
}

struct EpisodeState {
    Pose2D pose;
    double goal_x{0.0}, goal_y{0.0};
    int elapsed_steps{0};
    Status status{Status::Running};
    int nontrav_streak{0}; // consecutive steps spent in NonTrav cells

    static EpisodeState start(const TerrainGrid& g) {
        EpisodeState s;
        s.pose = g.start_pose();
        auto [gx, gy] = g.goal_xy();
        s.goal_x = gx;
        s.goal_y = gy;
        return s;
    }
};

struct StepParams {
    double v_max{1.0};
    double omega_max{1.0};
    double goal_radius{0.5};
    int stuck_steps{5};
    int max_steps{400};
};

// Unicycle Euler step with terminal-status detection. Status transitions are
// monotone: a non-running state is returned unchanged-or-throws.
inline EpisodeState step_robot(const EpisodeState& state, const VelocityCommand& cmd, double dt,
                               const TerrainGrid& grid, const StepParams& params = StepParams{}) {
    if (state.status != Status::Running) throw std::logic_error("step_robot: episode not running");
    if (std::abs(cmd.v) > params.v_max + 1e-12 || std::abs(cmd.omega) > params.omega_max + 1e-12)
        throw std::invalid_argument("step_robot: command outside bounds");

    EpisodeState next = state;
    next.pose.x += cmd.v * std::cos(state.pose.theta) * dt;
    next.pose.y += cmd.v * std::sin(state.pose.theta) * dt;
    next.pose.theta = normalize_angle(state.pose.theta + cmd.omega * dt);
    next.elapsed_steps = state.elapsed_steps + 1;

    const Cell cell = grid.at_world(next.pose.x, next.pose.y);
    if (cell == Cell::Solid || !grid.in_bounds_world(next.pose.x, next.pose.y)) {
        next.status = Status::Collided;
        return next;
    }
    if (cell == Cell::NonTrav) {
        next.nontrav_streak = state.nontrav_streak + 1;
        if (next.nontrav_streak >= params.stuck_steps) {
            next.status = Status::Stuck;
            return next;
        }
    } else {
        next.nontrav_streak = 0;
    }

    const double ddx = next.pose.x - state.goal_x;
    const double ddy = next.pose.y - state.goal_y;
    if (std::sqrt(ddx * ddx + ddy * ddy) <= params.goal_radius) {
        next.status = Status::ReachedGoal;
        return next;
    }
    if (next.elapsed_steps >= params.max_steps) next.status = Status::Timeout;
    return next;
}

} // namespace graspe::sim
