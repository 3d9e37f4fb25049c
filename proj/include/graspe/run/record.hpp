#pragma once

#include <future>
#include <map>
#include <string>
#include <vector>

#include "graspe/plan/dwa.hpp"
#include "graspe/rel/cloud.hpp"
#include "graspe/run/config.hpp"
#include "graspe/run/io.hpp"
#include "graspe/sim/episode.hpp"
#include "graspe/sim/sensors.hpp"

namespace graspe::run {

// Stream ids for per-episode RNG derivation.
namespace streams {
inline constexpr std::uint64_t kWorld = 1;
inline constexpr std::uint64_t kPolicy = 2;
inline constexpr std::uint64_t kStartPose = 3;
inline constexpr std::uint64_t kLidarBase = 1u << 20;
} // namespace streams

// Randomized-planner exploration policy: the body runs the obstacle-aware
// dynamic-window planner toward an attract point (so command histories,
// approach geometry and creep phases match what the closed loop produces),
// while with probability p_probe a step executes a uniformly random command
// instead. The probes show the same scene under many candidate trajectories,
// which the trajectory branch of the prediction model needs; probe rollouts
// are resampled off the border ring so arena walls never dominate the labels.
struct RandomizedPlannerPolicy {
    Rng rng;
    VelocityCommand current{0.0, 0.0};
    double p_probe{0.5};
    double p_rotation_burst{0.06};
    double attract_x{0.0}, attract_y{0.0};
    bool use_va{true}; // blind mode drives brush-facing episodes to contact
    int burst_left{0};
    double burst_omega{0.0};

    VelocityCommand next(const Pose2D& pose, const PointCloud& cloud, double r_point,
                         const sim::TerrainGrid& grid, const plan::PlannerConfig& cfg) {
        // recovery-style rotation bursts, so the closed loop's rotate-in-place
        // histories are familiar at inference time
        if (burst_left > 0) {
            --burst_left;
            current = {0.0, burst_omega};
            return current;
        }
        if (rng.next_double() < p_rotation_burst) {
            burst_left = rng.uniform_int(1, 3);
            burst_omega = (rng.next_double() < 0.5 ? -1.0 : 1.0) * cfg.omega_max / 2.0;
            current = {0.0, burst_omega};
            return current;
        }
        if (rng.next_double() < p_probe) {
            for (int attempt = 0; attempt < 8; ++attempt) {
                VelocityCommand probe{cfg.v_max * std::sqrt(rng.next_double()),
                                      rng.uniform(-cfg.omega_max, cfg.omega_max)};
                if (rollout_stays_interior(pose, probe, grid, cfg)) {
                    current = probe;
                    return current;
                }
            }
        }

        plan::PlanInputs in;
        in.pose = pose;
        in.current_vel = current;
        in.goal_x = attract_x;
        in.goal_y = attract_y;
        in.image = ImageRaster::filled(1, 1, 1, 0); // all-ones predictor ignores it
        in.cloud = cloud;
        in.vel_history = VelocityHistory::zeros(cfg.horizon);
        in.r_point = r_point;
        const int horizon = cfg.horizon;
        const auto all_ones = [horizon](const Observation&, double, double) {
            return SuccessVector::ones(horizon);
        };
        if (use_va) {
            current = plan::plan_step(in, all_ones, cfg, /*force_va_on=*/true).cmd;
        } else {
            in.cloud = PointCloud{};
            in.r_point = 0.0;
            current = plan::plan_step(in, all_ones, cfg).cmd;
        }
        return current;
    }

    static bool rollout_stays_interior(const Pose2D& pose, const VelocityCommand& cmd,
                                       const sim::TerrainGrid& grid,
                                       const plan::PlannerConfig& cfg) {
        const double pad = grid.cell_size + 0.1;
        const double wx = grid.width * grid.cell_size, wy = grid.height * grid.cell_size;
        for (const Pose2D& p : plan::predict_trajectory(pose, cmd, cfg.dt, cfg.horizon))
            if (p.x < pad || p.y < pad || p.x > wx - pad || p.y > wy - pad) return false;
        return true;
    }
};

inline std::uint64_t episode_world_seed(std::uint64_t run_seed, int episode_index) {
    return mix_seed(run_seed, streams::kWorld + static_cast<std::uint64_t>(episode_index));
}

// Deterministic difficulty assignment proportional to the mix weights.
inline std::vector<sim::Difficulty> difficulty_schedule(const std::map<std::string, double>& mix,
                                                        int episodes) {
    double total = 0.0;
    for (const auto& [name, wgt] : mix) {
        if (wgt < 0.0) throw std::runtime_error("difficulty mix: negative weight");
        total += wgt;
    }
    if (total <= 0.0) throw std::runtime_error("difficulty mix: empty");
    std::vector<sim::Difficulty> schedule;
    schedule.reserve(static_cast<std::size_t>(episodes));
    double acc = 0.0;
    // largest-remainder apportionment keeps counts stable across runs
    std::vector<std::pair<sim::Difficulty, double>> weighted;
    for (const auto& [name, wgt] : mix)
        weighted.emplace_back(sim::difficulty_from_name(name), wgt / total);
    for (int e = 0; e < episodes; ++e) {
        acc += 1.0;
        // round-robin through the CDF
        double u = (e + 0.5) / episodes;
        double cum = 0.0;
        for (const auto& [d, w] : weighted) {
            cum += w;
            if (u <= cum + 1e-12) {
                schedule.push_back(d);
                break;
            }
        }
        if (static_cast<int>(schedule.size()) != e + 1) schedule.push_back(weighted.back().first);
    }
    return schedule;
}

// Deterministic random start pose for a recording episode. Two thirds of the
// episodes spawn 1-3 m from a hazard cell facing it, so the dataset is rich
// in scenes where the outcome depends on the candidate trajectory rather than
// on the scene alone; the rest spawn anywhere free with a random heading.
struct RecordSpawn {
    Pose2D pose;
    double attract_x{0.0}, attract_y{0.0};
    bool planner_avoids{true}; // brush-facing episodes drive in blind
};

inline RecordSpawn record_spawn(const sim::TerrainGrid& grid, Rng& rng) {
    auto free_at = [&](double x, double y) {
        return grid.in_bounds_world(x, y) && grid.at_world(x, y) == sim::Cell::Free;
    };

    // interior target cells by kind: brush/pillar approaches teach failures,
    // grass approaches teach that pliable crossings succeed
    std::vector<std::pair<int, int>> blocking, grass;
    for (int cy = 2; cy < grid.height - 2; ++cy)
        for (int cx = 2; cx < grid.width - 2; ++cx) {
            const sim::Cell c = grid.at(cx, cy);
            if (c == sim::Cell::NonTrav || c == sim::Cell::Solid) blocking.emplace_back(cx, cy);
            if (c == sim::Cell::Pliable) grass.emplace_back(cx, cy);
        }

    const double u = rng.next_double();
    const std::vector<std::pair<int, int>>* targets = nullptr;
    if (u < 0.60 && !blocking.empty())
        targets = &blocking;
    else if (u < 0.78 && !grass.empty())
        targets = &grass;

    for (int attempt = 0; attempt < 200; ++attempt) {
        if (targets != nullptr) {
            const auto [cx, cy] = (*targets)[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(targets->size()) - 1))];
            const double hx = grid.cell_center_x(cx), hy = grid.cell_center_y(cy);
            const double bearing = rng.uniform(-kPi, kPi);
            const double dist = rng.uniform(1.6, 3.2);
            const double x = hx + dist * std::cos(bearing);
            const double y = hy + dist * std::sin(bearing);
            if (!free_at(x, y)) continue;
            const double heading = normalize_angle(std::atan2(hy - y, hx - x) + rng.uniform(-0.5, 0.5));
            return {Pose2D(x, y, heading), hx, hy, targets == &grass};
        }
        const double x = rng.uniform(1.0, grid.width * grid.cell_size - 1.0);
        const double y = rng.uniform(1.0, grid.height * grid.cell_size - 1.0);
        if (!free_at(x, y)) continue;
        auto [gx, gy] = grid.goal_xy();
        return {Pose2D(x, y, rng.uniform(-kPi, kPi)), gx, gy, true};
    }
    auto [gx, gy] = grid.goal_xy();
    return {grid.start_pose(), gx, gy, true};
}

// One recorded episode: at every step the current command's rollout is
// labeled against the ground truth and stored with the raw observation. The
// first `horizon` steps are a warm-up that fills the velocity history with
// real motion before any sample is written.
inline std::vector<Sample> record_episode(std::uint64_t world_seed, sim::Difficulty difficulty,
                                          const ProjectConfig& cfg) {
    const sim::TerrainGrid grid = sim::generate_world(world_seed, difficulty, cfg.world);
    sim::StepParams step_params = cfg.step;
    step_params.max_steps = std::min(step_params.max_steps, cfg.harness.record_max_steps);
    sim::EpisodeState state = sim::EpisodeState::start(grid);
    RandomizedPlannerPolicy policy{Rng(mix_seed(world_seed, streams::kPolicy))};
    {
        Rng start_rng(mix_seed(world_seed, streams::kStartPose));
        const RecordSpawn spawn = record_spawn(grid, start_rng);
        state.pose = spawn.pose;
        policy.attract_x = spawn.attract_x;
        policy.attract_y = spawn.attract_y;
        policy.use_va = spawn.planner_avoids;
    }
    VelocityHistory hist = VelocityHistory::zeros(cfg.horizon);

    std::vector<Sample> samples;
    while (state.status == sim::Status::Running) {
        Rng lidar_rng(mix_seed(world_seed, streams::kLidarBase + state.elapsed_steps));
        const PointCloud cloud = sim::render_lidar(grid, state.pose, lidar_rng, cfg.lidar);
        const double r_point = rel::cloud_reliability(cloud, cfg.rel_cloud).r_point;
        const VelocityCommand cmd = policy.next(state.pose, cloud, r_point, grid, cfg.planner);

        if (state.elapsed_steps >= cfg.horizon) {
            Sample s;
            s.world_seed = world_seed;
            s.difficulty = difficulty;
            s.step_index = state.elapsed_steps;
            s.observation.image = sim::render_camera(grid, state.pose, cfg.camera);
            s.observation.cloud = cloud;
            s.observation.vel_history = hist;
            const auto world_traj =
                plan::predict_trajectory(state.pose, cmd, cfg.planner.dt, cfg.horizon);
            const auto robot_traj = plan::predict_trajectory(Pose2D{}, cmd, cfg.planner.dt, cfg.horizon);
            s.observation.traj_image = plan::rasterize_trajectory(
                robot_traj, cfg.camera.width, cfg.camera.height, cfg.planner.window_m);
            s.label = sim::ground_truth_labels(grid, world_traj);
            samples.push_back(std::move(s));
        }

        state = sim::step_robot(state, cmd, cfg.planner.dt, grid, step_params);
        hist.push(cmd);
    }
    return samples;
}

struct RecordStats {
    int episodes{0};
    long positives{0}; // all-ones labels
    long negatives{0};
    long step_ones{0};
    long step_zeros{0};

    double negative_fraction() const {
        const long n = positives + negatives;
        return n > 0 ? static_cast<double>(negatives) / static_cast<double>(n) : 0.0;
    }
};

// Records num_episodes across the difficulty mix; deterministic in (seed,
// mix); episodes may run in parallel, aggregation is by episode index.
inline std::vector<Sample> record_dataset(int num_episodes, const std::map<std::string, double>& mix,
                                          std::uint64_t seed, const ProjectConfig& cfg,
                                          RecordStats* stats_out = nullptr, int threads = 2) {
    const auto schedule = difficulty_schedule(mix, num_episodes);
    std::vector<std::vector<Sample>> per_episode(static_cast<std::size_t>(num_episodes));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int e = next.fetch_add(1);
            if (e >= num_episodes) break;
            per_episode[static_cast<std::size_t>(e)] =
                record_episode(episode_world_seed(seed, e), schedule[static_cast<std::size_t>(e)], cfg);
        }
    };
    std::vector<std::future<void>> futs;
    const int n_threads = std::max(1, threads);
    for (int t = 0; t < n_threads - 1; ++t) futs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : futs) f.get();

    std::vector<Sample> all;
    RecordStats stats;
    stats.episodes = num_episodes;
    for (auto& ep : per_episode)
        for (auto& s : ep) {
            bool all_ones = true;
            for (double v : s.label.probs) {
                (v >= 0.5 ? stats.step_ones : stats.step_zeros) += 1;
                if (v < 0.5) all_ones = false;
            }
            (all_ones ? stats.positives : stats.negatives) += 1;
            all.push_back(std::move(s));
        }
    if (stats_out != nullptr) *stats_out = stats;
    return all;
}

} // namespace graspe::run
