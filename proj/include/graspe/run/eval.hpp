#pragma once

#include <atomic>
#include <future>
#include <string>
#include <vector>

#include "graspe/fus/pipeline.hpp"
#include "graspe/plan/dwa.hpp"
#include "graspe/run/config.hpp"
#include "graspe/run/io.hpp"
#include "graspe/run/record.hpp"

namespace graspe::run {

enum class Suite : int { Graspe = 0, GraspeNoReliability = 1, DwaBaseline = 2 };

inline const char* suite_name(Suite s) {
    switch (s) {
        case Suite::Graspe: return "graspe";
        case Suite::GraspeNoReliability: return "graspe_no_reliability";
        case Suite::DwaBaseline: return "dwa_baseline";
    }
    throw std::invalid_argument("suite_name: bad value");
}

inline Suite suite_from_name(const std::string& s) {
    for (int i = 0; i <= 2; ++i)
        if (s == suite_name(static_cast<Suite>(i))) return static_cast<Suite>(i);
    throw std::invalid_argument("unknown suite: " + s);
}

struct EpisodeReport {
    Suite suite{Suite::Graspe};
    sim::Difficulty difficulty{sim::Difficulty::Open};
    int episode_index{0};
    std::uint64_t world_seed{0};
    sim::Status status{sim::Status::Running};
    int steps{0};
    double path_length{0.0};
    double straight_dist{0.0};
    double normalized_length{0.0};
    int vetoes{0};
    int recoveries{0};
    std::vector<double> r_img_trace;
    std::vector<double> r_point_trace;
    std::vector<std::pair<double, double>> path; // executed world-frame positions
};

// Closed-loop episode under one evaluation suite. The observation stream is a
// pure function of (world seed, step index, executed commands), so identical
// seeds reproduce identical episodes.
inline EpisodeReport run_episode(std::uint64_t world_seed, sim::Difficulty difficulty, Suite suite,
                                 const enc::EncoderParams& enc_params,
                                 const fus::GnnParams& gnn_params, const ProjectConfig& cfg,
                                 int episode_index = 0) {
    const sim::TerrainGrid grid = sim::generate_world(world_seed, difficulty, cfg.world);
    sim::EpisodeState state = sim::EpisodeState::start(grid);
    VelocityHistory hist = VelocityHistory::zeros(cfg.horizon);
    VelocityCommand current{0.0, 0.0};

    EpisodeReport rep;
    rep.suite = suite;
    rep.difficulty = difficulty;
    rep.episode_index = episode_index;
    rep.world_seed = world_seed;
    {
        auto [gx, gy] = grid.goal_xy();
        rep.straight_dist = std::hypot(gx - state.pose.x, gy - state.pose.y);
    }
    rep.path.emplace_back(state.pose.x, state.pose.y);

    const bool force_reliable = suite == Suite::GraspeNoReliability;
    const bool force_va = suite != Suite::Graspe;

    while (state.status == sim::Status::Running) {
        plan::PlanInputs in;
        in.pose = state.pose;
        in.current_vel = current;
        auto [gx, gy] = grid.goal_xy();
        in.goal_x = gx;
        in.goal_y = gy;
        in.image = sim::render_camera(grid, state.pose, cfg.camera);
        Rng lidar_rng(mix_seed(world_seed, streams::kLidarBase + state.elapsed_steps));
        in.cloud = sim::render_lidar(grid, state.pose, lidar_rng, cfg.lidar);
        in.vel_history = hist;
        if (force_reliable) {
            in.r_img = 1.0;
            in.r_point = 1.0;
        } else {
            in.r_img = rel::image_reliability(in.image, cfg.rel_image).r_img;
            in.r_point = rel::cloud_reliability(in.cloud, cfg.rel_cloud).r_point;
        }

        plan::Predictor predictor;
        if (suite == Suite::DwaBaseline) {
            const int horizon = cfg.horizon;
            predictor = [horizon](const Observation&, double, double) {
                return SuccessVector::ones(horizon);
            };
        } else {
            // image/cloud/velocity featurizations are shared across the veto
            // loop's candidates; only the trajectory raster varies
            fus::PreObs base;
            base.u_img = enc::block_average(in.image, cfg.encoders);
            base.u_hist = enc::polar_histogram(in.cloud, cfg.encoders);
            base.u_vel = enc::velocity_features(in.vel_history, cfg.encoders);
            base.r_img = in.r_img;
            base.r_point = in.r_point;
            predictor = [base, &enc_params, &gnn_params, &cfg](const Observation& obs, double,
                                                               double) mutable {
                fus::PreObs pre = base;
                pre.u_traj = enc::block_average(obs.traj_image, cfg.encoders);
                return fus::predict_pre(pre, enc_params, gnn_params, cfg.encoders, cfg.fusion);
            };
        }

        const plan::PlanResult plan = plan::plan_step(in, predictor, cfg.planner, force_va);
        rep.vetoes += plan.vetoes;
        rep.recoveries += plan.recovery ? 1 : 0;
        rep.r_img_trace.push_back(in.r_img);
        rep.r_point_trace.push_back(in.r_point);

        const Pose2D before = state.pose;
        state = sim::step_robot(state, plan.cmd, cfg.planner.dt, grid, cfg.step);
        rep.path_length += std::hypot(state.pose.x - before.x, state.pose.y - before.y);
        rep.path.emplace_back(state.pose.x, state.pose.y);
        hist.push(plan.cmd);
        current = plan.cmd;
    }

    rep.status = state.status;
    rep.steps = state.elapsed_steps;
    rep.normalized_length = rep.straight_dist > 0.0 ? rep.path_length / rep.straight_dist : 0.0;
    return rep;
}

struct SuiteSummary {
    Suite suite{Suite::Graspe};
    sim::Difficulty difficulty{sim::Difficulty::Open};
    int episodes{0};
    int successes{0};
    double success_rate{0.0};
    double norm_len_success{0.0}; // mean over successful episodes
    double norm_len_fail{0.0};    // mean over failed episodes
    double mean_vetoes{0.0};
};

inline SuiteSummary summarize(const std::vector<EpisodeReport>& reports, Suite suite,
                              sim::Difficulty difficulty) {
    SuiteSummary s;
    s.suite = suite;
    s.difficulty = difficulty;
    double len_ok = 0.0, len_fail = 0.0, vetoes = 0.0;
    int n_ok = 0, n_fail = 0;
    for (const auto& r : reports) {
        if (r.suite != suite || r.difficulty != difficulty) continue;
        ++s.episodes;
        vetoes += r.vetoes;
        if (r.status == sim::Status::ReachedGoal) {
            ++n_ok;
            len_ok += r.normalized_length;
        } else {
            ++n_fail;
            len_fail += r.normalized_length;
        }
    }
    s.successes = n_ok;
    s.success_rate = s.episodes > 0 ? static_cast<double>(n_ok) / s.episodes : 0.0;
    s.norm_len_success = n_ok > 0 ? len_ok / n_ok : 0.0;
    s.norm_len_fail = n_fail > 0 ? len_fail / n_fail : 0.0;
    s.mean_vetoes = s.episodes > 0 ? vetoes / s.episodes : 0.0;
    return s;
}

// Runs `episodes` per (suite, difficulty) pair over a shared seed set;
// parallel across episodes with index-ordered aggregation.
inline std::vector<EpisodeReport> run_eval(const std::vector<Suite>& suites,
                                           const std::vector<sim::Difficulty>& difficulties,
                                           int episodes, std::uint64_t seed,
                                           const enc::EncoderParams& enc_params,
                                           const fus::GnnParams& gnn_params,
                                           const ProjectConfig& cfg, int threads = 2) {
    struct Job {
        Suite suite;
        sim::Difficulty difficulty;
        int index;
        std::uint64_t world_seed;
    };
    std::vector<Job> jobs;
    for (const Suite suite : suites)
        for (const sim::Difficulty d : difficulties)
            for (int e = 0; e < episodes; ++e)
                jobs.push_back({suite, d, e, episode_world_seed(seed, e)});

    std::vector<EpisodeReport> reports(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& j = jobs[i];
            reports[i] = run_episode(j.world_seed, j.difficulty, j.suite, enc_params, gnn_params,
                                     cfg, j.index);
        }
    };
    std::vector<std::future<void>> futs;
    for (int t = 0; t < std::max(1, threads) - 1; ++t)
        futs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : futs) f.get();
    return reports;
}

} // namespace graspe::run
