#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "graspe/enc/encoders.hpp"
#include "graspe/fus/gnn.hpp"
#include "graspe/fus/train.hpp"
#include "graspe/plan/dwa.hpp"
#include "graspe/rel/cloud.hpp"
#include "graspe/rel/image.hpp"
#include "graspe/sim/episode.hpp"
#include "graspe/sim/sensors.hpp"
#include "graspe/sim/terrain.hpp"

namespace graspe::run {

using json = nlohmann::json;

struct HarnessConfig {
    int episodes{60};
    std::uint64_t seed{0};
    // dataset difficulty mix, frozen defaults; weights need not sum to 1
    std::map<std::string, double> mix{{"open", 0.10},
                                      {"cluttered", 0.50},
                                      {"dark", 0.10},
                                      {"occluded", 0.15},
                                      {"combined", 0.15}};
    int record_max_steps{80}; // recording episode cap; eval uses step.max_steps
    int threads{2};
};

struct ProjectConfig {
    int horizon{10}; // T, shared across history, labels, rollouts
    std::uint64_t seed{0};

    sim::WorldParams world;
    sim::CameraParams camera;
    sim::LidarParams lidar;
    sim::StepParams step;

    rel::RelImageParams rel_image;
    rel::RelCloudParams rel_cloud;

    enc::EncoderConfig encoders;
    fus::FusionConfig fusion;
    fus::TrainConfig train;

    plan::PlannerConfig planner;

    HarnessConfig harness;

    // Keeps the cross-module copies of shared values consistent.
    void sync() {
        encoders.horizon = horizon;
        encoders.image_width = camera.width;
        encoders.image_height = camera.height;
        encoders.v_max = planner.v_max;
        encoders.omega_max = planner.omega_max;
        encoders.hist_max_range = lidar.max_range;
        planner.horizon = horizon;
        step.v_max = planner.v_max;
        step.omega_max = planner.omega_max;
    }
};

inline void to_json(json& j, const ProjectConfig& c) {
    j = json{
        {"core", {{"horizon", c.horizon}, {"seed", c.seed}}},
        {"simworld",
         {{"grid_width", c.world.grid_width},
          {"grid_height", c.world.grid_height},
          {"cell_size", c.world.cell_size},
          {"max_generation_attempts", c.world.max_generation_attempts},
          {"preset_version", c.world.preset_version},
          {"goal_radius", c.step.goal_radius},
          {"stuck_steps", c.step.stuck_steps},
          {"max_steps", c.step.max_steps},
          {"camera_width", c.camera.width},
          {"camera_height", c.camera.height},
          {"camera_fov", c.camera.fov},
          {"camera_max_view", c.camera.max_view},
          {"camera_height_m", c.camera.cam_height},
          {"lidar_rings", c.lidar.rings},
          {"lidar_azimuths", c.lidar.azimuths},
          {"lidar_fov", c.lidar.fov},
          {"lidar_max_range", c.lidar.max_range},
          {"lidar_min_range", c.lidar.min_range},
          {"lidar_noise_sigma", c.lidar.noise_sigma},
          {"scatter_perturb", c.lidar.perturb_radius},
          {"p_scatter_pliable", c.lidar.p_scatter_pliable},
          {"p_scatter_nontrav", c.lidar.p_scatter_nontrav}}},
        {"reliability",
         {{"alpha_b", c.rel_image.alpha_b},
          {"alpha_c", c.rel_image.alpha_c},
          {"corner_norm", c.rel_image.corner_norm},
          {"fast_threshold", c.rel_image.fast_threshold},
          {"fast_arc", c.rel_image.fast_arc},
          {"c_max", c.rel_cloud.c_max},
          {"c_min", c.rel_cloud.c_min},
          {"beta_e", c.rel_cloud.beta_e},
          {"beta_p", c.rel_cloud.beta_p},
          {"neighborhood_m", c.rel_cloud.neighborhood_m}}},
        {"encoders",
         {{"img_dim", c.encoders.img_dim},
          {"point_dim", c.encoders.point_dim},
          {"vel_dim", c.encoders.vel_dim},
          {"traj_dim", c.encoders.traj_dim},
          {"img_hidden", c.encoders.img_hidden},
          {"traj_hidden", c.encoders.traj_hidden},
          {"downsample", c.encoders.downsample},
          {"hist_azimuth_bins", c.encoders.hist_azimuth_bins},
          {"hist_range_bins", c.encoders.hist_range_bins}}},
        {"fusion",
         {{"lambda", c.fusion.lambda},
          {"w_min", c.fusion.w_min},
          {"invert_reliability", c.fusion.invert_reliability},
          {"gcn_width", c.fusion.gcn_width},
          {"leaky_slope", c.fusion.leaky_slope},
          {"lr", c.train.lr},
          {"batch_size", c.train.batch_size},
          {"epochs", c.train.epochs},
          {"lr_decay", c.train.lr_decay},
          {"lr_decay_every", c.train.lr_decay_every},
          {"l2", c.train.l2},
          {"train_seed", c.train.seed},
          {"val_fraction", c.train.val_fraction}}},
        {"planner",
         {{"gamma1", c.planner.gamma1},
          {"gamma2", c.planner.gamma2},
          {"gamma3", c.planner.gamma3},
          {"r_th", c.planner.r_th},
          {"e_th", c.planner.e_th},
          {"v_max", c.planner.v_max},
          {"omega_max", c.planner.omega_max},
          {"accel_v", c.planner.accel_v},
          {"accel_omega", c.planner.accel_omega},
          {"dv", c.planner.dv},
          {"domega", c.planner.domega},
          {"dt", c.planner.dt},
          {"clearance", c.planner.clearance},
          {"d_clip", c.planner.d_clip},
          {"window_m", c.planner.window_m}}},
        {"harness",
         {{"episodes", c.harness.episodes},
          {"seed", c.harness.seed},
          {"mix", c.harness.mix},
          {"record_max_steps", c.harness.record_max_steps},
          {"threads", c.harness.threads}}},
    };
}

inline void from_json(const json& j, ProjectConfig& c) {
    auto get = [](const json& obj, const char* key, auto& out) {
        if (obj.contains(key)) obj.at(key).get_to(out);
    };
    if (j.contains("core")) {
        get(j["core"], "horizon", c.horizon);
        get(j["core"], "seed", c.seed);
    }
    if (j.contains("simworld")) {
        const auto& s = j["simworld"];
        get(s, "grid_width", c.world.grid_width);
        get(s, "grid_height", c.world.grid_height);
        get(s, "cell_size", c.world.cell_size);
        get(s, "max_generation_attempts", c.world.max_generation_attempts);
        get(s, "preset_version", c.world.preset_version);
        get(s, "goal_radius", c.step.goal_radius);
        get(s, "stuck_steps", c.step.stuck_steps);
        get(s, "max_steps", c.step.max_steps);
        get(s, "camera_width", c.camera.width);
        get(s, "camera_height", c.camera.height);
        get(s, "camera_fov", c.camera.fov);
        get(s, "camera_max_view", c.camera.max_view);
        get(s, "camera_height_m", c.camera.cam_height);
        get(s, "lidar_rings", c.lidar.rings);
        get(s, "lidar_azimuths", c.lidar.azimuths);
        get(s, "lidar_fov", c.lidar.fov);
        get(s, "lidar_max_range", c.lidar.max_range);
        get(s, "lidar_min_range", c.lidar.min_range);
        get(s, "lidar_noise_sigma", c.lidar.noise_sigma);
        get(s, "scatter_perturb", c.lidar.perturb_radius);
        get(s, "p_scatter_pliable", c.lidar.p_scatter_pliable);
        get(s, "p_scatter_nontrav", c.lidar.p_scatter_nontrav);
    }
    if (j.contains("reliability")) {
        const auto& s = j["reliability"];
        get(s, "alpha_b", c.rel_image.alpha_b);
        get(s, "alpha_c", c.rel_image.alpha_c);
        get(s, "corner_norm", c.rel_image.corner_norm);
        get(s, "fast_threshold", c.rel_image.fast_threshold);
        get(s, "fast_arc", c.rel_image.fast_arc);
        get(s, "c_max", c.rel_cloud.c_max);
        get(s, "c_min", c.rel_cloud.c_min);
        get(s, "beta_e", c.rel_cloud.beta_e);
        get(s, "beta_p", c.rel_cloud.beta_p);
        get(s, "neighborhood_m", c.rel_cloud.neighborhood_m);
    }
    if (j.contains("encoders")) {
        const auto& s = j["encoders"];
        get(s, "img_dim", c.encoders.img_dim);
        get(s, "point_dim", c.encoders.point_dim);
        get(s, "vel_dim", c.encoders.vel_dim);
        get(s, "traj_dim", c.encoders.traj_dim);
        get(s, "img_hidden", c.encoders.img_hidden);
        get(s, "traj_hidden", c.encoders.traj_hidden);
        get(s, "downsample", c.encoders.downsample);
        get(s, "hist_azimuth_bins", c.encoders.hist_azimuth_bins);
        get(s, "hist_range_bins", c.encoders.hist_range_bins);
    }
    if (j.contains("fusion")) {
        const auto& s = j["fusion"];
        get(s, "lambda", c.fusion.lambda);
        get(s, "w_min", c.fusion.w_min);
        get(s, "invert_reliability", c.fusion.invert_reliability);
        get(s, "gcn_width", c.fusion.gcn_width);
        get(s, "leaky_slope", c.fusion.leaky_slope);
        get(s, "lr", c.train.lr);
        get(s, "batch_size", c.train.batch_size);
        get(s, "epochs", c.train.epochs);
        get(s, "lr_decay", c.train.lr_decay);
        get(s, "lr_decay_every", c.train.lr_decay_every);
        get(s, "l2", c.train.l2);
        get(s, "train_seed", c.train.seed);
        get(s, "val_fraction", c.train.val_fraction);
    }
    if (j.contains("planner")) {
        const auto& s = j["planner"];
        get(s, "gamma1", c.planner.gamma1);
        get(s, "gamma2", c.planner.gamma2);
        get(s, "gamma3", c.planner.gamma3);
        get(s, "r_th", c.planner.r_th);
        get(s, "e_th", c.planner.e_th);
        get(s, "v_max", c.planner.v_max);
        get(s, "omega_max", c.planner.omega_max);
        get(s, "accel_v", c.planner.accel_v);
        get(s, "accel_omega", c.planner.accel_omega);
        get(s, "dv", c.planner.dv);
        get(s, "domega", c.planner.domega);
        get(s, "dt", c.planner.dt);
        get(s, "clearance", c.planner.clearance);
        get(s, "d_clip", c.planner.d_clip);
        get(s, "window_m", c.planner.window_m);
    }
    if (j.contains("harness")) {
        const auto& s = j["harness"];
        get(s, "episodes", c.harness.episodes);
        get(s, "seed", c.harness.seed);
        get(s, "mix", c.harness.mix);
        get(s, "record_max_steps", c.harness.record_max_steps);
        get(s, "threads", c.harness.threads);
    }
    c.sync();
}

inline ProjectConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    ProjectConfig c;
    from_json(j, c);
    return c;
}

// Dotted-path override, e.g. "planner.e_th=0.6". Values parse as JSON when
// possible, else as strings.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("override must look like section.key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw std::runtime_error("bad override path: " + path);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t config_hash(const ProjectConfig& c) {
    json j;
    to_json(j, c);
    const std::string s = j.dump();
    return fnv1a(s.data(), s.size());
}

} // namespace graspe::run
