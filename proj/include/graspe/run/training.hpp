#pragma once

#include <charconv>
#include <set>
#include <string>
#include <vector>

#include "graspe/fus/train.hpp"
#include "graspe/run/config.hpp"
#include "graspe/run/io.hpp"

namespace graspe::run {

// Shortest round-trip decimal formatting; keeps CSV/JSON output byte-stable.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline fus::TrainSample to_train_sample(const Sample& s, const ProjectConfig& cfg,
                                        bool force_full_reliability = false) {
    fus::TrainSample t;
    t.pre = fus::preprocess_observation(s.observation, cfg.encoders, cfg.rel_image, cfg.rel_cloud,
                                        force_full_reliability);
    t.label = s.label.probs;
    t.episode_id = s.world_seed;
    return t;
}

// Left-right mirror of a sample: flip rasters horizontally, negate cloud y
// and angular rates. Labels are invariant under the reflection.
inline Sample mirror_sample(const Sample& s) {
    Sample m = s;
    auto flip = [](ImageRaster& img) {
        ImageRaster out = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c)
                    out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
        img = out;
    };
    flip(m.observation.image);
    flip(m.observation.traj_image);
    for (auto& p : m.observation.cloud.points) p.y = -p.y;
    for (auto& c : m.observation.vel_history.commands) c.omega = -c.omega;
    return m;
}

// Episode-level 80/20 split: an episode's samples never straddle the split.
// Episodes are taken in first-appearance order; the trailing fraction becomes
// validation.
inline void split_by_episode(const std::vector<fus::TrainSample>& all, double val_fraction,
                             std::vector<fus::TrainSample>& train_out,
                             std::vector<fus::TrainSample>& val_out) {
    std::vector<std::uint64_t> episodes;
    for (const auto& s : all)
        if (std::find(episodes.begin(), episodes.end(), s.episode_id) == episodes.end())
            episodes.push_back(s.episode_id);
    const std::size_t n_val =
        static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(episodes.size())));
    const std::size_t n_train = episodes.size() - n_val;
    std::set<std::uint64_t> train_ids(episodes.begin(),
                                      episodes.begin() + static_cast<std::ptrdiff_t>(n_train));
    for (const auto& s : all)
        (train_ids.count(s.episode_id) != 0 ? train_out : val_out).push_back(s);
}

struct TrainingArtifacts {
    fus::TrainResult result;
    std::string log_csv;
    std::string checkpoint_bytes;
    double final_val_acc{0.0};
};

// Full training pass over a recorded dataset: preprocess, split by episode,
// run gradient descent, serialize the best checkpoint and the epoch log.
inline TrainingArtifacts run_training(const std::vector<Sample>& samples,
                                      std::uint64_t dataset_hash, const ProjectConfig& cfg) {
    std::vector<fus::TrainSample> all;
    all.reserve(samples.size());
    for (const auto& s : samples) all.push_back(to_train_sample(s, cfg));

    std::vector<fus::TrainSample> train_set, val_set;
    split_by_episode(all, cfg.train.val_fraction, train_set, val_set);

    // mirror augmentation on the training split only; the validation metric
    // stays on unaugmented data
    {
        std::set<std::uint64_t> train_ids;
        for (const auto& t : train_set) train_ids.insert(t.episode_id);
        for (const auto& s : samples)
            if (train_ids.count(s.world_seed) != 0)
                train_set.push_back(to_train_sample(mirror_sample(s), cfg));
    }

    auto enc_params = enc::EncoderParams::init(cfg.encoders, cfg.train.seed);
    auto gnn_params =
        fus::GnnParams::init(cfg.encoders.total_dim(), cfg.horizon, cfg.fusion, cfg.train.seed);

    TrainingArtifacts out;
    out.result = fus::train(train_set, val_set, std::move(enc_params), std::move(gnn_params),
                            cfg.encoders, cfg.fusion, cfg.train);

    std::string csv = "epoch,train_loss,val_loss,val_acc\n";
    for (const auto& row : out.result.log)
        csv += std::to_string(row.epoch) + "," + fmt_double(row.train_loss) + "," +
               fmt_double(row.val_loss) + "," + fmt_double(row.val_acc) + "\n";
    out.log_csv = std::move(csv);

    out.final_val_acc = fus::balanced_accuracy(val_set, out.result.enc_params,
                                               out.result.gnn_params, cfg.encoders, cfg.fusion);

    Checkpoint ckpt;
    ckpt.enc_params = out.result.enc_params;
    ckpt.gnn_params = out.result.gnn_params;
    json j;
    to_json(j, cfg);
    ckpt.config_json = j.dump();
    ckpt.dataset_hash = dataset_hash;
    out.checkpoint_bytes = encode_checkpoint(ckpt);
    return out;
}

} // namespace graspe::run
