#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "graspe/fus/pipeline.hpp"

namespace graspe::fus {

struct TrainConfig {
    double lr{0.3};
    int batch_size{16};
    int epochs{140};
    double lr_decay{0.5};    // multiplier applied every lr_decay_every epochs
    int lr_decay_every{30};  // 0 disables the schedule
    double l2{3e-5};
    std::uint64_t seed{0};
    double val_fraction{0.2};
};

struct TrainSample {
    PreObs pre;
    Vec label; // binary, length T
    std::uint64_t episode_id{0};
};

struct EpochLog {
    int epoch{0};
    double train_loss{0.0};
    double val_loss{0.0};
    double val_acc{0.0}; // balanced per-step accuracy at threshold 0.5
};

struct TrainResult {
    enc::EncoderParams enc_params;
    GnnParams gnn_params;
    std::vector<EpochLog> log;
    int best_epoch{0};
    double best_val_loss{0.0};
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Balanced per-step accuracy: mean of true-positive and true-negative rates
// over all (sample, step) pairs, threshold 0.5. Robust to class imbalance; a
// constant predictor scores 0.5.
inline double balanced_accuracy(const std::vector<TrainSample>& set,
                                const enc::EncoderParams& ep, const GnnParams& gp,
                                const enc::EncoderConfig& enc_cfg, const FusionConfig& fus_cfg) {
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (const auto& s : set) {
        const ForwardCache c = forward_full(s.pre, ep, gp, enc_cfg, fus_cfg);
        for (std::size_t k = 0; k < s.label.size(); ++k) {
            const bool pred = c.gnn.y[k] >= 0.5;
            if (s.label[k] >= 0.5) {
                pred ? ++tp : ++fn;
            } else {
                pred ? ++fp : ++tn;
            }
        }
    }
    const double tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
    const double tnr = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 1.0;
    return 0.5 * (tpr + tnr);
}

inline double mean_loss(const std::vector<TrainSample>& set, const enc::EncoderParams& ep,
                        const GnnParams& gp, const enc::EncoderConfig& enc_cfg,
                        const FusionConfig& fus_cfg) {
    if (set.empty()) return 0.0;
    double s = 0.0;
    for (const auto& sample : set)
        s += bce_loss(forward_full(sample.pre, ep, gp, enc_cfg, fus_cfg).gnn.y, sample.label);
    return s / static_cast<double>(set.size());
}

namespace detail {

// weight decay applies to weights only; biases stay unregularized
inline void apply_dense(enc::DenseLayer& p, const enc::DenseLayer& g, double lr, double inv_n,
                        double l2) {
    for (std::size_t i = 0; i < p.w.a.size(); ++i) p.w.a[i] -= lr * (g.w.a[i] * inv_n + l2 * p.w.a[i]);
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= lr * g.b[i] * inv_n;
}

inline void apply_matrix(Matrix& p, const Matrix& g, double lr, double inv_n, double l2) {
    for (std::size_t i = 0; i < p.a.size(); ++i) p.a[i] -= lr * (g.a[i] * inv_n + l2 * p.a[i]);
}

inline void apply_vec(Vec& p, const Vec& g, double lr, double inv_n, double l2) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * (g[i] * inv_n + l2 * p[i]);
}

inline void apply_bias(Vec& p, const Vec& g, double lr, double inv_n) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i] * inv_n;
}

} // namespace detail

// Plain mini-batch gradient descent with L2 decay and a stepped learning-rate
// schedule; deterministic given the seed (fixed shuffle and reduction order,
// single-threaded). Returns the best-validation checkpoint: highest balanced
// accuracy, validation loss as tie-break, earliest epoch wins.
inline TrainResult train(const std::vector<TrainSample>& train_set,
                         const std::vector<TrainSample>& val_set, enc::EncoderParams enc_params,
                         GnnParams gnn_params, const enc::EncoderConfig& enc_cfg,
                         const FusionConfig& fus_cfg, const TrainConfig& cfg) {
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    {
        bool has_pos = false, has_neg = false;
        for (const auto& s : train_set)
            for (double v : s.label) (v >= 0.5 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg)
            throw std::invalid_argument("train: training set must contain both label classes");
    }

    Rng shuffle_rng(mix_seed(cfg.seed, 0x5463ULL));
    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    double best_acc = -1.0;
    enc::EncoderParams best_enc = enc_params;
    GnnParams best_gnn = gnn_params;

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    double lr = cfg.lr;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.lr_decay_every > 0 && epoch > 0 && epoch % cfg.lr_decay_every == 0)
            lr *= cfg.lr_decay;
        // Fisher-Yates with the project RNG for cross-platform determinism.
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(shuffle_rng.uniform_int(0, i))]);

        double epoch_loss = 0.0;
        std::size_t done = 0;
        while (done < order.size()) {
            const std::size_t batch_n =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - done);
            Grads grads;
            grads.enc = EncGrads::zeros_like(enc_params);
            grads.gnn = GnnGrads::zeros_like(gnn_params);
            for (std::size_t b = 0; b < batch_n; ++b) {
                const auto& sample = train_set[static_cast<std::size_t>(order[done + b])];
                epoch_loss += loss_and_grads(sample.pre, sample.label, enc_params, gnn_params,
                                             enc_cfg, fus_cfg, grads);
            }
            done += batch_n;

            const double inv_n = 1.0 / static_cast<double>(batch_n);
            detail::apply_dense(enc_params.img1, grads.enc.img1, lr, inv_n, cfg.l2);
            detail::apply_dense(enc_params.img2, grads.enc.img2, lr, inv_n, cfg.l2);
            detail::apply_dense(enc_params.point1, grads.enc.point1, lr, inv_n, cfg.l2);
            detail::apply_dense(enc_params.vel1, grads.enc.vel1, lr, inv_n, cfg.l2);
            detail::apply_dense(enc_params.traj1, grads.enc.traj1, lr, inv_n, cfg.l2);
            detail::apply_dense(enc_params.traj2, grads.enc.traj2, lr, inv_n, cfg.l2);
            detail::apply_matrix(gnn_params.theta1, grads.gnn.theta1, lr, inv_n, cfg.l2);
            detail::apply_matrix(gnn_params.theta2, grads.gnn.theta2, lr, inv_n, cfg.l2);
            detail::apply_matrix(gnn_params.theta_g, grads.gnn.theta_g, lr, inv_n, cfg.l2);
            detail::apply_vec(gnn_params.a_src, grads.gnn.a_src, lr, inv_n, cfg.l2);
            detail::apply_vec(gnn_params.a_dst, grads.gnn.a_dst, lr, inv_n, cfg.l2);
            detail::apply_matrix(gnn_params.w_read, grads.gnn.w_read, lr, inv_n, cfg.l2);
            detail::apply_bias(gnn_params.b_read, grads.gnn.b_read, lr, inv_n);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss / static_cast<double>(train_set.size());
        log.val_loss = mean_loss(val_set, enc_params, gnn_params, enc_cfg, fus_cfg);
        log.val_acc = val_set.empty()
                          ? 0.0
                          : balanced_accuracy(val_set, enc_params, gnn_params, enc_cfg, fus_cfg);
        result.log.push_back(log);

        if (!std::isfinite(log.train_loss) || !std::isfinite(log.val_loss))
            throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch));

        const bool better = val_set.empty()
                                ? log.train_loss < result.best_val_loss
                                : (log.val_acc > best_acc ||
                                   (log.val_acc == best_acc && log.val_loss < result.best_val_loss));
        if (better) {
            result.best_val_loss = val_set.empty() ? log.train_loss : log.val_loss;
            best_acc = log.val_acc;
            result.best_epoch = epoch;
            best_enc = enc_params;
            best_gnn = gnn_params;
        }
    }

    result.enc_params = std::move(best_enc);
    result.gnn_params = std::move(best_gnn);
    return result;
}

} // namespace graspe::fus
