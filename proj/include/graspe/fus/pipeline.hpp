#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "graspe/enc/encoders.hpp"
#include "graspe/fus/gnn.hpp"
#include "graspe/fus/graph.hpp"
#include "graspe/rel/cloud.hpp"
#include "graspe/rel/image.hpp"

namespace graspe::fus {

// Parameter-free observation digest: fixed featurizations plus the two
// reliability scalars. Computed once per sample; forward passes start here.
struct PreObs {
    Vec u_img;  // block averages of the camera image
    Vec u_traj; // block averages of the trajectory raster
    Vec u_hist; // polar occupancy histogram
    Vec u_vel;  // normalized velocity history
    double r_img{1.0};
    double r_point{1.0};
};

inline PreObs preprocess_observation(const Observation& obs, const enc::EncoderConfig& enc_cfg,
                                     const rel::RelImageParams& rel_img,
                                     const rel::RelCloudParams& rel_cloud,
                                     bool force_full_reliability = false) {
    obs.validate();
    PreObs pre;
    pre.u_img = enc::block_average(obs.image, enc_cfg);
    pre.u_traj = enc::block_average(obs.traj_image, enc_cfg);
    pre.u_hist = enc::polar_histogram(obs.cloud, enc_cfg);
    pre.u_vel = enc::velocity_features(obs.vel_history, enc_cfg);
    if (force_full_reliability) {
        pre.r_img = 1.0;
        pre.r_point = 1.0;
    } else {
        pre.r_img = rel::image_reliability(obs.image, rel_img).r_img;
        pre.r_point = rel::cloud_reliability(obs.cloud, rel_cloud).r_point;
    }
    return pre;
}

struct ForwardCache {
    enc::TwoLayerCache img, traj;
    enc::OneLayerCache point, vel;
    Vec f_vec;
    GnnCache gnn;
};

// Full differentiable path from a preprocessed observation to the success
// vector. The graph weights are treated as constants: they are rebuilt from
// the current f_vec unless `w_override` pins them (finite-difference checks
// rely on that), and no gradient flows through the construction.
inline ForwardCache forward_full(const PreObs& pre, const enc::EncoderParams& ep,
                                 const GnnParams& gp, const enc::EncoderConfig& enc_cfg,
                                 const FusionConfig& fus_cfg, const Matrix* w_override = nullptr) {
    ForwardCache c;
    c.img = enc::two_layer_forward(ep.img1, ep.img2, pre.u_img);
    c.point = enc::one_layer_forward(ep.point1, pre.u_hist);
    c.traj = enc::two_layer_forward(ep.traj1, ep.traj2, pre.u_traj);
    c.vel = enc::one_layer_forward(ep.vel1, pre.u_vel);

    const auto ranges = enc::ModalityRanges::from_config(enc_cfg);
    c.f_vec = enc::concat_features({c.img.out, enc::Modality::Img},
                                   {c.point.out, enc::Modality::Point},
                                   {c.vel.out, enc::Modality::Vel},
                                   {c.traj.out, enc::Modality::Traj}, enc_cfg);

    const Matrix w = w_override != nullptr
                         ? *w_override
                         : build_graph_w(c.f_vec, ranges, pre.r_img, pre.r_point, fus_cfg.lambda,
                                         fus_cfg.invert_reliability);
    c.gnn = gnn_forward(c.f_vec, w, gp, fus_cfg);
    return c;
}

// psi: O_t -> E_t.
inline SuccessVector predict(const Observation& obs, const enc::EncoderParams& ep,
                             const GnnParams& gp, const enc::EncoderConfig& enc_cfg,
                             const FusionConfig& fus_cfg, const rel::RelImageParams& rel_img,
                             const rel::RelCloudParams& rel_cloud,
                             bool force_full_reliability = false) {
    const PreObs pre =
        preprocess_observation(obs, enc_cfg, rel_img, rel_cloud, force_full_reliability);
    const ForwardCache c = forward_full(pre, ep, gp, enc_cfg, fus_cfg);
    return SuccessVector(c.gnn.y);
}

inline SuccessVector predict_pre(const PreObs& pre, const enc::EncoderParams& ep,
                                 const GnnParams& gp, const enc::EncoderConfig& enc_cfg,
                                 const FusionConfig& fus_cfg) {
    return SuccessVector(forward_full(pre, ep, gp, enc_cfg, fus_cfg).gnn.y);
}

struct EncGrads {
    enc::DenseLayer img1, img2, point1, vel1, traj1, traj2;

    static EncGrads zeros_like(const enc::EncoderParams& p) {
        EncGrads g;
        auto zero = [](const enc::DenseLayer& l) {
            enc::DenseLayer z;
            z.w = Matrix(l.w.rows, l.w.cols);
            z.b.assign(l.b.size(), 0.0);
            return z;
        };
        g.img1 = zero(p.img1);
        g.img2 = zero(p.img2);
        g.point1 = zero(p.point1);
        g.vel1 = zero(p.vel1);
        g.traj1 = zero(p.traj1);
        g.traj2 = zero(p.traj2);
        return g;
    }
};

struct Grads {
    EncGrads enc;
    GnnGrads gnn;
};

// Loss plus gradient accumulation for one sample. Gradients flow through the
// node signal only; the adjacency is a per-sample constant.
inline double loss_and_grads(const PreObs& pre, const Vec& label, const enc::EncoderParams& ep,
                             const GnnParams& gp, const enc::EncoderConfig& enc_cfg,
                             const FusionConfig& fus_cfg, Grads& grads,
                             const Matrix* w_override = nullptr) {
    const ForwardCache c = forward_full(pre, ep, gp, enc_cfg, fus_cfg, w_override);
    const double loss = bce_loss(c.gnn.y, label);

    const Vec d_y = bce_loss_grad(c.gnn.y, label);
    grads.gnn.d_h0 = Matrix(); // reset per-sample signal gradient
    gnn_backward(gp, fus_cfg, c.gnn, d_y, grads.gnn);

    const auto ranges = enc::ModalityRanges::from_config(enc_cfg);
    Vec d_f(static_cast<std::size_t>(ranges.total()));
    for (int i = 0; i < ranges.total(); ++i) d_f[static_cast<std::size_t>(i)] = grads.gnn.d_h0(i, 0);

    const Vec d_img(d_f.begin(), d_f.begin() + ranges.img_end);
    const Vec d_point(d_f.begin() + ranges.img_end, d_f.begin() + ranges.point_end);
    const Vec d_traj(d_f.begin() + ranges.point_end, d_f.begin() + ranges.traj_end);
    const Vec d_vel(d_f.begin() + ranges.traj_end, d_f.begin() + ranges.vel_end);

    enc::two_layer_backward(c.img, ep.img1, ep.img2, d_img, grads.enc.img1, grads.enc.img2);
    enc::one_layer_backward(c.point, ep.point1, d_point, grads.enc.point1);
    enc::two_layer_backward(c.traj, ep.traj1, ep.traj2, d_traj, grads.enc.traj1, grads.enc.traj2);
    enc::one_layer_backward(c.vel, ep.vel1, d_vel, grads.enc.vel1);
    return loss;
}

} // namespace graspe::fus
