#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "graspe/core/matrix.hpp"
#include "graspe/core/rng.hpp"
#include "graspe/core/types.hpp"
#include "graspe/fus/graph.hpp"

namespace graspe::fus {

struct FusionConfig {
    double lambda{16.0};            // graph similarity scale
    double w_min{1e-3};             // attention neighborhood cutoff on W
    bool invert_reliability{false}; // alternate Eq.-6 semantics (see build_graph_w)
    int gcn_width{32};
    double leaky_slope{0.2};
};

struct GnnParams {
    Matrix theta1;  // 1 x F: lifts the scalar node signal
    Matrix theta2;  // F x F
    Matrix theta_g; // F x F (GAT projection)
    Vec a_src;      // F, attention on the source projection
    Vec a_dst;      // F, attention on the neighbor projection
    Matrix w_read;  // T x (N*F) readout over concatenated node embeddings
    Vec b_read;     // T

    static GnnParams init(int n_nodes, int horizon, const FusionConfig& cfg, std::uint64_t seed) {
        Rng rng(mix_seed(seed, 0x6A7ULL));
        const int f = cfg.gcn_width;
        GnnParams p;
        auto fill = [&](Matrix& m, int rows, int cols) {
            m = Matrix(rows, cols);
            const double bound = std::sqrt(6.0 / (rows + cols));
            for (double& v : m.a) v = rng.uniform(-bound, bound);
        };
        fill(p.theta1, 1, f);
        fill(p.theta2, f, f);
        fill(p.theta_g, f, f);
        p.a_src.resize(static_cast<std::size_t>(f));
        p.a_dst.resize(static_cast<std::size_t>(f));
        const double ab = std::sqrt(3.0 / f);
        for (double& v : p.a_src) v = rng.uniform(-ab, ab);
        for (double& v : p.a_dst) v = rng.uniform(-ab, ab);
        fill(p.w_read, horizon, n_nodes * f);
        p.b_read.assign(static_cast<std::size_t>(horizon), 0.0);
        return p;
    }
};

namespace detail {

// Renormalized propagation matrix D^{-1/2} (W + I) D^{-1/2}.
inline Matrix normalized_adjacency(const Matrix& w) {
    if (w.rows != w.cols) throw std::invalid_argument("normalized_adjacency: non-square W");
    const int n = w.rows;
    Vec dinv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double deg = 1.0; // self-loop
        for (int j = 0; j < n; ++j) deg += w(i, j);
        dinv[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
    }
    Matrix a_hat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double aij = w(i, j) + (i == j ? 1.0 : 0.0);
            a_hat(i, j) = dinv[static_cast<std::size_t>(i)] * aij * dinv[static_cast<std::size_t>(j)];
        }
    return a_hat;
}

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad_from_out(double x, double out) { return x > 0.0 ? 1.0 : out + 1.0; }

} // namespace detail

// One renormalized GCN layer: ReLU(A_hat H Theta).
inline Matrix gcn_layer(const Matrix& h, const Matrix& w, const Matrix& theta) {
    const Matrix a_hat = detail::normalized_adjacency(w);
    Matrix out = matmul(matmul(a_hat, h), theta);
    for (double& v : out.a) v = std::max(0.0, v);
    return out;
}

struct GatCache {
    Matrix z;                            // H Theta_g
    Matrix alpha;                        // attention weights (0 outside neighborhoods)
    Matrix m;                            // pre-ELU aggregate
    Matrix out;                          // ELU(m)
    std::vector<std::vector<int>> nbrs;  // per-node neighborhoods incl. self
};

// Single-head GAT with the graph weights acting as a multiplicative prior on
// the masked softmax; self-edges carry prior 1. Neighborhood = self plus all
// j with W_ij > w_min.
inline GatCache gat_forward(const Matrix& h, const Matrix& w, const GnnParams& p,
                            const FusionConfig& cfg) {
    const int n = h.rows;
    const int f = p.theta_g.cols;
    if (h.cols != p.theta_g.rows) throw std::invalid_argument("gat_forward: shape mismatch");
    GatCache c;
    c.z = matmul(h, p.theta_g);
    c.alpha = Matrix(n, n);
    c.m = Matrix(n, f);
    c.nbrs.assign(static_cast<std::size_t>(n), {});

    Vec u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double su = 0.0, sv = 0.0;
        for (int k = 0; k < f; ++k) {
            su += p.a_src[static_cast<std::size_t>(k)] * c.z(i, k);
            sv += p.a_dst[static_cast<std::size_t>(k)] * c.z(i, k);
        }
        u[static_cast<std::size_t>(i)] = su;
        v[static_cast<std::size_t>(i)] = sv;
    }

    for (int i = 0; i < n; ++i) {
        auto& nbr = c.nbrs[static_cast<std::size_t>(i)];
        nbr.push_back(i);
        for (int j = 0; j < n; ++j)
            if (j != i && w(i, j) > cfg.w_min) nbr.push_back(j);

        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> logits(nbr.size());
        for (std::size_t k = 0; k < nbr.size(); ++k) {
            const int j = nbr[k];
            const double s = u[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(j)];
            logits[k] = s > 0.0 ? s : cfg.leaky_slope * s;
            mx = std::max(mx, logits[k]);
        }
        double sum = 0.0;
        std::vector<double> ex(nbr.size());
        for (std::size_t k = 0; k < nbr.size(); ++k) {
            const int j = nbr[k];
            const double prior = j == i ? 1.0 : w(i, j);
            ex[k] = prior * std::exp(logits[k] - mx);
            sum += ex[k];
        }
        for (std::size_t k = 0; k < nbr.size(); ++k) {
            const int j = nbr[k];
            c.alpha(i, j) = ex[k] / sum;
            for (int d = 0; d < f; ++d) c.m(i, d) += c.alpha(i, j) * c.z(j, d);
        }
    }

    c.out = Matrix(n, f);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < f; ++d) c.out(i, d) = detail::elu(c.m(i, d));
    return c;
}

inline Matrix gat_layer(const Matrix& h, const Matrix& w, const GnnParams& p,
                        const FusionConfig& cfg) {
    return gat_forward(h, w, p, cfg).out;
}

// ---- full network forward/backward ------------------------------------------

struct GnnCache {
    Matrix w;     // graph weights used (constant wrt parameters)
    Matrix a_hat;
    Matrix h0;    // N x 1 signal
    Matrix p1, z1, h1; // p1 = A_hat h0; z1 = p1 theta1; h1 = relu(z1)
    Matrix p2, z2, h2;
    GatCache gat;
    Vec read_z; // T
    Vec y;      // T, sigmoid(read_z)
};

inline GnnCache gnn_forward(const Vec& f_vec, const Matrix& w, const GnnParams& p,
                            const FusionConfig& cfg) {
    GnnCache c;
    c.w = w;
    c.a_hat = detail::normalized_adjacency(w);
    const int n = static_cast<int>(f_vec.size());
    c.h0 = Matrix(n, 1);
    for (int i = 0; i < n; ++i) c.h0(i, 0) = f_vec[static_cast<std::size_t>(i)];

    c.p1 = matmul(c.a_hat, c.h0);
    c.z1 = matmul(c.p1, p.theta1);
    c.h1 = c.z1;
    for (double& v : c.h1.a) v = std::max(0.0, v);

    c.p2 = matmul(c.a_hat, c.h1);
    c.z2 = matmul(c.p2, p.theta2);
    c.h2 = c.z2;
    for (double& v : c.h2.a) v = std::max(0.0, v);

    c.gat = gat_forward(c.h2, w, p, cfg);

    const int f = p.theta_g.cols;
    const int t = p.w_read.rows;
    c.read_z.assign(static_cast<std::size_t>(t), 0.0);
    for (int k = 0; k < t; ++k) {
        double s = p.b_read[static_cast<std::size_t>(k)];
        const double* row = &p.w_read.a[static_cast<std::size_t>(k) * p.w_read.cols];
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < f; ++d) s += row[i * f + d] * c.gat.out(i, d);
        c.read_z[static_cast<std::size_t>(k)] = s;
    }
    c.y = c.read_z;
    for (double& v : c.y) v = 1.0 / (1.0 + std::exp(-v));
    return c;
}

struct GnnGrads {
    Matrix theta1, theta2, theta_g;
    Vec a_src, a_dst;
    Matrix w_read;
    Vec b_read;
    Matrix d_h0; // gradient wrt the node signal (feeds the encoders)

    static GnnGrads zeros_like(const GnnParams& p) {
        GnnGrads g;
        g.theta1 = Matrix(p.theta1.rows, p.theta1.cols);
        g.theta2 = Matrix(p.theta2.rows, p.theta2.cols);
        g.theta_g = Matrix(p.theta_g.rows, p.theta_g.cols);
        g.a_src.assign(p.a_src.size(), 0.0);
        g.a_dst.assign(p.a_dst.size(), 0.0);
        g.w_read = Matrix(p.w_read.rows, p.w_read.cols);
        g.b_read.assign(p.b_read.size(), 0.0);
        return g;
    }
};

// Backprop through the full stack given dL/dy. Accumulates into `g`.
inline void gnn_backward(const GnnParams& p, const FusionConfig& cfg, const GnnCache& c,
                         const Vec& d_y, GnnGrads& g) {
    const int n = c.h0.rows;
    const int f = p.theta_g.cols;
    const int t = p.w_read.rows;

    // readout (sigmoid + affine)
    Vec dz(static_cast<std::size_t>(t));
    for (int k = 0; k < t; ++k) {
        const double y = c.y[static_cast<std::size_t>(k)];
        dz[static_cast<std::size_t>(k)] = d_y[static_cast<std::size_t>(k)] * y * (1.0 - y);
    }
    Matrix d_h3(n, f);
    for (int k = 0; k < t; ++k) {
        g.b_read[static_cast<std::size_t>(k)] += dz[static_cast<std::size_t>(k)];
        const double* row = &p.w_read.a[static_cast<std::size_t>(k) * p.w_read.cols];
        double* grow = &g.w_read.a[static_cast<std::size_t>(k) * p.w_read.cols];
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < f; ++d) {
                grow[i * f + d] += dz[static_cast<std::size_t>(k)] * c.gat.out(i, d);
                d_h3(i, d) += dz[static_cast<std::size_t>(k)] * row[i * f + d];
            }
    }

    // GAT backward
    Matrix d_m(n, f);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < f; ++d)
            d_m(i, d) = d_h3(i, d) * detail::elu_grad_from_out(c.gat.m(i, d), c.gat.out(i, d));

    Matrix d_z(n, f); // grad wrt z = h2 theta_g
    Vec u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double su = 0.0, sv = 0.0;
        for (int k = 0; k < f; ++k) {
            su += p.a_src[static_cast<std::size_t>(k)] * c.gat.z(i, k);
            sv += p.a_dst[static_cast<std::size_t>(k)] * c.gat.z(i, k);
        }
        u[static_cast<std::size_t>(i)] = su;
        v[static_cast<std::size_t>(i)] = sv;
    }
    Vec d_u(static_cast<std::size_t>(n), 0.0), d_v(static_cast<std::size_t>(n), 0.0);

    for (int i = 0; i < n; ++i) {
        const auto& nbr = c.gat.nbrs[static_cast<std::size_t>(i)];
        // d alpha_ij = d_m(i,:) . z_j; softmax jacobian in terms of alpha
        double inner = 0.0; // sum_j alpha_ij * dalpha_ij
        std::vector<double> d_alpha(nbr.size());
        for (std::size_t k = 0; k < nbr.size(); ++k) {
            const int j = nbr[k];
            double s = 0.0;
            for (int d = 0; d < f; ++d) s += d_m(i, d) * c.gat.z(j, d);
            d_alpha[k] = s;
            inner += c.gat.alpha(i, j) * s;
            // direct path: m_i += alpha_ij z_j
            for (int d = 0; d < f; ++d) d_z(j, d) += c.gat.alpha(i, j) * d_m(i, d);
        }
        for (std::size_t k = 0; k < nbr.size(); ++k) {
            const int j = nbr[k];
            const double a = c.gat.alpha(i, j);
            const double d_e = a * (d_alpha[k] - inner);
            const double s = u[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(j)];
            const double d_s = d_e * (s > 0.0 ? 1.0 : cfg.leaky_slope);
            d_u[static_cast<std::size_t>(i)] += d_s;
            d_v[static_cast<std::size_t>(j)] += d_s;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < f; ++k) {
            g.a_src[static_cast<std::size_t>(k)] += d_u[static_cast<std::size_t>(i)] * c.gat.z(i, k);
            g.a_dst[static_cast<std::size_t>(k)] += d_v[static_cast<std::size_t>(i)] * c.gat.z(i, k);
            d_z(i, k) += d_u[static_cast<std::size_t>(i)] * p.a_src[static_cast<std::size_t>(k)] +
                         d_v[static_cast<std::size_t>(i)] * p.a_dst[static_cast<std::size_t>(k)];
        }

    // z = h2 theta_g
    {
        const Matrix h2t = transpose(c.h2);
        const Matrix d_theta_g = matmul(h2t, d_z);
        for (std::size_t idx = 0; idx < g.theta_g.a.size(); ++idx) g.theta_g.a[idx] += d_theta_g.a[idx];
    }
    Matrix d_h2 = matmul(d_z, transpose(p.theta_g));

    // GCN layer 2: h2 = relu(p2 theta2), p2 = a_hat h1
    Matrix d_z2 = d_h2;
    for (std::size_t idx = 0; idx < d_z2.a.size(); ++idx)
        if (c.z2.a[idx] <= 0.0) d_z2.a[idx] = 0.0;
    {
        const Matrix d_theta2 = matmul(transpose(c.p2), d_z2);
        for (std::size_t idx = 0; idx < g.theta2.a.size(); ++idx) g.theta2.a[idx] += d_theta2.a[idx];
    }
    Matrix d_p2 = matmul(d_z2, transpose(p.theta2));
    Matrix d_h1 = matmul(c.a_hat, d_p2); // a_hat symmetric

    // GCN layer 1: h1 = relu(p1 theta1), p1 = a_hat h0
    Matrix d_z1 = d_h1;
    for (std::size_t idx = 0; idx < d_z1.a.size(); ++idx)
        if (c.z1.a[idx] <= 0.0) d_z1.a[idx] = 0.0;
    {
        const Matrix d_theta1 = matmul(transpose(c.p1), d_z1);
        for (std::size_t idx = 0; idx < g.theta1.a.size(); ++idx) g.theta1.a[idx] += d_theta1.a[idx];
    }
    Matrix d_p1 = matmul(d_z1, transpose(p.theta1));
    Matrix d_h0 = matmul(c.a_hat, d_p1);
    if (g.d_h0.rows != d_h0.rows) g.d_h0 = Matrix(d_h0.rows, d_h0.cols);
    for (std::size_t idx = 0; idx < d_h0.a.size(); ++idx) g.d_h0.a[idx] += d_h0.a[idx];
}

// ---- loss ---------------------------------------------------------------------

inline constexpr double kBceEps = 1e-9;

// Mean binary cross-entropy over the horizon.
inline double bce_loss(const Vec& y, const Vec& label) {
    if (y.size() != label.size()) throw std::invalid_argument("bce_loss: length mismatch");
    if (y.empty()) throw std::invalid_argument("bce_loss: empty");
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k)
        s += label[k] * std::log(y[k] + kBceEps) + (1.0 - label[k]) * std::log(1.0 - y[k] + kBceEps);
    return -s / static_cast<double>(y.size());
}

inline Vec bce_loss_grad(const Vec& y, const Vec& label) {
    if (y.size() != label.size()) throw std::invalid_argument("bce_loss_grad: length mismatch");
    Vec d(y.size());
    const double inv_t = 1.0 / static_cast<double>(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
        d[k] = -inv_t * (label[k] / (y[k] + kBceEps) - (1.0 - label[k]) / (1.0 - y[k] + kBceEps));
    return d;
}

} // namespace graspe::fus
