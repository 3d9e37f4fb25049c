#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace graspe {

using Vec = std::vector<double>;

// Dense row-major matrix. Only what the encoders/GNN need: matmul,
// transpose, elementwise maps; shapes checked on every operation.
struct Matrix {
    int rows{0};
    int cols{0};
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
    }

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Matrix matmul(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matmul: inner dims differ");
    Matrix out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = &x.a[static_cast<std::size_t>(i) * x.cols];
        double* oi = &out.a[static_cast<std::size_t>(i) * out.cols];
        for (int k = 0; k < x.cols; ++k) {
            const double v = xi[k];
            if (v == 0.0) continue;
            const double* yk = &y.a[static_cast<std::size_t>(k) * y.cols];
            for (int j = 0; j < y.cols; ++j) oi[j] += v * yk[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& x) {
    Matrix out(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

inline Matrix add(const Matrix& x, const Matrix& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("add: shape mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
    return out;
}

inline Vec matvec(const Matrix& m, const Vec& v) {
    if (m.cols != static_cast<int>(v.size())) throw std::invalid_argument("matvec: shape mismatch");
    Vec out(static_cast<std::size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* mi = &m.a[static_cast<std::size_t>(i) * m.cols];
        for (int j = 0; j < m.cols; ++j) s += mi[j] * v[j];
        out[i] = s;
    }
    return out;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec softmax(const Vec& z) {
    if (z.empty()) throw std::invalid_argument("softmax: empty input");
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    Vec out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

} // namespace graspe
