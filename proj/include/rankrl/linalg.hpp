#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Named handle onto one parameter tensor. Optimizers, checkpointing and the
// finite-difference checker all iterate parameter sets through these.
struct TensorRef {
    std::string name;
    Matrix* value;
};

struct ConstTensorRef {
    std::string name;
    const Matrix* value;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector sigmoid(const Vector& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

inline Vector tanh(const Vector& x) {
    return x.unaryExpr([](double v) { return std::tanh(v); });
}

inline Vector relu(const Vector& x) { return x.cwiseMax(0.0); }

inline Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

// dL/dx given dL/dy and the forward output y = relu(x). The mask off the
// output is exact because y > 0 iff x > 0.
inline Vector relu_backward(const Vector& dy, const Vector& y) {
    return (y.array() > 0.0).select(dy, Vector::Zero(dy.size()));
}

struct DenseParams {
    Matrix W;  // out x in
    Matrix b;  // out x 1

    int in_dim() const { return static_cast<int>(W.cols()); }
    int out_dim() const { return static_cast<int>(W.rows()); }
};

inline void check_dense_shapes(const DenseParams& p, Eigen::Index x_size) {
    if (p.W.cols() != x_size || p.b.rows() != p.W.rows() || p.b.cols() != 1)
        throw std::invalid_argument("dense layer shape mismatch: W is " +
                                    std::to_string(p.W.rows()) + "x" + std::to_string(p.W.cols()) +
                                    ", input has " + std::to_string(x_size) + " entries");
}

// Zero-valued gradient accumulator with the same shapes.
inline DenseParams zeros_like(const DenseParams& p) {
    return {Matrix::Zero(p.W.rows(), p.W.cols()), Matrix::Zero(p.b.rows(), 1)};
}

inline Vector dense_forward(const DenseParams& p, const Vector& x) {
    check_dense_shapes(p, x.size());
    return p.W * x + p.b.col(0);
}

// Column-wise dense layer: one output column per input column.
inline Matrix dense_forward(const DenseParams& p, const Matrix& x) {
    check_dense_shapes(p, x.rows());
    return (p.W * x).colwise() + p.b.col(0);
}

// Accumulates parameter gradients into `grads` and returns dL/dx.
inline Vector dense_backward(const DenseParams& p, const Vector& x, const Vector& dy,
                             DenseParams& grads) {
    check_dense_shapes(p, x.size());
    grads.W.noalias() += dy * x.transpose();
    grads.b.col(0) += dy;
    return p.W.transpose() * dy;
}

inline int argmax_index(const Vector& v) {
    if (v.size() == 0) throw std::invalid_argument("argmax of empty vector");
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;  // ties keep the lowest index
    return best;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace rankrl
