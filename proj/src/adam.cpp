#include "rankrl/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace rankrl {

void AdamOptimizer::step(const std::vector<TensorRef>& params,
                         const std::vector<ConstTensorRef>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam: " + std::to_string(params.size()) + " params but " +
                                    std::to_string(grads.size()) + " grads");

    if (step_count_ == 0) {
        names_.reserve(params.size());
        first_moment_.reserve(params.size());
        second_moment_.reserve(params.size());
        for (const auto& p : params) {
            names_.push_back(p.name);
            first_moment_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
            second_moment_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
        }
    } else if (params.size() != names_.size()) {
        throw std::invalid_argument("adam: parameter list size changed between steps");
    }

    ++step_count_;
    const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& theta = *params[i].value;
        const Matrix& g = *grads[i].value;
        if (params[i].name != names_[i])
            throw std::invalid_argument("adam: parameter order changed, expected " + names_[i] +
                                        " at slot " + std::to_string(i) + ", got " +
                                        params[i].name);
        if (g.rows() != theta.rows() || g.cols() != theta.cols())
            throw std::invalid_argument("adam: gradient shape mismatch for " + params[i].name);
        if (!g.allFinite())
            throw std::runtime_error("adam: non-finite gradient for " + params[i].name);

        Matrix& m = first_moment_[i];
        Matrix& v = second_moment_[i];
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);

        const Matrix m_hat = m / correction1;
        const Matrix v_hat = v / correction2;
        theta.array() -=
            config_.learning_rate * m_hat.array() / (v_hat.array().sqrt() + config_.epsilon);
    }
}

}  // namespace rankrl
