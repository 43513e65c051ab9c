#include "rankrl/gru.hpp"

namespace rankrl {

std::vector<TensorRef> GruParams::tensors(const std::string& prefix) {
    return {
        {prefix + ".W_z", &W_z}, {prefix + ".U_z", &U_z}, {prefix + ".b_z", &b_z},
        {prefix + ".W_r", &W_r}, {prefix + ".U_r", &U_r}, {prefix + ".b_r", &b_r},
        {prefix + ".W_c", &W_c}, {prefix + ".U_c", &U_c}, {prefix + ".b_c", &b_c},
    };
}

std::vector<ConstTensorRef> GruParams::tensors(const std::string& prefix) const {
    return {
        {prefix + ".W_z", &W_z}, {prefix + ".U_z", &U_z}, {prefix + ".b_z", &b_z},
        {prefix + ".W_r", &W_r}, {prefix + ".U_r", &U_r}, {prefix + ".b_r", &b_r},
        {prefix + ".W_c", &W_c}, {prefix + ".U_c", &U_c}, {prefix + ".b_c", &b_c},
    };
}

GruParams zeros_like(const GruParams& p) {
    GruParams g;
    g.W_z = Matrix::Zero(p.W_z.rows(), p.W_z.cols());
    g.U_z = Matrix::Zero(p.U_z.rows(), p.U_z.cols());
    g.b_z = Matrix::Zero(p.b_z.rows(), 1);
    g.W_r = Matrix::Zero(p.W_r.rows(), p.W_r.cols());
    g.U_r = Matrix::Zero(p.U_r.rows(), p.U_r.cols());
    g.b_r = Matrix::Zero(p.b_r.rows(), 1);
    g.W_c = Matrix::Zero(p.W_c.rows(), p.W_c.cols());
    g.U_c = Matrix::Zero(p.U_c.rows(), p.U_c.cols());
    g.b_c = Matrix::Zero(p.b_c.rows(), 1);
    g.candidate_input = p.candidate_input;
    return g;
}

namespace {

void check_shapes(const GruParams& p, const Vector& h_prev, Eigen::Index x_size) {
    if (p.W_z.cols() != x_size || p.U_z.cols() != h_prev.size() ||
        p.W_z.rows() != h_prev.size())
        throw std::invalid_argument(
            "gru shape mismatch: cell is " + std::to_string(p.hidden_dim()) + "x" +
            std::to_string(p.input_dim()) + ", got h_prev " + std::to_string(h_prev.size()) +
            ", x " + std::to_string(x_size));
    const Eigen::Index wc_expected =
        p.candidate_input == CandidateInput::hidden_state ? h_prev.size() : x_size;
    if (p.W_c.cols() != wc_expected)
        throw std::invalid_argument("gru candidate projection W_c has " +
                                    std::to_string(p.W_c.cols()) + " columns, expected " +
                                    std::to_string(wc_expected));
}

}  // namespace

Vector gru_forward(const GruParams& p, const Vector& h_prev, const Vector& x,
                   GruCache* cache) {
    check_shapes(p, h_prev, x.size());
    Vector z = sigmoid(p.W_z * x + p.U_z * h_prev + p.b_z.col(0));
    Vector r = sigmoid(p.W_r * x + p.U_r * h_prev + p.b_r.col(0));
    Vector rh = r.cwiseProduct(h_prev);
    Vector c_pre = p.U_c * rh + p.b_c.col(0);
    if (p.candidate_input == CandidateInput::hidden_state)
        c_pre += p.W_c * h_prev;
    else
        c_pre += p.W_c * x;
    Vector c = tanh(c_pre);
    Vector h = z.cwiseProduct(h_prev) + (Vector::Ones(z.size()) - z).cwiseProduct(c);
    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->c = std::move(c);
    }
    return h;
}

Matrix gru_forward_batch(const GruParams& p, const Vector& h_prev, const Matrix& X) {
    check_shapes(p, h_prev, X.rows());
    const auto m = X.cols();
    Vector shared_z = p.U_z * h_prev + p.b_z.col(0);
    Vector shared_r = p.U_r * h_prev + p.b_r.col(0);
    Matrix Z = ((p.W_z * X).colwise() + shared_z)
                   .unaryExpr([](double v) { return sigmoid(v); });
    Matrix R = ((p.W_r * X).colwise() + shared_r)
                   .unaryExpr([](double v) { return sigmoid(v); });
    Matrix RH = R.array().colwise() * h_prev.array();
    Matrix C_pre = p.U_c * RH;
    if (p.candidate_input == CandidateInput::hidden_state)
        C_pre.colwise() += Vector(p.W_c * h_prev + p.b_c.col(0));
    else
        C_pre = C_pre + p.W_c * X + p.b_c.col(0).replicate(1, m);
    Matrix C = C_pre.unaryExpr([](double v) { return std::tanh(v); });
    Matrix H = (Z.array().colwise() * h_prev.array()) + (1.0 - Z.array()) * C.array();
    return H;
}

void gru_backward(const GruParams& p, const GruCache& cache, const Vector& dh,
                  GruParams& grads, Vector& dh_prev, Vector& dx) {
    const Vector& z = cache.z;
    const Vector& r = cache.r;
    const Vector& c = cache.c;
    const Vector& h_prev = cache.h_prev;
    const Vector& x = cache.x;

    // h = z ∘ h_prev + (1-z) ∘ c
    Vector dz = dh.cwiseProduct(h_prev - c);
    Vector dc = dh.cwiseProduct(Vector::Ones(z.size()) - z);
    dh_prev = dh.cwiseProduct(z);

    // c = tanh(c_pre)
    Vector dc_pre = dc.cwiseProduct(Vector::Ones(c.size()) - c.cwiseProduct(c));
    Vector rh = r.cwiseProduct(h_prev);
    grads.U_c.noalias() += dc_pre * rh.transpose();
    grads.b_c.col(0) += dc_pre;
    Vector drh = p.U_c.transpose() * dc_pre;
    Vector dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);
    dx = Vector::Zero(x.size());
    if (p.candidate_input == CandidateInput::hidden_state) {
        grads.W_c.noalias() += dc_pre * h_prev.transpose();
        dh_prev += p.W_c.transpose() * dc_pre;
    } else {
        grads.W_c.noalias() += dc_pre * x.transpose();
        dx += p.W_c.transpose() * dc_pre;
    }

    // gate pre-activations through σ' = σ(1-σ)
    Vector dz_pre = dz.cwiseProduct(z).cwiseProduct(Vector::Ones(z.size()) - z);
    Vector dr_pre = dr.cwiseProduct(r).cwiseProduct(Vector::Ones(r.size()) - r);

    grads.W_z.noalias() += dz_pre * x.transpose();
    grads.U_z.noalias() += dz_pre * h_prev.transpose();
    grads.b_z.col(0) += dz_pre;
    dx += p.W_z.transpose() * dz_pre;
    dh_prev += p.U_z.transpose() * dz_pre;

    grads.W_r.noalias() += dr_pre * x.transpose();
    grads.U_r.noalias() += dr_pre * h_prev.transpose();
    grads.b_r.col(0) += dr_pre;
    dx += p.W_r.transpose() * dr_pre;
    dh_prev += p.U_r.transpose() * dr_pre;
}

}  // namespace rankrl
