#include "rankrl/init.hpp"

namespace rankrl {

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

DenseParams init_dense(int out_dim, int in_dim, Rng& rng) {
    return {glorot_uniform(out_dim, in_dim, rng), Matrix::Zero(out_dim, 1)};
}

GruParams init_gru(int hidden_dim, int input_dim, Rng& rng, CandidateInput candidate_input) {
    GruParams p;
    p.W_z = glorot_uniform(hidden_dim, input_dim, rng);
    p.U_z = glorot_uniform(hidden_dim, hidden_dim, rng);
    p.b_z = Matrix::Zero(hidden_dim, 1);
    p.W_r = glorot_uniform(hidden_dim, input_dim, rng);
    p.U_r = glorot_uniform(hidden_dim, hidden_dim, rng);
    p.b_r = Matrix::Zero(hidden_dim, 1);
    // The hidden-state form applies W_c to h_{t-1}, so its fan-in is the
    // hidden width; the input_vector form keeps the usual hidden x input.
    int wc_cols = candidate_input == CandidateInput::hidden_state ? hidden_dim : input_dim;
    p.W_c = glorot_uniform(hidden_dim, wc_cols, rng);
    p.U_c = glorot_uniform(hidden_dim, hidden_dim, rng);
    p.b_c = Matrix::Zero(hidden_dim, 1);
    p.candidate_input = candidate_input;
    return p;
}

}  // namespace rankrl
