#pragma once

#include "rankrl/linalg.hpp"

namespace rankrl {

// Which signal feeds the candidate-state projection W_c. `hidden_state` is
// the published form of the cell (W_c acts on h_{t-1}); `input_vector` is the
// conventional GRU (W_c acts on x_t). Both share the same gate equations.
enum class CandidateInput { hidden_state, input_vector };

struct GruParams {
    Matrix W_z, U_z, b_z;  // update gate: W in, U hidden, b hidden x 1
    Matrix W_r, U_r, b_r;  // reset gate
    Matrix W_c, U_c, b_c;  // candidate state
    CandidateInput candidate_input = CandidateInput::hidden_state;

    int input_dim() const { return static_cast<int>(W_z.cols()); }
    int hidden_dim() const { return static_cast<int>(W_z.rows()); }

    std::vector<TensorRef> tensors(const std::string& prefix);
    std::vector<ConstTensorRef> tensors(const std::string& prefix) const;
};

// Everything the backward pass needs from one forward step.
struct GruCache {
    Vector x, h_prev;
    Vector z, r, c;  // post-activation gate values and candidate state
};

// h_t = z ∘ h_prev + (1-z) ∘ c  with
//   z = σ(W_z x + U_z h_prev + b_z)
//   r = σ(W_r x + U_r h_prev + b_r)
//   c = tanh(W_c s + U_c (r ∘ h_prev) + b_c),  s per candidate_input.
Vector gru_forward(const GruParams& p, const Vector& h_prev, const Vector& x,
                   GruCache* cache = nullptr);

// One forward step per column of X, all from the same h_prev. Returns the
// hidden states as columns. Used to score every legal action of a state with
// three matrix products instead of a loop.
Matrix gru_forward_batch(const GruParams& p, const Vector& h_prev, const Matrix& X);

// Accumulates parameter gradients into `grads` and writes (overwrites)
// dL/dh_prev and dL/dx for the cached step. dh is dL/dh_t.
void gru_backward(const GruParams& p, const GruCache& cache, const Vector& dh,
                  GruParams& grads, Vector& dh_prev, Vector& dx);

// Zero-valued gradient accumulator with the same shapes and variant.
GruParams zeros_like(const GruParams& p);

}  // namespace rankrl
