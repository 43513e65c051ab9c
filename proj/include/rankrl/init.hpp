#pragma once

#include "rankrl/gru.hpp"
#include "rankrl/linalg.hpp"
#include "rankrl/rng.hpp"

namespace rankrl {

// Glorot-uniform sample in ±sqrt(6 / (fan_in + fan_out)), with fan counts
// taken from the matrix shape (rows = fan_out, cols = fan_in).
Matrix glorot_uniform(int rows, int cols, Rng& rng);

// Glorot weights, zero bias.
DenseParams init_dense(int out_dim, int in_dim, Rng& rng);

GruParams init_gru(int hidden_dim, int input_dim, Rng& rng,
                   CandidateInput candidate_input = CandidateInput::hidden_state);

}  // namespace rankrl
