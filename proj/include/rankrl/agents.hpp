#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankrl/gru.hpp"
#include "rankrl/init.hpp"
#include "rankrl/linalg.hpp"
#include "rankrl/mdp.hpp"
#include "rankrl/rng.hpp"

namespace rankrl {

// Network widths. Defaults are the full-scale architecture; desk-scale runs
// shrink them through configuration.
struct ModelDims {
    int feature_count = 0;
    int embed_dim = 128;
    int hidden_dim = 256;
    int head_dim = 128;
    CandidateInput candidate_input = CandidateInput::hidden_state;
};

// Scalar scoring head: q = v' relu(W x + b) + u.
struct QHead {
    DenseParams proj;  // head_dim x in
    Matrix v;          // head_dim x 1
    Matrix u;          // 1 x 1
};

QHead init_q_head(int in_dim, int head_dim, Rng& rng);
QHead zeros_like(const QHead& head);
double q_head_value(const QHead& head, const Vector& x);
// One score per column of X.
Vector q_head_values(const QHead& head, const Matrix& X);

// Sequential agent: embeds the candidate, rolls the recurrent state with it,
// and scores the resulting state. Scoring m candidates costs m cell calls.
struct GruAgentParams {
    ModelDims dims;
    DenseParams embed;  // feature_count -> embed_dim
    GruParams gru;      // embed_dim -> hidden_dim
    QHead head;         // hidden_dim -> scalar

    std::vector<TensorRef> tensors();
    std::vector<ConstTensorRef> tensors() const;
};

GruAgentParams init_gru_agent(const ModelDims& dims, Rng& rng);
GruAgentParams zeros_like(const GruAgentParams& params);

// Dual-rank agent: chooses a document, then a physical position for it, and
// rolls the recurrent state once per placement with concat(embedding,
// position number). Document scores read [h, embedding] without rolling, so
// scoring m candidates costs no cell calls; per-position output weights make
// the position head slot-specific.
struct DualRankParams {
    ModelDims dims;
    int k = 0;
    DenseParams embed;    // feature_count -> embed_dim
    GruParams gru;        // (embed_dim + 1) -> hidden_dim
    QHead doc_head;       // (hidden_dim + embed_dim) -> scalar
    DenseParams pos_proj; // (hidden_dim + embed_dim) -> head_dim
    Matrix pos_v;         // head_dim x k, column per physical position
    Matrix pos_u;         // k x 1

    std::vector<TensorRef> tensors();
    std::vector<ConstTensorRef> tensors() const;
};

DualRankParams init_dualrank_agent(const ModelDims& dims, int k, Rng& rng);
DualRankParams zeros_like(const DualRankParams& params);

// d_hat = relu(W_d d + b_d); shared by every step that touches the document.
Vector embed_document(const DenseParams& embed, const Vector& features);

// Scores one candidate for the sequential agent and returns the rolled
// state alongside.
std::pair<double, Vector> gru_q_value(const GruAgentParams& params, const Vector& h_prev,
                                      const Vector& d_hat);

// Document score of the dual-rank agent; no state roll involved.
double dualrank_doc_q(const DualRankParams& params, const Vector& h_prev, const Vector& d_hat);

// Position scores for the listed (1-based) physical positions. The shared
// trunk relu(W_p [h, d_hat] + b_p) is computed once.
Vector dualrank_pos_q(const DualRankParams& params, const Vector& h_prev, const Vector& d_hat,
                      const std::vector<int>& available_positions);

// Exploration probability: linear from start to end over decay_steps, then
// flat at end.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    std::int64_t decay_steps = 30000;
};

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t step);

struct RolloutStats {
    std::int64_t gru_calls = 0;  // recurrent cell evaluations
};

// One page construction with epsilon-greedy action selection. Exploration
// draws are skipped entirely at eps <= 0, so greedy rollouts consume no
// randomness. Ties break toward the lowest candidate index / position.
Episode run_gru_episode(const GruAgentParams& params, const Query& query, int query_index,
                        int k, const RankingEnv& env, double eps, Rng& rng,
                        RolloutStats* stats = nullptr);

// Dual-rank construction; the document and position choices of a placement
// flip independent exploration coins.
Episode run_dualrank_episode(const DualRankParams& params, const Query& query, int query_index,
                             int k, const RankingEnv& env, double eps, Rng& rng,
                             RolloutStats* stats = nullptr);

// Q-values along a stored episode, recomputed under the given parameters
// with the exact legal action sets of the original rollout.
struct StepValues {
    std::vector<int> actions;  // legal actions, ascending (docs or positions)
    Vector q;                  // score per action, same order
    int taken_index = -1;      // slot of the action the episode took
};

struct ReplayValues {
    std::vector<StepValues> steps;  // k entries, or 2k for dual-rank episodes
};

ReplayValues replay_forward(const GruAgentParams& params, const Episode& episode,
                            const Query& query);
ReplayValues replay_forward(const DualRankParams& params, const Episode& episode,
                            const Query& query);

// Sum of squared errors between the taken actions' Q-values and `targets`
// (one per step). episode_loss_gradient additionally accumulates d(loss)/d(params)
// into `grads` by backpropagation through the episode's state chain; both
// run the identical forward recomputation.
double episode_loss(const GruAgentParams& params, const Episode& episode, const Query& query,
                    const std::vector<double>& targets);
double episode_loss_gradient(const GruAgentParams& params, const Episode& episode,
                             const Query& query, const std::vector<double>& targets,
                             GruAgentParams& grads);
double episode_loss(const DualRankParams& params, const Episode& episode, const Query& query,
                    const std::vector<double>& targets);
double episode_loss_gradient(const DualRankParams& params, const Episode& episode,
                             const Query& query, const std::vector<double>& targets,
                             DualRankParams& grads);

// Checkpointing through the tensor container; metadata records the agent
// kind and dims so loaders can rebuild the right shapes.
void save_agent(const std::string& path, const GruAgentParams& params);
void save_agent(const std::string& path, const DualRankParams& params);
std::string peek_agent_kind(const std::string& path);  // "gru" or "dualrank"
GruAgentParams load_gru_agent(const std::string& path);
DualRankParams load_dualrank_agent(const std::string& path);

}  // namespace rankrl
