#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "rankrl/adam.hpp"
#include "rankrl/agents.hpp"
#include "rankrl/dataset.hpp"
#include "rankrl/mdp.hpp"

namespace rankrl {

// Bounded FIFO of whole episodes. Both Q-models are recurrent, so replay
// stores action sequences and recomputes values against current parameters
// instead of caching transitions.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(int capacity);

    void push(Episode episode);
    int size() const { return static_cast<int>(episodes_.size()); }
    int capacity() const { return capacity_; }
    const Episode& at(int index) const;  // 0 = oldest surviving episode

    // n distinct episodes, uniformly without replacement. Pointers stay
    // valid until the next push.
    std::vector<const Episode*> sample(int n, Rng& rng) const;

  private:
    int capacity_;
    std::deque<Episode> episodes_;
};

struct TrainerConfig {
    double learning_rate = 1e-3;
    int replay_capacity = 5000;
    int transfer_every = 5000;  // gradient steps between label-network copies
    int batch_episodes = 64;
    std::int64_t max_steps = 200000;
    double gamma = 1.0;
    EpsilonSchedule epsilon;
    std::int64_t eval_every = 2500;
    int patience = 10;       // evaluations without improvement before stopping
    int eval_queries = 500;  // validation prefix used for the metric
    std::uint64_t seed = 1;
};

// Positivity checks; gamma is pinned to 1 (episodes are short and rewards
// undiscounted by construction).
void validate_config(const TrainerConfig& config);

// theta_T (train) learns every step; theta_L (label) is the frozen copy the
// bootstrap values come from.
template <typename Params>
struct NetworkPair {
    Params train;
    Params label;
};

template <typename Params>
NetworkPair<Params> make_network_pair(const Params& params) {
    return {params, params};
}

// theta_L <- deep copy of theta_T.
template <typename Params>
void transfer(NetworkPair<Params>& pair) {
    pair.label = pair.train;
}

// Per-step regression targets for a stored episode: the next step's action
// set is rescored under both networks, the train network picks the argmax,
// the label network prices it: y = r + gamma * Q_label(s', argmax_T).
// The final step bootstraps nothing: y = r.
std::vector<double> compute_targets(const Episode& episode, const Query& query,
                                    const GruAgentParams& train_net,
                                    const GruAgentParams& label_net, double gamma);
std::vector<double> compute_targets(const Episode& episode, const Query& query,
                                    const DualRankParams& train_net,
                                    const DualRankParams& label_net, double gamma);

// One batch update: loss is the plain sum of squared TD errors over every
// transition of every episode; targets are constants computed before the
// update; only theta_T moves.
double train_step(const std::vector<const Episode*>& batch, const std::vector<Query>& queries,
                  NetworkPair<GruAgentParams>& pair, AdamOptimizer& adam, double gamma);
double train_step(const std::vector<const Episode*>& batch, const std::vector<Query>& queries,
                  NetworkPair<DualRankParams>& pair, AdamOptimizer& adam, double gamma);

// One training-log row; rows are emitted at evaluations and at transfers.
// train_loss is the mean batch loss since the previous row (nan before any
// update); validation_p_ndcg is nan on transfer-only rows.
struct LogRow {
    std::int64_t step = 0;
    double epsilon = 0.0;
    double train_loss = std::numeric_limits<double>::quiet_NaN();
    double validation_p_ndcg = std::numeric_limits<double>::quiet_NaN();
    int transfer_flag = 0;
};

std::string training_log_csv(const std::vector<LogRow>& rows);

template <typename Params>
struct TrainOutcome {
    Params best;  // highest-validation parameters seen (initial if never evaluated)
    double best_validation = -std::numeric_limits<double>::infinity();
    std::int64_t best_step = 0;
    std::vector<LogRow> log;
    std::int64_t steps_run = 0;
    std::int64_t gradient_steps = 0;
};

// The full loop: sample a training query uniformly, roll an epsilon-greedy
// episode, push it, and once the buffer covers a batch run one update per
// episode, transferring every transfer_every updates. Validation runs at
// epsilon = 0 every eval_every steps (and once before training); the best
// checkpoint is retained and patience evaluations without improvement stop
// the run. Deterministic given (dataset, config): a single generator seeded
// from config.seed drives sampling, exploration, and batch selection.
TrainOutcome<GruAgentParams> train_loop(const GruAgentParams& init, const Dataset& data, int k,
                                        const RankingEnv& env, const TrainerConfig& config);
TrainOutcome<DualRankParams> train_loop(const DualRankParams& init, const Dataset& data, int k,
                                        const RankingEnv& env, const TrainerConfig& config);

}  // namespace rankrl
