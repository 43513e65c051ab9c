#include "rankrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rankrl/eval.hpp"
#include "rankrl/text.hpp"

namespace rankrl {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1)
        throw std::invalid_argument("replay capacity must be >= 1, got " +
                                    std::to_string(capacity));
}

void ReplayBuffer::push(Episode episode) {
    if (size() == capacity_) episodes_.pop_front();
    episodes_.push_back(std::move(episode));
}

const Episode& ReplayBuffer::at(int index) const {
    if (index < 0 || index >= size())
        throw std::out_of_range("replay index " + std::to_string(index) + " outside 0.." +
                                std::to_string(size() - 1));
    return episodes_[static_cast<std::size_t>(index)];
}

std::vector<const Episode*> ReplayBuffer::sample(int n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("batch size must be >= 1");
    if (n > size())
        throw std::invalid_argument("replay buffer holds " + std::to_string(size()) +
                                    " episodes, cannot sample " + std::to_string(n));
    std::vector<int> idx(static_cast<std::size_t>(size()));
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first n entries become the sample.
    for (int i = 0; i < n; ++i)
        std::swap(idx[static_cast<std::size_t>(i)],
                  idx[static_cast<std::size_t>(i + uniform_index(rng, size() - i))]);
    std::vector<const Episode*> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(&episodes_[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
    return out;
}

void validate_config(const TrainerConfig& config) {
    if (!(config.learning_rate > 0.0))
        throw std::invalid_argument("learning_rate must be positive");
    if (config.replay_capacity < 1)
        throw std::invalid_argument("replay_capacity must be >= 1");
    if (config.transfer_every < 1)
        throw std::invalid_argument("transfer_every must be >= 1");
    if (config.batch_episodes < 1)
        throw std::invalid_argument("batch_episodes must be >= 1");
    if (config.batch_episodes > config.replay_capacity)
        throw std::invalid_argument("batch_episodes cannot exceed replay_capacity");
    if (config.max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
    if (config.gamma != 1.0)
        throw std::invalid_argument("gamma is fixed at 1 for this engine");
    if (config.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
    if (config.patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (config.eval_queries < 1) throw std::invalid_argument("eval_queries must be >= 1");
    if (config.epsilon.decay_steps < 1)
        throw std::invalid_argument("epsilon decay_steps must be >= 1");
}

namespace {

template <typename Params>
std::vector<double> targets_any(const Episode& episode, const Query& query,
                                const Params& train_net, const Params& label_net,
                                double gamma) {
    ReplayValues train_values = replay_forward(train_net, episode, query);
    ReplayValues label_values = replay_forward(label_net, episode, query);
    const std::size_t steps = train_values.steps.size();
    if (episode.rewards.size() != steps)
        throw std::invalid_argument("episode carries " + std::to_string(episode.rewards.size()) +
                                    " rewards for " + std::to_string(steps) +
                                    " steps; assign rewards before storing it");
    std::vector<double> targets(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        if (t + 1 == steps) {
            targets[t] = episode.rewards[t];
            continue;
        }
        const int chosen = argmax_index(train_values.steps[t + 1].q);
        targets[t] = episode.rewards[t] + gamma * label_values.steps[t + 1].q[chosen];
    }
    return targets;
}

template <typename Params>
double train_step_any(const std::vector<const Episode*>& batch,
                      const std::vector<Query>& queries, NetworkPair<Params>& pair,
                      AdamOptimizer& adam, double gamma) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    Params grads = zeros_like(pair.train);
    double loss = 0.0;
    for (const Episode* episode : batch) {
        if (!episode) throw std::invalid_argument("null episode in batch");
        if (episode->query_index < 0 ||
            episode->query_index >= static_cast<int>(queries.size()))
            throw std::invalid_argument("episode query_index " +
                                        std::to_string(episode->query_index) +
                                        " outside the partition");
        const Query& query = queries[static_cast<std::size_t>(episode->query_index)];
        if (query.id != episode->query_id)
            throw std::invalid_argument("episode for query " + episode->query_id +
                                        " does not match partition slot holding " + query.id);
        const std::vector<double> targets =
            targets_any(*episode, query, pair.train, pair.label, gamma);
        loss += episode_loss_gradient(pair.train, *episode, query, targets, grads);
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("training loss diverged to " + format_double(loss));
    adam.step(pair.train.tensors(), static_cast<const Params&>(grads).tensors());
    return loss;
}

Episode rollout(const GruAgentParams& params, const Query& query, int query_index, int k,
                const RankingEnv& env, double eps, Rng& rng) {
    return run_gru_episode(params, query, query_index, k, env, eps, rng);
}

Episode rollout(const DualRankParams& params, const Query& query, int query_index, int k,
                const RankingEnv& env, double eps, Rng& rng) {
    return run_dualrank_episode(params, query, query_index, k, env, eps, rng);
}

template <typename Params>
TrainOutcome<Params> train_any(const Params& init, const Dataset& data, int k,
                               const RankingEnv& env, const TrainerConfig& config) {
    validate_config(config);
    if (data.train.empty()) throw std::invalid_argument("empty training partition");
    if (data.valid.empty()) throw std::invalid_argument("empty validation partition");

    TrainOutcome<Params> outcome;
    outcome.best = init;
    if (config.max_steps == 0) return outcome;

    const int eval_count =
        std::min<int>(config.eval_queries, static_cast<int>(data.valid.size()));
    const std::vector<Query> eval_set(data.valid.begin(), data.valid.begin() + eval_count);

    NetworkPair<Params> pair = make_network_pair(init);
    AdamOptimizer adam({config.learning_rate, 0.9, 0.999, 1e-8});
    ReplayBuffer buffer(config.replay_capacity);
    Rng rng(config.seed);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
    int stale_evals = 0;

    // Pre-training baseline evaluation anchors the log.
    {
        LogRow row;
        row.step = 0;
        row.epsilon = epsilon_at(config.epsilon, 0);
        row.validation_p_ndcg =
            evaluate_policy(pair.train, eval_set, k, env).mean_p_ndcg;
        outcome.log.push_back(row);
        outcome.best_validation = row.validation_p_ndcg;
        outcome.best_step = 0;
    }

    for (std::int64_t step = 1; step <= config.max_steps; ++step) {
        const double eps = epsilon_at(config.epsilon, step - 1);
        const int query_index = uniform_index(rng, static_cast<int>(data.train.size()));
        buffer.push(rollout(pair.train, data.train[static_cast<std::size_t>(query_index)],
                            query_index, k, env, eps, rng));

        bool transferred = false;
        if (buffer.size() >= config.batch_episodes) {
            const auto batch = buffer.sample(config.batch_episodes, rng);
            loss_sum += train_step(batch, data.train, pair, adam, config.gamma);
            ++loss_count;
            ++outcome.gradient_steps;
            if (outcome.gradient_steps % config.transfer_every == 0) {
                transfer(pair);
                transferred = true;
            }
        }

        outcome.steps_run = step;
        const bool evaluate_now = step % config.eval_every == 0;
        if (!evaluate_now && !transferred) continue;

        LogRow row;
        row.step = step;
        row.epsilon = eps;
        row.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : nan;
        row.transfer_flag = transferred ? 1 : 0;
        loss_sum = 0.0;
        loss_count = 0;
        if (evaluate_now) {
            const double value =
                evaluate_policy(pair.train, eval_set, k, env).mean_p_ndcg;
            row.validation_p_ndcg = value;
            if (value > outcome.best_validation) {
                outcome.best_validation = value;
                outcome.best_step = step;
                outcome.best = pair.train;
                stale_evals = 0;
            } else {
                ++stale_evals;
            }
        }
        outcome.log.push_back(row);
        if (evaluate_now && stale_evals >= config.patience) break;
    }
    return outcome;
}

}  // namespace

std::vector<double> compute_targets(const Episode& episode, const Query& query,
                                    const GruAgentParams& train_net,
                                    const GruAgentParams& label_net, double gamma) {
    return targets_any(episode, query, train_net, label_net, gamma);
}

std::vector<double> compute_targets(const Episode& episode, const Query& query,
                                    const DualRankParams& train_net,
                                    const DualRankParams& label_net, double gamma) {
    return targets_any(episode, query, train_net, label_net, gamma);
}

double train_step(const std::vector<const Episode*>& batch, const std::vector<Query>& queries,
                  NetworkPair<GruAgentParams>& pair, AdamOptimizer& adam, double gamma) {
    return train_step_any(batch, queries, pair, adam, gamma);
}

double train_step(const std::vector<const Episode*>& batch, const std::vector<Query>& queries,
                  NetworkPair<DualRankParams>& pair, AdamOptimizer& adam, double gamma) {
    return train_step_any(batch, queries, pair, adam, gamma);
}

std::string training_log_csv(const std::vector<LogRow>& rows) {
    std::string out = "step,epsilon,train_loss,validation_p_ndcg,transfer_flag\n";
    for (const LogRow& row : rows) {
        out += std::to_string(row.step) + "," + format_double(row.epsilon) + "," +
               format_double(row.train_loss) + "," + format_double(row.validation_p_ndcg) +
               "," + std::to_string(row.transfer_flag) + "\n";
    }
    return out;
}

TrainOutcome<GruAgentParams> train_loop(const GruAgentParams& init, const Dataset& data, int k,
                                        const RankingEnv& env, const TrainerConfig& config) {
    return train_any(init, data, k, env, config);
}

TrainOutcome<DualRankParams> train_loop(const DualRankParams& init, const Dataset& data, int k,
                                        const RankingEnv& env, const TrainerConfig& config) {
    return train_any(init, data, k, env, config);
}

}  // namespace rankrl
