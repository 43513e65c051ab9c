#include "rankrl/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rankrl/text.hpp"

namespace rankrl {

namespace {

void check_instance(const Query& query, const DisplayOrder& order, int k) {
    if (k < 1) throw std::invalid_argument("page size k must be >= 1");
    if (order.k() != k)
        throw std::invalid_argument("display order has " + std::to_string(order.k()) +
                                    " slots, expected " + std::to_string(k));
    if (static_cast<int>(query.candidates.size()) < k)
        throw std::invalid_argument("query " + query.id + " has " +
                                    std::to_string(query.candidates.size()) +
                                    " candidates, fewer than k=" + std::to_string(k));
}

}  // namespace

double ideal_serp_reward(const Query& query, const DisplayOrder& order, const GainFunction& gf,
                         int k) {
    check_instance(query, order, k);
    std::vector<double> gains;
    gains.reserve(query.candidates.size());
    for (const Document& d : query.candidates) gains.push_back(gain(d.relevance, gf));
    std::sort(gains.begin(), gains.end(), std::greater<double>());
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += gains[static_cast<std::size_t>(i)] / discount(i + 1);
    return total;
}

double brute_force_ideal(const Query& query, const DisplayOrder& order, const GainFunction& gf,
                         int k) {
    check_instance(query, order, k);
    const int n = static_cast<int>(query.candidates.size());
    if (n > 8 || k > 4)
        throw std::invalid_argument("brute force capped at 8 candidates and 4 slots, got n=" +
                                    std::to_string(n) + ", k=" + std::to_string(k));

    double best = -std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<int> chosen;
    // Depth-first over ordered document choices for positions 1..k.
    auto recurse = [&](auto&& self, int pos, double acc) -> void {
        if (pos > k) {
            best = std::max(best, acc);
            return;
        }
        for (int d = 0; d < n; ++d) {
            if (used[static_cast<std::size_t>(d)]) continue;
            used[static_cast<std::size_t>(d)] = true;
            self(self, pos + 1,
                 acc + placement_reward(pos, query.candidates[static_cast<std::size_t>(d)].relevance,
                                        order, gf));
            used[static_cast<std::size_t>(d)] = false;
        }
    };
    recurse(recurse, 1, 0.0);
    return best;
}

double p_ndcg(double achieved, double ideal) {
    if (!(ideal > 0.0))
        throw std::invalid_argument("p_ndcg needs a positive ideal reward, got " +
                                    format_double(ideal));
    return achieved / ideal;
}

namespace {

Episode greedy_rollout(const GruAgentParams& params, const Query& query, int query_index, int k,
                       const RankingEnv& env, Rng& rng) {
    return run_gru_episode(params, query, query_index, k, env, 0.0, rng);
}

Episode greedy_rollout(const DualRankParams& params, const Query& query, int query_index, int k,
                       const RankingEnv& env, Rng& rng) {
    return run_dualrank_episode(params, query, query_index, k, env, 0.0, rng);
}

template <typename Params>
EvalReport evaluate_any(const Params& params, const std::vector<Query>& queries, int k,
                        const RankingEnv& env) {
    if (queries.empty()) throw std::invalid_argument("no queries to evaluate");
    EvalReport report;
    report.k = k;
    std::vector<double> pos_sum(static_cast<std::size_t>(k), 0.0);
    std::vector<double> step_sum(static_cast<std::size_t>(k), 0.0);

    Rng rng(0);  // greedy rollouts never draw from it
    double total = 0.0;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const Query& query = queries[qi];
        Episode episode = greedy_rollout(params, query, static_cast<int>(qi), k, env, rng);
        for (int step = 0; step < k; ++step) {
            const auto si = static_cast<std::size_t>(step);
            const int doc = episode.doc_actions[si];
            const int label = query.candidates[static_cast<std::size_t>(doc)].relevance;
            pos_sum[static_cast<std::size_t>(episode.pos_actions[si] - 1)] += label;
            step_sum[si] += label;
        }
        const double ideal = ideal_serp_reward(query, env.order, env.gain_fn, k);
        if (ideal > 0.0) {
            const double value = p_ndcg(episode.total_reward, ideal);
            report.per_query.push_back(value);
            total += value;
        } else {
            ++report.skipped_queries;
        }
    }
    report.query_count = static_cast<int>(report.per_query.size());
    if (report.query_count > 0) report.mean_p_ndcg = total / report.query_count;
    const double rollouts = static_cast<double>(queries.size());
    for (int i = 0; i < k; ++i) {
        report.mean_label_by_position.push_back(pos_sum[static_cast<std::size_t>(i)] / rollouts);
        report.mean_label_by_timestep.push_back(step_sum[static_cast<std::size_t>(i)] / rollouts);
    }
    return report;
}

}  // namespace

EvalReport evaluate_policy(const GruAgentParams& params, const std::vector<Query>& queries,
                           int k, const RankingEnv& env) {
    return evaluate_any(params, queries, k, env);
}

EvalReport evaluate_policy(const DualRankParams& params, const std::vector<Query>& queries,
                           int k, const RankingEnv& env) {
    return evaluate_any(params, queries, k, env);
}

TTestResult welch_one_tailed_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("t-test needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double ma = 0.0, mb = 0.0;
    for (double v : a) ma += v;
    for (double v : b) mb += v;
    ma /= na;
    mb /= nb;
    double va = 0.0, vb = 0.0;
    for (double v : a) va += (v - ma) * (v - ma);
    for (double v : b) vb += (v - mb) * (v - mb);
    va /= na - 1.0;
    vb /= nb - 1.0;

    TTestResult result;
    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        // Both samples constant: no spread to test against.
        result.dof = na + nb - 2.0;
        if (ma == mb) {
            result.t = 0.0;
            result.p_value = 0.5;
        } else {
            result.t = ma > mb ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            result.p_value = ma > mb ? 0.0 : 1.0;
        }
        return result;
    }
    result.t = (ma - mb) / std::sqrt(se2);
    result.dof = se2 * se2 /
                 ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    boost::math::students_t_distribution<double> dist(result.dof);
    result.p_value = boost::math::cdf(boost::math::complement(dist, result.t));
    return result;
}

nlohmann::json report_to_json(const EvalReport& report) {
    return {{"mean_p_ndcg", report.mean_p_ndcg},
            {"per_query_p_ndcg", report.per_query},
            {"mean_label_by_position", report.mean_label_by_position},
            {"mean_label_by_timestep", report.mean_label_by_timestep},
            {"query_count", report.query_count},
            {"skipped_queries", report.skipped_queries},
            {"k", report.k}};
}

EvalReport report_from_json(const nlohmann::json& value) {
    EvalReport report;
    report.mean_p_ndcg = value.at("mean_p_ndcg").get<double>();
    report.per_query = value.at("per_query_p_ndcg").get<std::vector<double>>();
    report.mean_label_by_position = value.at("mean_label_by_position").get<std::vector<double>>();
    report.mean_label_by_timestep = value.at("mean_label_by_timestep").get<std::vector<double>>();
    report.query_count = value.at("query_count").get<int>();
    report.skipped_queries = value.at("skipped_queries").get<int>();
    report.k = value.at("k").get<int>();
    if (static_cast<int>(report.mean_label_by_position.size()) != report.k ||
        static_cast<int>(report.mean_label_by_timestep.size()) != report.k)
        throw std::invalid_argument("report histograms do not match k");
    return report;
}

std::string histogram_csv(const EvalReport& report, HistogramSeries series) {
    const std::vector<double>& values = series == HistogramSeries::by_position
                                            ? report.mean_label_by_position
                                            : report.mean_label_by_timestep;
    const int rollouts = report.query_count + report.skipped_queries;
    std::string out = "position_or_step,mean_label,count\n";
    for (int i = 0; i < report.k; ++i) {
        out += std::to_string(i + 1) + "," +
               format_double(values[static_cast<std::size_t>(i)]) + "," +
               std::to_string(rollouts) + "\n";
    }
    return out;
}

}  // namespace rankrl
