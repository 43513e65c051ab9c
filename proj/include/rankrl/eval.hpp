#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rankrl/agents.hpp"
#include "rankrl/dataset.hpp"
#include "rankrl/mdp.hpp"

namespace rankrl {

// Best achievable page reward: the k largest gains matched to the k slot
// discounts in preference order (rearrangement-optimal, so the physical
// permutation drops out).
double ideal_serp_reward(const Query& query, const DisplayOrder& order, const GainFunction& gf,
                         int k);

// Exhaustive maximum over every ordered assignment of k candidates to the k
// physical positions. Test oracle only; enforces n <= 8, k <= 4.
double brute_force_ideal(const Query& query, const DisplayOrder& order, const GainFunction& gf,
                         int k);

// achieved / ideal; requires ideal > 0 (zero-ideal queries are excluded by
// the caller).
double p_ndcg(double achieved, double ideal);

struct EvalReport {
    double mean_p_ndcg = 0.0;
    std::vector<double> per_query;               // one entry per scored query
    std::vector<double> mean_label_by_position;  // physical positions 1..k
    std::vector<double> mean_label_by_timestep;  // placement steps 1..k
    int query_count = 0;     // queries entering the mean (ideal > 0)
    int skipped_queries = 0; // ideal == 0, rolled out but not scored
    int k = 0;
};

// Greedy (epsilon = 0) rollout of every query; per-query P-NDCG plus the
// label histograms over the produced pages. Histograms average over all
// rollouts; the P-NDCG mean skips zero-ideal queries.
EvalReport evaluate_policy(const GruAgentParams& params, const std::vector<Query>& queries,
                           int k, const RankingEnv& env);
EvalReport evaluate_policy(const DualRankParams& params, const std::vector<Query>& queries,
                           int k, const RankingEnv& env);

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p_value = 0.5;
};

// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
// freedom; one-tailed p for mean(a) > mean(b). Both samples need >= 2
// entries. Degenerate zero-variance samples: p = 0.5 on equal means, else 0
// or 1.
TTestResult welch_one_tailed_t_test(const std::vector<double>& a, const std::vector<double>& b);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& value);

enum class HistogramSeries { by_position, by_timestep };

// CSV with header position_or_step,mean_label,count; count is the number of
// rollouts that contributed to each row.
std::string histogram_csv(const EvalReport& report, HistogramSeries series);

}  // namespace rankrl
