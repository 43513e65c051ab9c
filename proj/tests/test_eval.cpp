#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rankrl/eval.hpp"

using namespace rankrl;

namespace {

Query query_with_labels(const std::vector<int>& labels, int feature_count = 3) {
    static int counter = 0;
    Query q;
    q.id = "q" + std::to_string(++counter);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Document d;
        d.features = Vector::Zero(feature_count);
        d.features[static_cast<Eigen::Index>(i % feature_count)] = 0.5 + 0.1 * i;
        d.relevance = labels[i];
        q.candidates.push_back(std::move(d));
    }
    return q;
}

DisplayOrder identity_order(int k) {
    std::vector<int> pref(static_cast<std::size_t>(k));
    std::iota(pref.begin(), pref.end(), 1);
    return make_display_order(pref);
}

std::vector<int> random_permutation(int k, Rng& rng) {
    std::vector<int> pref(static_cast<std::size_t>(k));
    std::iota(pref.begin(), pref.end(), 1);
    for (int i = k - 1; i > 0; --i)
        std::swap(pref[static_cast<std::size_t>(i)],
                  pref[static_cast<std::size_t>(uniform_index(rng, i + 1))]);
    return pref;
}

}  // namespace

TEST_CASE("ideal reward matches the hand-computed pin") {
    Query q = query_with_labels({2, 1, 0});
    GainFunction gf;  // doubling gain starting at 0.5
    CHECK(ideal_serp_reward(q, identity_order(3), gf, 3) ==
          doctest::Approx(2.8809297535714578).epsilon(1e-14));

    // k = 1 takes the single best gain undiscounted.
    Query q2 = query_with_labels({0, 3, 1});
    CHECK(ideal_serp_reward(q2, identity_order(1), gf, 1) ==
          doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS(ideal_serp_reward(query_with_labels({1}), identity_order(3), gf, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(ideal_serp_reward(q, identity_order(2), gf, 3), std::invalid_argument);
}

TEST_CASE("ideal reward is permutation-invariant and matches brute force") {
    Rng rng(404);
    for (GainVariant variant : {GainVariant::pow2_shifted, GainVariant::pow2_minus_one}) {
        GainFunction gf{variant, 4};
        for (int k = 1; k <= 4; ++k) {
            for (int n = k; n <= 7; ++n) {
                for (int rep = 0; rep < 20; ++rep) {
                    std::vector<int> labels(static_cast<std::size_t>(n));
                    for (int& l : labels) l = uniform_index(rng, 5);
                    Query q = query_with_labels(labels);
                    DisplayOrder order = make_display_order(random_permutation(k, rng));
                    const double fast = ideal_serp_reward(q, order, gf, k);
                    const double slow = brute_force_ideal(q, order, gf, k);
                    REQUIRE(std::abs(fast - slow) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("brute force enforces its instance cap") {
    GainFunction gf;
    Query big = query_with_labels({1, 2, 3, 0, 1, 2, 3, 0, 1});
    CHECK_THROWS_AS(brute_force_ideal(big, identity_order(4), gf, 4), std::invalid_argument);
    Query q = query_with_labels({1, 2, 3, 0, 1});
    CHECK_THROWS_AS(brute_force_ideal(q, identity_order(5), gf, 5), std::invalid_argument);
    // Singleton instance: the one candidate's gain, undiscounted.
    Query tiny = query_with_labels({3});
    CHECK(brute_force_ideal(tiny, identity_order(1), gf, 1) == doctest::Approx(4.0));
}

TEST_CASE("all-equal labels make every page ideal") {
    GainFunction gf;
    Rng rng(31);
    Query q = query_with_labels({2, 2, 2, 2, 2});
    DisplayOrder order = make_display_order(random_permutation(3, rng));
    const double ideal = ideal_serp_reward(q, order, gf, 3);
    // Any legal page achieves it: try a few explicit episodes.
    for (const auto& docs : std::vector<std::vector<int>>{{0, 1, 2}, {4, 2, 0}, {3, 1, 4}}) {
        Episode e;
        e.query_id = q.id;
        e.doc_actions = docs;
        e.pos_actions = {1, 2, 3};
        RankingEnv env{order, gf, RewardLevel::document};
        assign_rewards(e, q, env);
        CHECK(p_ndcg(e.total_reward, ideal) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("p_ndcg reproduces the worked swapped-preference example") {
    // labels {3,1,0,2}, k=2, position 2 preferred over position 1; the page
    // puts the rel-3 document on p1 and the rel-2 document on p2.
    Query q = query_with_labels({3, 1, 0, 2});
    DisplayOrder order = make_display_order({2, 1});
    GainFunction gf;
    Episode e;
    e.query_id = q.id;
    e.doc_actions = {0, 3};
    e.pos_actions = {1, 2};
    RankingEnv env{order, gf, RewardLevel::document};
    assign_rewards(e, q, env);
    const double ideal = ideal_serp_reward(q, order, gf, 2);
    CHECK(e.total_reward == doctest::Approx(4.5237190142858301).epsilon(1e-14));
    CHECK(ideal == doctest::Approx(5.2618595071429155).epsilon(1e-14));
    CHECK(p_ndcg(e.total_reward, ideal) ==
          doctest::Approx(0.85971869985219718).epsilon(1e-12));

    CHECK_THROWS_AS(p_ndcg(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(p_ndcg(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("under top-first preferences p_ndcg is plain ndcg") {
    GainFunction gf{GainVariant::pow2_minus_one, 4};
    Rng rng(77);
    DisplayOrder order = identity_order(4);
    RankingEnv env{order, gf, RewardLevel::document};
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<int> labels(7);
        for (int& l : labels) l = uniform_index(rng, 5);
        Query q = query_with_labels(labels);
        std::vector<int> docs;
        while (static_cast<int>(docs.size()) < 4) {
            int d = uniform_index(rng, 7);
            if (std::find(docs.begin(), docs.end(), d) == docs.end()) docs.push_back(d);
        }
        Episode e;
        e.query_id = q.id;
        e.doc_actions = docs;
        e.pos_actions = {1, 2, 3, 4};
        assign_rewards(e, q, env);

        // Independent textbook NDCG@4 with the same gain.
        auto dcg_gain = [](int rel) { return std::pow(2.0, rel) - 1.0; };
        double dcg = 0.0;
        for (int i = 0; i < 4; ++i)
            dcg += dcg_gain(labels[static_cast<std::size_t>(docs[static_cast<std::size_t>(i)])]) /
                   std::log2(i + 2.0);
        std::vector<int> sorted_labels = labels;
        std::sort(sorted_labels.begin(), sorted_labels.end(), std::greater<int>());
        double idcg = 0.0;
        for (int i = 0; i < 4; ++i)
            idcg += dcg_gain(sorted_labels[static_cast<std::size_t>(i)]) / std::log2(i + 2.0);
        if (idcg == 0.0) continue;  // all-zero labels have no ndcg
        ++checked;
        CHECK(std::abs(p_ndcg(e.total_reward, ideal_serp_reward(q, order, gf, 4)) -
                       dcg / idcg) < 1e-12);
    }
    CHECK(checked > 90);
}

TEST_CASE("policy evaluation scores a perfectly-sorting agent at exactly one") {
    // Zero weights make the sequential agent pick candidates in index order;
    // with already label-sorted candidates and top-first preferences that is
    // the ideal page for every query.
    Rng init_rng(1);
    ModelDims dims{3, 2, 2, 2, CandidateInput::hidden_state};
    GruAgentParams agent = zeros_like(init_gru_agent(dims, init_rng));

    std::vector<Query> queries;
    queries.push_back(query_with_labels({4, 3, 2, 1, 0}));
    queries.push_back(query_with_labels({3, 3, 2, 0, 0}));
    queries.push_back(query_with_labels({2, 1, 1, 1, 0}));
    RankingEnv env{identity_order(3), GainFunction{}, RewardLevel::document};

    EvalReport report = evaluate_policy(agent, queries, 3, env);
    CHECK(report.query_count == 3);
    CHECK(report.skipped_queries == 0);
    CHECK(report.mean_p_ndcg == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : report.per_query) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    // Position i holds the i-th best document of each query.
    CHECK(report.mean_label_by_position[0] == doctest::Approx((4 + 3 + 2) / 3.0));
    CHECK(report.mean_label_by_position[1] == doctest::Approx((3 + 3 + 1) / 3.0));
    CHECK(report.mean_label_by_position[2] == doctest::Approx((2 + 2 + 1) / 3.0));
    CHECK(report.mean_label_by_timestep == report.mean_label_by_position);
}

TEST_CASE("policy evaluation bounds, zero-ideal skips, and determinism") {
    Rng init_rng(9);
    ModelDims dims{3, 3, 4, 3, CandidateInput::input_vector};
    GruAgentParams agent = init_gru_agent(dims, init_rng);

    std::vector<Query> queries;
    Rng label_rng(10);
    for (int i = 0; i < 8; ++i) {
        std::vector<int> labels(6);
        for (int& l : labels) l = uniform_index(label_rng, 5);
        queries.push_back(query_with_labels(labels));
    }
    queries.push_back(query_with_labels({0, 0, 0, 0, 0, 0}));  // zero ideal under this gain
    GainFunction gf{GainVariant::pow2_minus_one, 4};
    RankingEnv env{identity_order(4), gf, RewardLevel::document};

    EvalReport report = evaluate_policy(agent, queries, 4, env);
    CHECK(report.skipped_queries == 1);
    CHECK(report.query_count == 8);
    CHECK(report.mean_p_ndcg > 0.0);
    CHECK(report.mean_p_ndcg <= 1.0 + 1e-12);
    for (double v : report.per_query) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }

    EvalReport again = evaluate_policy(agent, queries, 4, env);
    CHECK(again.mean_p_ndcg == report.mean_p_ndcg);
    CHECK(again.per_query == report.per_query);

    CHECK_THROWS_AS(evaluate_policy(agent, std::vector<Query>{}, 4, env),
                    std::invalid_argument);
}

TEST_CASE("both histogram views of a dual-rank page carry the same labels") {
    Rng init_rng(15);
    ModelDims dims{3, 3, 4, 3, CandidateInput::input_vector};
    DualRankParams agent = init_dualrank_agent(dims, 3, init_rng);

    std::vector<Query> queries;
    Rng label_rng(16);
    for (int i = 0; i < 10; ++i) {
        std::vector<int> labels(6);
        for (int& l : labels) l = uniform_index(label_rng, 5);
        queries.push_back(query_with_labels(labels));
    }
    RankingEnv env{make_display_order({3, 1, 2}), GainFunction{}, RewardLevel::document};
    EvalReport report = evaluate_policy(agent, queries, 3, env);

    const double by_pos = std::accumulate(report.mean_label_by_position.begin(),
                                          report.mean_label_by_position.end(), 0.0);
    const double by_step = std::accumulate(report.mean_label_by_timestep.begin(),
                                           report.mean_label_by_timestep.end(), 0.0);
    CHECK(by_pos == doctest::Approx(by_step).epsilon(1e-12));
    CHECK(static_cast<int>(report.mean_label_by_position.size()) == 3);
    CHECK(static_cast<int>(report.mean_label_by_timestep.size()) == 3);
}

TEST_CASE("the one-tailed test reproduces reference statistics") {
    TTestResult r = welch_one_tailed_t_test({0.5, 0.6, 0.7}, {0.1, 0.2, 0.3});
    CHECK(r.t == doctest::Approx(4.898979485566356).epsilon(1e-12));
    CHECK(r.dof == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.004024946550418859).epsilon(1e-9));

    // Unequal sizes exercise the degrees-of-freedom formula.
    TTestResult u = welch_one_tailed_t_test({1.0, 1.2, 1.4, 1.1}, {0.9, 1.05});
    CHECK(u.t == doctest::Approx(1.7597653802562394).epsilon(1e-12));
    CHECK(u.dof == doctest::Approx(3.3798358733880405).epsilon(1e-12));
    CHECK(u.p_value == doctest::Approx(0.08313446746898781).epsilon(1e-9));
}

TEST_CASE("the one-tailed test is symmetric and handles degeneracy") {
    std::vector<double> a{0.5, 0.6, 0.7}, b{0.1, 0.2, 0.3};
    TTestResult ab = welch_one_tailed_t_test(a, b);
    TTestResult ba = welch_one_tailed_t_test(b, a);
    CHECK(ab.p_value + ba.p_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));

    TTestResult same = welch_one_tailed_t_test(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p_value == doctest::Approx(0.5).epsilon(1e-12));

    TTestResult flat = welch_one_tailed_t_test({0.4, 0.4}, {0.4, 0.4});
    CHECK(flat.t == 0.0);
    CHECK(flat.p_value == 0.5);

    TTestResult sep = welch_one_tailed_t_test({0.5, 0.5}, {0.2, 0.2});
    CHECK(sep.p_value == 0.0);
    CHECK(welch_one_tailed_t_test({0.2, 0.2}, {0.5, 0.5}).p_value == 1.0);

    CHECK_THROWS_AS(welch_one_tailed_t_test({1.0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(welch_one_tailed_t_test({1.0, 1.1}, {0.5}), std::invalid_argument);
}

TEST_CASE("reports export to json and csv") {
    EvalReport report;
    report.mean_p_ndcg = 0.75;
    report.per_query = {0.5, 1.0};
    report.mean_label_by_position = {2.5, 1.0};
    report.mean_label_by_timestep = {1.0, 2.5};
    report.query_count = 2;
    report.skipped_queries = 1;
    report.k = 2;

    nlohmann::json j = report_to_json(report);
    CHECK(j.at("mean_p_ndcg").get<double>() == 0.75);
    CHECK(j.at("query_count").get<int>() == 2);
    CHECK(j.at("skipped_queries").get<int>() == 1);
    CHECK(j.at("per_query_p_ndcg").size() == 2);
    CHECK(j.at("mean_label_by_position")[0].get<double>() == 2.5);

    CHECK(histogram_csv(report, HistogramSeries::by_position) ==
          "position_or_step,mean_label,count\n1,2.5,3\n2,1,3\n");
    CHECK(histogram_csv(report, HistogramSeries::by_timestep) ==
          "position_or_step,mean_label,count\n1,1,3\n2,2.5,3\n");
}
