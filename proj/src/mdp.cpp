#include "rankrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rankrl {

int DisplayOrder::pref_of_position(int pos) const {
    if (pos < 1 || pos > k())
        throw std::invalid_argument("physical position " + std::to_string(pos) +
                                    " outside 1.." + std::to_string(k()));
    return pref_index[static_cast<std::size_t>(pos - 1)];
}

DisplayOrder make_display_order(std::vector<int> pref) {
    const int k = static_cast<int>(pref.size());
    if (k == 0) throw std::invalid_argument("display order must not be empty");
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (int v : pref) {
        if (v < 1 || v > k || seen[static_cast<std::size_t>(v - 1)])
            throw std::invalid_argument("display order is not a permutation of 1.." +
                                        std::to_string(k));
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
    return {std::move(pref)};
}

BuiltinOrders builtin_display_orders(int k) {
    if (k != 10)
        throw std::invalid_argument(
            "named display orders are defined for 10 slots; supply an explicit permutation "
            "for k=" +
            std::to_string(k));
    std::vector<int> first(10), last(10);
    std::iota(first.begin(), first.end(), 1);
    for (int i = 0; i < 10; ++i) last[static_cast<std::size_t>(i)] = 10 - i;
    return {make_display_order(first),
            make_display_order({9, 7, 5, 3, 1, 2, 4, 6, 8, 10}),
            make_display_order(last)};
}

DisplayOrder display_order_from_json(const nlohmann::json& value) {
    if (!value.is_array())
        throw std::invalid_argument("display order JSON must be an array of integers");
    std::vector<int> pref;
    for (const auto& v : value) {
        if (!v.is_number_integer())
            throw std::invalid_argument("display order JSON must contain only integers");
        pref.push_back(v.get<int>());
    }
    return make_display_order(std::move(pref));
}

DisplayOrder load_display_order(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open display order file " + path);
    nlohmann::json j;
    in >> j;
    return display_order_from_json(j);
}

double discount(int pref_rank) {
    if (pref_rank < 1)
        throw std::invalid_argument("preference rank must be >= 1, got " +
                                    std::to_string(pref_rank));
    return std::log2(static_cast<double>(pref_rank) + 1.0);
}

double gain(int rel, const GainFunction& gf) {
    if (rel < 0 || rel > gf.max_label)
        throw std::invalid_argument("relevance " + std::to_string(rel) + " outside 0.." +
                                    std::to_string(gf.max_label));
    switch (gf.variant) {
        case GainVariant::pow2_shifted: return std::exp2(static_cast<double>(rel) - 1.0);
        case GainVariant::pow2_minus_one: return std::exp2(static_cast<double>(rel)) - 1.0;
    }
    throw std::logic_error("unhandled gain variant");
}

double placement_reward(int pos, int rel, const DisplayOrder& order, const GainFunction& gf) {
    return gain(rel, gf) / discount(order.pref_of_position(pos));
}

namespace {

void check_unused(const std::vector<int>& used, int value, const char* what) {
    if (std::find(used.begin(), used.end(), value) != used.end())
        throw std::invalid_argument(std::string(what) + " " + std::to_string(value) +
                                    " already used");
}

std::vector<int> complement(const std::vector<int>& used, int lo, int hi) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1) - used.size());
    for (int v = lo; v <= hi; ++v)
        if (std::find(used.begin(), used.end(), v) == used.end()) out.push_back(v);
    return out;
}

}  // namespace

std::vector<int> BaselineState::available_docs() const {
    return complement(placed, 0, candidate_count - 1);
}

BaselineState make_baseline_state(int candidate_count, int k) {
    if (k < 1) throw std::invalid_argument("page size k must be >= 1");
    if (candidate_count < k)
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " candidates, got " +
                                    std::to_string(candidate_count));
    return {candidate_count, k, {}};
}

BaselineState baseline_step(BaselineState state, int doc_action) {
    if (state.terminal()) throw std::invalid_argument("cannot step a terminal state");
    if (doc_action < 0 || doc_action >= state.candidate_count)
        throw std::invalid_argument("document index " + std::to_string(doc_action) +
                                    " out of range");
    check_unused(state.placed, doc_action, "document");
    state.placed.push_back(doc_action);
    return state;
}

std::vector<int> DualRankState::available_docs() const {
    return complement(chosen_docs, 0, candidate_count - 1);
}

std::vector<int> DualRankState::available_positions() const {
    return complement(chosen_positions, 1, k);
}

DualRankState make_dualrank_state(int candidate_count, int k) {
    if (k < 1) throw std::invalid_argument("page size k must be >= 1");
    if (candidate_count < k)
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " candidates, got " +
                                    std::to_string(candidate_count));
    return {candidate_count, k, {}, {}};
}

DualRankState dualrank_step(DualRankState state, RankAction action) {
    if (state.terminal()) throw std::invalid_argument("cannot step a terminal state");
    if (state.expects_position()) {
        if (action.type != ActionType::position)
            throw std::invalid_argument("expected a position action at step " +
                                        std::to_string(state.t()));
        if (action.value < 1 || action.value > state.k)
            throw std::invalid_argument("position " + std::to_string(action.value) +
                                        " outside 1.." + std::to_string(state.k));
        check_unused(state.chosen_positions, action.value, "position");
        state.chosen_positions.push_back(action.value);
    } else {
        if (action.type != ActionType::document)
            throw std::invalid_argument("expected a document action at step " +
                                        std::to_string(state.t()));
        if (action.value < 0 || action.value >= state.candidate_count)
            throw std::invalid_argument("document index " + std::to_string(action.value) +
                                        " out of range");
        check_unused(state.chosen_docs, action.value, "document");
        state.chosen_docs.push_back(action.value);
    }
    return state;
}

namespace {

void check_complete(const Episode& episode, const Query& query) {
    const int k = episode.k();
    if (k == 0) throw std::invalid_argument("episode is empty");
    if (episode.pos_actions.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("episode has " + std::to_string(episode.doc_actions.size()) +
                                    " documents but " + std::to_string(episode.pos_actions.size()) +
                                    " positions");
    std::vector<bool> doc_seen(query.candidates.size(), false);
    std::vector<bool> pos_seen(static_cast<std::size_t>(k), false);
    for (int i = 0; i < k; ++i) {
        const int d = episode.doc_actions[static_cast<std::size_t>(i)];
        const int p = episode.pos_actions[static_cast<std::size_t>(i)];
        if (d < 0 || d >= static_cast<int>(query.candidates.size()))
            throw std::invalid_argument("episode references unknown document " +
                                        std::to_string(d) + " of query " + episode.query_id);
        if (doc_seen[static_cast<std::size_t>(d)])
            throw std::invalid_argument("episode repeats document " + std::to_string(d));
        doc_seen[static_cast<std::size_t>(d)] = true;
        if (p < 1 || p > k || pos_seen[static_cast<std::size_t>(p - 1)])
            throw std::invalid_argument("episode positions are not a permutation of 1.." +
                                        std::to_string(k));
        pos_seen[static_cast<std::size_t>(p - 1)] = true;
    }
}

}  // namespace

void assign_rewards(Episode& episode, const Query& query, const RankingEnv& env) {
    check_complete(episode, query);
    const int k = episode.k();

    std::vector<double> placement(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        const Document& doc =
            query.candidates[static_cast<std::size_t>(episode.doc_actions[static_cast<std::size_t>(i)])];
        placement[static_cast<std::size_t>(i)] = placement_reward(
            episode.pos_actions[static_cast<std::size_t>(i)], doc.relevance, env.order, env.gain_fn);
        total += placement[static_cast<std::size_t>(i)];
    }

    const std::size_t steps = episode.interleaved ? static_cast<std::size_t>(2 * k)
                                                  : static_cast<std::size_t>(k);
    episode.rewards.assign(steps, 0.0);
    if (env.level == RewardLevel::document) {
        for (int i = 0; i < k; ++i) {
            // Dual-rank pays on the position step of each placement pair.
            const std::size_t slot = episode.interleaved ? static_cast<std::size_t>(2 * i + 1)
                                                         : static_cast<std::size_t>(i);
            episode.rewards[slot] = placement[static_cast<std::size_t>(i)];
        }
    } else {
        episode.rewards.back() = total;
    }
    episode.total_reward = total;
}

double serp_reward(const Episode& episode, const Query& query, const DisplayOrder& order,
                   const GainFunction& gf) {
    check_complete(episode, query);
    double total = 0.0;
    for (int i = 0; i < episode.k(); ++i) {
        const Document& doc =
            query.candidates[static_cast<std::size_t>(episode.doc_actions[static_cast<std::size_t>(i)])];
        total += placement_reward(episode.pos_actions[static_cast<std::size_t>(i)], doc.relevance,
                                  order, gf);
    }
    return total;
}

}  // namespace rankrl
