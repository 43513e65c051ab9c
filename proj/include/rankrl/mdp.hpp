#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rankrl/dataset.hpp"

namespace rankrl {

// Preference ranks of the k physical result slots: pref_index[i] is the rank
// (1 = most preferred by users) of physical position i+1. The engine fills
// physical positions; rewards discount by these hidden preference ranks.
struct DisplayOrder {
    std::vector<int> pref_index;

    int k() const { return static_cast<int>(pref_index.size()); }

    // pos is the 1-based physical position.
    int pref_of_position(int pos) const;
};

// Validates that pref is a permutation of 1..k.
DisplayOrder make_display_order(std::vector<int> pref);

struct BuiltinOrders {
    DisplayOrder first_bias;   // top positions preferred: 1,2,...,10
    DisplayOrder center_bias;  // middle preferred: 9,7,5,3,1,2,4,6,8,10
    DisplayOrder last_bias;    // bottom preferred: 10,9,...,1
};

// The three named ten-slot orders. Other page sizes need explicit
// permutations (make_display_order or the JSON loaders).
BuiltinOrders builtin_display_orders(int k = 10);

DisplayOrder display_order_from_json(const nlohmann::json& value);
DisplayOrder load_display_order(const std::string& path);

// Gain of a relevance grade. pow2_shifted doubles per grade starting at 0.5
// (2^(rel-1)); pow2_minus_one is the common DCG gain (2^rel - 1).
enum class GainVariant { pow2_shifted, pow2_minus_one };

struct GainFunction {
    GainVariant variant = GainVariant::pow2_shifted;
    int max_label = 4;
};

// log2(pref_rank + 1); pref_rank is 1-based.
double discount(int pref_rank);

double gain(int rel, const GainFunction& gf);

// Reward of showing a document with the given relevance on 1-based physical
// position pos: gain / discount(preference rank of pos).
double placement_reward(int pos, int rel, const DisplayOrder& order, const GainFunction& gf);

// Whether reward is observable per document or only for the whole page.
enum class RewardLevel { document, serp };

struct RankingEnv {
    DisplayOrder order;
    GainFunction gain_fn;
    RewardLevel level = RewardLevel::document;
};

// Page construction that fills physical positions 1..k in order; each action
// picks the next document.
struct BaselineState {
    int candidate_count = 0;
    int k = 0;
    std::vector<int> placed;  // candidate indices in placement order

    int t() const { return static_cast<int>(placed.size()); }
    bool terminal() const { return t() == k; }
    std::vector<int> available_docs() const;
};

BaselineState make_baseline_state(int candidate_count, int k);

// Appends a legal unplaced candidate index; throws on duplicates,
// out-of-range indices, or stepping a terminal state.
BaselineState baseline_step(BaselineState state, int doc_action);

// Page construction that alternates document choices with explicit position
// choices; an episode takes 2k steps.
enum class ActionType { document, position };

struct RankAction {
    ActionType type;
    int value;  // candidate index for documents, 1-based slot for positions
};

struct DualRankState {
    int candidate_count = 0;
    int k = 0;
    std::vector<int> chosen_docs;       // candidate indices in choice order
    std::vector<int> chosen_positions;  // 1-based physical positions

    int t() const {
        return static_cast<int>(chosen_docs.size() + chosen_positions.size());
    }
    // A document choice must be followed by that document's position.
    bool expects_position() const {
        return chosen_docs.size() == chosen_positions.size() + 1;
    }
    bool terminal() const { return t() == 2 * k; }
    std::vector<int> available_docs() const;
    std::vector<int> available_positions() const;
};

DualRankState make_dualrank_state(int candidate_count, int k);

// Enforces alternation and uniqueness; throws on a wrong action type for the
// current parity, reuse, or out-of-range values.
DualRankState dualrank_step(DualRankState state, RankAction action);

// One complete page construction. For the baseline agent pos_actions is the
// identity permutation and rewards has k entries; for the dual-rank agent
// rewards has 2k entries (document steps interleaved with position steps).
struct Episode {
    std::string query_id;
    int query_index = -1;  // position of the query within its partition
    std::vector<int> doc_actions;
    std::vector<int> pos_actions;
    std::vector<double> rewards;
    double total_reward = 0.0;
    bool interleaved = false;  // true when rewards carry doc/pos step pairs

    int k() const { return static_cast<int>(doc_actions.size()); }
};

// Fills per-step rewards and the total for a completed action sequence.
// Document-level reward pays each placement as it lands; page-level reward
// is zero everywhere except the final step, which carries the sum. The total
// is identical either way.
void assign_rewards(Episode& episode, const Query& query, const RankingEnv& env);

// Sum of placement rewards of a completed episode; the terminal-only reward
// a page-level environment would emit.
double serp_reward(const Episode& episode, const Query& query, const DisplayOrder& order,
                   const GainFunction& gf);

}  // namespace rankrl
