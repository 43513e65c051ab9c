#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rankrl/dataset.hpp"
#include "rankrl/eval.hpp"
#include "rankrl/mdp.hpp"
#include "rankrl/trainer.hpp"

namespace rankrl {

inline constexpr const char* kVersion = "rankrl 0.1.0";

enum class AgentKind { gru, dualrank };

// Where the corpus comes from: LETOR text partitions on disk, or the
// synthetic generator. When no validation file is given, a seeded fraction
// of the train queries is carved off instead.
struct DatasetSpec {
    bool synthetic = true;
    SyntheticConfig synth;

    std::string train_path;
    std::string valid_path;  // empty: carve valid_fraction out of train
    std::string test_path;
    int feature_count = 0;   // required for LETOR paths
    int max_label = 4;
    double valid_fraction = 0.15;
    std::uint64_t split_seed = 1;  // drives the carve, not the training run
    bool normalize = true;
};

// Network sizes; the feature count is taken from the dataset at run time.
struct ModelSpec {
    int embed_dim = 128;
    int hidden_dim = 256;
    int head_dim = 128;
    CandidateInput candidate_input = CandidateInput::input_vector;
};

// One cell of the experimental grid, possibly run under several seeds.
// display_order is a builtin name (first/center/last) or a path to a JSON
// preference vector.
struct ExperimentConfig {
    DatasetSpec dataset;
    AgentKind agent = AgentKind::gru;
    RewardLevel reward_level = RewardLevel::document;
    std::string display_order = "first";
    GainVariant gain = GainVariant::pow2_shifted;
    int k = 10;
    ModelSpec model;
    TrainerConfig trainer;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "runs";
};

// The grid: every combination of the listed agents, reward levels and
// display orders, each trained under every seed of the base config.
struct SweepConfig {
    ExperimentConfig base;
    std::vector<AgentKind> agents;
    std::vector<RewardLevel> reward_levels;
    std::vector<std::string> display_orders;
};

const char* to_string(AgentKind agent);
const char* to_string(RewardLevel level);
const char* to_string(GainVariant variant);
const char* to_string(CandidateInput input);
AgentKind agent_kind_from_string(const std::string& text);
RewardLevel reward_level_from_string(const std::string& text);
GainVariant gain_variant_from_string(const std::string& text);
CandidateInput candidate_input_from_string(const std::string& text);

// The JSON schema mirrors the struct fields one-to-one; unknown keys are
// rejected so typos fail loudly. config_from_json also unwraps a run
// manifest (the object under its "config" key), so a manifest can be fed
// straight back in to reproduce its run.
ExperimentConfig config_from_json(const nlohmann::json& value);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::string& path);

// Same schema, except agent / reward_level / display_order may each be an
// array; scalars mean a one-element axis.
SweepConfig sweep_from_json(const nlohmann::json& value);
SweepConfig load_sweep_config(const std::string& path);

// Field-by-field checks with the offending field named in the message.
// LETOR paths must exist before any compute starts.
void validate_experiment(const ExperimentConfig& config);

// Builtin name or JSON file; throws if the resulting permutation is not
// k slots long.
DisplayOrder resolve_display_order(const std::string& name_or_path, int k);

// Moves a seeded sample of round(fraction * train) queries (at least one)
// from train into valid. Deterministic in the seed.
void carve_validation_split(Dataset& data, double fraction, std::uint64_t seed);

// Synthesizes or loads + filters + (optionally) normalizes the corpus.
Dataset build_dataset(const DatasetSpec& spec, int k);

// One line of runs.csv; failed runs keep their error text and NaN metrics.
struct RunRecord {
    AgentKind agent = AgentKind::gru;
    RewardLevel reward_level = RewardLevel::document;
    std::string display_order;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double test_p_ndcg = std::numeric_limits<double>::quiet_NaN();
    double best_validation = std::numeric_limits<double>::quiet_NaN();
    std::int64_t best_step = -1;
    std::int64_t steps_run = 0;
    std::string run_dir;
};

// Trains one (agent, reward, order, seed) cell and writes four artifacts
// into <out_dir>/<agent>_<reward>_<order>_s<seed>/: training_log.csv,
// checkpoint.bin, report.json (test-set evaluation of the best checkpoint)
// and manifest.json. The manifest is written last, so a directory without
// one is an incomplete run.
RunRecord run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// run_experiment for every configured seed, in order.
std::vector<RunRecord> run_all(const ExperimentConfig& config);

// Executes the whole grid, recording failures instead of stopping, then
// writes runs.csv and summary.csv into the base out_dir.
std::vector<RunRecord> run_sweep(const SweepConfig& config);

std::string runs_csv(const std::vector<RunRecord>& records);

// One row per (agent, reward, order) combination in first-appearance order:
// run count, mean/std/stderr of test P-NDCG over the successful runs, and a
// one-tailed p-value that this agent's mean exceeds the other agent's in
// the same (reward, order) cell (NaN unless both sides have >= 2 runs).
std::string summary_csv(const std::vector<RunRecord>& records);

// Long-format per-position / per-timestep label averages for plotting.
struct PlotSource {
    std::string bias;  // series label, normally the display-order name
    EvalReport report;
};
std::string plot_data_csv(const std::vector<PlotSource>& sources);

}  // namespace rankrl
