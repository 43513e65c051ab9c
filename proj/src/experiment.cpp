#include "rankrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "rankrl/text.hpp"

namespace rankrl {

namespace {

void check_keys(const nlohmann::json& obj, const char* context,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw std::invalid_argument(std::string(context) + ": expected a JSON object");
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* key) { return item.key() == key; }))
            throw std::invalid_argument(std::string(context) + ": unknown key '" + item.key() +
                                        "'");
    }
}

SyntheticConfig synth_from_json(const nlohmann::json& obj) {
    check_keys(obj, "dataset.synthetic",
               {"train_queries", "valid_queries", "test_queries", "docs_per_query",
                "feature_count", "max_label", "label_signal", "noise_scale", "seed"});
    SyntheticConfig synth;
    synth.train_queries = obj.value("train_queries", synth.train_queries);
    synth.valid_queries = obj.value("valid_queries", synth.valid_queries);
    synth.test_queries = obj.value("test_queries", synth.test_queries);
    synth.docs_per_query = obj.value("docs_per_query", synth.docs_per_query);
    synth.feature_count = obj.value("feature_count", synth.feature_count);
    synth.max_label = obj.value("max_label", synth.max_label);
    if (obj.value("label_signal", "one_hot") != std::string("one_hot"))
        throw std::invalid_argument("dataset.synthetic.label_signal: only 'one_hot' exists");
    synth.noise_scale = obj.value("noise_scale", synth.noise_scale);
    synth.seed = obj.value("seed", synth.seed);
    return synth;
}

DatasetSpec dataset_from_json(const nlohmann::json& obj) {
    check_keys(obj, "dataset",
               {"synthetic", "train_path", "valid_path", "test_path", "feature_count",
                "max_label", "valid_fraction", "split_seed", "normalize"});
    DatasetSpec spec;
    if (obj.contains("synthetic")) {
        if (obj.contains("train_path"))
            throw std::invalid_argument("dataset: give either synthetic or train_path, not both");
        spec.synthetic = true;
        spec.synth = synth_from_json(obj.at("synthetic"));
        return spec;
    }
    spec.synthetic = false;
    spec.train_path = obj.value("train_path", "");
    spec.valid_path = obj.value("valid_path", "");
    spec.test_path = obj.value("test_path", "");
    spec.feature_count = obj.value("feature_count", 0);
    spec.max_label = obj.value("max_label", spec.max_label);
    spec.valid_fraction = obj.value("valid_fraction", spec.valid_fraction);
    spec.split_seed = obj.value("split_seed", spec.split_seed);
    spec.normalize = obj.value("normalize", spec.normalize);
    return spec;
}

ModelSpec model_from_json(const nlohmann::json& obj) {
    check_keys(obj, "model", {"embed_dim", "hidden_dim", "head_dim", "candidate_input"});
    ModelSpec model;
    model.embed_dim = obj.value("embed_dim", model.embed_dim);
    model.hidden_dim = obj.value("hidden_dim", model.hidden_dim);
    model.head_dim = obj.value("head_dim", model.head_dim);
    model.candidate_input =
        candidate_input_from_string(obj.value("candidate_input", "input_vector"));
    return model;
}

TrainerConfig trainer_from_json(const nlohmann::json& obj) {
    check_keys(obj, "trainer",
               {"learning_rate", "replay_capacity", "transfer_every", "batch_episodes",
                "max_steps", "gamma", "epsilon", "eval_every", "patience", "eval_queries"});
    TrainerConfig trainer;
    trainer.learning_rate = obj.value("learning_rate", trainer.learning_rate);
    trainer.replay_capacity = obj.value("replay_capacity", trainer.replay_capacity);
    trainer.transfer_every = obj.value("transfer_every", trainer.transfer_every);
    trainer.batch_episodes = obj.value("batch_episodes", trainer.batch_episodes);
    trainer.max_steps = obj.value("max_steps", trainer.max_steps);
    trainer.gamma = obj.value("gamma", trainer.gamma);
    if (obj.contains("epsilon")) {
        const nlohmann::json& eps = obj.at("epsilon");
        check_keys(eps, "trainer.epsilon", {"start", "end", "decay_steps"});
        trainer.epsilon.start = eps.value("start", trainer.epsilon.start);
        trainer.epsilon.end = eps.value("end", trainer.epsilon.end);
        trainer.epsilon.decay_steps = eps.value("decay_steps", trainer.epsilon.decay_steps);
    }
    trainer.eval_every = obj.value("eval_every", trainer.eval_every);
    trainer.patience = obj.value("patience", trainer.patience);
    trainer.eval_queries = obj.value("eval_queries", trainer.eval_queries);
    return trainer;
}

nlohmann::json dataset_to_json(const DatasetSpec& spec) {
    if (spec.synthetic)
        return {{"synthetic",
                 {{"train_queries", spec.synth.train_queries},
                  {"valid_queries", spec.synth.valid_queries},
                  {"test_queries", spec.synth.test_queries},
                  {"docs_per_query", spec.synth.docs_per_query},
                  {"feature_count", spec.synth.feature_count},
                  {"max_label", spec.synth.max_label},
                  {"label_signal", "one_hot"},
                  {"noise_scale", spec.synth.noise_scale},
                  {"seed", spec.synth.seed}}}};
    return {{"train_path", spec.train_path},
            {"valid_path", spec.valid_path},
            {"test_path", spec.test_path},
            {"feature_count", spec.feature_count},
            {"max_label", spec.max_label},
            {"valid_fraction", spec.valid_fraction},
            {"split_seed", spec.split_seed},
            {"normalize", spec.normalize}};
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    nlohmann::json value;
    try {
        in >> value;
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(path + ": " + ex.what());
    }
    return value;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out.good()) throw std::runtime_error("failed while writing " + path);
}

// first/center/last stay readable; paths lose their separators so every
// order still gets its own run directory.
std::string order_label(const std::string& display_order) {
    std::string label;
    for (char c : display_order)
        label += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '-';
    return label;
}

std::string run_name(const ExperimentConfig& config, std::uint64_t seed) {
    return std::string(to_string(config.agent)) + "_" + to_string(config.reward_level) + "_" +
           order_label(config.display_order) + "_s" + std::to_string(seed);
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

template <typename Params>
Params init_agent(const ModelDims& dims, int k, Rng& rng);

template <>
GruAgentParams init_agent<GruAgentParams>(const ModelDims& dims, int, Rng& rng) {
    return init_gru_agent(dims, rng);
}

template <>
DualRankParams init_agent<DualRankParams>(const ModelDims& dims, int k, Rng& rng) {
    return init_dualrank_agent(dims, k, rng);
}

// Everything past agent construction is agent-agnostic: train, evaluate the
// retained best on test, then write the four artifacts (manifest last).
template <typename Params>
RunRecord run_cell(const ExperimentConfig& config, std::uint64_t seed, const Dataset& data,
                   const RankingEnv& env) {
    ModelDims dims{data.feature_count, config.model.embed_dim, config.model.hidden_dim,
                   config.model.head_dim, config.model.candidate_input};
    Rng init_rng(split_seed(seed, 1));
    Params init = init_agent<Params>(dims, config.k, init_rng);

    TrainerConfig trainer = config.trainer;
    trainer.seed = seed;
    TrainOutcome<Params> outcome = train_loop(init, data, config.k, env, trainer);
    EvalReport report = evaluate_policy(outcome.best, data.test, config.k, env);

    const std::string run_dir =
        (std::filesystem::path(config.out_dir) / run_name(config, seed)).string();
    std::filesystem::create_directories(run_dir);
    write_text_file(run_dir + "/training_log.csv", training_log_csv(outcome.log));
    save_agent(run_dir + "/checkpoint.bin", outcome.best);
    write_text_file(run_dir + "/report.json", report_to_json(report).dump(2) + "\n");

    ExperimentConfig resolved = config;
    resolved.seeds = {seed};
    nlohmann::json manifest = {{"version", kVersion},
                               {"config", config_to_json(resolved)},
                               {"results",
                                {{"test_p_ndcg", report.mean_p_ndcg},
                                 {"best_validation", outcome.best_validation},
                                 {"best_step", outcome.best_step},
                                 {"steps_run", outcome.steps_run},
                                 {"gradient_steps", outcome.gradient_steps}}}};
    write_text_file(run_dir + "/manifest.json", manifest.dump(2) + "\n");

    RunRecord record;
    record.agent = config.agent;
    record.reward_level = config.reward_level;
    record.display_order = config.display_order;
    record.seed = seed;
    record.ok = true;
    record.test_p_ndcg = report.mean_p_ndcg;
    record.best_validation = outcome.best_validation;
    record.best_step = outcome.best_step;
    record.steps_run = outcome.steps_run;
    record.run_dir = run_dir;
    return record;
}

double sample_mean(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
    if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sample_mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

}  // namespace

const char* to_string(AgentKind agent) {
    return agent == AgentKind::gru ? "gru" : "dualrank";
}

const char* to_string(RewardLevel level) {
    return level == RewardLevel::document ? "document" : "serp";
}

const char* to_string(GainVariant variant) {
    return variant == GainVariant::pow2_shifted ? "pow2_shifted" : "pow2_minus_one";
}

const char* to_string(CandidateInput input) {
    return input == CandidateInput::hidden_state ? "hidden_state" : "input_vector";
}

AgentKind agent_kind_from_string(const std::string& text) {
    if (text == "gru") return AgentKind::gru;
    if (text == "dualrank") return AgentKind::dualrank;
    throw std::invalid_argument("agent: expected gru or dualrank, got '" + text + "'");
}

RewardLevel reward_level_from_string(const std::string& text) {
    if (text == "document") return RewardLevel::document;
    if (text == "serp") return RewardLevel::serp;
    throw std::invalid_argument("reward_level: expected document or serp, got '" + text + "'");
}

GainVariant gain_variant_from_string(const std::string& text) {
    if (text == "pow2_shifted") return GainVariant::pow2_shifted;
    if (text == "pow2_minus_one") return GainVariant::pow2_minus_one;
    throw std::invalid_argument("gain: expected pow2_shifted or pow2_minus_one, got '" + text +
                                "'");
}

CandidateInput candidate_input_from_string(const std::string& text) {
    if (text == "hidden_state") return CandidateInput::hidden_state;
    if (text == "input_vector") return CandidateInput::input_vector;
    throw std::invalid_argument("candidate_input: expected hidden_state or input_vector, got '" +
                                text + "'");
}

ExperimentConfig config_from_json(const nlohmann::json& value) {
    // A manifest wraps the resolved config under "config"; unwrap it so a
    // manifest file reproduces its run directly.
    if (value.is_object() && value.contains("config") && !value.contains("dataset"))
        return config_from_json(value.at("config"));
    check_keys(value, "config",
               {"dataset", "agent", "reward_level", "display_order", "gain", "k", "model",
                "trainer", "seeds", "out_dir"});
    ExperimentConfig config;
    if (value.contains("dataset")) config.dataset = dataset_from_json(value.at("dataset"));
    config.agent = agent_kind_from_string(value.value("agent", "gru"));
    config.reward_level = reward_level_from_string(value.value("reward_level", "document"));
    config.display_order = value.value("display_order", config.display_order);
    config.gain = gain_variant_from_string(value.value("gain", "pow2_shifted"));
    config.k = value.value("k", config.k);
    if (value.contains("model")) config.model = model_from_json(value.at("model"));
    if (value.contains("trainer")) config.trainer = trainer_from_json(value.at("trainer"));
    if (value.contains("seeds"))
        config.seeds = value.at("seeds").get<std::vector<std::uint64_t>>();
    config.out_dir = value.value("out_dir", config.out_dir);
    return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    return {{"dataset", dataset_to_json(config.dataset)},
            {"agent", to_string(config.agent)},
            {"reward_level", to_string(config.reward_level)},
            {"display_order", config.display_order},
            {"gain", to_string(config.gain)},
            {"k", config.k},
            {"model",
             {{"embed_dim", config.model.embed_dim},
              {"hidden_dim", config.model.hidden_dim},
              {"head_dim", config.model.head_dim},
              {"candidate_input", to_string(config.model.candidate_input)}}},
            {"trainer",
             {{"learning_rate", config.trainer.learning_rate},
              {"replay_capacity", config.trainer.replay_capacity},
              {"transfer_every", config.trainer.transfer_every},
              {"batch_episodes", config.trainer.batch_episodes},
              {"max_steps", config.trainer.max_steps},
              {"gamma", config.trainer.gamma},
              {"epsilon",
               {{"start", config.trainer.epsilon.start},
                {"end", config.trainer.epsilon.end},
                {"decay_steps", config.trainer.epsilon.decay_steps}}},
              {"eval_every", config.trainer.eval_every},
              {"patience", config.trainer.patience},
              {"eval_queries", config.trainer.eval_queries}}},
            {"seeds", config.seeds},
            {"out_dir", config.out_dir}};
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return config_from_json(load_json_file(path));
}

SweepConfig sweep_from_json(const nlohmann::json& value) {
    auto axis = [&](const char* key, const std::string& fallback) {
        if (!value.contains(key)) return std::vector<std::string>{fallback};
        const nlohmann::json& entry = value.at(key);
        if (entry.is_string()) return std::vector<std::string>{entry.get<std::string>()};
        if (entry.is_array() && !entry.empty())
            return entry.get<std::vector<std::string>>();
        throw std::invalid_argument(std::string(key) +
                                    ": expected a string or a non-empty array");
    };
    std::vector<std::string> agents = axis("agent", "gru");
    std::vector<std::string> rewards = axis("reward_level", "document");
    SweepConfig sweep;
    sweep.display_orders = axis("display_order", "first");

    // Reuse the single-run parser on a copy whose axes are collapsed to
    // their first entry; the axes themselves are re-read above.
    nlohmann::json base = value;
    base["agent"] = agents.front();
    base["reward_level"] = rewards.front();
    base["display_order"] = sweep.display_orders.front();
    sweep.base = config_from_json(base);

    for (const std::string& name : agents)
        sweep.agents.push_back(agent_kind_from_string(name));
    for (const std::string& name : rewards)
        sweep.reward_levels.push_back(reward_level_from_string(name));

    auto distinct = [](auto items, const char* key) {
        std::sort(items.begin(), items.end());
        if (std::adjacent_find(items.begin(), items.end()) != items.end())
            throw std::invalid_argument(std::string(key) + ": duplicate entries");
    };
    distinct(sweep.agents, "agent");
    distinct(sweep.reward_levels, "reward_level");
    distinct(sweep.display_orders, "display_order");
    return sweep;
}

SweepConfig load_sweep_config(const std::string& path) {
    return sweep_from_json(load_json_file(path));
}

void validate_experiment(const ExperimentConfig& config) {
    if (config.k < 1) throw std::invalid_argument("k: must be at least 1");
    if (config.model.embed_dim < 1 || config.model.hidden_dim < 1 || config.model.head_dim < 1)
        throw std::invalid_argument("model: all dimensions must be at least 1");
    validate_config(config.trainer);
    if (config.seeds.empty()) throw std::invalid_argument("seeds: need at least one seed");
    if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() !=
        config.seeds.size())
        throw std::invalid_argument("seeds: entries must be distinct");
    if (config.out_dir.empty()) throw std::invalid_argument("out_dir: must not be empty");

    const DatasetSpec& ds = config.dataset;
    if (ds.synthetic) {
        if (ds.synth.train_queries < 1 || ds.synth.valid_queries < 1 || ds.synth.test_queries < 1)
            throw std::invalid_argument("dataset.synthetic: every partition needs >= 1 queries");
        if (ds.synth.docs_per_query < config.k)
            throw std::invalid_argument("dataset.synthetic.docs_per_query: must be >= k");
    } else {
        if (ds.feature_count < 1)
            throw std::invalid_argument("dataset.feature_count: required for LETOR paths");
        if (ds.max_label < 1) throw std::invalid_argument("dataset.max_label: must be >= 1");
        for (const auto& [field, path] :
             {std::pair<const char*, const std::string&>{"dataset.train_path", ds.train_path},
              {"dataset.test_path", ds.test_path}}) {
            if (path.empty())
                throw std::invalid_argument(std::string(field) + ": required");
            if (!std::filesystem::exists(path))
                throw std::invalid_argument(std::string(field) + ": file not found: " + path);
        }
        if (ds.valid_path.empty()) {
            if (!(ds.valid_fraction > 0.0 && ds.valid_fraction < 1.0))
                throw std::invalid_argument(
                    "dataset.valid_fraction: must sit inside (0, 1) when no valid_path is given");
        } else if (!std::filesystem::exists(ds.valid_path)) {
            throw std::invalid_argument("dataset.valid_path: file not found: " + ds.valid_path);
        }
    }

    try {
        resolve_display_order(config.display_order, config.k);
    } catch (const std::exception& ex) {
        throw std::invalid_argument(std::string("display_order: ") + ex.what());
    }
}

DisplayOrder resolve_display_order(const std::string& name_or_path, int k) {
    // The named biases generalize to any page size: first prefers the top
    // slots in order, last the bottom slots, and center walks middle-out
    // (middle slot first, then alternating just-below / just-above). At
    // k = 10 all three reproduce builtin_display_orders exactly.
    if (name_or_path == "first" || name_or_path == "center" || name_or_path == "last") {
        std::vector<int> by_pref;  // physical positions, most preferred first
        if (name_or_path == "first") {
            for (int pos = 1; pos <= k; ++pos) by_pref.push_back(pos);
        } else if (name_or_path == "last") {
            for (int pos = k; pos >= 1; --pos) by_pref.push_back(pos);
        } else {
            int below = (k + 1) / 2, above = below + 1;
            while (below >= 1 || above <= k) {
                if (below >= 1) by_pref.push_back(below--);
                if (above <= k) by_pref.push_back(above++);
            }
        }
        std::vector<int> pref(static_cast<std::size_t>(k));
        for (int rank = 1; rank <= k; ++rank)
            pref[static_cast<std::size_t>(by_pref[static_cast<std::size_t>(rank - 1)] - 1)] = rank;
        return make_display_order(std::move(pref));
    }
    DisplayOrder order = load_display_order(name_or_path);
    if (order.k() != k)
        throw std::invalid_argument("display order " + name_or_path + " covers " +
                                    std::to_string(order.k()) + " positions, expected " +
                                    std::to_string(k));
    return order;
}

void carve_validation_split(Dataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("validation fraction must sit inside (0, 1)");
    if (!data.valid.empty())
        throw std::invalid_argument("dataset already has a validation partition");
    const int n = static_cast<int>(data.train.size());
    if (n < 2)
        throw std::invalid_argument("cannot carve a validation split out of " +
                                    std::to_string(n) + " train queries");
    int take = static_cast<int>(std::lround(fraction * n));
    take = std::clamp(take, 1, n - 1);

    std::vector<int> index(static_cast<std::size_t>(n));
    std::iota(index.begin(), index.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < take; ++i)
        std::swap(index[static_cast<std::size_t>(i)],
                  index[static_cast<std::size_t>(i + uniform_index(rng, n - i))]);
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    for (int i = 0; i < take; ++i) chosen[static_cast<std::size_t>(index[i])] = true;

    std::vector<Query> train;
    train.reserve(static_cast<std::size_t>(n - take));
    for (int i = 0; i < n; ++i) {
        auto& q = data.train[static_cast<std::size_t>(i)];
        (chosen[static_cast<std::size_t>(i)] ? data.valid : train).push_back(std::move(q));
    }
    data.train = std::move(train);
}

Dataset build_dataset(const DatasetSpec& spec, int k) {
    if (spec.synthetic) return synthesize_dataset(spec.synth, k);
    Dataset data;
    data.feature_count = spec.feature_count;
    data.max_label = spec.max_label;
    data.train = filter_queries(load_partition(spec.train_path, spec.feature_count), k);
    data.test = filter_queries(load_partition(spec.test_path, spec.feature_count), k);
    if (spec.valid_path.empty())
        carve_validation_split(data, spec.valid_fraction, spec.split_seed);
    else
        data.valid = filter_queries(load_partition(spec.valid_path, spec.feature_count), k);
    if (spec.normalize) data = normalize_features(std::move(data));
    return data;
}

RunRecord run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    validate_experiment(config);
    DisplayOrder order = resolve_display_order(config.display_order, config.k);
    Dataset data = build_dataset(config.dataset, config.k);
    RankingEnv env{std::move(order), GainFunction{config.gain, data.max_label},
                   config.reward_level};
    if (config.agent == AgentKind::gru)
        return run_cell<GruAgentParams>(config, seed, data, env);
    return run_cell<DualRankParams>(config, seed, data, env);
}

std::vector<RunRecord> run_all(const ExperimentConfig& config) {
    validate_experiment(config);
    std::vector<RunRecord> records;
    for (std::uint64_t seed : config.seeds) records.push_back(run_experiment(config, seed));
    return records;
}

std::vector<RunRecord> run_sweep(const SweepConfig& config) {
    if (config.agents.empty() || config.reward_levels.empty() || config.display_orders.empty())
        throw std::invalid_argument("sweep: every axis needs at least one entry");
    std::vector<RunRecord> records;
    for (AgentKind agent : config.agents) {
        for (RewardLevel level : config.reward_levels) {
            for (const std::string& order : config.display_orders) {
                for (std::uint64_t seed : config.base.seeds) {
                    ExperimentConfig cell = config.base;
                    cell.agent = agent;
                    cell.reward_level = level;
                    cell.display_order = order;
                    cell.seeds = {seed};
                    try {
                        records.push_back(run_experiment(cell, seed));
                    } catch (const std::exception& ex) {
                        RunRecord failed;
                        failed.agent = agent;
                        failed.reward_level = level;
                        failed.display_order = order;
                        failed.seed = seed;
                        failed.error = ex.what();
                        records.push_back(failed);
                    }
                }
            }
        }
    }
    std::filesystem::create_directories(config.base.out_dir);
    write_text_file(config.base.out_dir + "/runs.csv", runs_csv(records));
    write_text_file(config.base.out_dir + "/summary.csv", summary_csv(records));
    return records;
}

std::string runs_csv(const std::vector<RunRecord>& records) {
    std::string out =
        "agent,reward_level,display_order,seed,status,error,"
        "test_p_ndcg,best_validation,best_step,steps_run,run_dir\n";
    for (const RunRecord& r : records) {
        out += std::string(to_string(r.agent)) + "," + to_string(r.reward_level) + "," +
               csv_field(r.display_order) + "," + std::to_string(r.seed) + "," +
               (r.ok ? "ok" : "failed") + "," + csv_field(r.error) + "," +
               format_double(r.test_p_ndcg) + "," + format_double(r.best_validation) + "," +
               std::to_string(r.best_step) + "," + std::to_string(r.steps_run) + "," +
               csv_field(r.run_dir) + "\n";
    }
    return out;
}

std::string summary_csv(const std::vector<RunRecord>& records) {
    struct Key {
        AgentKind agent;
        RewardLevel level;
        std::string order;
        bool operator==(const Key&) const = default;
    };
    std::vector<Key> combos;
    auto scores_for = [&](const Key& key) {
        std::vector<double> scores;
        for (const RunRecord& r : records)
            if (r.ok && r.agent == key.agent && r.reward_level == key.level &&
                r.display_order == key.order)
                scores.push_back(r.test_p_ndcg);
        return scores;
    };
    for (const RunRecord& r : records) {
        Key key{r.agent, r.reward_level, r.display_order};
        if (std::find(combos.begin(), combos.end(), key) == combos.end()) combos.push_back(key);
    }

    std::string out =
        "agent,reward_level,display_order,runs,mean_test_p_ndcg,std_test_p_ndcg,"
        "stderr_test_p_ndcg,p_value_mean_exceeds_other\n";
    for (const Key& key : combos) {
        std::vector<double> scores = scores_for(key);
        const double mean = sample_mean(scores);
        const double sd = sample_std(scores);
        const double se = std::isnan(sd) ? sd : sd / std::sqrt(static_cast<double>(scores.size()));

        // One-tailed Welch test against the other agent in the same
        // (reward, order) cell, when both sides have enough runs.
        double p_value = std::numeric_limits<double>::quiet_NaN();
        Key other = key;
        other.agent = key.agent == AgentKind::gru ? AgentKind::dualrank : AgentKind::gru;
        std::vector<double> other_scores = scores_for(other);
        if (scores.size() >= 2 && other_scores.size() >= 2)
            p_value = welch_one_tailed_t_test(scores, other_scores).p_value;

        out += std::string(to_string(key.agent)) + "," + to_string(key.level) + "," +
               csv_field(key.order) + "," + std::to_string(scores.size()) + "," +
               format_double(mean) + "," + format_double(sd) + "," + format_double(se) + "," +
               format_double(p_value) + "\n";
    }
    return out;
}

std::string plot_data_csv(const std::vector<PlotSource>& sources) {
    std::string out = "bias,series,index,mean_label\n";
    for (const PlotSource& source : sources) {
        const EvalReport& report = source.report;
        if (static_cast<int>(report.mean_label_by_position.size()) != report.k ||
            static_cast<int>(report.mean_label_by_timestep.size()) != report.k)
            throw std::invalid_argument("report histograms for '" + source.bias +
                                        "' do not match k");
        for (int i = 0; i < report.k; ++i)
            out += csv_field(source.bias) + ",per_position," + std::to_string(i + 1) + "," +
                   format_double(report.mean_label_by_position[static_cast<std::size_t>(i)]) +
                   "\n";
        for (int i = 0; i < report.k; ++i)
            out += csv_field(source.bias) + ",per_timestep," + std::to_string(i + 1) + "," +
                   format_double(report.mean_label_by_timestep[static_cast<std::size_t>(i)]) +
                   "\n";
    }
    return out;
}

}  // namespace rankrl
