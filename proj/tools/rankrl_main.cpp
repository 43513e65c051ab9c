#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankrl/experiment.hpp"
#include "rankrl/text.hpp"

namespace {

using namespace rankrl;

// Command-line values that replace the matching config fields; --seed
// collapses the configured seed list to a single run.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> agent;
    std::optional<std::string> display_order;
    std::optional<std::string> reward_level;
    std::optional<std::string> gain;
    std::optional<std::string> out;
};

void add_override_flags(CLI::App& cmd, Overrides& overrides) {
    cmd.add_option("--seed", overrides.seed, "Run only this seed");
    cmd.add_option("--agent", overrides.agent, "gru or dualrank");
    cmd.add_option("--display-order", overrides.display_order,
                   "first, center, last, or a JSON preference-vector file");
    cmd.add_option("--reward-level", overrides.reward_level, "document or serp");
    cmd.add_option("--gain", overrides.gain, "pow2_shifted or pow2_minus_one");
    cmd.add_option("--out", overrides.out, "Output directory");
}

void apply(ExperimentConfig& config, const Overrides& overrides) {
    if (overrides.seed) config.seeds = {*overrides.seed};
    if (overrides.agent) config.agent = agent_kind_from_string(*overrides.agent);
    if (overrides.display_order) config.display_order = *overrides.display_order;
    if (overrides.reward_level)
        config.reward_level = reward_level_from_string(*overrides.reward_level);
    if (overrides.gain) config.gain = gain_variant_from_string(*overrides.gain);
    if (overrides.out) config.out_dir = *overrides.out;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json value;
    in >> value;
    return value;
}

int cmd_train(const std::string& config_path, const Overrides& overrides) {
    ExperimentConfig config = load_experiment_config(config_path);
    apply(config, overrides);
    for (const RunRecord& record : run_all(config))
        std::cout << record.run_dir << ": test P-NDCG " << format_double(record.test_p_ndcg)
                  << " (best validation " << format_double(record.best_validation) << " at step "
                  << record.best_step << ", " << record.steps_run << " steps)\n";
    return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& config_path,
                 const Overrides& overrides, const std::string& report_path) {
    ExperimentConfig config = load_experiment_config(config_path);
    apply(config, overrides);
    validate_experiment(config);
    Dataset data = build_dataset(config.dataset, config.k);
    RankingEnv env{resolve_display_order(config.display_order, config.k),
                   GainFunction{config.gain, data.max_label}, config.reward_level};

    EvalReport report;
    if (peek_agent_kind(checkpoint) == "gru")
        report = evaluate_policy(load_gru_agent(checkpoint), data.test, config.k, env);
    else
        report = evaluate_policy(load_dualrank_agent(checkpoint), data.test, config.k, env);

    std::cout << "test P-NDCG " << format_double(report.mean_p_ndcg) << " over "
              << report.query_count << " queries (" << report.skipped_queries << " skipped)\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + report_path);
        out << report_to_json(report).dump(2) << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& overrides) {
    SweepConfig sweep = load_sweep_config(config_path);
    apply(sweep.base, overrides);
    if (overrides.agent) sweep.agents = {agent_kind_from_string(*overrides.agent)};
    if (overrides.reward_level)
        sweep.reward_levels = {reward_level_from_string(*overrides.reward_level)};
    if (overrides.display_order) sweep.display_orders = {*overrides.display_order};

    std::vector<RunRecord> records = run_sweep(sweep);
    std::cout << summary_csv(records);
    int failures = 0;
    for (const RunRecord& record : records) {
        if (record.ok) continue;
        ++failures;
        std::cerr << "failed: " << to_string(record.agent) << " " << to_string(record.reward_level)
                  << " " << record.display_order << " seed " << record.seed << ": " << record.error
                  << "\n";
    }
    return failures == 0 ? 0 : 1;
}

int cmd_synth(const std::string& config_path, const Overrides& overrides,
              const std::string& out_dir) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (!config.dataset.synthetic)
        throw std::runtime_error("synth needs a config with a dataset.synthetic block");
    if (overrides.seed) config.dataset.synth.seed = *overrides.seed;
    Dataset data = build_dataset(config.dataset, config.k);

    std::filesystem::create_directories(out_dir);
    write_partition(out_dir + "/train.txt", data.train);
    write_partition(out_dir + "/valid.txt", data.valid);
    write_partition(out_dir + "/test.txt", data.test);
    std::cout << "wrote " << data.train.size() << " train / " << data.valid.size() << " valid / "
              << data.test.size() << " test queries (" << data.feature_count << " features) to "
              << out_dir << "\n";
    return 0;
}

// The bias label for a report comes from the manifest beside it, falling
// back to the run directory's name.
std::string bias_label_for(const std::filesystem::path& report_path) {
    std::filesystem::path manifest = report_path.parent_path() / "manifest.json";
    if (std::filesystem::exists(manifest)) {
        nlohmann::json value = read_json(manifest.string());
        if (value.contains("config") && value["config"].contains("display_order"))
            return value["config"]["display_order"].get<std::string>();
    }
    std::string dir = report_path.parent_path().filename().string();
    return dir.empty() ? "unknown" : dir;
}

int cmd_plot_data(const std::vector<std::string>& report_paths, const std::string& out_path) {
    std::vector<PlotSource> sources;
    for (const std::string& path : report_paths)
        sources.push_back({bias_label_for(path), report_from_json(read_json(path))});
    std::string csv = plot_data_csv(sources);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinforcement-learned ranking under hidden display orders"};
    app.require_subcommand(1);

    std::string config_path;
    std::string checkpoint;
    std::string report_path;
    std::string out_dir;
    std::vector<std::string> report_paths;
    Overrides overrides;

    CLI::App* train = app.add_subcommand("train", "Train one configuration across its seeds");
    train->add_option("--config", config_path, "Experiment config JSON (or a run manifest)")
        ->required();
    add_override_flags(*train, overrides);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
    evaluate->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
    evaluate->add_option("--config", config_path, "Experiment config JSON")->required();
    evaluate->add_option("--report", report_path, "Also write the full report JSON here");
    add_override_flags(*evaluate, overrides);

    CLI::App* sweep = app.add_subcommand("sweep", "Run the agent x reward x order grid");
    sweep->add_option("--config", config_path, "Sweep config JSON (axes may be arrays)")
        ->required();
    add_override_flags(*sweep, overrides);

    CLI::App* synth = app.add_subcommand("synth", "Write the synthetic corpus as LETOR text");
    synth->add_option("--config", config_path, "Experiment config JSON")->required();
    synth->add_option("--out", out_dir, "Directory for train/valid/test files")->required();
    synth->add_option("--seed", overrides.seed, "Override the generator seed");

    CLI::App* plot = app.add_subcommand("plot-data", "Flatten report histograms for plotting");
    plot->add_option("reports", report_paths, "report.json files")->required();
    plot->add_option("--out", out_dir, "CSV destination (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, overrides);
        if (evaluate->parsed()) return cmd_evaluate(checkpoint, config_path, overrides, report_path);
        if (sweep->parsed()) return cmd_sweep(config_path, overrides);
        if (synth->parsed()) return cmd_synth(config_path, overrides, out_dir);
        if (plot->parsed()) return cmd_plot_data(report_paths, out_dir);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
