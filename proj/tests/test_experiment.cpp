#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "rankrl/experiment.hpp"
#include "rankrl/text.hpp"

using namespace rankrl;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / ("rankrl_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find(',', start);
        if (end == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

// Small but complete configuration that trains in well under a second.
ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig config;
    config.dataset.synth.train_queries = 8;
    config.dataset.synth.valid_queries = 3;
    config.dataset.synth.test_queries = 3;
    config.dataset.synth.docs_per_query = 5;
    config.dataset.synth.seed = 7;
    config.k = 3;
    config.model.embed_dim = 4;
    config.model.hidden_dim = 6;
    config.model.head_dim = 4;
    config.trainer.learning_rate = 1e-3;
    config.trainer.replay_capacity = 20;
    config.trainer.transfer_every = 10;
    config.trainer.batch_episodes = 4;
    config.trainer.max_steps = 40;
    config.trainer.eval_every = 20;
    config.trainer.patience = 50;
    config.trainer.eval_queries = 3;
    config.out_dir = out_dir;
    return config;
}

RunRecord ok_record(AgentKind agent, RewardLevel level, const std::string& order,
                    std::uint64_t seed, double score) {
    RunRecord r;
    r.agent = agent;
    r.reward_level = level;
    r.display_order = order;
    r.seed = seed;
    r.ok = true;
    r.test_p_ndcg = score;
    r.best_validation = score;
    r.best_step = 10;
    r.steps_run = 20;
    r.run_dir = "runs/r" + std::to_string(seed);
    return r;
}

}  // namespace

TEST_CASE("enum names round-trip and unknown names are rejected") {
    CHECK(agent_kind_from_string(to_string(AgentKind::dualrank)) == AgentKind::dualrank);
    CHECK(reward_level_from_string(to_string(RewardLevel::serp)) == RewardLevel::serp);
    CHECK(gain_variant_from_string(to_string(GainVariant::pow2_minus_one)) ==
          GainVariant::pow2_minus_one);
    CHECK(candidate_input_from_string(to_string(CandidateInput::hidden_state)) ==
          CandidateInput::hidden_state);
    CHECK_THROWS_AS(agent_kind_from_string("drm"), std::invalid_argument);
    CHECK_THROWS_AS(reward_level_from_string("page"), std::invalid_argument);
    CHECK_THROWS_AS(gain_variant_from_string("linear"), std::invalid_argument);
    CHECK_THROWS_AS(candidate_input_from_string("both"), std::invalid_argument);
}

TEST_CASE("config json round-trips through parse and serialize") {
    ExperimentConfig config = tiny_config("runs/demo");
    config.agent = AgentKind::dualrank;
    config.reward_level = RewardLevel::serp;
    config.display_order = "center";
    config.gain = GainVariant::pow2_minus_one;
    config.seeds = {3, 5, 8};
    config.trainer.epsilon.decay_steps = 123;

    nlohmann::json encoded = config_to_json(config);
    ExperimentConfig decoded = config_from_json(encoded);
    CHECK(config_to_json(decoded).dump() == encoded.dump());
}

TEST_CASE("missing config keys fall back to defaults") {
    ExperimentConfig config = config_from_json(nlohmann::json::object());
    CHECK(config.dataset.synthetic);
    CHECK(config.agent == AgentKind::gru);
    CHECK(config.k == 10);
    CHECK(config.model.embed_dim == 128);
    CHECK(config.model.candidate_input == CandidateInput::input_vector);
    CHECK(config.trainer.max_steps == 200000);
    CHECK(config.trainer.epsilon.decay_steps == 30000);
    CHECK(config.seeds == std::vector<std::uint64_t>{1});

    // Partial nested objects keep the remaining defaults too.
    ExperimentConfig partial = config_from_json({{"trainer", {{"max_steps", 17}}}});
    CHECK(partial.trainer.max_steps == 17);
    CHECK(partial.trainer.learning_rate == 1e-3);
}

TEST_CASE("unknown keys are named in the parse error") {
    auto message_of = [](const nlohmann::json& value) {
        try {
            config_from_json(value);
        } catch (const std::invalid_argument& ex) {
            return std::string(ex.what());
        }
        return std::string();
    };
    CHECK(message_of({{"agnet", "gru"}}) == "config: unknown key 'agnet'");
    CHECK(message_of({{"trainer", {{"lr", 0.1}}}}) == "trainer: unknown key 'lr'");
    CHECK(message_of({{"model", {{"width", 4}}}}) == "model: unknown key 'width'");
    CHECK(message_of({{"dataset", {{"synthetic", {{"queries", 5}}}}}}) ==
          "dataset.synthetic: unknown key 'queries'");
    CHECK(message_of({{"trainer", {{"epsilon", {{"floor", 0.1}}}}}}) ==
          "trainer.epsilon: unknown key 'floor'");
    CHECK_THROWS_AS(
        config_from_json({{"dataset", {{"synthetic", nlohmann::json::object()},
                                       {"train_path", "x"}}}}),
        std::invalid_argument);
}

TEST_CASE("a manifest feeds back in as a config") {
    ExperimentConfig config = tiny_config("runs/demo");
    nlohmann::json manifest = {{"version", kVersion},
                               {"config", config_to_json(config)},
                               {"results", {{"test_p_ndcg", 0.5}}}};
    ExperimentConfig reloaded = config_from_json(manifest);
    CHECK(config_to_json(reloaded).dump() == config_to_json(config).dump());
}

TEST_CASE("named display orders generalize beyond ten slots") {
    // At k = 10 the three names must match the builtin table exactly.
    BuiltinOrders builtins = builtin_display_orders(10);
    CHECK(resolve_display_order("first", 10).pref_index == builtins.first_bias.pref_index);
    CHECK(resolve_display_order("center", 10).pref_index == builtins.center_bias.pref_index);
    CHECK(resolve_display_order("last", 10).pref_index == builtins.last_bias.pref_index);

    CHECK(resolve_display_order("first", 5).pref_index == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(resolve_display_order("last", 5).pref_index == std::vector<int>{5, 4, 3, 2, 1});
    // Middle-out: positions by preference 3,4,2,5,1.
    CHECK(resolve_display_order("center", 5).pref_index == std::vector<int>{5, 3, 1, 2, 4});
    CHECK(resolve_display_order("center", 4).pref_index == std::vector<int>{3, 1, 2, 4});
    CHECK(resolve_display_order("center", 1).pref_index == std::vector<int>{1});
}

TEST_CASE("custom display orders load from json files") {
    std::filesystem::path dir = fresh_dir("orders");
    std::ofstream(dir / "swap.json") << "[2, 1, 3]";
    DisplayOrder order = resolve_display_order((dir / "swap.json").string(), 3);
    CHECK(order.pref_index == std::vector<int>{2, 1, 3});
    CHECK_THROWS_AS(resolve_display_order((dir / "swap.json").string(), 4),
                    std::invalid_argument);
    CHECK_THROWS(resolve_display_order((dir / "missing.json").string(), 3));
}

TEST_CASE("validation names the offending config field") {
    auto message_of = [](const ExperimentConfig& config) {
        try {
            validate_experiment(config);
        } catch (const std::invalid_argument& ex) {
            return std::string(ex.what());
        }
        return std::string();
    };
    ExperimentConfig config = tiny_config("runs/demo");
    CHECK_NOTHROW(validate_experiment(config));

    ExperimentConfig bad = config;
    bad.seeds = {1, 2, 1};
    CHECK(message_of(bad) == "seeds: entries must be distinct");
    bad = config;
    bad.seeds.clear();
    CHECK(message_of(bad) == "seeds: need at least one seed");
    bad = config;
    bad.dataset.synth.docs_per_query = 2;  // smaller than k
    CHECK(message_of(bad) == "dataset.synthetic.docs_per_query: must be >= k");
    bad = config;
    bad.display_order = "/no/such/order.json";
    CHECK(message_of(bad).rfind("display_order: ", 0) == 0);
    bad = config;
    bad.dataset.synthetic = false;
    bad.dataset.train_path = "/no/such/train.txt";
    bad.dataset.test_path = "/no/such/test.txt";
    bad.dataset.feature_count = 5;
    CHECK(message_of(bad) == "dataset.train_path: file not found: /no/such/train.txt");
    bad.dataset.train_path = "";
    CHECK(message_of(bad) == "dataset.train_path: required");
}

TEST_CASE("the validation split is a seeded partition of train") {
    SyntheticConfig synth;
    synth.train_queries = 12;
    synth.valid_queries = 1;
    synth.test_queries = 1;
    synth.docs_per_query = 4;
    Dataset data = synthesize_dataset(synth, 3);
    std::set<std::string> original;
    for (const Query& q : data.train) original.insert(q.id);
    data.valid.clear();

    Dataset carved = data;
    carve_validation_split(carved, 0.25, 5);
    CHECK(carved.valid.size() == 3);
    CHECK(carved.train.size() == 9);
    std::set<std::string> after;
    for (const Query& q : carved.train) after.insert(q.id);
    for (const Query& q : carved.valid) after.insert(q.id);
    CHECK(after == original);  // nothing lost, nothing duplicated

    // Deterministic in the seed, and the seed matters.
    Dataset again = data;
    carve_validation_split(again, 0.25, 5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again.valid[i].id == carved.valid[i].id);
    Dataset other = data;
    carve_validation_split(other, 0.25, 6);
    bool same = true;
    for (std::size_t i = 0; i < 3; ++i) same = same && other.valid[i].id == carved.valid[i].id;
    CHECK_FALSE(same);

    // A tiny fraction still yields at least one validation query.
    Dataset tiny = data;
    carve_validation_split(tiny, 0.01, 5);
    CHECK(tiny.valid.size() == 1);

    Dataset bad = data;
    CHECK_THROWS_AS(carve_validation_split(bad, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(carve_validation_split(bad, 1.0, 5), std::invalid_argument);
    carve_validation_split(bad, 0.25, 5);
    CHECK_THROWS_AS(carve_validation_split(bad, 0.25, 5), std::invalid_argument);
}

TEST_CASE("letor paths build a filtered, carved, normalized dataset") {
    std::filesystem::path dir = fresh_dir("letor_build");
    SyntheticConfig synth;
    synth.train_queries = 10;
    synth.valid_queries = 4;
    synth.test_queries = 3;
    synth.docs_per_query = 5;
    Dataset source = synthesize_dataset(synth, 3);
    write_partition((dir / "train.txt").string(), source.train);
    write_partition((dir / "valid.txt").string(), source.valid);
    write_partition((dir / "test.txt").string(), source.test);

    DatasetSpec spec;
    spec.synthetic = false;
    spec.train_path = (dir / "train.txt").string();
    spec.valid_path = (dir / "valid.txt").string();
    spec.test_path = (dir / "test.txt").string();
    spec.feature_count = source.feature_count;
    Dataset loaded = build_dataset(spec, 3);
    CHECK(loaded.train.size() == 10);
    CHECK(loaded.valid.size() == 4);
    CHECK(loaded.test.size() == 3);
    CHECK_FALSE(loaded.normalization.empty());

    // Without a validation file a fraction of train is carved off instead.
    spec.valid_path.clear();
    spec.valid_fraction = 0.2;
    spec.normalize = false;
    Dataset carved = build_dataset(spec, 3);
    CHECK(carved.train.size() == 8);
    CHECK(carved.valid.size() == 2);
    CHECK(carved.normalization.empty());
}

TEST_CASE("a run writes its four artifacts and an honest manifest") {
    std::filesystem::path dir = fresh_dir("single_run");
    ExperimentConfig config = tiny_config(dir.string());
    RunRecord record = run_experiment(config, 1);

    CHECK(record.ok);
    CHECK(record.run_dir == (dir / "gru_document_first_s1").string());
    CHECK(record.steps_run == 40);
    for (const char* name :
         {"training_log.csv", "checkpoint.bin", "report.json", "manifest.json"})
        CHECK(std::filesystem::exists(std::filesystem::path(record.run_dir) / name));

    EvalReport report =
        report_from_json(nlohmann::json::parse(slurp(record.run_dir + "/report.json")));
    CHECK(report.k == 3);
    CHECK(report.mean_p_ndcg == record.test_p_ndcg);  // the JSON round trip is exact

    // The manifest's embedded config is the resolved one, pinned to this seed.
    nlohmann::json manifest = nlohmann::json::parse(slurp(record.run_dir + "/manifest.json"));
    CHECK(manifest.at("version").get<std::string>() == kVersion);
    ExperimentConfig expected = config;
    expected.seeds = {1};
    CHECK(manifest.at("config").dump() == config_to_json(expected).dump());
    CHECK(manifest.at("results").at("test_p_ndcg").get<double>() == record.test_p_ndcg);
}

TEST_CASE("identical configs and seeds reproduce every artifact byte for byte") {
    std::filesystem::path dir_a = fresh_dir("repro_a");
    std::filesystem::path dir_b = fresh_dir("repro_b");
    RunRecord a = run_experiment(tiny_config(dir_a.string()), 4);
    RunRecord b = run_experiment(tiny_config(dir_b.string()), 4);
    CHECK(slurp(a.run_dir + "/training_log.csv") == slurp(b.run_dir + "/training_log.csv"));
    CHECK(slurp(a.run_dir + "/report.json") == slurp(b.run_dir + "/report.json"));
    CHECK(slurp(a.run_dir + "/checkpoint.bin") == slurp(b.run_dir + "/checkpoint.bin"));
    CHECK(a.test_p_ndcg == b.test_p_ndcg);
}

TEST_CASE("run_all covers every configured seed") {
    std::filesystem::path dir = fresh_dir("run_all");
    ExperimentConfig config = tiny_config(dir.string());
    config.agent = AgentKind::dualrank;
    config.seeds = {1, 2};
    std::vector<RunRecord> records = run_all(config);
    REQUIRE(records.size() == 2);
    CHECK(records[0].run_dir == (dir / "dualrank_document_first_s1").string());
    CHECK(records[1].run_dir == (dir / "dualrank_document_first_s2").string());
    CHECK(records[0].ok);
    CHECK(records[1].ok);
}

TEST_CASE("a sweep executes the grid and survives failing cells") {
    std::filesystem::path dir = fresh_dir("sweep");
    SweepConfig sweep;
    sweep.base = tiny_config(dir.string());
    sweep.base.seeds = {1, 2};
    sweep.agents = {AgentKind::gru, AgentKind::dualrank};
    sweep.reward_levels = {RewardLevel::document};
    sweep.display_orders = {"first", "/no/such/order.json"};

    std::vector<RunRecord> records = run_sweep(sweep);
    REQUIRE(records.size() == 8);
    int ok = 0, failed = 0;
    for (const RunRecord& r : records) {
        if (r.ok) {
            ++ok;
            CHECK(r.display_order == "first");
        } else {
            ++failed;
            CHECK(r.display_order == "/no/such/order.json");
            CHECK(r.error.rfind("display_order: ", 0) == 0);
        }
    }
    CHECK(ok == 4);
    CHECK(failed == 4);

    std::vector<std::string> runs_lines = split_lines(slurp(dir / "runs.csv"));
    CHECK(runs_lines.size() == 9);
    std::vector<std::string> summary_lines = split_lines(slurp(dir / "summary.csv"));
    REQUIRE(summary_lines.size() == 5);  // header + 4 combinations

    // Both agents completed both seeds under "first", so those rows carry a
    // real p-value; the failed cells aggregate zero runs.
    for (const std::string& line : {summary_lines[1], summary_lines[3]}) {
        std::vector<std::string> fields = split_fields(line);
        CHECK(fields[2] == "first");
        CHECK(fields[3] == "2");
        CHECK(fields[7] != "nan");
    }
    for (const std::string& line : {summary_lines[2], summary_lines[4]}) {
        std::vector<std::string> fields = split_fields(line);
        CHECK(fields[3] == "0");
        CHECK(fields[4] == "nan");
        CHECK(fields[7] == "nan");
    }
}

TEST_CASE("runs_csv pins its layout and quotes awkward text") {
    RunRecord a = ok_record(AgentKind::gru, RewardLevel::document, "first", 1, 0.5);
    a.best_validation = 0.625;
    a.best_step = 100;
    a.steps_run = 200;
    a.run_dir = "runs/x";
    RunRecord b;
    b.agent = AgentKind::dualrank;
    b.reward_level = RewardLevel::serp;
    b.display_order = "last";
    b.seed = 2;
    b.error = "boom, with comma";
    CHECK(runs_csv({a, b}) ==
          "agent,reward_level,display_order,seed,status,error,"
          "test_p_ndcg,best_validation,best_step,steps_run,run_dir\n"
          "gru,document,first,1,ok,,0.5,0.625,100,200,runs/x\n"
          "dualrank,serp,last,2,failed,\"boom, with comma\",nan,nan,-1,0,\n");
}

TEST_CASE("summary statistics match direct computation on the run scores") {
    std::vector<double> gru_scores{0.25, 0.5, 0.75};
    std::vector<double> dual_scores{0.5, 0.75, 1.0};
    std::vector<RunRecord> records;
    for (std::size_t i = 0; i < 3; ++i)
        records.push_back(ok_record(AgentKind::gru, RewardLevel::document, "first", i + 1,
                                    gru_scores[i]));
    for (std::size_t i = 0; i < 3; ++i)
        records.push_back(ok_record(AgentKind::dualrank, RewardLevel::document, "first", i + 1,
                                    dual_scores[i]));
    RunRecord failed;
    failed.agent = AgentKind::gru;
    failed.reward_level = RewardLevel::document;
    failed.display_order = "first";
    failed.seed = 9;
    failed.error = "died";
    records.push_back(failed);  // must not contaminate the aggregates
    records.push_back(ok_record(AgentKind::gru, RewardLevel::serp, "last", 1, 0.4));

    std::vector<std::string> lines = split_lines(summary_csv(records));
    REQUIRE(lines.size() == 4);
    std::vector<std::string> gru = split_fields(lines[1]);
    CHECK(gru[0] == "gru");
    CHECK(gru[3] == "3");
    CHECK(std::stod(gru[4]) == 0.5);    // mean of 0.25, 0.5, 0.75
    CHECK(std::stod(gru[5]) == 0.25);   // sample standard deviation
    CHECK(std::stod(gru[6]) == doctest::Approx(0.25 / std::sqrt(3.0)).epsilon(1e-15));
    TTestResult direct = welch_one_tailed_t_test(gru_scores, dual_scores);
    CHECK(gru[7] == format_double(direct.p_value));

    std::vector<std::string> dual = split_fields(lines[2]);
    TTestResult reverse = welch_one_tailed_t_test(dual_scores, gru_scores);
    CHECK(dual[7] == format_double(reverse.p_value));
    CHECK(std::stod(gru[7]) + std::stod(dual[7]) == doctest::Approx(1.0).epsilon(1e-12));

    // A single-run combination reports its score but no dispersion or test.
    std::vector<std::string> single = split_fields(lines[3]);
    CHECK(single[3] == "1");
    CHECK(std::stod(single[4]) == 0.4);
    CHECK(single[5] == "nan");
    CHECK(single[6] == "nan");
    CHECK(single[7] == "nan");
}

TEST_CASE("plot data flattens both histogram series per report") {
    EvalReport report;
    report.k = 2;
    report.mean_label_by_position = {2.5, 1.0};
    report.mean_label_by_timestep = {1.75, 1.75};
    CHECK(plot_data_csv({{"center", report}}) ==
          "bias,series,index,mean_label\n"
          "center,per_position,1,2.5\n"
          "center,per_position,2,1\n"
          "center,per_timestep,1,1.75\n"
          "center,per_timestep,2,1.75\n");

    EvalReport broken = report;
    broken.mean_label_by_position.pop_back();
    CHECK_THROWS_AS(plot_data_csv({{"center", broken}}), std::invalid_argument);

    // Round trip through the JSON report form used on disk.
    EvalReport reloaded = report_from_json(report_to_json(report));
    CHECK(plot_data_csv({{"a", report}, {"b", reloaded}}).size() ==
          plot_data_csv({{"a", report}}).size() * 2 - std::string("bias,series,index,mean_label\n").size());
}
