// Tests for the run configuration format, the CLI commands, the error-to-exit-
// code mapping, and the language model client (against a local HTTP server).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "snap/commands.hpp"
#include "snap/errors.hpp"
#include "snap/experiment.hpp"
#include "snap/feature_selection.hpp"
#include "snap/llm_client.hpp"
#include "snap/run_config.hpp"
#include "snap/story_template.hpp"
#include "support/paths.hpp"

using testlog::fixture;
using testlog::read_file;
using testlog::TempDir;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

template <typename E, typename Fn>
std::string thrown_message(Fn&& fn) {
    try {
        fn();
    } catch (const E& e) {
        return e.what();
    } catch (const std::exception& e) {
        FAIL("wrong exception type: ", e.what());
        return {};
    }
    FAIL("expected an exception but none was thrown");
    return {};
}

std::string ph(const std::string& name) { return "\xE2\x9F\xA8" + name + "\xE2\x9F\xA9"; }

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(bool(out));
    out << content;
}

// A fully deterministic process: every ticket runs receive -> triage ->
// resolve -> close on a fixed 15-minute cadence, so the next activity is a
// pure function of the story text and the classifier should become perfect.
std::filesystem::path write_pipeline_csv(const std::filesystem::path& path, int n_cases = 12) {
    std::ostringstream csv;
    csv << "case,activity,timestamp\n";
    const std::array<const char*, 4> steps{"receive", "triage", "resolve", "close"};
    for (int c = 0; c < n_cases; ++c)
        for (std::size_t k = 0; k < steps.size(); ++k) {
            char stamp[32];
            std::snprintf(stamp, sizeof stamp, "2024-05-01T%02d:%02d:00Z", c,
                          static_cast<int>(k) * 15);
            csv << "ticket" << c << "," << steps[k] << "," << stamp << "\n";
        }
    write_text(path, csv.str());
    return path;
}

nlohmann::json pipeline_config(const std::filesystem::path& csv,
                               const std::filesystem::path& out_dir) {
    return nlohmann::json{
        {"dataset",
         {{"path", csv.string()},
          {"format", "csv"},
          {"csv_mapping",
           {{"case_id", "case"}, {"activity", "activity"}, {"timestamp", "timestamp"}}}}},
        {"evaluation", {{"n_folds", 2}, {"variants", nlohmann::json::array({"story"})}}},
        {"output_dir", out_dir.string()},
    };
}

snap::RunConfig parse_config(const nlohmann::json& doc) {
    return snap::run_config_from_json(doc.dump(), {});
}

// With no extra columns the selection is exactly the two temporal features,
// which pins down the default template byte for byte.
const std::string kTemporalTemplate =
    "This was " + ph(snap::kTimeFromCaseStart) + " after the case started and " +
    ph(snap::kTimeFromPrevious) + " after the previous activity. Sequence of recent activities: " +
    ph("sequence") + ".";

snap::SelectedFeatures temporal_selection() {
    snap::SelectedFeatures selection;
    selection.temporal = {snap::kTimeFromCaseStart, snap::kTimeFromPrevious};
    return selection;
}

// ---- CLI process helpers ----------------------------------------------

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto out_path = scratch / "cli_stdout.txt";
    const auto err_path = scratch / "cli_stderr.txt";
    const std::string command = std::string(SNAP_CLI_PATH) + " " + args + " >" +
                                out_path.string() + " 2>" + err_path.string();
    int status = std::system(command.c_str());
    REQUIRE(status != -1);
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

// ---- local language model server ---------------------------------------

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

struct LocalLlmServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit LocalLlmServer(Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalLlmServer() {
        server.stop();
        thread.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

std::string chat_reply(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"content", content}}}}}}}.dump();
}

snap::LlmConfig local_llm_config(const LocalLlmServer& server, int max_retries = 0) {
    snap::LlmConfig config;
    config.endpoint = server.endpoint();
    config.max_retries = max_retries;
    config.retry_backoff_ms = 1;
    config.timeout_seconds = 5;
    return config;
}

struct StubLlm : snap::LlmClient {
    std::vector<std::string> replies;
    std::vector<std::string> prompts;
    std::size_t next = 0;

    std::string complete(const std::string& prompt) override {
        prompts.push_back(prompt);
        REQUIRE(next < replies.size());
        return replies[next++];
    }
};

} // namespace

// ======================= run configuration ===============================

TEST_CASE("minimal config fills documented defaults") {
    auto config = snap::run_config_from_json(
        R"({"dataset": {"path": "/data/log.xes", "format": "xes"}})", {});

    CHECK(config.dataset.path == "/data/log.xes");
    CHECK(config.dataset.format == "xes");
    CHECK(config.dataset.load.concat_lifecycle);
    CHECK(config.dataset.load.lifecycle_separator == "-");

    CHECK(config.feature_selection.threshold == doctest::Approx(0.02));
    CHECK(config.feature_selection.max_count == 6);
    CHECK(config.feature_selection.gbdt.rounds == 100);
    CHECK(config.feature_selection.gbdt.max_depth == 6);
    CHECK(config.feature_selection.gbdt.learning_rate == doctest::Approx(0.3));

    CHECK(config.story_template.source == "default");
    CHECK(config.story_template.llm.model == "gpt-4");
    CHECK(config.story_template.llm.max_retries == 3);

    CHECK(config.render.window == 10);
    CHECK(config.render.missing_policy == "omit_clause");
    CHECK(config.render.max_story_bytes == 0);

    // reference defaults apply when no classifier block is present
    CHECK(config.classifier.backend == "reference");
    auto reference = snap::ClassifierConfig::reference_defaults();
    CHECK(config.classifier.params.backbone_id == reference.backbone_id);
    CHECK(config.classifier.params.learning_rate == doctest::Approx(reference.learning_rate));
    CHECK(config.classifier.params.batch_size == reference.batch_size);
    CHECK(config.classifier.params.max_epochs == reference.max_epochs);

    CHECK(config.evaluation.n_folds == 5);
    CHECK(config.evaluation.fold_seed == 42);
    CHECK(config.evaluation.variants == std::vector<std::string>{"story"});
    CHECK(config.evaluation.benchmark_dataset.empty());
    CHECK(config.jobs == 1);
    CHECK_FALSE(config.force);
    CHECK_FALSE(config.output_dir.empty());
}

TEST_CASE("full config parses every field and resolves relative paths") {
    nlohmann::json doc{
        {"dataset",
         {{"path", "logs/events.csv"},
          {"format", "csv"},
          {"csv_mapping",
           {{"case_id", "case"}, {"activity", "act"}, {"timestamp", "ts"}}},
          {"concat_lifecycle", false},
          {"lifecycle_separator", "+"},
          {"rename_activities", {{"A_OLD", "A_NEW"}}},
          {"schema_overrides", {{"notes", "free_text"}}}}},
        {"feature_selection",
         {{"threshold", 0.05},
          {"max_count", 4},
          {"gbdt", {{"rounds", 10}, {"max_depth", 3}, {"learning_rate", 0.1}, {"seed", 9}}}}},
        {"template",
         {{"source", "manual"},
          {"manual_path", "tpl.txt"},
          {"llm", {{"endpoint", "http://localhost:9/v1"}, {"model", "test-model"},
                   {"max_retries", 1}, {"retry_backoff_ms", 5}}}}},
        {"render", {{"window", 7}, {"missing_policy", "placeholder_token"}, {"max_story_bytes", 2048}}},
        {"classifier",
         {{"backend", "encoder"}, {"backbone_id", "bert-base-uncased"}, {"dropout", 0.25},
          {"learning_rate", 3e-5}, {"batch_size", 16}, {"max_epochs", 9},
          {"patience_epochs", 2}, {"max_input_tokens", 128}, {"seed", 5}}},
        {"evaluation",
         {{"n_folds", 3}, {"fold_seed", 7}, {"variants", {"story", "numbered"}},
          {"exclude_features", {"notes"}}, {"benchmark_dataset", "bpi13cp"},
          {"benchmarks_path", "bench.json"}}},
        {"output_dir", "out"},
        {"jobs", 2},
        {"force", true},
    };

    auto config = snap::run_config_from_json(doc.dump(), "/base");

    CHECK(config.dataset.path == "/base/logs/events.csv");
    CHECK(config.dataset.csv_mapping.activity == "act");
    CHECK_FALSE(config.dataset.load.concat_lifecycle);
    CHECK(config.dataset.load.lifecycle_separator == "+");
    CHECK(config.dataset.load.rename_activities.at("A_OLD") == "A_NEW");
    CHECK(config.dataset.schema_overrides.at("notes") == snap::AttributeKind::free_text);

    CHECK(config.feature_selection.threshold == doctest::Approx(0.05));
    CHECK(config.feature_selection.max_count == 4);
    CHECK(config.feature_selection.gbdt.rounds == 10);
    CHECK(config.feature_selection.gbdt.seed == 9);

    CHECK(config.story_template.source == "manual");
    CHECK(config.story_template.manual_path == "/base/tpl.txt");
    CHECK(config.story_template.llm.endpoint == "http://localhost:9/v1");
    CHECK(config.story_template.llm.model == "test-model");
    CHECK(config.story_template.llm.max_retries == 1);

    CHECK(config.render.window == 7);
    CHECK(config.render.missing_policy == "placeholder_token");
    CHECK(config.render.max_story_bytes == 2048);

    CHECK(config.classifier.backend == "encoder");
    CHECK(config.classifier.params.backbone_id == "bert-base-uncased");
    CHECK(config.classifier.params.dropout == doctest::Approx(0.25));
    CHECK(config.classifier.params.batch_size == 16);
    CHECK(config.classifier.params.max_input_tokens == 128);

    CHECK(config.evaluation.n_folds == 3);
    CHECK(config.evaluation.fold_seed == 7);
    CHECK(config.evaluation.variants == std::vector<std::string>{"story", "numbered"});
    CHECK(config.evaluation.exclude_features == std::vector<std::string>{"notes"});
    CHECK(config.evaluation.benchmark_dataset == "bpi13cp");
    CHECK(config.evaluation.benchmarks_path == "/base/bench.json");

    CHECK(config.output_dir == "/base/out");
    CHECK(config.jobs == 2);
    CHECK(config.force);

    // absolute paths are kept as is
    auto absolute = snap::run_config_from_json(
        R"({"dataset": {"path": "/abs/log.xes", "format": "xes"}})", "/base");
    CHECK(absolute.dataset.path == "/abs/log.xes");
}

TEST_CASE("config JSON survives a serialization round trip") {
    nlohmann::json doc = pipeline_config("/tmp/p.csv", "/tmp/out");
    doc["render"] = {{"window", 9}};
    doc["evaluation"]["benchmark_dataset"] = "toy";
    auto config = parse_config(doc);

    auto again = snap::run_config_from_json(snap::to_json(config), {});
    CHECK(again.dataset.path == config.dataset.path);
    CHECK(again.render.window == config.render.window);
    CHECK(again.evaluation.variants == config.evaluation.variants);
    CHECK(again.evaluation.benchmark_dataset == "toy");
    CHECK(again.classifier.backend == config.classifier.backend);
    CHECK(again.classifier.params.batch_size == config.classifier.params.batch_size);
}

TEST_CASE("sepsis preset widens the render window unless set explicitly") {
    nlohmann::json doc{{"dataset", {{"path", "/d.xes"}, {"format", "xes"}}},
                       {"evaluation", {{"benchmark_dataset", "sepsis"}}}};
    CHECK(parse_config(doc).render.window == 15);

    doc["render"] = {{"missing_policy", "omit_clause"}};
    CHECK(parse_config(doc).render.window == 15);

    doc["render"] = {{"window", 12}};
    CHECK(parse_config(doc).render.window == 12);

    doc["evaluation"]["benchmark_dataset"] = "bpi13cp";
    doc.erase("render");
    CHECK(parse_config(doc).render.window == 10);
}

TEST_CASE("mip preset shrinks encoder batches unless set explicitly") {
    nlohmann::json doc{{"dataset", {{"path", "/d.xes"}, {"format", "xes"}}},
                       {"classifier", {{"backend", "encoder"}}},
                       {"evaluation", {{"benchmark_dataset", "mip"}}}};
    CHECK(parse_config(doc).classifier.params.batch_size == 8);

    doc["classifier"]["batch_size"] = 16;
    CHECK(parse_config(doc).classifier.params.batch_size == 16);

    // the preset is for the encoder; the reference backend keeps its defaults
    doc["classifier"] = {{"backend", "reference"}};
    CHECK(parse_config(doc).classifier.params.batch_size ==
          snap::ClassifierConfig::reference_defaults().batch_size);

    // and without the benchmark tag the encoder keeps its own defaults
    doc["classifier"] = {{"backend", "encoder"}};
    doc["evaluation"]["benchmark_dataset"] = "";
    CHECK(parse_config(doc).classifier.params.batch_size == snap::ClassifierConfig{}.batch_size);
}

TEST_CASE("encoder backend starts from encoder defaults, not reference ones") {
    nlohmann::json doc{{"dataset", {{"path", "/d.xes"}, {"format", "xes"}}},
                       {"classifier", {{"backend", "encoder"}}}};
    auto config = parse_config(doc);
    snap::ClassifierConfig encoder_defaults;
    CHECK(config.classifier.params.backbone_id == encoder_defaults.backbone_id);
    CHECK(config.classifier.params.learning_rate == doctest::Approx(encoder_defaults.learning_rate));
    CHECK(config.classifier.params.batch_size == encoder_defaults.batch_size);
    CHECK(config.classifier.params.max_epochs == encoder_defaults.max_epochs);
}

TEST_CASE("config validation rejects bad values") {
    auto reject = [](nlohmann::json doc, const std::string& needle) {
        auto message =
            thrown_message<snap::ConfigError>([&] { snap::run_config_from_json(doc.dump(), {}); });
        CAPTURE(message);
        CHECK(contains(message, needle));
    };
    const nlohmann::json good{{"dataset", {{"path", "/d.xes"}, {"format", "xes"}}}};

    CHECK(contains(thrown_message<snap::ConfigError>(
                       [] { snap::run_config_from_json("{not json", {}); }),
                   "malformed config JSON"));
    CHECK(contains(thrown_message<snap::ConfigError>(
                       [] { snap::run_config_from_json(R"({"dataset": {}})", {}); }),
                   "invalid config"));

    auto doc = good;
    doc["dataset"]["format"] = "parquet";
    reject(doc, "dataset.format");

    doc = good;
    doc["dataset"]["format"] = "csv"; // no column mapping
    reject(doc, "case_id, activity and timestamp");

    doc = good;
    doc["feature_selection"] = {{"threshold", 1.5}};
    reject(doc, "threshold");

    doc = good;
    doc["feature_selection"] = {{"max_count", 0}};
    reject(doc, "max_count");

    doc = good;
    doc["template"] = {{"source", "oracle"}};
    reject(doc, "template source");

    doc = good;
    doc["template"] = {{"source", "manual"}};
    reject(doc, "manual_path");

    doc = good;
    doc["render"] = {{"window", 0}};
    reject(doc, "render.window");

    doc = good;
    doc["classifier"] = {{"backend", "gru"}};
    reject(doc, "classifier.backend");

    doc = good;
    doc["evaluation"] = {{"n_folds", 1}};
    reject(doc, "n_folds");

    doc = good;
    doc["evaluation"] = {{"variants", nlohmann::json::array()}};
    reject(doc, "at least one variant");

    doc = good;
    doc["evaluation"] = {{"variants", {"story", "fancy"}}};
    reject(doc, "unknown variant");

    doc = good;
    doc["jobs"] = 0;
    reject(doc, "jobs");
}

TEST_CASE("config files load relative to their own directory") {
    TempDir dir;
    write_pipeline_csv(dir / "events.csv");
    nlohmann::json doc = pipeline_config("events.csv", "run_out");
    doc["dataset"]["path"] = "events.csv";
    doc["output_dir"] = "run_out";
    write_text(dir / "config.json", doc.dump());

    auto config = snap::load_run_config(dir / "config.json");
    CHECK(config.dataset.path == dir.path / "events.csv");
    CHECK(config.output_dir == dir.path / "run_out");

    CHECK(contains(thrown_message<snap::ConfigError>(
                       [&] { snap::load_run_config(dir / "missing.json"); }),
                   "cannot open config file"));
}

// ============================ commands ===================================

TEST_CASE("ingest prints log statistics and writes the canonical dump") {
    TempDir out;
    nlohmann::json doc{{"dataset", {{"path", fixture("tiny.xes").string()}, {"format", "xes"}}},
                       {"output_dir", out.path.string()}};
    auto config = parse_config(doc);

    std::ostringstream text;
    CHECK(snap::cmd_ingest(config, text) == 0);

    CHECK(contains(text.str(), "cases:           3"));
    CHECK(contains(text.str(), "events:          6"));
    CHECK(contains(text.str(), "activities:      4"));
    CHECK(contains(text.str(), "avg case length: 2"));
    CHECK(contains(text.str(), "attributes:"));
    CHECK(contains(text.str(), "org:resource: "));
    CHECK(contains(text.str(), "amount: "));
    CHECK(contains(text.str(), "canonical dump:  " + (out / "log.jsonl").string()));

    // the dump is a loadable jsonl log with the same shape
    snap::DatasetConfig reload;
    reload.path = out / "log.jsonl";
    reload.format = "jsonl";
    auto log = snap::load_dataset(reload);
    CHECK(log.traces.size() == 3);
    CHECK(log.num_events() == 6);
    CHECK(log.activity_vocabulary.size() == 4);
}

TEST_CASE("template command selects temporal features and writes template.txt") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    TempDir out;
    auto config = parse_config(pipeline_config(csv, out.path));

    std::ostringstream text;
    CHECK(snap::cmd_template(config, text) == 0);

    CHECK(contains(text.str(), "selected features:"));
    CHECK(contains(text.str(), std::string("  - ") + snap::kTimeFromCaseStart));
    CHECK(contains(text.str(), std::string("  - ") + snap::kTimeFromPrevious));
    CHECK(contains(text.str(), "template source: default"));
    CHECK(contains(text.str(), "template: " + kTemporalTemplate));
    CHECK(contains(text.str(), "validation: OK"));
    CHECK(contains(text.str(), "written to: " + (out / "template.txt").string()));

    auto written = snap::load_template_file((out / "template.txt").string());
    CHECK(written.body == kTemporalTemplate);

    CHECK(std::filesystem::exists(out / "features" / "importance.json"));
    CHECK(std::filesystem::exists(out / "features" / "selected_features.json"));
    CHECK(std::filesystem::exists(out / "folds.json"));
}

TEST_CASE("an existing template is reused unless force is set") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    TempDir out;
    auto config = parse_config(pipeline_config(csv, out.path));

    std::ostringstream first;
    REQUIRE(snap::cmd_template(config, first) == 0);

    const std::string custom = "Timing was " + ph(snap::kTimeFromCaseStart) + " and " +
                               ph(snap::kTimeFromPrevious) +
                               ". Sequence of recent activities: " + ph("sequence") + ".";
    write_text(out / "template.txt", custom + "\n");

    std::ostringstream reused;
    REQUIRE(snap::cmd_template(config, reused) == 0);
    CHECK(contains(reused.str(), "template: " + custom));

    config.force = true;
    std::ostringstream forced;
    REQUIRE(snap::cmd_template(config, forced) == 0);
    CHECK(contains(forced.str(), "template: " + kTemporalTemplate));
}

TEST_CASE("a manual template is honored or rejected against the selection") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    const std::string manual_body = "It began " + ph(snap::kTimeFromCaseStart) + " ago, " +
                                    ph(snap::kTimeFromPrevious) +
                                    " after the last step. Sequence of recent activities: " +
                                    ph("sequence") + ".";
    write_text(dir / "manual.txt", manual_body + "\n");

    TempDir out;
    nlohmann::json doc = pipeline_config(csv, out.path);
    doc["template"] = {{"source", "manual"}, {"manual_path", (dir / "manual.txt").string()}};

    std::ostringstream text;
    CHECK(snap::cmd_template(parse_config(doc), text) == 0);
    CHECK(contains(text.str(), "template source: manual"));
    CHECK(contains(text.str(), "template: " + manual_body));

    // a template that ignores the selected features is a data error
    write_text(dir / "bad.txt", "Sequence of recent activities: " + ph("sequence") + ".\n");
    doc["template"]["manual_path"] = (dir / "bad.txt").string();
    TempDir out2;
    doc["output_dir"] = out2.path.string();
    std::ostringstream sink;
    auto message = thrown_message<snap::DataError>(
        [&] { snap::cmd_template(parse_config(doc), sink); });
    CHECK(contains(message, "template does not fit the selected features"));
    CHECK(contains(message, snap::kTimeFromCaseStart));
}

TEST_CASE("run command trains folds, writes artifacts and prints the table") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    TempDir out;
    nlohmann::json doc = pipeline_config(csv, out.path);
    doc["evaluation"]["variants"] = {"story", "list_of_values"};

    auto config = parse_config(doc);
    std::ostringstream text;
    CHECK(snap::cmd_run(config, text) == 0);

    CHECK(contains(text.str(), "running variant story (2 folds, backend reference)"));
    CHECK(contains(text.str(), "running variant list_of_values (2 folds, backend reference)"));
    CHECK(contains(text.str(), "model"));
    CHECK(contains(text.str(), "accuracy"));
    CHECK(contains(text.str(), "wgt. F1"));
    CHECK(contains(text.str(), "this run / story"));
    CHECK(contains(text.str(), "this run / list_of_values"));
    CHECK(contains(text.str(),
                   "* differs from the story variant with p < 0.05 (Wilcoxon signed-rank)"));

    // per-variant artifact trees
    for (const std::string variant : {"story", "list_of_values"}) {
        const auto run_dir = out.path / "runs" / variant;
        CHECK(std::filesystem::exists(run_dir / "config.json"));
        CHECK(std::filesystem::exists(run_dir / "folds.json"));
        CHECK(std::filesystem::exists(run_dir / "metrics.json"));
        CHECK(std::filesystem::exists(run_dir / "stories" / "fold_0.jsonl"));
        CHECK(std::filesystem::exists(run_dir / "models" / "fold_1" / "model.snap"));
    }

    auto metrics = nlohmann::json::parse(read_file(out / "metrics.json"));
    REQUIRE(metrics.contains("story"));
    REQUIRE(metrics.contains("list_of_values"));
    // the process is deterministic, so the reference classifier masters it
    CHECK(metrics["story"]["mean_accuracy"].get<double>() >= 0.95);
    CHECK(metrics["story"]["mean_weighted_f1"].get<double>() >= 0.95);
    CHECK(metrics["story"]["per_fold"].size() == 2);

    auto significance = nlohmann::json::parse(read_file(out / "significance.json"));
    REQUIRE(significance.contains("story_vs_list_of_values"));
    const auto& report = significance["story_vs_list_of_values"];
    bool shape_ok = report.contains("p_value") || report.value("degenerate", false);
    CHECK(shape_ok);

    // stories land in the split their case belongs to
    std::ifstream stories(out.path / "runs" / "story" / "stories" / "fold_0.jsonl");
    std::string line;
    std::size_t n_lines = 0;
    while (std::getline(stories, line)) {
        auto record = nlohmann::json::parse(line);
        CHECK(record.contains("story"));
        CHECK(record.contains("label"));
        bool split_ok = record["split"] == "train" || record["split"] == "val" ||
                        record["split"] == "test";
        CHECK(split_ok);
        ++n_lines;
    }
    CHECK(n_lines == 48); // 12 cases x 4 prefixes
}

TEST_CASE("rerunning the same config reproduces folds and metrics byte for byte") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    TempDir out;
    auto config = parse_config(pipeline_config(csv, out.path));

    std::ostringstream sink;
    REQUIRE(snap::cmd_run(config, sink) == 0);
    const auto folds_first = read_file(out / "folds.json");
    const auto metrics_first = read_file(out / "metrics.json");
    const auto template_first = read_file(out / "template.txt");

    std::ostringstream sink2;
    REQUIRE(snap::cmd_run(config, sink2) == 0);
    CHECK(read_file(out / "folds.json") == folds_first);
    CHECK(read_file(out / "metrics.json") == metrics_first);
    CHECK(read_file(out / "template.txt") == template_first);
}

TEST_CASE("run command compares against published benchmark scores") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    write_text(dir / "bench.json",
               nlohmann::json{{"datasets",
                               {{"toy",
                                 {{"accuracy", {{"gru", 0.5}, {"cnn", 0.4}}},
                                  {"weighted_f1", {{"gru", 0.45}}}}}}}}
                   .dump());

    TempDir out;
    nlohmann::json doc = pipeline_config(csv, out.path);
    doc["evaluation"]["benchmark_dataset"] = "toy";
    doc["evaluation"]["benchmarks_path"] = (dir / "bench.json").string();

    std::ostringstream text;
    CHECK(snap::cmd_run(parse_config(doc), text) == 0);

    CHECK(contains(text.str(), "results (dataset: toy)"));
    CHECK(contains(text.str(), "gru"));
    CHECK(contains(text.str(), "0.500"));
    CHECK(contains(text.str(), "0.450"));
    CHECK(contains(text.str(), "cnn"));
    // cnn has no published F1, so its cell is a dash
    CHECK(contains(text.str(), "-"));
    // two folds can never reach significance in the exact test: p is 0.5
    CHECK(contains(text.str(), "vs best benchmark (gru): p=0.500"));
    CHECK_FALSE(contains(text.str(), "(significant)"));

    // an unknown dataset key simply omits the benchmark rows
    nlohmann::json doc2 = pipeline_config(csv, out.path);
    doc2["evaluation"]["benchmark_dataset"] = "unlisted";
    doc2["evaluation"]["benchmarks_path"] = (dir / "bench.json").string();
    doc2["force"] = true;
    std::ostringstream text2;
    CHECK(snap::cmd_run(parse_config(doc2), text2) == 0);
    CHECK_FALSE(contains(text2.str(), "vs best benchmark"));
}

TEST_CASE("run_command maps the error taxonomy onto exit codes") {
    std::ostringstream err;
    CHECK(snap::run_command([] { return 0; }, err) == 0);
    CHECK(err.str().empty());

    err.str("");
    CHECK(snap::run_command([]() -> int { throw snap::ConfigError("bad knob"); }, err) == 2);
    CHECK(err.str() == "error: bad knob\n");

    err.str("");
    CHECK(snap::run_command([]() -> int { throw snap::DataError("bad log"); }, err) == 3);
    CHECK(err.str() == "error: bad log\n");

    err.str("");
    CHECK(snap::run_command([]() -> int { throw snap::ExternalServiceError("bad llm"); }, err) ==
          4);
    CHECK(err.str() == "error: bad llm\n");

    err.str("");
    CHECK(snap::run_command([]() -> int { throw std::runtime_error("surprise"); }, err) == 1);
    CHECK(err.str() == "unexpected error: surprise\n");
}

TEST_CASE("an empty dataset fails with the data-error exit code") {
    TempDir out;
    nlohmann::json doc{{"dataset",
                        {{"path", fixture("empty.csv").string()},
                         {"format", "csv"},
                         {"csv_mapping",
                          {{"case_id", "order"}, {"activity", "step"}, {"timestamp", "when"}}}}},
                       {"output_dir", out.path.string()}};
    auto config = parse_config(doc);

    std::ostringstream out_text, err;
    int code = snap::run_command([&] { return snap::cmd_ingest(config, out_text); }, err);
    CHECK(code == 3);
    CHECK(contains(err.str(), "error: "));
}

// ===================== language model template loop =======================

TEST_CASE("the template generator accepts a valid first answer") {
    StubLlm stub;
    stub.replies = {"  " + kTemporalTemplate + "\n\n"};
    auto tmpl = snap::generate_template_llm(temporal_selection(), stub);
    CHECK(tmpl.body == kTemporalTemplate); // whitespace is trimmed
    CHECK(tmpl.source == snap::TemplateSource::llm);
    CHECK(stub.prompts.size() == 1);
    CHECK(contains(stub.prompts[0], snap::kTimeFromCaseStart));
    CHECK(contains(stub.prompts[0], ph("sequence")));
}

TEST_CASE("template validation failures are fed back to the model") {
    StubLlm stub;
    stub.replies = {"Sure! Here is a story template you might like", kTemporalTemplate};
    auto tmpl = snap::generate_template_llm(temporal_selection(), stub);
    CHECK(tmpl.body == kTemporalTemplate);
    REQUIRE(stub.prompts.size() == 2);
    // the second prompt restates the task and appends the violations
    CHECK(stub.prompts[1].rfind(stub.prompts[0], 0) == 0);
    CHECK(contains(stub.prompts[1], "rejected"));
    CHECK(contains(stub.prompts[1], snap::kTimeFromCaseStart));
}

TEST_CASE("a model that never yields a valid template is an external failure") {
    StubLlm stub;
    stub.replies = {"nope", "still nope"};
    auto message = thrown_message<snap::ExternalServiceError>(
        [&] { snap::generate_template_llm(temporal_selection(), stub, 2); });
    CHECK(contains(message, "after 2 attempts"));
    CHECK(contains(message, "use the default template"));
    CHECK(stub.prompts.size() == 2);

    CHECK_THROWS_AS(snap::generate_template_llm(temporal_selection(), stub, 0),
                    snap::ConfigError);
}

// ========================= HTTP language model ============================

TEST_CASE("the HTTP client refuses to start without a credential") {
    CHECK(contains(
        thrown_message<snap::ConfigError>([] { snap::HttpLlmClient({}, ""); }),
        "credential is empty"));

    unsetenv(snap::kLlmApiKeyEnvVar);
    auto message = thrown_message<snap::ConfigError>(
        [] { snap::HttpLlmClient::from_environment({}); });
    CHECK(contains(message, snap::kLlmApiKeyEnvVar));
    CHECK(contains(message, "is not set"));

    setenv(snap::kLlmApiKeyEnvVar, "", 1);
    CHECK_THROWS_AS(snap::HttpLlmClient::from_environment({}), snap::ConfigError);
}

TEST_CASE("the HTTP client posts the prompt and returns the completion") {
    std::string auth_header, request_body;
    LocalLlmServer server([&](const httplib::Request& req, httplib::Response& res) {
        auth_header = req.get_header_value("Authorization");
        request_body = req.body;
        res.set_content(chat_reply("A fine template."), "application/json");
    });

    setenv(snap::kLlmApiKeyEnvVar, "sk-unit-test-key", 1);
    auto client = snap::HttpLlmClient::from_environment(local_llm_config(server));
    CHECK(client->complete("write me a template") == "A fine template.");

    CHECK(auth_header == "Bearer sk-unit-test-key");
    auto request = nlohmann::json::parse(request_body);
    CHECK(request["model"] == "gpt-4");
    CHECK(request["messages"][0]["role"] == "user");
    CHECK(request["messages"][0]["content"] == "write me a template");
}

TEST_CASE("server errors are retried until the service recovers") {
    int hits = 0;
    LocalLlmServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++hits < 3) {
            res.status = hits == 1 ? 500 : 429;
            res.set_content("busy", "text/plain");
        } else {
            res.set_content(chat_reply("recovered"), "application/json");
        }
    });

    snap::HttpLlmClient client(local_llm_config(server, 3), "sk-unit-test-key");
    CHECK(client.complete("hello") == "recovered");
    CHECK(hits == 3);
}

TEST_CASE("a client error is not retried and never leaks the credential") {
    int hits = 0;
    LocalLlmServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("who are you", "text/plain");
    });

    const std::string secret = "sk-very-secret-key";
    snap::HttpLlmClient client(local_llm_config(server, 3), secret);
    auto message =
        thrown_message<snap::ExternalServiceError>([&] { client.complete("hello"); });
    CHECK(contains(message, "HTTP status 401"));
    CHECK_FALSE(contains(message, secret));
    CHECK(hits == 1);
}

TEST_CASE("exhausted retries report the attempt count and last error") {
    int hits = 0;
    LocalLlmServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
        res.set_content("down", "text/plain");
    });

    const std::string secret = "sk-very-secret-key";
    snap::HttpLlmClient client(local_llm_config(server, 1), secret);
    auto message =
        thrown_message<snap::ExternalServiceError>([&] { client.complete("hello"); });
    CHECK(contains(message, "unreachable after 2 attempts"));
    CHECK(contains(message, "HTTP status 503"));
    CHECK_FALSE(contains(message, secret));
    CHECK(hits == 2);
}

TEST_CASE("a malformed completion body is an external failure") {
    LocalLlmServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"unexpected": true})", "application/json");
    });
    snap::HttpLlmClient client(local_llm_config(server), "sk-unit-test-key");
    CHECK(contains(thrown_message<snap::ExternalServiceError>([&] { client.complete("x"); }),
                   "malformed language model response"));
}

TEST_CASE("an unreachable endpoint exhausts its attempts with a transport error") {
    int port;
    {
        // bind and immediately release a port so nothing is listening on it
        LocalLlmServer probe([](const httplib::Request&, httplib::Response&) {});
        port = probe.port;
    }
    snap::LlmConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.max_retries = 1;
    config.retry_backoff_ms = 1;
    config.timeout_seconds = 1;

    snap::HttpLlmClient client(config, "sk-unit-test-key");
    auto message =
        thrown_message<snap::ExternalServiceError>([&] { client.complete("hello"); });
    CHECK(contains(message, "unreachable after 2 attempts"));
    CHECK(contains(message, "transport failure"));

    config.endpoint = "not-a-url";
    snap::HttpLlmClient bad(config, "sk-unit-test-key");
    CHECK_THROWS_AS(bad.complete("hello"), snap::ConfigError);
}

TEST_CASE("the template command can source its template from the model") {
    TempDir dir;
    auto csv = write_pipeline_csv(dir / "events.csv");
    LocalLlmServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(chat_reply(kTemporalTemplate), "application/json");
    });

    TempDir out;
    nlohmann::json doc = pipeline_config(csv, out.path);
    doc["template"] = {{"source", "llm"},
                       {"llm", {{"endpoint", server.endpoint()}, {"max_retries", 0}}}};

    setenv(snap::kLlmApiKeyEnvVar, "sk-unit-test-key", 1);
    std::ostringstream text;
    CHECK(snap::cmd_template(parse_config(doc), text) == 0);
    CHECK(contains(text.str(), "template source: llm"));
    CHECK(contains(text.str(), "template: " + kTemporalTemplate));

    // without the credential the same command is a configuration error
    unsetenv(snap::kLlmApiKeyEnvVar);
    TempDir out2;
    doc["output_dir"] = out2.path.string();
    std::ostringstream sink, err;
    int code = snap::run_command(
        [&] { return snap::cmd_template(parse_config(doc), sink); }, err);
    CHECK(code == 2);
    CHECK(contains(err.str(), snap::kLlmApiKeyEnvVar));
}

// ========================== CLI binary ====================================

TEST_CASE("the binary reports usage errors and help through exit codes") {
    TempDir scratch;
    auto none = run_cli("", scratch.path);
    CHECK(none.exit_code == 2);
    CHECK_FALSE(none.err.empty());

    auto help = run_cli("--help", scratch.path);
    CHECK(help.exit_code == 0);
    CHECK(contains(help.out, "ingest"));
    CHECK(contains(help.out, "template"));
    CHECK(contains(help.out, "run"));

    auto missing = run_cli("ingest -c " + (scratch / "nope.json").string(), scratch.path);
    CHECK(missing.exit_code == 2);
}

TEST_CASE("the binary ingests a log end to end") {
    TempDir scratch;
    TempDir out;
    nlohmann::json doc{{"dataset", {{"path", fixture("tiny.xes").string()}, {"format", "xes"}}},
                       {"output_dir", out.path.string()}};
    write_text(scratch / "config.json", doc.dump());

    auto result = run_cli("ingest -c " + (scratch / "config.json").string(), scratch.path);
    CHECK(result.exit_code == 0);
    CHECK(contains(result.out, "cases:           3"));
    CHECK(std::filesystem::exists(out / "log.jsonl"));

    // -o moves every artifact to the override directory
    TempDir other;
    auto moved = run_cli("ingest -c " + (scratch / "config.json").string() + " -o " +
                             other.path.string(),
                         scratch.path);
    CHECK(moved.exit_code == 0);
    CHECK(std::filesystem::exists(other / "log.jsonl"));
}

TEST_CASE("the binary surfaces config and data errors as distinct exit codes") {
    TempDir scratch;
    write_text(scratch / "broken.json", "{broken");
    auto broken = run_cli("ingest -c " + (scratch / "broken.json").string(), scratch.path);
    CHECK(broken.exit_code == 2);
    CHECK(contains(broken.err, "error: malformed config JSON"));

    TempDir out;
    nlohmann::json empty_doc{
        {"dataset",
         {{"path", fixture("empty.csv").string()},
          {"format", "csv"},
          {"csv_mapping",
           {{"case_id", "order"}, {"activity", "step"}, {"timestamp", "when"}}}}},
        {"output_dir", out.path.string()}};
    write_text(scratch / "empty.json", empty_doc.dump());
    auto data_error = run_cli("ingest -c " + (scratch / "empty.json").string(), scratch.path);
    CHECK(data_error.exit_code == 3);
    CHECK(contains(data_error.err, "error: "));
}

TEST_CASE("the binary runs the experiment and honors the variant override") {
    TempDir scratch;
    auto csv = write_pipeline_csv(scratch / "events.csv");
    TempDir out;
    write_text(scratch / "config.json", pipeline_config(csv, out.path).dump());

    auto result = run_cli("run -c " + (scratch / "config.json").string() +
                              " --variant list_of_values",
                          scratch.path);
    CHECK(result.exit_code == 0);
    CHECK(contains(result.out, "running variant list_of_values (2 folds, backend reference)"));

    auto metrics = nlohmann::json::parse(read_file(out / "metrics.json"));
    CHECK(metrics.contains("list_of_values"));
    CHECK_FALSE(metrics.contains("story"));
    CHECK(metrics["list_of_values"]["mean_accuracy"].get<double>() >= 0.95);
}

TEST_CASE("the binary treats --manual as a manual template source") {
    TempDir scratch;
    auto csv = write_pipeline_csv(scratch / "events.csv");
    const std::string manual_body = "Started " + ph(snap::kTimeFromCaseStart) + " ago, " +
                                    ph(snap::kTimeFromPrevious) +
                                    " since the previous step. Sequence of recent activities: " +
                                    ph("sequence") + ".";
    write_text(scratch / "manual.txt", manual_body + "\n");
    TempDir out;
    write_text(scratch / "config.json", pipeline_config(csv, out.path).dump());

    auto result = run_cli("template -c " + (scratch / "config.json").string() + " --manual " +
                              (scratch / "manual.txt").string(),
                          scratch.path);
    CHECK(result.exit_code == 0);
    CHECK(contains(result.out, "template source: manual"));
    CHECK(contains(result.out, "template: " + manual_body));
}
