#include "snap/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "snap/errors.hpp"
#include "snap/experiment.hpp"

namespace snap {

namespace {

// resolves a possibly relative path against the config file's directory
std::filesystem::path resolve_path(const std::string& raw, const std::filesystem::path& base) {
    std::filesystem::path p(raw);
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

const std::set<std::string> kFormats = {"xes", "csv", "jsonl"};
const std::set<std::string> kBackends = {"reference", "encoder"};

} // namespace

void RunConfig::validate() const {
    if (dataset.path.empty()) throw ConfigError("dataset.path is required");
    if (!kFormats.count(dataset.format))
        throw ConfigError("dataset.format must be xes, csv or jsonl");
    if (dataset.format == "csv") {
        if (dataset.csv_mapping.case_id.empty() || dataset.csv_mapping.activity.empty() ||
            dataset.csv_mapping.timestamp.empty())
            throw ConfigError("csv datasets need case_id, activity and timestamp column names");
    }
    if (feature_selection.threshold < 0.0 || feature_selection.threshold > 1.0)
        throw ConfigError("feature_selection.threshold must lie in [0, 1]");
    if (feature_selection.max_count == 0)
        throw ConfigError("feature_selection.max_count must be positive");
    template_source_from_string(story_template.source);
    if (story_template.source == "manual" && story_template.manual_path.empty())
        throw ConfigError("manual template source needs template.manual_path");
    if (render.window < 1) throw ConfigError("render.window must be at least 1");
    missing_policy_from_string(render.missing_policy);
    if (!kBackends.count(classifier.backend))
        throw ConfigError("classifier.backend must be reference or encoder");
    classifier.params.validate();
    if (evaluation.n_folds < 2) throw ConfigError("evaluation.n_folds must be at least 2");
    if (evaluation.variants.empty())
        throw ConfigError("evaluation.variants must name at least one variant");
    for (const auto& name : evaluation.variants) variant_from_string(name);
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (output_dir.empty()) throw ConfigError("output_dir is required");
}

RunConfig run_config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }

    RunConfig config;
    try {
        const auto& ds = doc.at("dataset");
        config.dataset.path = resolve_path(ds.at("path").get<std::string>(), base_dir);
        config.dataset.format = ds.at("format").get<std::string>();
        if (ds.contains("csv_mapping")) {
            const auto& m = ds["csv_mapping"];
            config.dataset.csv_mapping.case_id = m.value("case_id", "");
            config.dataset.csv_mapping.activity = m.value("activity", "");
            config.dataset.csv_mapping.timestamp = m.value("timestamp", "");
        }
        config.dataset.load.concat_lifecycle = ds.value("concat_lifecycle", true);
        config.dataset.load.lifecycle_separator = ds.value("lifecycle_separator", "-");
        if (ds.contains("rename_activities"))
            for (auto it = ds["rename_activities"].begin(); it != ds["rename_activities"].end(); ++it)
                config.dataset.load.rename_activities[it.key()] = it.value().get<std::string>();
        if (ds.contains("schema_overrides"))
            for (auto it = ds["schema_overrides"].begin(); it != ds["schema_overrides"].end(); ++it)
                config.dataset.schema_overrides[it.key()] =
                    attribute_kind_from_string(it.value().get<std::string>());

        if (doc.contains("feature_selection")) {
            const auto& fs = doc["feature_selection"];
            config.feature_selection.threshold = fs.value("threshold", 0.02);
            config.feature_selection.max_count = fs.value("max_count", std::size_t{6});
            if (fs.contains("gbdt")) {
                const auto& g = fs["gbdt"];
                config.feature_selection.gbdt.rounds = g.value("rounds", 100);
                config.feature_selection.gbdt.max_depth = g.value("max_depth", 6);
                config.feature_selection.gbdt.learning_rate = g.value("learning_rate", 0.3);
                config.feature_selection.gbdt.l2_regularization = g.value("l2_regularization", 1.0);
                config.feature_selection.gbdt.seed = g.value("seed", std::uint64_t{0});
            }
        }

        if (doc.contains("template")) {
            const auto& t = doc["template"];
            config.story_template.source = t.value("source", "default");
            if (t.contains("manual_path"))
                config.story_template.manual_path =
                    resolve_path(t["manual_path"].get<std::string>(), base_dir);
            if (t.contains("llm")) {
                const auto& l = t["llm"];
                config.story_template.llm.endpoint =
                    l.value("endpoint", config.story_template.llm.endpoint);
                config.story_template.llm.model = l.value("model", config.story_template.llm.model);
                config.story_template.llm.max_retries = l.value("max_retries", 3);
                config.story_template.llm.timeout_seconds = l.value("timeout_seconds", 60);
                config.story_template.llm.retry_backoff_ms = l.value("retry_backoff_ms", 250);
            }
        }

        const std::string benchmark =
            doc.contains("evaluation") ? doc["evaluation"].value("benchmark_dataset", "") : "";

        if (doc.contains("render")) {
            const auto& r = doc["render"];
            config.render.window = r.value("window", benchmark == "sepsis" ? 15 : 10);
            config.render.missing_policy = r.value("missing_policy", "omit_clause");
            config.render.max_story_bytes = r.value("max_story_bytes", std::size_t{0});
        } else if (benchmark == "sepsis") {
            config.render.window = 15;
        }

        if (doc.contains("classifier")) {
            const auto& c = doc["classifier"];
            config.classifier.backend = c.value("backend", "reference");
            ClassifierConfig params = config.classifier.backend == "encoder"
                                          ? ClassifierConfig{}
                                          : ClassifierConfig::reference_defaults();
            params.backbone_id = c.value("backbone_id", params.backbone_id);
            params.dropout = c.value("dropout", params.dropout);
            params.learning_rate = c.value("learning_rate", params.learning_rate);
            params.batch_size =
                c.value("batch_size", benchmark == "mip" && config.classifier.backend == "encoder"
                                          ? 8
                                          : params.batch_size);
            params.max_epochs = c.value("max_epochs", params.max_epochs);
            params.patience_epochs = c.value("patience_epochs", params.patience_epochs);
            params.max_input_tokens = c.value("max_input_tokens", params.max_input_tokens);
            params.seed = c.value("seed", params.seed);
            params.literal_single_layer_head =
                c.value("literal_single_layer_head", params.literal_single_layer_head);
            config.classifier.params = params;
        }

        if (doc.contains("evaluation")) {
            const auto& e = doc["evaluation"];
            config.evaluation.n_folds = e.value("n_folds", 5);
            config.evaluation.fold_seed = e.value("fold_seed", std::uint64_t{42});
            if (e.contains("variants"))
                config.evaluation.variants = e["variants"].get<std::vector<std::string>>();
            if (e.contains("exclude_features"))
                config.evaluation.exclude_features =
                    e["exclude_features"].get<std::vector<std::string>>();
            config.evaluation.benchmark_dataset = benchmark;
            if (e.contains("benchmarks_path"))
                config.evaluation.benchmarks_path =
                    resolve_path(e["benchmarks_path"].get<std::string>(), base_dir);
        }

        if (doc.contains("output_dir"))
            config.output_dir = resolve_path(doc["output_dir"].get<std::string>(), base_dir);
        config.jobs = doc.value("jobs", 1);
        config.force = doc.value("force", false);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }

    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return run_config_from_json(buffer.str(), path.parent_path());
}

std::string to_json(const RunConfig& config) {
    nlohmann::json schema_overrides = nlohmann::json::object();
    for (const auto& [name, kind] : config.dataset.schema_overrides)
        schema_overrides[name] = to_string(kind);
    nlohmann::json renames = nlohmann::json::object();
    for (const auto& [from, to] : config.dataset.load.rename_activities) renames[from] = to;

    nlohmann::json doc{
        {"dataset",
         {{"path", config.dataset.path.string()},
          {"format", config.dataset.format},
          {"csv_mapping",
           {{"case_id", config.dataset.csv_mapping.case_id},
            {"activity", config.dataset.csv_mapping.activity},
            {"timestamp", config.dataset.csv_mapping.timestamp}}},
          {"concat_lifecycle", config.dataset.load.concat_lifecycle},
          {"lifecycle_separator", config.dataset.load.lifecycle_separator},
          {"rename_activities", renames},
          {"schema_overrides", schema_overrides}}},
        {"feature_selection",
         {{"threshold", config.feature_selection.threshold},
          {"max_count", config.feature_selection.max_count},
          {"gbdt",
           {{"rounds", config.feature_selection.gbdt.rounds},
            {"max_depth", config.feature_selection.gbdt.max_depth},
            {"learning_rate", config.feature_selection.gbdt.learning_rate},
            {"l2_regularization", config.feature_selection.gbdt.l2_regularization},
            {"seed", config.feature_selection.gbdt.seed}}}}},
        {"template",
         {{"source", config.story_template.source},
          {"manual_path", config.story_template.manual_path.string()},
          {"llm",
           {{"endpoint", config.story_template.llm.endpoint},
            {"model", config.story_template.llm.model},
            {"max_retries", config.story_template.llm.max_retries},
            {"timeout_seconds", config.story_template.llm.timeout_seconds}}}}},
        {"render",
         {{"window", config.render.window},
          {"missing_policy", config.render.missing_policy},
          {"max_story_bytes", config.render.max_story_bytes}}},
        {"classifier",
         {{"backend", config.classifier.backend},
          {"backbone_id", config.classifier.params.backbone_id},
          {"dropout", config.classifier.params.dropout},
          {"learning_rate", config.classifier.params.learning_rate},
          {"batch_size", config.classifier.params.batch_size},
          {"max_epochs", config.classifier.params.max_epochs},
          {"patience_epochs", config.classifier.params.patience_epochs},
          {"max_input_tokens", config.classifier.params.max_input_tokens},
          {"seed", config.classifier.params.seed},
          {"literal_single_layer_head", config.classifier.params.literal_single_layer_head}}},
        {"evaluation",
         {{"n_folds", config.evaluation.n_folds},
          {"fold_seed", config.evaluation.fold_seed},
          {"variants", config.evaluation.variants},
          {"exclude_features", config.evaluation.exclude_features},
          {"benchmark_dataset", config.evaluation.benchmark_dataset},
          {"benchmarks_path", config.evaluation.benchmarks_path.string()}}},
        {"output_dir", config.output_dir.string()},
        {"jobs", config.jobs},
        {"force", config.force},
    };
    return doc.dump(2);
}

EventLog load_dataset(const DatasetConfig& dataset) {
    EventLog log;
    if (dataset.format == "xes") {
        log = load_xes(dataset.path, dataset.load);
    } else if (dataset.format == "csv") {
        log = load_csv(dataset.path, dataset.csv_mapping, dataset.load);
    } else if (dataset.format == "jsonl") {
        log = load_jsonl(dataset.path, dataset.load);
    } else {
        throw ConfigError("unknown dataset format: " + dataset.format);
    }
    if (!dataset.schema_overrides.empty())
        log.schema = infer_attribute_kinds(log, dataset.schema_overrides);
    return log;
}

} // namespace snap
