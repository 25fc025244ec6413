#include "snap/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

std::string to_string(Variant variant) {
    switch (variant) {
    case Variant::story: return "story";
    case Variant::list_of_values: return "list_of_values";
    case Variant::numbered: return "numbered";
    case Variant::no_utterance: return "no_utterance";
    }
    return "story";
}

Variant variant_from_string(const std::string& text) {
    if (text == "story") return Variant::story;
    if (text == "list_of_values") return Variant::list_of_values;
    if (text == "numbered") return Variant::numbered;
    if (text == "no_utterance") return Variant::no_utterance;
    throw ConfigError("unknown variant: " + text +
                      " (expected story, list_of_values, numbered or no_utterance)");
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
    if (!out) throw DataError("failed writing " + path.string());
}

std::string json_escape_dump(const Story& story, const char* split) {
    nlohmann::json record{{"story", story.text},
                          {"label", story.label},
                          {"case_id", story.case_id},
                          {"k", story.k},
                          {"split", split}};
    return record.dump();
}

} // namespace

ExperimentArtifacts prepare_experiment(const EventLog& log, const RunConfig& config,
                                       LlmClient* llm) {
    config.validate();
    ExperimentArtifacts artifacts;

    TabularDataset table = frequency_encode(log, log.schema);
    artifacts.importance = rank_features(table, config.feature_selection.gbdt);
    artifacts.selection = select_features(
        artifacts.importance, log.schema,
        {config.feature_selection.threshold, config.feature_selection.max_count});

    write_file(config.output_dir / "features" / "importance.json",
               to_json(artifacts.importance));
    write_file(config.output_dir / "features" / "selected_features.json",
               to_json(artifacts.selection));

    const auto template_path = config.output_dir / "template.txt";
    const TemplateSource source = template_source_from_string(config.story_template.source);
    if (source == TemplateSource::manual) {
        artifacts.story_template = load_template_file(config.story_template.manual_path.string());
    } else if (std::filesystem::exists(template_path) && !config.force) {
        artifacts.story_template = load_template_file(template_path.string());
        artifacts.story_template.source = source;
    } else if (source == TemplateSource::llm) {
        if (llm == nullptr)
            throw ConfigError("template source is llm but no language model client is available");
        artifacts.story_template = generate_template_llm(artifacts.selection, *llm);
    } else {
        artifacts.story_template = default_template(artifacts.selection);
    }

    auto violations = validate_template(artifacts.story_template, artifacts.selection);
    if (!violations.empty()) {
        std::string message = "template does not fit the selected features:";
        for (const auto& violation : violations) message += "\n  - " + violation;
        throw DataError(message);
    }
    save_template_file(artifacts.story_template, template_path.string());

    artifacts.folds = make_folds(log, config.evaluation.n_folds, config.evaluation.fold_seed);
    write_file(config.output_dir / "folds.json", to_json(artifacts.folds));
    return artifacts;
}

namespace {

struct FoldOutcome {
    FoldMetrics metrics;
    std::vector<EpochStats> curve;
};

FoldOutcome run_fold(const std::vector<Story>& stories, const Fold& fold,
                     const std::vector<std::string>& vocab, const RunConfig& config,
                     const std::filesystem::path& run_dir, std::size_t fold_index) {
    std::set<std::string> train_set(fold.train_cases.begin(), fold.train_cases.end());
    std::set<std::string> val_set(fold.val_cases.begin(), fold.val_cases.end());
    std::set<std::string> test_set(fold.test_cases.begin(), fold.test_cases.end());

    std::vector<Story> train, val, test;
    {
        std::ostringstream lines;
        for (const auto& story : stories) {
            const char* split = nullptr;
            if (train_set.count(story.case_id)) {
                train.push_back(story);
                split = "train";
            } else if (val_set.count(story.case_id)) {
                val.push_back(story);
                split = "val";
            } else if (test_set.count(story.case_id)) {
                test.push_back(story);
                split = "test";
            } else {
                throw DataError("case is missing from the fold plan: " + story.case_id);
            }
            lines << json_escape_dump(story, split) << "\n";
        }
        write_file(run_dir / "stories" / ("fold_" + std::to_string(fold_index) + ".jsonl"),
                   lines.str());
    }
    if (train.empty() || val.empty() || test.empty())
        throw DataError("fold " + std::to_string(fold_index) + " has an empty split");

    auto train_ds = StoryDataset::make(std::move(train), vocab);
    auto val_ds = StoryDataset::make(std::move(val), vocab);
    auto model = fit_classifier(config.classifier.backend, train_ds, val_ds,
                                config.classifier.params);

    save_classifier(*model, run_dir / "models" / ("fold_" + std::to_string(fold_index)) /
                                "model.snap");
    FoldOutcome outcome;
    outcome.metrics = evaluate(*model, test);
    outcome.curve = model->training_curve();
    return outcome;
}

} // namespace

VariantResult run_variant(const EventLog& log, Variant variant,
                          const ExperimentArtifacts& artifacts, const RunConfig& config) {
    VariantResult result;
    result.variant = variant;
    result.run_dir = config.output_dir / "runs" / to_string(variant);
    std::filesystem::create_directories(result.run_dir);

    {
        nlohmann::json doc = nlohmann::json::parse(to_json(config));
        doc["variant"] = to_string(variant);
        doc["template"]["body"] = artifacts.story_template.body;
        doc["template"]["resolved_source"] = to_string(artifacts.story_template.source);
        write_file(result.run_dir / "config.json", doc.dump(2));
    }
    write_file(result.run_dir / "folds.json", to_json(artifacts.folds));

    SelectedFeatures selection = artifacts.selection;
    if (variant == Variant::no_utterance) {
        std::vector<std::string> to_drop = config.evaluation.exclude_features;
        if (to_drop.empty()) to_drop = selection.forced_text;
        selection = exclude_features(selection, to_drop);
    }

    ActivityNumbering numbering = number_activities(log);
    RenderOptions options;
    options.window = config.render.window;
    options.missing_policy = missing_policy_from_string(config.render.missing_policy);
    options.max_story_bytes = config.render.max_story_bytes;
    if (variant == Variant::numbered) options.numbering = &numbering;

    std::vector<Story> stories;
    for (const auto& prefix : enumerate_prefixes(log)) {
        if (variant == Variant::list_of_values)
            stories.push_back(render_list_of_values(prefix, selection, options));
        else
            stories.push_back(render_story(prefix, artifacts.story_template, selection, options));
    }

    const auto vocab = label_vocabulary(log);
    const std::size_t n_folds = artifacts.folds.folds.size();
    std::vector<FoldOutcome> outcomes(n_folds);

    if (config.jobs <= 1) {
        for (std::size_t i = 0; i < n_folds; ++i)
            outcomes[i] = run_fold(stories, artifacts.folds.folds[i], vocab, config,
                                   result.run_dir, i);
    } else {
        // batches of `jobs` folds at a time keep peak memory bounded
        for (std::size_t begin = 0; begin < n_folds;
             begin += static_cast<std::size_t>(config.jobs)) {
            const std::size_t end =
                std::min(n_folds, begin + static_cast<std::size_t>(config.jobs));
            std::vector<std::future<FoldOutcome>> futures;
            for (std::size_t i = begin; i < end; ++i)
                futures.push_back(std::async(std::launch::async, [&, i] {
                    return run_fold(stories, artifacts.folds.folds[i], vocab, config,
                                    result.run_dir, i);
                }));
            for (std::size_t i = begin; i < end; ++i) outcomes[i] = futures[i - begin].get();
        }
    }

    for (auto& outcome : outcomes) result.metrics.per_fold.push_back(outcome.metrics);
    result.metrics.finalize();

    {
        nlohmann::json doc = nlohmann::json::parse(to_json(result.metrics));
        nlohmann::json curves = nlohmann::json::array();
        for (const auto& outcome : outcomes) {
            nlohmann::json curve = nlohmann::json::array();
            for (const auto& epoch : outcome.curve)
                curve.push_back(
                    {{"train_loss", epoch.train_loss}, {"val_accuracy", epoch.val_accuracy}});
            curves.push_back(curve);
        }
        doc["training_curves"] = curves;
        doc["variant"] = to_string(variant);
        write_file(result.run_dir / "metrics.json", doc.dump(2));
    }
    return result;
}

std::vector<VariantResult> run_experiment(const EventLog& log, const RunConfig& config,
                                          LlmClient* llm) {
    ExperimentArtifacts artifacts = prepare_experiment(log, config, llm);
    std::vector<VariantResult> results;
    for (const auto& name : config.evaluation.variants)
        results.push_back(run_variant(log, variant_from_string(name), artifacts, config));
    return results;
}

} // namespace snap
