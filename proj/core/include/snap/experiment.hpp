#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "snap/classifier.hpp"
#include "snap/feature_selection.hpp"
#include "snap/folds.hpp"
#include "snap/llm_client.hpp"
#include "snap/metrics.hpp"
#include "snap/run_config.hpp"
#include "snap/story.hpp"
#include "snap/story_template.hpp"

namespace snap {

// story: the full pipeline. Ablations: list_of_values drops the prose
// structure, numbered strips activity semantics, no_utterance removes the
// free-text features.
enum class Variant { story, list_of_values, numbered, no_utterance };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& text);

// Feature selection, template and fold plan computed once per run and shared
// by every variant.
struct ExperimentArtifacts {
    ImportanceReport importance;
    SelectedFeatures selection;
    StoryTemplate story_template;
    FoldPlan folds;
};

// Builds the shared artifacts and writes them under output_dir (features/,
// template.txt, folds.json). An existing template.txt is reused unless
// config.force is set; the LLM client is only consulted for source "llm".
ExperimentArtifacts prepare_experiment(const EventLog& log, const RunConfig& config,
                                       LlmClient* llm = nullptr);

struct VariantResult {
    Variant variant = Variant::story;
    MetricsReport metrics;
    std::filesystem::path run_dir;
};

// Renders stories for the variant, then trains and scores one classifier per
// fold (in parallel when config.jobs > 1), writing config.json, folds.json,
// stories/fold_i.jsonl, models/fold_i/model.snap and metrics.json under
// output_dir/runs/<variant>/.
VariantResult run_variant(const EventLog& log, Variant variant,
                          const ExperimentArtifacts& artifacts, const RunConfig& config);

// prepare_experiment + run_variant for every configured variant
std::vector<VariantResult> run_experiment(const EventLog& log, const RunConfig& config,
                                          LlmClient* llm = nullptr);

} // namespace snap
