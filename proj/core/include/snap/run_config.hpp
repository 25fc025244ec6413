#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "snap/classifier.hpp"
#include "snap/event_log.hpp"
#include "snap/gbdt.hpp"
#include "snap/llm_client.hpp"
#include "snap/log_io.hpp"
#include "snap/story.hpp"

namespace snap {

struct DatasetConfig {
    std::filesystem::path path;
    std::string format; // "xes", "csv" or "jsonl"
    ColumnMapping csv_mapping;
    LoadOptions load;
    std::map<std::string, AttributeKind> schema_overrides;
};

struct FeatureSelectionConfig {
    double threshold = 0.02;
    std::size_t max_count = 6;
    GbdtConfig gbdt;
};

struct TemplateConfig {
    std::string source = "default"; // "llm", "manual" or "default"
    std::filesystem::path manual_path;
    LlmConfig llm;
};

struct RenderConfig {
    int window = 10;
    std::string missing_policy = "omit_clause";
    std::size_t max_story_bytes = 0;
};

struct ClassifierRunConfig {
    std::string backend = "reference"; // or "encoder"
    ClassifierConfig params = ClassifierConfig::reference_defaults();
};

struct EvaluationConfig {
    int n_folds = 5;
    std::uint64_t fold_seed = 42;
    std::vector<std::string> variants = {"story"};
    // features stripped for the no_utterance variant; empty = all free-text
    std::vector<std::string> exclude_features;
    std::string benchmark_dataset; // key into benchmarks.json, may be empty
    std::filesystem::path benchmarks_path;
};

struct RunConfig {
    DatasetConfig dataset;
    FeatureSelectionConfig feature_selection;
    TemplateConfig story_template;
    RenderConfig render;
    ClassifierRunConfig classifier;
    EvaluationConfig evaluation;
    std::filesystem::path output_dir = "snap-out";
    int jobs = 1;
    bool force = false; // regenerate artifacts that already exist

    void validate() const;
};

// Parses and validates a config file. Dataset presets fill fields the file
// leaves unset (MIP: batch size 8; Sepsis: window 15).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const std::string& text,
                               const std::filesystem::path& base_dir = {});
std::string to_json(const RunConfig& config);

// Loads the event log named by the dataset section.
EventLog load_dataset(const DatasetConfig& dataset);

} // namespace snap
