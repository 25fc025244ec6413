#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "snap/story.hpp"

namespace snap {

inline constexpr const char* kModelCacheEnvVar = "SNAP_MODEL_CACHE";

struct ClassifierConfig {
    std::string backbone_id = "bert-base-cased";
    double dropout = 0.5;        // classification-head dropout
    double learning_rate = 1e-5;
    int batch_size = 4;
    int max_epochs = 15;
    int patience_epochs = 3;     // epochs without validation improvement
    int max_input_tokens = 512;
    std::uint64_t seed = 17;
    // historical head shape: a single dense layer with ReLU directly on the
    // pooled output, instead of dense -> ReLU -> dense
    bool literal_single_layer_head = false;

    void validate() const; // throws ConfigError on out-of-range values

    // defaults tuned for the n-gram reference backend
    static ClassifierConfig reference_defaults();
};

// Stories plus the label vocabulary their class indices refer to. The
// vocabulary is shared across splits so fold metrics stay comparable.
struct StoryDataset {
    std::vector<Story> samples;
    std::vector<std::string> label_vocabulary;

    // derives the vocabulary (sorted unique labels) when none is given, and
    // checks every label is covered
    static StoryDataset make(std::vector<Story> samples,
                             std::vector<std::string> label_vocabulary = {});
    std::size_t label_index(const std::string& label) const;
    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

struct PredictionDistribution {
    std::vector<double> scores; // one per vocabulary entry, sums to 1
    std::size_t argmax() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

class TrainedClassifier {
public:
    virtual ~TrainedClassifier() = default;
    virtual PredictionDistribution predict(const std::string& story_text) const = 0;
    virtual const std::vector<std::string>& label_vocabulary() const = 0;
    virtual const std::vector<EpochStats>& training_curve() const = 0;
    virtual const ClassifierConfig& config() const = 0;
    virtual std::string backend_name() const = 0;
};

// Labels of the k highest-scoring classes, best first.
std::vector<std::string> predict_top_k(const TrainedClassifier& model, const std::string& text,
                                       std::size_t k);

double dataset_accuracy(const TrainedClassifier& model, const StoryDataset& dataset);

// Single-file model container: magic, format version, JSON metadata, raw
// parameter blob. load(save(m)) reproduces m's predictions exactly.
void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path);
std::unique_ptr<TrainedClassifier> load_classifier(const std::filesystem::path& path);

// n-gram logistic-regression backend: deterministic, dependency-free, used
// as the reference implementation in tests and CPU-only runs
std::unique_ptr<TrainedClassifier> fit_reference(const StoryDataset& train,
                                                 const StoryDataset& validation,
                                                 const ClassifierConfig& config);

// transformer-encoder backend fine-tuned from a local checkpoint under
// $SNAP_MODEL_CACHE/<backbone_id>/
std::unique_ptr<TrainedClassifier> fit_encoder(const StoryDataset& train,
                                               const StoryDataset& validation,
                                               const ClassifierConfig& config);

// dispatches on backend ("reference" or "encoder")
std::unique_ptr<TrainedClassifier> fit_classifier(const std::string& backend,
                                                  const StoryDataset& train,
                                                  const StoryDataset& validation,
                                                  const ClassifierConfig& config);

} // namespace snap
