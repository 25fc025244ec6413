#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "snap/classifier.hpp"

namespace snap::internal {

// Multinomial logistic regression over unigram and bigram counts. Fully
// deterministic (zero init, full-batch Adam), so it serves as the reference
// backend wherever a transformer checkpoint is unavailable.
class ReferenceClassifier : public TrainedClassifier {
public:
    PredictionDistribution predict(const std::string& story_text) const override;
    const std::vector<std::string>& label_vocabulary() const override { return labels_; }
    const std::vector<EpochStats>& training_curve() const override { return curve_; }
    const ClassifierConfig& config() const override { return config_; }
    std::string backend_name() const override { return "reference"; }

    static std::unique_ptr<ReferenceClassifier> fit(const StoryDataset& train,
                                                    const StoryDataset& validation,
                                                    const ClassifierConfig& config);

    // container hooks used by save/load
    nlohmann::json metadata() const;
    std::vector<double> blob() const;
    static std::unique_ptr<ReferenceClassifier> from_saved(const nlohmann::json& metadata,
                                                           const std::vector<double>& blob);

    static std::vector<std::string> tokenize(const std::string& text);
    static std::vector<std::string> ngram_features(const std::string& text);

private:
    std::vector<std::string> labels_;
    std::vector<std::string> features_;
    std::unordered_map<std::string, int> feature_index_;
    // row-major [n_labels x (n_features + 1)], bias in the last column
    std::vector<double> weights_;
    ClassifierConfig config_;
    std::vector<EpochStats> curve_;

    std::vector<std::pair<int, double>> featurize(const std::string& text) const;
    std::vector<double> raw_scores(const std::vector<std::pair<int, double>>& features) const;
};

} // namespace snap::internal
