#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "internal/encoder_model.hpp"
#include "snap/classifier.hpp"
#include "snap/tokenizer.hpp"

namespace snap::internal {

// Fine-tuned transformer encoder plus its tokenizer, behind the common
// classifier interface.
class EncoderClassifier : public TrainedClassifier {
public:
    EncoderClassifier(std::unique_ptr<EncoderModel> model, WordPieceTokenizer tokenizer,
                      std::vector<std::string> labels, ClassifierConfig config,
                      std::vector<EpochStats> curve);

    PredictionDistribution predict(const std::string& story_text) const override;
    const std::vector<std::string>& label_vocabulary() const override { return labels_; }
    const std::vector<EpochStats>& training_curve() const override { return curve_; }
    const ClassifierConfig& config() const override { return config_; }
    std::string backend_name() const override { return "encoder"; }

    nlohmann::json metadata() const;
    std::vector<double> blob() const;
    static std::unique_ptr<EncoderClassifier> from_saved(const nlohmann::json& metadata,
                                                         const std::vector<double>& blob);

    EncoderModel& model() { return *model_; }

private:
    std::unique_ptr<EncoderModel> model_;
    WordPieceTokenizer tokenizer_;
    std::vector<std::string> labels_;
    ClassifierConfig config_;
    std::vector<EpochStats> curve_;
};

// fit over an already-constructed model/tokenizer; fit_encoder resolves the
// checkpoint then delegates here (tests inject tiny models directly)
std::unique_ptr<EncoderClassifier> fit_encoder_model(std::unique_ptr<EncoderModel> model,
                                                     WordPieceTokenizer tokenizer,
                                                     const StoryDataset& train,
                                                     const StoryDataset& validation,
                                                     const ClassifierConfig& config);

} // namespace snap::internal
