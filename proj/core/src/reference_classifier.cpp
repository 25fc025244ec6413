#include "internal/reference_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "internal/training_loop.hpp"
#include "snap/errors.hpp"

namespace snap::internal {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kL2 = 1e-4;

void softmax_inplace(std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

} // namespace

std::vector<std::string> ReferenceClassifier::tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (c < 0x80 && std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (c >= 0x80) {
            current += static_cast<char>(c); // keep multi-byte sequences intact
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> ReferenceClassifier::ngram_features(const std::string& text) {
    auto tokens = tokenize(text);
    std::vector<std::string> out = tokens;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        out.push_back(tokens[i] + " " + tokens[i + 1]);
    return out;
}

std::vector<std::pair<int, double>> ReferenceClassifier::featurize(const std::string& text) const {
    std::map<int, double> counts;
    for (const auto& feature : ngram_features(text)) {
        auto it = feature_index_.find(feature);
        if (it != feature_index_.end()) counts[it->second] += 1.0;
    }
    return {counts.begin(), counts.end()};
}

std::vector<double> ReferenceClassifier::raw_scores(
    const std::vector<std::pair<int, double>>& features) const {
    const std::size_t stride = features_.size() + 1;
    std::vector<double> scores(labels_.size(), 0.0);
    for (std::size_t cls = 0; cls < labels_.size(); ++cls) {
        const double* row = weights_.data() + cls * stride;
        double z = row[features_.size()]; // bias
        for (const auto& [index, count] : features) z += row[index] * count;
        scores[cls] = z;
    }
    return scores;
}

PredictionDistribution ReferenceClassifier::predict(const std::string& story_text) const {
    if (story_text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw DataError("cannot classify an empty story text");
    auto scores = raw_scores(featurize(story_text));
    softmax_inplace(scores);
    return PredictionDistribution{std::move(scores)};
}

std::unique_ptr<ReferenceClassifier> ReferenceClassifier::fit(const StoryDataset& train,
                                                              const StoryDataset& validation,
                                                              const ClassifierConfig& config) {
    config.validate();
    if (train.empty()) throw DataError("training split is empty");
    if (validation.empty()) throw DataError("validation split is empty");
    if (train.label_vocabulary != validation.label_vocabulary)
        throw DataError("train and validation label vocabularies differ");
    {
        std::set<std::string> distinct;
        for (const auto& story : train.samples) distinct.insert(story.label);
        if (distinct.size() < 2)
            throw DataError("degenerate target: training stories use fewer than two labels");
    }

    auto model = std::make_unique<ReferenceClassifier>();
    model->labels_ = train.label_vocabulary;
    model->config_ = config;

    std::set<std::string> vocab;
    for (const auto& story : train.samples)
        for (const auto& feature : ngram_features(story.text)) vocab.insert(feature);
    model->features_.assign(vocab.begin(), vocab.end());
    for (std::size_t i = 0; i < model->features_.size(); ++i)
        model->feature_index_[model->features_[i]] = static_cast<int>(i);

    const std::size_t n_labels = model->labels_.size();
    const std::size_t stride = model->features_.size() + 1;
    model->weights_.assign(n_labels * stride, 0.0);

    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<std::size_t> targets;
    rows.reserve(train.size());
    for (const auto& story : train.samples) {
        rows.push_back(model->featurize(story.text));
        targets.push_back(train.label_index(story.label));
    }
    std::vector<std::vector<std::pair<int, double>>> val_rows;
    std::vector<std::size_t> val_targets;
    for (const auto& story : validation.samples) {
        val_rows.push_back(model->featurize(story.text));
        val_targets.push_back(validation.label_index(story.label));
    }

    std::vector<double> adam_m(model->weights_.size(), 0.0);
    std::vector<double> adam_v(model->weights_.size(), 0.0);
    std::vector<double> grad(model->weights_.size(), 0.0);
    std::vector<double> best_weights = model->weights_;
    std::int64_t adam_t = 0;
    const double inv_n = 1.0 / static_cast<double>(rows.size());

    auto train_epoch = [&](int) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto scores = model->raw_scores(rows[i]);
            softmax_inplace(scores);
            loss += -std::log(std::max(scores[targets[i]], 1e-300));
            for (std::size_t cls = 0; cls < n_labels; ++cls) {
                double d = (scores[cls] - (cls == targets[i] ? 1.0 : 0.0)) * inv_n;
                double* g = grad.data() + cls * stride;
                for (const auto& [index, count] : rows[i]) g[index] += d * count;
                g[model->features_.size()] += d;
            }
        }
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += kL2 * model->weights_[j];

        ++adam_t;
        const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t));
        const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t));
        for (std::size_t j = 0; j < grad.size(); ++j) {
            adam_m[j] = kAdamBeta1 * adam_m[j] + (1.0 - kAdamBeta1) * grad[j];
            adam_v[j] = kAdamBeta2 * adam_v[j] + (1.0 - kAdamBeta2) * grad[j] * grad[j];
            model->weights_[j] -= config.learning_rate * (adam_m[j] / bc1) /
                                  (std::sqrt(adam_v[j] / bc2) + kAdamEps);
        }
        return loss * inv_n;
    };
    auto val_accuracy = [&] {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            auto scores = model->raw_scores(val_rows[i]);
            std::size_t arg = static_cast<std::size_t>(
                std::max_element(scores.begin(), scores.end()) - scores.begin());
            if (arg == val_targets[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(val_rows.size());
    };
    auto snapshot = [&] { best_weights = model->weights_; };

    model->curve_ = train_with_early_stopping(config.max_epochs, config.patience_epochs,
                                              train_epoch, val_accuracy, snapshot);
    model->weights_ = std::move(best_weights);
    return model;
}

nlohmann::json ReferenceClassifier::metadata() const {
    return nlohmann::json{
        {"labels", labels_},
        {"features", features_},
        {"config",
         {{"backbone_id", config_.backbone_id},
          {"dropout", config_.dropout},
          {"learning_rate", config_.learning_rate},
          {"batch_size", config_.batch_size},
          {"max_epochs", config_.max_epochs},
          {"patience_epochs", config_.patience_epochs},
          {"max_input_tokens", config_.max_input_tokens},
          {"seed", config_.seed},
          {"literal_single_layer_head", config_.literal_single_layer_head}}},
        {"curve", [&] {
             nlohmann::json arr = nlohmann::json::array();
             for (const auto& e : curve_) arr.push_back({e.train_loss, e.val_accuracy});
             return arr;
         }()},
    };
}

std::vector<double> ReferenceClassifier::blob() const { return weights_; }

std::unique_ptr<ReferenceClassifier> ReferenceClassifier::from_saved(
    const nlohmann::json& metadata, const std::vector<double>& blob) {
    auto model = std::make_unique<ReferenceClassifier>();
    try {
        model->labels_ = metadata.at("labels").get<std::vector<std::string>>();
        model->features_ = metadata.at("features").get<std::vector<std::string>>();
        const auto& cfg = metadata.at("config");
        model->config_.backbone_id = cfg.at("backbone_id").get<std::string>();
        model->config_.dropout = cfg.at("dropout").get<double>();
        model->config_.learning_rate = cfg.at("learning_rate").get<double>();
        model->config_.batch_size = cfg.at("batch_size").get<int>();
        model->config_.max_epochs = cfg.at("max_epochs").get<int>();
        model->config_.patience_epochs = cfg.at("patience_epochs").get<int>();
        model->config_.max_input_tokens = cfg.at("max_input_tokens").get<int>();
        model->config_.seed = cfg.at("seed").get<std::uint64_t>();
        model->config_.literal_single_layer_head =
            cfg.at("literal_single_layer_head").get<bool>();
        for (const auto& entry : metadata.at("curve"))
            model->curve_.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model metadata: ") + e.what());
    }
    for (std::size_t i = 0; i < model->features_.size(); ++i)
        model->feature_index_[model->features_[i]] = static_cast<int>(i);
    const std::size_t expected = model->labels_.size() * (model->features_.size() + 1);
    if (blob.size() != expected) throw DataError("model weight blob has the wrong size");
    model->weights_ = blob;
    return model;
}

} // namespace snap::internal

namespace snap {

std::unique_ptr<TrainedClassifier> fit_reference(const StoryDataset& train,
                                                 const StoryDataset& validation,
                                                 const ClassifierConfig& config) {
    return internal::ReferenceClassifier::fit(train, validation, config);
}

} // namespace snap
