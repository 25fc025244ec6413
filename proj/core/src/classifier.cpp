#include "snap/classifier.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "internal/encoder_classifier.hpp"
#include "internal/reference_model.hpp"
#include "snap/errors.hpp"

namespace snap {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'A', 'P', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kFormatVersion = 1;

} // namespace

void ClassifierConfig::validate() const {
    if (backbone_id.empty()) throw ConfigError("backbone_id must not be empty");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (patience_epochs < 1) throw ConfigError("patience_epochs must be at least 1");
    if (patience_epochs > max_epochs)
        throw ConfigError("patience_epochs cannot exceed max_epochs");
    if (max_input_tokens < 3) throw ConfigError("max_input_tokens must be at least 3");
}

ClassifierConfig ClassifierConfig::reference_defaults() {
    ClassifierConfig config;
    config.backbone_id = "reference";
    config.dropout = 0.0;
    // full-batch Adam: a moderate rate climbs smoothly enough that the
    // early-stopping patience is not consumed by the optimization transient
    config.learning_rate = 0.1;
    config.batch_size = 32;
    config.max_epochs = 40;
    config.patience_epochs = 8;
    return config;
}

StoryDataset StoryDataset::make(std::vector<Story> samples,
                                std::vector<std::string> label_vocabulary) {
    StoryDataset out;
    out.samples = std::move(samples);
    if (label_vocabulary.empty()) {
        std::set<std::string> labels;
        for (const auto& story : out.samples) labels.insert(story.label);
        out.label_vocabulary.assign(labels.begin(), labels.end());
    } else {
        out.label_vocabulary = std::move(label_vocabulary);
        std::set<std::string> known(out.label_vocabulary.begin(), out.label_vocabulary.end());
        if (known.size() != out.label_vocabulary.size())
            throw DataError("label vocabulary has duplicates");
        for (const auto& story : out.samples)
            if (!known.count(story.label))
                throw DataError("story label outside the vocabulary: " + story.label);
    }
    return out;
}

std::size_t StoryDataset::label_index(const std::string& label) const {
    auto it = std::lower_bound(label_vocabulary.begin(), label_vocabulary.end(), label);
    if (it == label_vocabulary.end() || *it != label) {
        // vocabulary may be unsorted when caller-supplied; fall back to a scan
        auto scan = std::find(label_vocabulary.begin(), label_vocabulary.end(), label);
        if (scan == label_vocabulary.end())
            throw DataError("label outside the vocabulary: " + label);
        return static_cast<std::size_t>(scan - label_vocabulary.begin());
    }
    return static_cast<std::size_t>(it - label_vocabulary.begin());
}

std::size_t PredictionDistribution::argmax() const {
    if (scores.empty()) throw DataError("empty prediction distribution");
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                    scores.begin());
}

std::vector<std::string> predict_top_k(const TrainedClassifier& model, const std::string& text,
                                       std::size_t k) {
    auto dist = model.predict(text);
    const auto& vocab = model.label_vocabulary();
    std::vector<std::size_t> order(dist.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist.scores[a] > dist.scores[b];
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(vocab[order[i]]);
    return out;
}

double dataset_accuracy(const TrainedClassifier& model, const StoryDataset& dataset) {
    if (dataset.empty()) throw DataError("cannot score an empty dataset");
    std::size_t correct = 0;
    for (const auto& story : dataset.samples) {
        auto dist = model.predict(story.text);
        if (model.label_vocabulary()[dist.argmax()] == story.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path) {
    nlohmann::json meta;
    std::vector<double> blob;
    if (auto* ref = dynamic_cast<const internal::ReferenceClassifier*>(&model)) {
        meta = ref->metadata();
        blob = ref->blob();
    } else if (auto* enc = dynamic_cast<const internal::EncoderClassifier*>(&model)) {
        meta = enc->metadata();
        blob = enc->blob();
    } else {
        throw ConfigError("unknown classifier backend: " + model.backend_name());
    }
    meta["backend"] = model.backend_name();
    const std::string meta_text = meta.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    std::uint32_t version = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    std::uint64_t meta_len = meta_text.size();
    out.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    std::uint64_t blob_len = blob.size();
    out.write(reinterpret_cast<const char*>(&blob_len), sizeof(blob_len));
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(double)));
    if (!out) throw DataError("failed writing model file: " + path.string());
}

std::unique_ptr<TrainedClassifier> load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a model file: " + path.string());
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kFormatVersion)
        throw DataError("unsupported model format version in " + path.string());
    std::uint64_t meta_len = 0;
    in.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
    std::string meta_text(meta_len, '\0');
    in.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
    std::uint64_t blob_len = 0;
    in.read(reinterpret_cast<char*>(&blob_len), sizeof(blob_len));
    std::vector<double> blob(blob_len);
    in.read(reinterpret_cast<char*>(blob.data()),
            static_cast<std::streamsize>(blob_len * sizeof(double)));
    if (!in) throw DataError("model file is truncated: " + path.string());

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model metadata: ") + e.what());
    }
    const std::string backend = meta.value("backend", "");
    if (backend == "reference") return internal::ReferenceClassifier::from_saved(meta, blob);
    if (backend == "encoder") return internal::EncoderClassifier::from_saved(meta, blob);
    throw DataError("unknown classifier backend in model file: " + backend);
}

std::unique_ptr<TrainedClassifier> fit_classifier(const std::string& backend,
                                                  const StoryDataset& train,
                                                  const StoryDataset& validation,
                                                  const ClassifierConfig& config) {
    if (backend == "reference") return fit_reference(train, validation, config);
    if (backend == "encoder") return fit_encoder(train, validation, config);
    throw ConfigError("unknown classifier backend: " + backend +
                      " (expected reference or encoder)");
}

} // namespace snap
