#include "internal/encoder_classifier.hpp"

#include <algorithm>
#include <new>
#include <numeric>
#include <set>

#include "internal/training_loop.hpp"
#include "snap/errors.hpp"

namespace snap::internal {

EncoderClassifier::EncoderClassifier(std::unique_ptr<EncoderModel> model,
                                     WordPieceTokenizer tokenizer,
                                     std::vector<std::string> labels, ClassifierConfig config,
                                     std::vector<EpochStats> curve)
    : model_(std::move(model)), tokenizer_(std::move(tokenizer)), labels_(std::move(labels)),
      config_(std::move(config)), curve_(std::move(curve)) {}

PredictionDistribution EncoderClassifier::predict(const std::string& story_text) const {
    if (story_text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw DataError("cannot classify an empty story text");
    auto ids = tokenizer_.encode(story_text, config_.max_input_tokens);
    Eigen::VectorXd scores = model_->scores(ids);
    Eigen::VectorXd probs = (scores.array() - scores.maxCoeff()).exp();
    probs /= probs.sum();
    return PredictionDistribution{{probs.data(), probs.data() + probs.size()}};
}

std::unique_ptr<EncoderClassifier> fit_encoder_model(std::unique_ptr<EncoderModel> model,
                                                     WordPieceTokenizer tokenizer,
                                                     const StoryDataset& train,
                                                     const StoryDataset& validation,
                                                     const ClassifierConfig& config) {
    config.validate();
    if (train.empty()) throw DataError("training split is empty");
    if (validation.empty()) throw DataError("validation split is empty");
    if (train.label_vocabulary != validation.label_vocabulary)
        throw DataError("train and validation label vocabularies differ");
    if (model->architecture().num_classes != static_cast<int>(train.label_vocabulary.size()))
        throw ConfigError("classification head width does not match the label vocabulary");
    {
        std::set<std::string> distinct;
        for (const auto& story : train.samples) distinct.insert(story.label);
        if (distinct.size() < 2)
            throw DataError("degenerate target: training stories use fewer than two labels");
    }

    const int max_tokens =
        std::min(config.max_input_tokens, model->architecture().max_position_embeddings);

    std::vector<std::vector<int>> rows, val_rows;
    std::vector<int> targets, val_targets;
    for (const auto& story : train.samples) {
        rows.push_back(tokenizer.encode(story.text, max_tokens));
        targets.push_back(static_cast<int>(train.label_index(story.label)));
    }
    for (const auto& story : validation.samples) {
        val_rows.push_back(tokenizer.encode(story.text, max_tokens));
        val_targets.push_back(static_cast<int>(validation.label_index(story.label)));
    }

    std::mt19937_64 order_rng(config.seed);
    std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Eigen::MatrixXd> best = model->snapshot();

    auto train_epoch = [&](int) {
        std::shuffle(order.begin(), order.end(), order_rng);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            const double scale = 1.0 / static_cast<double>(end - begin);
            model->zero_grad();
            for (std::size_t i = begin; i < end; ++i)
                loss_sum += model->train_sample(rows[order[i]], targets[order[i]], scale,
                                                config.dropout, dropout_rng);
            model->adam_step(config.learning_rate);
        }
        return loss_sum / static_cast<double>(rows.size());
    };
    auto val_accuracy = [&] {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            Eigen::VectorXd scores = model->scores(val_rows[i]);
            Eigen::Index arg = 0;
            scores.maxCoeff(&arg);
            if (static_cast<int>(arg) == val_targets[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(val_rows.size());
    };
    auto snapshot = [&] { best = model->snapshot(); };

    std::vector<EpochStats> curve;
    try {
        curve = train_with_early_stopping(config.max_epochs, config.patience_epochs, train_epoch,
                                          val_accuracy, snapshot);
    } catch (const std::bad_alloc&) {
        throw ConfigError("ran out of memory while fine-tuning; reduce batch_size or "
                          "max_input_tokens");
    }
    model->restore(best);
    return std::make_unique<EncoderClassifier>(std::move(model), std::move(tokenizer),
                                               train.label_vocabulary, config, std::move(curve));
}

nlohmann::json EncoderClassifier::metadata() const {
    const auto& arch = model_->architecture();
    nlohmann::json shapes = nlohmann::json::array();
    auto& registry = const_cast<EncoderModel&>(*model_).parameters();
    for (const Param* param : registry)
        shapes.push_back({{"name", param->name},
                          {"rows", param->value.rows()},
                          {"cols", param->value.cols()}});
    return nlohmann::json{
        {"labels", labels_},
        {"tokenizer_vocab", tokenizer_.vocabulary()},
        {"lower_case", tokenizer_.lower_case()},
        {"architecture",
         {{"vocab_size", arch.vocab_size},
          {"hidden_size", arch.hidden_size},
          {"num_layers", arch.num_layers},
          {"num_heads", arch.num_heads},
          {"intermediate_size", arch.intermediate_size},
          {"max_position_embeddings", arch.max_position_embeddings},
          {"type_vocab_size", arch.type_vocab_size},
          {"layer_norm_eps", arch.layer_norm_eps},
          {"num_classes", arch.num_classes},
          {"literal_single_layer_head", arch.literal_single_layer_head}}},
        {"parameters", shapes},
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

std::vector<double> EncoderClassifier::blob() const {
    std::vector<double> out;
    auto& registry = const_cast<EncoderModel&>(*model_).parameters();
    for (const Param* param : registry)
        out.insert(out.end(), param->value.data(), param->value.data() + param->value.size());
    return out;
}

std::unique_ptr<EncoderClassifier> EncoderClassifier::from_saved(const nlohmann::json& metadata,
                                                                 const std::vector<double>& blob) {
    EncoderArchitecture arch;
    std::vector<std::string> labels, vocab;
    bool lower_case = false;
    ClassifierConfig config;
    std::vector<EpochStats> curve;
    try {
        labels = metadata.at("labels").get<std::vector<std::string>>();
        vocab = metadata.at("tokenizer_vocab").get<std::vector<std::string>>();
        lower_case = metadata.at("lower_case").get<bool>();
        const auto& a = metadata.at("architecture");
        arch.vocab_size = a.at("vocab_size").get<int>();
        arch.hidden_size = a.at("hidden_size").get<int>();
        arch.num_layers = a.at("num_layers").get<int>();
        arch.num_heads = a.at("num_heads").get<int>();
        arch.intermediate_size = a.at("intermediate_size").get<int>();
        arch.max_position_embeddings = a.at("max_position_embeddings").get<int>();
        arch.type_vocab_size = a.at("type_vocab_size").get<int>();
        arch.layer_norm_eps = a.at("layer_norm_eps").get<double>();
        arch.num_classes = a.at("num_classes").get<int>();
        arch.literal_single_layer_head = a.at("literal_single_layer_head").get<bool>();
        const auto& cfg = metadata.at("config");
        config.backbone_id = cfg.at("backbone_id").get<std::string>();
        config.dropout = cfg.at("dropout").get<double>();
        config.learning_rate = cfg.at("learning_rate").get<double>();
        config.batch_size = cfg.at("batch_size").get<int>();
        config.max_epochs = cfg.at("max_epochs").get<int>();
        config.patience_epochs = cfg.at("patience_epochs").get<int>();
        config.max_input_tokens = cfg.at("max_input_tokens").get<int>();
        config.seed = cfg.at("seed").get<std::uint64_t>();
        config.literal_single_layer_head = cfg.at("literal_single_layer_head").get<bool>();
        for (const auto& entry : metadata.at("curve"))
            curve.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model metadata: ") + e.what());
    }

    auto model = std::make_unique<EncoderModel>(arch, /*seed=*/0);
    std::size_t offset = 0;
    for (Param* param : model->parameters()) {
        const std::size_t n = static_cast<std::size_t>(param->value.size());
        if (offset + n > blob.size()) throw DataError("model weight blob has the wrong size");
        std::copy(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                  blob.begin() + static_cast<std::ptrdiff_t>(offset + n), param->value.data());
        offset += n;
    }
    if (offset != blob.size()) throw DataError("model weight blob has the wrong size");

    auto tokenizer = WordPieceTokenizer::from_vocab(std::move(vocab), lower_case);
    return std::make_unique<EncoderClassifier>(std::move(model), std::move(tokenizer),
                                               std::move(labels), std::move(config),
                                               std::move(curve));
}

} // namespace snap::internal

namespace snap {

std::unique_ptr<TrainedClassifier> fit_encoder(const StoryDataset& train,
                                               const StoryDataset& validation,
                                               const ClassifierConfig& config) {
    config.validate();
    auto files = internal::resolve_checkpoint(config.backbone_id);
    auto arch = files.architecture;
    arch.num_classes = static_cast<int>(train.label_vocabulary.size());
    arch.literal_single_layer_head = config.literal_single_layer_head;

    auto tokenizer = WordPieceTokenizer::from_vocab_file(files.vocab_txt, files.lower_case);
    if (tokenizer.vocab_size() != arch.vocab_size)
        throw DataError("vocabulary mismatch: vocab.txt has " +
                        std::to_string(tokenizer.vocab_size()) + " entries but config.json says " +
                        std::to_string(arch.vocab_size));

    auto model = std::make_unique<internal::EncoderModel>(arch, config.seed);
    try {
        model->load_backbone(SafetensorsFile::read(files.weights));
    } catch (const std::bad_alloc&) {
        throw ConfigError("ran out of memory loading the backbone checkpoint");
    }
    return internal::fit_encoder_model(std::move(model), std::move(tokenizer), train, validation,
                                       config);
}

} // namespace snap
