#include "snap/metrics.hpp"

#include <algorithm>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

void MetricsReport::finalize() {
    mean_accuracy = 0.0;
    mean_weighted_f1 = 0.0;
    if (per_fold.empty()) return;
    for (const auto& fold : per_fold) {
        mean_accuracy += fold.accuracy;
        mean_weighted_f1 += fold.weighted_f1;
    }
    mean_accuracy /= static_cast<double>(per_fold.size());
    mean_weighted_f1 /= static_cast<double>(per_fold.size());
}

FoldMetrics metrics_from_predictions(const std::vector<std::size_t>& truth,
                                     const std::vector<std::size_t>& predicted,
                                     std::size_t n_classes) {
    if (truth.size() != predicted.size())
        throw ConfigError("truth and prediction vectors differ in length");
    if (truth.empty()) throw DataError("cannot compute metrics over zero samples");

    const std::size_t n = truth.size();
    std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0), fn(n_classes, 0.0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth[i] >= n_classes || predicted[i] >= n_classes)
            throw ConfigError("class index out of range");
        if (truth[i] == predicted[i]) {
            ++correct;
            tp[truth[i]] += 1.0;
        } else {
            fn[truth[i]] += 1.0;
            fp[predicted[i]] += 1.0;
        }
    }

    double weighted_f1 = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const double support = tp[c] + fn[c];
        if (support == 0.0) continue;
        const double precision_den = tp[c] + fp[c];
        const double precision = precision_den > 0.0 ? tp[c] / precision_den : 0.0;
        const double recall = tp[c] / support;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        weighted_f1 += f1 * support / static_cast<double>(n);
    }

    FoldMetrics out;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    out.weighted_f1 = weighted_f1;
    out.n_test_samples = n;
    return out;
}

FoldMetrics evaluate(const TrainedClassifier& model, const std::vector<Story>& test_stories) {
    if (test_stories.empty()) throw DataError("cannot evaluate on an empty test split");
    const auto& vocab = model.label_vocabulary();
    auto index_of = [&](const std::string& label) {
        auto it = std::find(vocab.begin(), vocab.end(), label);
        return it == vocab.end() ? vocab.size() // out-of-vocabulary bucket
                                 : static_cast<std::size_t>(it - vocab.begin());
    };
    std::vector<std::size_t> truth, predicted;
    truth.reserve(test_stories.size());
    predicted.reserve(test_stories.size());
    for (const auto& story : test_stories) {
        truth.push_back(index_of(story.label));
        predicted.push_back(model.predict(story.text).argmax());
    }
    return metrics_from_predictions(truth, predicted, vocab.size() + 1);
}

std::string to_json(const MetricsReport& report) {
    nlohmann::json doc;
    doc["per_fold"] = nlohmann::json::array();
    for (const auto& fold : report.per_fold)
        doc["per_fold"].push_back({{"accuracy", fold.accuracy},
                                   {"weighted_f1", fold.weighted_f1},
                                   {"n_test_samples", fold.n_test_samples}});
    doc["mean_accuracy"] = report.mean_accuracy;
    doc["mean_weighted_f1"] = report.mean_weighted_f1;
    return doc.dump(2);
}

MetricsReport metrics_report_from_json(const std::string& text) {
    MetricsReport report;
    try {
        auto doc = nlohmann::json::parse(text);
        for (const auto& entry : doc.at("per_fold")) {
            FoldMetrics fold;
            fold.accuracy = entry.at("accuracy").get<double>();
            fold.weighted_f1 = entry.at("weighted_f1").get<double>();
            fold.n_test_samples = entry.at("n_test_samples").get<std::size_t>();
            report.per_fold.push_back(fold);
        }
        report.mean_accuracy = doc.at("mean_accuracy").get<double>();
        report.mean_weighted_f1 = doc.at("mean_weighted_f1").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed metrics report: ") + e.what());
    }
    return report;
}

} // namespace snap
