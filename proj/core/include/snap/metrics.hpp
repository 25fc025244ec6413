#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snap/classifier.hpp"

namespace snap {

struct FoldMetrics {
    double accuracy = 0.0;
    double weighted_f1 = 0.0; // per-class F1 weighted by true support
    std::size_t n_test_samples = 0;
};

struct MetricsReport {
    std::vector<FoldMetrics> per_fold;
    double mean_accuracy = 0.0;
    double mean_weighted_f1 = 0.0;

    void finalize(); // recomputes the means
};

// Confusion-matrix metrics from index vectors; classes with zero support
// contribute nothing to the weighted F1.
FoldMetrics metrics_from_predictions(const std::vector<std::size_t>& truth,
                                     const std::vector<std::size_t>& predicted,
                                     std::size_t n_classes);

// Runs the model over the test stories. Labels outside the model vocabulary
// land in an extra never-predicted bucket and count as errors.
FoldMetrics evaluate(const TrainedClassifier& model, const std::vector<Story>& test_stories);

std::string to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const std::string& text);

} // namespace snap
