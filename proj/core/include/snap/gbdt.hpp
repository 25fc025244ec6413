#pragma once

#include <cstdint>
#include <vector>

#include "snap/tabular.hpp"

namespace snap {

struct GbdtConfig {
    int rounds = 100;
    int max_depth = 6;
    double learning_rate = 0.3;
    double l2_regularization = 1.0;
    double min_child_hessian = 1e-3;
    std::uint64_t seed = 0;
};

// Gradient-boosted decision trees with a softmax multiclass objective and
// exact greedy splits. Missing values learn a default direction per split.
// Feature scan order is re-shuffled per tree so that exactly redundant
// columns share the split gain instead of one column absorbing all of it.
class GbdtModel {
public:
    static GbdtModel train(const TabularDataset& table, const GbdtConfig& config = {});

    // softmax probabilities over the table's classes for one feature row
    std::vector<double> predict_probabilities(const double* row) const;
    std::vector<double> predict_probabilities(const std::vector<double>& row) const;

    // total split gain accumulated per column, same order as the table
    const std::vector<double>& column_gain() const { return column_gain_; }
    int n_classes() const { return n_classes_; }
    std::size_t n_columns() const { return n_columns_; }

private:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        bool missing_left = true;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    struct Tree {
        std::vector<Node> nodes;
        double predict(const double* row) const;
    };

    int n_classes_ = 0;
    std::size_t n_columns_ = 0;
    std::vector<std::vector<Tree>> rounds_; // rounds_[r][class]
    std::vector<double> column_gain_;
};

} // namespace snap
