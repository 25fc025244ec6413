#include "snap/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "snap/errors.hpp"

namespace snap {

namespace {

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    bool missing_left = true;
    double gain = 0.0;
};

double leaf_weight(double g, double h, double l2) { return -g / (h + l2); }

double split_score(double g, double h, double l2) { return g * g / (h + l2); }

} // namespace

double GbdtModel::Tree::predict(const double* row) const {
    int at = 0;
    while (nodes[at].feature >= 0) {
        const Node& node = nodes[at];
        double v = row[node.feature];
        if (std::isnan(v)) at = node.missing_left ? node.left : node.right;
        else at = v < node.threshold ? node.left : node.right;
    }
    return nodes[at].value;
}

GbdtModel GbdtModel::train(const TabularDataset& table, const GbdtConfig& config) {
    if (table.n_rows == 0) throw DataError("cannot train boosted trees on an empty table");
    if (config.rounds <= 0 || config.max_depth <= 0)
        throw ConfigError("boosting rounds and tree depth must be positive");
    if (config.learning_rate <= 0.0)
        throw ConfigError("boosting learning rate must be positive");
    if (table.n_distinct_targets() < 2)
        throw DataError("degenerate target: the table holds fewer than two classes");

    const std::size_t n = table.n_rows;
    const std::size_t width = table.n_columns();
    const int k = static_cast<int>(table.class_names.size());

    GbdtModel model;
    model.n_classes_ = k;
    model.n_columns_ = width;
    model.column_gain_.assign(width, 0.0);

    // pre-sorted row indices per feature among rows with a present value
    std::vector<std::vector<std::uint32_t>> sorted(width);
    for (std::size_t f = 0; f < width; ++f) {
        auto& order = sorted[f];
        order.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i)
            if (!std::isnan(table.at(i, f))) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            double va = table.at(a, f), vb = table.at(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
    }

    std::vector<double> margins(n * k, 0.0);
    std::vector<double> probs(n * k, 0.0);
    std::vector<double> grad(n), hess(n);
    std::vector<std::uint8_t> in_node(n);
    std::mt19937_64 rng(config.seed);

    std::vector<std::size_t> scan_order(width);
    std::iota(scan_order.begin(), scan_order.end(), std::size_t{0});

    for (int round = 0; round < config.rounds; ++round) {
        // class probabilities from the margin snapshot shared by this round
        for (std::size_t i = 0; i < n; ++i) {
            const double* m = margins.data() + i * k;
            double mx = *std::max_element(m, m + k);
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                probs[i * k + c] = std::exp(m[c] - mx);
                sum += probs[i * k + c];
            }
            for (int c = 0; c < k; ++c) probs[i * k + c] /= sum;
        }

        for (int cls = 0; cls < k; ++cls) {
            for (std::size_t i = 0; i < n; ++i) {
                double p = probs[i * k + cls];
                double y = table.targets[i] == cls ? 1.0 : 0.0;
                grad[i] = p - y;
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }

            Tree tree;
            std::shuffle(scan_order.begin(), scan_order.end(), rng);

            struct Frame {
                int node;
                int depth;
                std::vector<std::uint32_t> rows;
            };
            std::vector<Frame> stack;
            {
                std::vector<std::uint32_t> all(n);
                std::iota(all.begin(), all.end(), 0u);
                tree.nodes.emplace_back();
                stack.push_back({0, 0, std::move(all)});
            }

            while (!stack.empty()) {
                Frame frame = std::move(stack.back());
                stack.pop_back();
                double g_total = 0.0, h_total = 0.0;
                for (auto i : frame.rows) {
                    g_total += grad[i];
                    h_total += hess[i];
                }

                SplitResult best;
                if (frame.depth < config.max_depth && frame.rows.size() >= 2) {
                    std::fill(in_node.begin(), in_node.end(), 0);
                    for (auto i : frame.rows) in_node[i] = 1;
                    const double parent = split_score(g_total, h_total, config.l2_regularization);

                    for (std::size_t f : scan_order) {
                        double g_present = 0.0, h_present = 0.0;
                        for (auto i : sorted[f]) {
                            if (!in_node[i]) continue;
                            g_present += grad[i];
                            h_present += hess[i];
                        }
                        const double g_missing = g_total - g_present;
                        const double h_missing = h_total - h_present;

                        double g_left = 0.0, h_left = 0.0;
                        double prev_value = 0.0;
                        bool have_prev = false;
                        for (auto i : sorted[f]) {
                            if (!in_node[i]) continue;
                            double v = table.at(i, f);
                            if (have_prev && v != prev_value) {
                                const double threshold = prev_value + (v - prev_value) / 2.0;
                                // try the missing rows on each side
                                for (int side = 0; side < 2; ++side) {
                                    const bool missing_left = side == 0;
                                    double gl = g_left + (missing_left ? g_missing : 0.0);
                                    double hl = h_left + (missing_left ? h_missing : 0.0);
                                    double gr = g_total - gl;
                                    double hr = h_total - hl;
                                    if (hl < config.min_child_hessian || hr < config.min_child_hessian)
                                        continue;
                                    double gain = 0.5 * (split_score(gl, hl, config.l2_regularization) +
                                                         split_score(gr, hr, config.l2_regularization) - parent);
                                    if (gain > best.gain + 1e-12) {
                                        best.found = true;
                                        best.feature = static_cast<int>(f);
                                        best.threshold = threshold;
                                        best.missing_left = missing_left;
                                        best.gain = gain;
                                    }
                                }
                            }
                            g_left += grad[i];
                            h_left += hess[i];
                            prev_value = v;
                            have_prev = true;
                        }
                    }
                }

                if (!best.found || best.gain <= 1e-12) {
                    tree.nodes[frame.node].feature = -1;
                    tree.nodes[frame.node].value =
                        config.learning_rate * leaf_weight(g_total, h_total, config.l2_regularization);
                    continue;
                }

                model.column_gain_[best.feature] += best.gain;
                std::vector<std::uint32_t> left_rows, right_rows;
                for (auto i : frame.rows) {
                    double v = table.at(i, best.feature);
                    bool goes_left = std::isnan(v) ? best.missing_left : v < best.threshold;
                    (goes_left ? left_rows : right_rows).push_back(i);
                }
                int left_id = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                int right_id = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes[frame.node].feature = best.feature;
                tree.nodes[frame.node].threshold = best.threshold;
                tree.nodes[frame.node].missing_left = best.missing_left;
                tree.nodes[frame.node].left = left_id;
                tree.nodes[frame.node].right = right_id;
                stack.push_back({right_id, frame.depth + 1, std::move(right_rows)});
                stack.push_back({left_id, frame.depth + 1, std::move(left_rows)});
            }

            for (std::size_t i = 0; i < n; ++i)
                margins[i * k + cls] += tree.predict(&table.values[i * width]);
            if (static_cast<int>(model.rounds_.size()) <= round) model.rounds_.emplace_back();
            model.rounds_[round].push_back(std::move(tree));
        }
    }
    return model;
}

std::vector<double> GbdtModel::predict_probabilities(const double* row) const {
    std::vector<double> margin(n_classes_, 0.0);
    for (const auto& round : rounds_)
        for (int c = 0; c < n_classes_; ++c) margin[c] += round[c].predict(row);
    double mx = *std::max_element(margin.begin(), margin.end());
    double sum = 0.0;
    for (double& m : margin) {
        m = std::exp(m - mx);
        sum += m;
    }
    for (double& m : margin) m /= sum;
    return margin;
}

std::vector<double> GbdtModel::predict_probabilities(const std::vector<double>& row) const {
    if (row.size() != n_columns_) throw ConfigError("feature row width does not match the model");
    return predict_probabilities(row.data());
}

} // namespace snap
