#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace snap {

// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped,
// tied absolute differences receive midranks. Up to 25 effective pairs the
// p-value is exact (conditional on the observed ranks); larger samples use
// the tie-corrected normal approximation without continuity correction.
struct SignificanceReport {
    double statistic = 0.0; // min(W+, W-)
    double p_value = 1.0;
    std::size_t n_used = 0; // pairs left after dropping zero differences
    bool exact = false;
};

SignificanceReport wilcoxon_signed_rank(const std::vector<double>& a,
                                        const std::vector<double>& b);

// Repeats an experiment across seeds and reports the mean with a two-sided
// Student-t confidence interval. An optional reference value is flagged when
// it falls outside the interval.
struct SeedStudy {
    std::vector<double> per_seed_scores;
    double mean = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double confidence = 0.95;
    std::optional<double> reference_value;
    std::optional<bool> reference_outside_ci;
};

SeedStudy seed_study(const std::function<double(std::uint64_t)>& run_with_seed, int n_seeds = 25,
                     double confidence = 0.95,
                     std::optional<double> reference_value = std::nullopt);

// Confidence interval over already-collected scores.
SeedStudy summarize_scores(std::vector<double> scores, double confidence = 0.95,
                           std::optional<double> reference_value = std::nullopt);

std::string to_json(const SignificanceReport& report);
std::string to_json(const SeedStudy& study);

} // namespace snap
