#include "snap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

namespace {

constexpr std::size_t kExactLimit = 25;

// Exact conditional null distribution of W+ via subset-sum counting over the
// doubled ranks (doubling keeps midranks integral).
double exact_p_value(const std::vector<double>& ranks, double w_min) {
    std::vector<std::int64_t> doubled;
    doubled.reserve(ranks.size());
    std::int64_t total = 0;
    for (double r : ranks) {
        auto d = static_cast<std::int64_t>(std::llround(2.0 * r));
        doubled.push_back(d);
        total += d;
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    for (std::int64_t d : doubled)
        for (std::int64_t s = total; s >= d; --s)
            count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - d)];

    const auto threshold = static_cast<std::int64_t>(std::llround(2.0 * w_min));
    double below = 0.0;
    for (std::int64_t s = 0; s <= std::min(threshold, total); ++s)
        below += count[static_cast<std::size_t>(s)];
    const double p = 2.0 * below / std::pow(2.0, static_cast<double>(ranks.size()));
    return std::min(p, 1.0);
}

} // namespace

SignificanceReport wilcoxon_signed_rank(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ConfigError("paired test needs score vectors of equal length");
    if (a.empty()) throw DataError("paired test needs at least one pair");

    struct Diff {
        double abs;
        int sign;
    };
    std::vector<Diff> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d == 0.0) continue;
        diffs.push_back({std::fabs(d), d > 0.0 ? 1 : -1});
    }
    if (diffs.empty())
        throw DataError("degenerate comparison: every pair of scores is identical");

    std::sort(diffs.begin(), diffs.end(),
              [](const Diff& x, const Diff& y) { return x.abs < y.abs; });

    const std::size_t n = diffs.size();
    std::vector<double> ranks(n, 0.0);
    // midranks for tied absolute differences; collect tie group sizes for the
    // normal-approximation variance correction
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && diffs[j].abs == diffs[i].abs) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[t] = midrank;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        (diffs[i].sign > 0 ? w_plus : w_minus) += ranks[i];

    SignificanceReport report;
    report.statistic = std::min(w_plus, w_minus);
    report.n_used = n;

    if (n <= kExactLimit) {
        report.exact = true;
        report.p_value = exact_p_value(ranks, report.statistic);
    } else {
        report.exact = false;
        const double nd = static_cast<double>(n);
        const double mean = nd * (nd + 1.0) / 4.0;
        double tie_term = 0.0;
        for (std::size_t t : tie_sizes) {
            const double td = static_cast<double>(t);
            tie_term += td * td * td - td;
        }
        const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
        const double z = (w_plus - mean) / std::sqrt(variance);
        report.p_value = std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)));
    }
    return report;
}

SeedStudy summarize_scores(std::vector<double> scores, double confidence,
                           std::optional<double> reference_value) {
    if (scores.empty()) throw DataError("seed study needs at least one score");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw ConfigError("confidence level must lie in (0, 1)");

    SeedStudy study;
    study.per_seed_scores = std::move(scores);
    study.confidence = confidence;
    const double n = static_cast<double>(study.per_seed_scores.size());
    study.mean = std::accumulate(study.per_seed_scores.begin(), study.per_seed_scores.end(), 0.0) / n;

    if (study.per_seed_scores.size() > 1) {
        double ss = 0.0;
        for (double s : study.per_seed_scores) ss += (s - study.mean) * (s - study.mean);
        const double stderr_mean = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        if (stderr_mean > 0.0) {
            boost::math::students_t dist(n - 1.0);
            const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
            study.ci_lower = study.mean - t * stderr_mean;
            study.ci_upper = study.mean + t * stderr_mean;
        } else {
            study.ci_lower = study.ci_upper = study.mean;
        }
    } else {
        study.ci_lower = study.ci_upper = study.mean;
    }

    if (reference_value) {
        study.reference_value = reference_value;
        study.reference_outside_ci =
            *reference_value < study.ci_lower || *reference_value > study.ci_upper;
    }
    return study;
}

SeedStudy seed_study(const std::function<double(std::uint64_t)>& run_with_seed, int n_seeds,
                     double confidence, std::optional<double> reference_value) {
    if (n_seeds < 1) throw ConfigError("seed study needs at least one seed");
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(n_seeds));
    for (int seed = 0; seed < n_seeds; ++seed)
        scores.push_back(run_with_seed(static_cast<std::uint64_t>(seed)));
    return summarize_scores(std::move(scores), confidence, reference_value);
}

std::string to_json(const SignificanceReport& report) {
    nlohmann::json doc{{"statistic", report.statistic},
                       {"p_value", report.p_value},
                       {"n_used", report.n_used},
                       {"exact", report.exact}};
    return doc.dump(2);
}

std::string to_json(const SeedStudy& study) {
    nlohmann::json doc{{"per_seed_scores", study.per_seed_scores},
                       {"mean", study.mean},
                       {"ci_lower", study.ci_lower},
                       {"ci_upper", study.ci_upper},
                       {"confidence", study.confidence}};
    if (study.reference_value) doc["reference_value"] = *study.reference_value;
    if (study.reference_outside_ci) doc["reference_outside_ci"] = *study.reference_outside_ci;
    return doc.dump(2);
}

} // namespace snap
