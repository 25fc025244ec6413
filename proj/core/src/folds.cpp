#include "snap/folds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

FoldPlan make_folds(std::vector<std::string> case_ids, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("cross-validation needs at least two folds");
    if (case_ids.size() < static_cast<std::size_t>(n_folds))
        throw DataError("too few cases for " + std::to_string(n_folds) + "-fold cross-validation");
    {
        std::set<std::string> unique(case_ids.begin(), case_ids.end());
        if (unique.size() != case_ids.size()) throw DataError("duplicate case ids");
    }

    std::mt19937_64 rng(seed);
    std::shuffle(case_ids.begin(), case_ids.end(), rng);

    const std::size_t n = case_ids.size();
    const std::size_t base = n / static_cast<std::size_t>(n_folds);
    const std::size_t remainder = n % static_cast<std::size_t>(n_folds);

    FoldPlan plan;
    plan.seed = seed;
    std::size_t offset = 0;
    for (int i = 0; i < n_folds; ++i) {
        const std::size_t test_size = base + (static_cast<std::size_t>(i) < remainder ? 1 : 0);
        Fold fold;
        fold.test_cases.assign(case_ids.begin() + static_cast<std::ptrdiff_t>(offset),
                               case_ids.begin() + static_cast<std::ptrdiff_t>(offset + test_size));

        std::vector<std::string> rest;
        rest.reserve(n - test_size);
        rest.insert(rest.end(), case_ids.begin(),
                    case_ids.begin() + static_cast<std::ptrdiff_t>(offset));
        rest.insert(rest.end(), case_ids.begin() + static_cast<std::ptrdiff_t>(offset + test_size),
                    case_ids.end());

        const std::size_t n_val =
            static_cast<std::size_t>(std::lround(static_cast<double>(rest.size()) * 0.2));
        const std::size_t n_train = rest.size() - n_val;
        fold.train_cases.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
        fold.val_cases.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
        if (fold.train_cases.empty() || fold.val_cases.empty())
            throw DataError("too few cases to carve a validation split");

        plan.folds.push_back(std::move(fold));
        offset += test_size;
    }
    return plan;
}

FoldPlan make_folds(const EventLog& log, int n_folds, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(log.traces.size());
    for (const auto& trace : log.traces) ids.push_back(trace.case_id);
    return make_folds(std::move(ids), n_folds, seed);
}

std::string to_json(const FoldPlan& plan) {
    nlohmann::json doc;
    doc["seed"] = plan.seed;
    doc["folds"] = nlohmann::json::array();
    for (const auto& fold : plan.folds)
        doc["folds"].push_back({{"train_cases", fold.train_cases},
                                {"val_cases", fold.val_cases},
                                {"test_cases", fold.test_cases}});
    return doc.dump(2);
}

FoldPlan fold_plan_from_json(const std::string& text) {
    FoldPlan plan;
    try {
        auto doc = nlohmann::json::parse(text);
        plan.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& entry : doc.at("folds")) {
            Fold fold;
            fold.train_cases = entry.at("train_cases").get<std::vector<std::string>>();
            fold.val_cases = entry.at("val_cases").get<std::vector<std::string>>();
            fold.test_cases = entry.at("test_cases").get<std::vector<std::string>>();
            plan.folds.push_back(std::move(fold));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed fold plan: ") + e.what());
    }
    return plan;
}

} // namespace snap
