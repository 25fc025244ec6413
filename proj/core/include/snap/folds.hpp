#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snap/event_log.hpp"

namespace snap {

// Case-level split: every prefix of a case lands in exactly one of the three
// sets, so no trace leaks across train/validation/test.
struct Fold {
    std::vector<std::string> train_cases;
    std::vector<std::string> val_cases;
    std::vector<std::string> test_cases;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
};

// Shuffles the case ids once, slices the i-th fifth (±1) as test, and splits
// the remainder 80/20 into train/validation. Proportions approach 64/16/20.
FoldPlan make_folds(std::vector<std::string> case_ids, int n_folds, std::uint64_t seed);
FoldPlan make_folds(const EventLog& log, int n_folds = 5, std::uint64_t seed = 0);

std::string to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const std::string& text);

} // namespace snap
