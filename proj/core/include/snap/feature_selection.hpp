#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "snap/event_log.hpp"
#include "snap/gbdt.hpp"
#include "snap/tabular.hpp"
#include "snap/time.hpp"

namespace snap {

// Names under which the derived temporal features travel through selection,
// templates and rendering.
inline constexpr const char* kTimeFromCaseStart = "time from case start";
inline constexpr const char* kTimeFromPrevious = "time from previous activity";

struct TemporalFeatures {
    DurationMs time_from_case_start{0};
    DurationMs time_from_previous{0};
};

// Clock time elapsed at the last event of the prefix. A one-event prefix
// reports zero for both.
TemporalFeatures derive_temporal_features(const LabeledPrefix& prefix);

// Normalized split-gain importance per source attribute; scores sum to 1 and
// every encodable attribute appears, including zero-importance ones.
struct ImportanceReport {
    std::map<std::string, double> scores;

    // descending by score, ties broken by name
    std::vector<std::pair<std::string, double>> ranked() const;
};

ImportanceReport rank_features(const TabularDataset& table, const GbdtConfig& config = {});

struct SelectionOptions {
    double threshold = 0.02;   // minimum normalized importance
    std::size_t max_count = 6; // cap on ranked attributes
};

struct SelectedFeatures {
    std::vector<std::string> ranked;      // importance order
    std::vector<std::string> forced_text; // free-text attributes, always kept
    std::vector<std::string> temporal;    // derived temporal feature names

    // ranked + forced_text + temporal, in that order
    std::vector<std::string> all_story_features() const;
    bool contains(const std::string& name) const;
};

// Applies the importance threshold and cap, forces free-text attributes in,
// and appends the temporal features. The activity-history aggregate is
// rankable but never selected.
SelectedFeatures select_features(const ImportanceReport& report,
                                 const std::vector<AttributeDescriptor>& schema,
                                 const SelectionOptions& options = {});

// Removes features from a selection; unknown names are a configuration error.
SelectedFeatures exclude_features(const SelectedFeatures& selection,
                                  const std::vector<std::string>& names);

std::string to_json(const ImportanceReport& report);
std::string to_json(const SelectedFeatures& selection);
SelectedFeatures selected_features_from_json(const std::string& text);
ImportanceReport importance_from_json(const std::string& text);

} // namespace snap
