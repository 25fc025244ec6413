#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snap/event_log.hpp"

namespace snap {

// Synthetic source name aggregating the per-activity prefix-count columns.
// Rankable, but never selected into story templates.
inline constexpr const char* kActivityHistoryFeature = "activity history";

struct TabularColumn {
    std::string name;
    std::string source_attribute;
};

// One row per labeled prefix; NaN marks a missing value.
struct TabularDataset {
    std::vector<TabularColumn> columns;
    std::vector<double> values; // row-major, n_rows * columns.size()
    std::size_t n_rows = 0;
    std::vector<int> targets;            // indices into class_names
    std::vector<std::string> class_names; // sorted label vocabulary incl. end

    double at(std::size_t row, std::size_t col) const {
        return values[row * columns.size() + col];
    }
    std::size_t n_columns() const { return columns.size(); }
    std::size_t n_distinct_targets() const;
};

// Frequency-based tabular encoding. Per prefix row:
//  - each categorical attribute of the last event becomes the relative
//    frequency of its value among all events carrying that attribute,
//  - each numeric attribute of the last event passes through,
//  - the activity history becomes one occurrence count per activity type,
//  - the target is the next-activity label.
// free_text, timestamp and identifier attributes are not encodable and are
// left out of the table.
TabularDataset frequency_encode(const EventLog& log,
                                const std::vector<AttributeDescriptor>& schema);

} // namespace snap
