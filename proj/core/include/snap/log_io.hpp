#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "snap/event_log.hpp"

namespace snap {

struct LoadOptions {
    // XES: append the lifecycle:transition value to the activity label,
    // "Accepted" + "In Progress" -> "Accepted-In Progress".
    bool concat_lifecycle = true;
    std::string lifecycle_separator = "-";
    // Applied to activity labels after loading; per-dataset cleanup of
    // shortened or unclear names lives in run-config, not in code.
    std::map<std::string, std::string> rename_activities;
};

// IEEE 1849 XES reader. One Trace per <trace>; concept:name maps to the
// activity (case id at trace level), time:timestamp to the timestamp, all
// other keys become attributes. Events are stable-sorted by timestamp.
EventLog load_xes(const std::filesystem::path& path,
                  const LoadOptions& options = {});

struct ColumnMapping {
    std::string case_id;
    std::string activity;
    std::string timestamp;
};

// CSV reader (RFC 4180 quoting). Rows are grouped by case id in order of
// first appearance and stable-sorted by timestamp within a case. Unmapped
// columns become attributes; empty cells mean "attribute absent".
EventLog load_csv(const std::filesystem::path& path,
                  const ColumnMapping& mapping, const LoadOptions& options = {});

// Columns: case_id, activity, timestamp, then attribute names sorted.
void write_csv(const EventLog& log, const std::filesystem::path& path);

// Canonical internal dump: one JSON object per trace per line,
// {"case_id": ..., "events": [{"activity", "timestamp", "attributes"}]}.
void dump_jsonl(const EventLog& log, const std::filesystem::path& path);
EventLog load_jsonl(const std::filesystem::path& path,
                    const LoadOptions& options = {});

} // namespace snap
