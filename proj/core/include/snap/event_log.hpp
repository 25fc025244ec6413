#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "snap/time.hpp"

namespace snap {

// Synthetic class marking process completion; lives in the label vocabulary
// like any activity.
inline constexpr const char* kEndLabel = "end";

enum class AttributeKind { categorical, numeric, free_text, timestamp, identifier };

const char* to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(const std::string& name);

struct AttributeDescriptor {
    std::string name;
    AttributeKind kind = AttributeKind::categorical;
};

struct Event {
    std::string activity;
    Timestamp timestamp;
    std::map<std::string, std::string> attributes;
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;
};

struct EventLog {
    std::vector<Trace> traces;
    std::vector<AttributeDescriptor> schema;
    std::vector<std::string> activity_vocabulary; // sorted, unique

    std::size_t num_events() const;
    // Recomputes activity_vocabulary from the traces (sorted, deduplicated).
    void rebuild_vocabulary();
    const AttributeDescriptor* find_attribute(const std::string& name) const;
};

// First k events of a trace plus the ground-truth next activity (or "end").
struct LabeledPrefix {
    const Trace* source = nullptr;
    std::size_t k = 0;
    std::string label;

    std::span<const Event> events() const { return {source->events.data(), k}; }
    const Event& last_event() const { return source->events[k - 1]; }
    const std::string& case_id() const { return source->case_id; }
};

struct LogStats {
    std::size_t num_cases = 0;
    std::size_t num_events = 0;
    std::size_t num_activities = 0;
    double avg_case_length = 0.0; // rounded to 2 decimals
};

LogStats log_stats(const EventLog& log);

// One labeled prefix per event: (p_1 -> a_2), ..., (p_{n-1} -> a_n),
// (p_n -> end). Returned prefixes point into the trace; the log must outlive
// them.
std::vector<LabeledPrefix> enumerate_prefixes(const Trace& trace);
std::vector<LabeledPrefix> enumerate_prefixes(const EventLog& log);

// Sorted activity vocabulary plus the end label. Throws DataError if an
// activity is itself named "end" (rename it at load time instead).
std::vector<std::string> label_vocabulary(const EventLog& log);

struct KindInferenceOptions {
    double free_text_unique_ratio = 0.5;
    double free_text_mean_length = 15.0;
};

// Assigns a kind to every attribute occurring in the log. Heuristics, in
// order: all values parse as numbers -> numeric; all parse as timestamps ->
// timestamp; unique ratio and mean length above the thresholds -> free_text;
// otherwise categorical. Overrides win; an override naming an attribute that
// does not occur in the log is a ConfigError.
std::vector<AttributeDescriptor> infer_attribute_kinds(
    const EventLog& log,
    const std::map<std::string, AttributeKind>& overrides = {},
    const KindInferenceOptions& options = {});

} // namespace snap
