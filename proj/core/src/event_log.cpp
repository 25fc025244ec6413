#include "snap/event_log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "snap/errors.hpp"

namespace snap {

const char* to_string(AttributeKind kind) {
    switch (kind) {
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::numeric: return "numeric";
    case AttributeKind::free_text: return "free_text";
    case AttributeKind::timestamp: return "timestamp";
    case AttributeKind::identifier: return "identifier";
    }
    return "categorical";
}

AttributeKind attribute_kind_from_string(const std::string& name) {
    if (name == "categorical") return AttributeKind::categorical;
    if (name == "numeric") return AttributeKind::numeric;
    if (name == "free_text") return AttributeKind::free_text;
    if (name == "timestamp") return AttributeKind::timestamp;
    if (name == "identifier") return AttributeKind::identifier;
    throw ConfigError("unknown attribute kind: '" + name + "'");
}

std::size_t EventLog::num_events() const {
    std::size_t n = 0;
    for (const auto& trace : traces) n += trace.events.size();
    return n;
}

void EventLog::rebuild_vocabulary() {
    std::set<std::string> vocab;
    for (const auto& trace : traces)
        for (const auto& event : trace.events) vocab.insert(event.activity);
    activity_vocabulary.assign(vocab.begin(), vocab.end());
}

const AttributeDescriptor* EventLog::find_attribute(const std::string& name) const {
    for (const auto& descriptor : schema)
        if (descriptor.name == name) return &descriptor;
    return nullptr;
}

LogStats log_stats(const EventLog& log) {
    LogStats stats;
    stats.num_cases = log.traces.size();
    stats.num_events = log.num_events();
    stats.num_activities = log.activity_vocabulary.size();
    if (stats.num_cases > 0) {
        double avg = static_cast<double>(stats.num_events) / stats.num_cases;
        stats.avg_case_length = std::round(avg * 100.0) / 100.0;
    }
    return stats;
}

std::vector<LabeledPrefix> enumerate_prefixes(const Trace& trace) {
    std::vector<LabeledPrefix> prefixes;
    prefixes.reserve(trace.events.size());
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
        LabeledPrefix prefix;
        prefix.source = &trace;
        prefix.k = k;
        prefix.label =
            k < trace.events.size() ? trace.events[k].activity : kEndLabel;
        prefixes.push_back(std::move(prefix));
    }
    return prefixes;
}

std::vector<LabeledPrefix> enumerate_prefixes(const EventLog& log) {
    std::vector<LabeledPrefix> prefixes;
    prefixes.reserve(log.num_events());
    for (const auto& trace : log.traces) {
        auto per_trace = enumerate_prefixes(trace);
        prefixes.insert(prefixes.end(), per_trace.begin(), per_trace.end());
    }
    return prefixes;
}

std::vector<std::string> label_vocabulary(const EventLog& log) {
    std::vector<std::string> vocab = log.activity_vocabulary;
    if (std::binary_search(vocab.begin(), vocab.end(), std::string(kEndLabel))) {
        throw DataError(
            "activity vocabulary already contains the end-of-trace label '" +
            std::string(kEndLabel) + "'; rename it via the activity rename map");
    }
    vocab.push_back(kEndLabel);
    std::sort(vocab.begin(), vocab.end());
    return vocab;
}

namespace {

bool parses_as_number(const std::string& value) {
    if (value.empty()) return false;
    const char* begin = value.c_str();
    char* end = nullptr;
    std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return true;
}

struct AttributeProfile {
    std::size_t count = 0;
    std::size_t total_length = 0;
    std::size_t numeric = 0;
    std::size_t timestampish = 0;
    std::set<std::string> distinct;
};

} // namespace

std::vector<AttributeDescriptor> infer_attribute_kinds(
    const EventLog& log, const std::map<std::string, AttributeKind>& overrides,
    const KindInferenceOptions& options) {
    std::map<std::string, AttributeProfile> profiles;
    for (const auto& trace : log.traces) {
        for (const auto& event : trace.events) {
            for (const auto& [name, value] : event.attributes) {
                auto& profile = profiles[name];
                ++profile.count;
                profile.total_length += value.size();
                if (parses_as_number(value)) ++profile.numeric;
                Timestamp ignored;
                if (try_parse_timestamp(value, ignored)) ++profile.timestampish;
                profile.distinct.insert(value);
            }
        }
    }

    for (const auto& [name, kind] : overrides) {
        (void)kind;
        if (profiles.find(name) == profiles.end()) {
            throw ConfigError("schema override names unknown attribute: '" +
                              name + "'");
        }
    }

    std::vector<AttributeDescriptor> schema;
    schema.reserve(profiles.size());
    for (const auto& [name, profile] : profiles) {
        AttributeDescriptor descriptor;
        descriptor.name = name;
        auto override_it = overrides.find(name);
        if (override_it != overrides.end()) {
            descriptor.kind = override_it->second;
        } else if (profile.timestampish == profile.count) {
            descriptor.kind = AttributeKind::timestamp;
        } else if (profile.numeric == profile.count) {
            descriptor.kind = AttributeKind::numeric;
        } else {
            const double unique_ratio =
                static_cast<double>(profile.distinct.size()) / profile.count;
            const double mean_length =
                static_cast<double>(profile.total_length) / profile.count;
            if (unique_ratio > options.free_text_unique_ratio &&
                mean_length > options.free_text_mean_length) {
                descriptor.kind = AttributeKind::free_text;
            } else {
                descriptor.kind = AttributeKind::categorical;
            }
        }
        schema.push_back(std::move(descriptor));
    }
    return schema;
}

} // namespace snap
