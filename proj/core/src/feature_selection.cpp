#include "snap/feature_selection.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

TemporalFeatures derive_temporal_features(const LabeledPrefix& prefix) {
    TemporalFeatures out;
    const auto events = prefix.events();
    const Event& last = events.back();
    out.time_from_case_start = DurationMs{last.timestamp.ms - events.front().timestamp.ms};
    out.time_from_previous =
        events.size() > 1 ? DurationMs{last.timestamp.ms - events[events.size() - 2].timestamp.ms}
                          : DurationMs{0};
    return out;
}

std::vector<std::pair<std::string, double>> ImportanceReport::ranked() const {
    std::vector<std::pair<std::string, double>> out(scores.begin(), scores.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

ImportanceReport rank_features(const TabularDataset& table, const GbdtConfig& config) {
    if (table.n_columns() == 0) throw DataError("no encodable attributes to rank");
    GbdtModel model = GbdtModel::train(table, config);

    ImportanceReport report;
    const auto& gain = model.column_gain();
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        report.scores[table.columns[c].source_attribute] += gain[c];

    double total = 0.0;
    for (const auto& [name, score] : report.scores) total += score;
    if (total > 0.0) {
        for (auto& [name, score] : report.scores) score /= total;
    } else {
        // no split brought any gain; fall back to a flat ranking
        for (auto& [name, score] : report.scores)
            score = 1.0 / static_cast<double>(report.scores.size());
    }
    return report;
}

std::vector<std::string> SelectedFeatures::all_story_features() const {
    std::vector<std::string> out = ranked;
    out.insert(out.end(), forced_text.begin(), forced_text.end());
    out.insert(out.end(), temporal.begin(), temporal.end());
    return out;
}

bool SelectedFeatures::contains(const std::string& name) const {
    auto has = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), name) != v.end();
    };
    return has(ranked) || has(forced_text) || has(temporal);
}

SelectedFeatures select_features(const ImportanceReport& report,
                                 const std::vector<AttributeDescriptor>& schema,
                                 const SelectionOptions& options) {
    if (options.threshold < 0.0 || options.threshold > 1.0)
        throw ConfigError("importance threshold must lie in [0, 1]");
    if (options.max_count == 0) throw ConfigError("feature cap must be positive");

    SelectedFeatures out;
    for (const auto& [name, score] : report.ranked()) {
        if (out.ranked.size() >= options.max_count) break;
        if (score < options.threshold) break;
        if (name == kActivityHistoryFeature) continue;
        out.ranked.push_back(name);
    }
    for (const auto& attr : schema)
        if (attr.kind == AttributeKind::free_text) out.forced_text.push_back(attr.name);
    std::sort(out.forced_text.begin(), out.forced_text.end());
    out.temporal = {kTimeFromCaseStart, kTimeFromPrevious};
    return out;
}

SelectedFeatures exclude_features(const SelectedFeatures& selection,
                                  const std::vector<std::string>& names) {
    SelectedFeatures out = selection;
    for (const auto& name : names) {
        if (!out.contains(name))
            throw ConfigError("cannot exclude unknown feature: " + name);
        auto drop = [&](std::vector<std::string>& v) {
            v.erase(std::remove(v.begin(), v.end(), name), v.end());
        };
        drop(out.ranked);
        drop(out.forced_text);
        drop(out.temporal);
    }
    return out;
}

std::string to_json(const ImportanceReport& report) {
    nlohmann::json doc;
    doc["scores"] = nlohmann::json::object();
    for (const auto& [name, score] : report.scores) doc["scores"][name] = score;
    doc["ranking"] = nlohmann::json::array();
    for (const auto& [name, score] : report.ranked())
        doc["ranking"].push_back({{"feature", name}, {"importance", score}});
    return doc.dump(2);
}

std::string to_json(const SelectedFeatures& selection) {
    nlohmann::json doc;
    doc["ranked"] = selection.ranked;
    doc["forced_text"] = selection.forced_text;
    doc["temporal"] = selection.temporal;
    return doc.dump(2);
}

SelectedFeatures selected_features_from_json(const std::string& text) {
    SelectedFeatures out;
    try {
        auto doc = nlohmann::json::parse(text);
        out.ranked = doc.at("ranked").get<std::vector<std::string>>();
        out.forced_text = doc.at("forced_text").get<std::vector<std::string>>();
        out.temporal = doc.at("temporal").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed feature selection: ") + e.what());
    }
    return out;
}

ImportanceReport importance_from_json(const std::string& text) {
    ImportanceReport out;
    try {
        auto doc = nlohmann::json::parse(text);
        for (auto it = doc.at("scores").begin(); it != doc.at("scores").end(); ++it)
            out.scores[it.key()] = it.value().get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed importance report: ") + e.what());
    }
    return out;
}

} // namespace snap
