#include "snap/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "snap/errors.hpp"

namespace snap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& text) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) return kNaN;
        return v;
    } catch (const std::exception&) {
        return kNaN;
    }
}

} // namespace

std::size_t TabularDataset::n_distinct_targets() const {
    std::set<int> seen(targets.begin(), targets.end());
    return seen.size();
}

TabularDataset frequency_encode(const EventLog& log,
                                const std::vector<AttributeDescriptor>& schema) {
    if (log.traces.empty()) throw DataError("cannot encode an empty event log");

    std::vector<std::string> categorical;
    std::vector<std::string> numeric;
    for (const auto& attr : schema) {
        if (attr.kind == AttributeKind::categorical) categorical.push_back(attr.name);
        else if (attr.kind == AttributeKind::numeric) numeric.push_back(attr.name);
    }

    // value -> count and per-attribute totals over every event in the log
    std::map<std::string, std::unordered_map<std::string, double>> value_counts;
    std::map<std::string, double> attr_totals;
    for (const auto& name : categorical) {
        value_counts[name];
        attr_totals[name] = 0.0;
    }
    for (const auto& trace : log.traces) {
        for (const auto& event : trace.events) {
            for (const auto& name : categorical) {
                auto it = event.attributes.find(name);
                if (it == event.attributes.end()) continue;
                value_counts[name][it->second] += 1.0;
                attr_totals[name] += 1.0;
            }
        }
    }

    TabularDataset table;
    for (const auto& name : categorical) table.columns.push_back({name, name});
    for (const auto& name : numeric) table.columns.push_back({name, name});
    std::unordered_map<std::string, std::size_t> activity_col;
    for (const auto& activity : log.activity_vocabulary) {
        activity_col[activity] = table.columns.size();
        table.columns.push_back({"history: " + activity, kActivityHistoryFeature});
    }

    table.class_names = label_vocabulary(log);
    std::unordered_map<std::string, int> class_index;
    for (std::size_t i = 0; i < table.class_names.size(); ++i)
        class_index[table.class_names[i]] = static_cast<int>(i);

    const std::size_t width = table.columns.size();
    auto prefixes = enumerate_prefixes(log);
    table.n_rows = prefixes.size();
    table.values.assign(table.n_rows * width, kNaN);
    table.targets.reserve(table.n_rows);

    for (std::size_t row = 0; row < prefixes.size(); ++row) {
        const auto& prefix = prefixes[row];
        const Event& last = prefix.last_event();
        double* out = table.values.data() + row * width;
        std::size_t col = 0;
        for (const auto& name : categorical) {
            auto it = last.attributes.find(name);
            if (it != last.attributes.end() && attr_totals[name] > 0.0)
                out[col] = value_counts[name][it->second] / attr_totals[name];
            ++col;
        }
        for (const auto& name : numeric) {
            auto it = last.attributes.find(name);
            if (it != last.attributes.end()) out[col] = parse_number(it->second);
            ++col;
        }
        for (std::size_t i = 0; i < log.activity_vocabulary.size(); ++i)
            out[activity_col[log.activity_vocabulary[i]]] = 0.0;
        for (const Event& event : prefix.events())
            out[activity_col[event.activity]] += 1.0;

        table.targets.push_back(class_index.at(prefix.label));
    }
    return table;
}

} // namespace snap
