#include "snap/log_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

namespace {

void apply_renames(EventLog& log, const LoadOptions& options) {
    if (options.rename_activities.empty()) return;
    for (auto& trace : log.traces) {
        for (auto& event : trace.events) {
            auto it = options.rename_activities.find(event.activity);
            if (it != options.rename_activities.end()) event.activity = it->second;
        }
    }
}

void finalize(EventLog& log, const LoadOptions& options) {
    apply_renames(log, options);
    for (auto& trace : log.traces) {
        std::stable_sort(trace.events.begin(), trace.events.end(),
                         [](const Event& a, const Event& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
    log.rebuild_vocabulary();
    log.schema = infer_attribute_kinds(log);
}

void check_unique_case_ids(const EventLog& log) {
    std::set<std::string> seen;
    for (const auto& trace : log.traces) {
        if (!seen.insert(trace.case_id).second) {
            throw DataError("duplicate case id: '" + trace.case_id + "'");
        }
    }
}

} // namespace

EventLog load_xes(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open XES file: " + path.string());

    boost::property_tree::ptree doc;
    try {
        boost::property_tree::read_xml(in, doc);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw DataError("malformed XES in " + path.string() + " at line " +
                        std::to_string(e.line()) + ": " + e.message());
    }

    auto log_node = doc.get_child_optional("log");
    if (!log_node) throw DataError("XES file has no <log> element: " + path.string());

    EventLog log;
    std::size_t trace_index = 0;
    for (const auto& [tag, trace_node] : *log_node) {
        if (tag != "trace") continue;
        Trace trace;
        std::size_t event_index = 0;
        for (const auto& [child_tag, child] : trace_node) {
            if (child_tag == "event") {
                Event event;
                std::string lifecycle;
                bool has_activity = false;
                for (const auto& [attr_tag, attr_node] : child) {
                    if (attr_tag == "<xmlattr>") continue;
                    auto key = attr_node.get_optional<std::string>("<xmlattr>.key");
                    auto value = attr_node.get_optional<std::string>("<xmlattr>.value");
                    if (!key || !value) continue;
                    if (*key == "concept:name") {
                        event.activity = *value;
                        has_activity = true;
                    } else if (*key == "time:timestamp") {
                        event.timestamp = parse_timestamp(*value);
                    } else if (*key == "lifecycle:transition") {
                        lifecycle = *value;
                    } else {
                        event.attributes[*key] = *value;
                    }
                }
                if (!has_activity) {
                    throw DataError("XES event missing activity key concept:name"
                                    " (trace " + std::to_string(trace_index) +
                                    ", event " + std::to_string(event_index) + ")");
                }
                if (!lifecycle.empty()) {
                    if (options.concat_lifecycle) {
                        event.activity += options.lifecycle_separator + lifecycle;
                    } else {
                        event.attributes["lifecycle:transition"] = lifecycle;
                    }
                }
                trace.events.push_back(std::move(event));
                ++event_index;
            } else if (child_tag != "<xmlattr>") {
                // Trace-level attribute; concept:name is the case id.
                auto key = child.get_optional<std::string>("<xmlattr>.key");
                auto value = child.get_optional<std::string>("<xmlattr>.value");
                if (key && value && *key == "concept:name") trace.case_id = *value;
            }
        }
        if (trace.case_id.empty()) {
            trace.case_id = "trace_" + std::to_string(trace_index);
        }
        if (!trace.events.empty()) log.traces.push_back(std::move(trace));
        ++trace_index;
    }

    if (log.traces.empty()) {
        throw DataError("XES file contains no traces with events: " + path.string());
    }
    check_unique_case_ids(log);
    finalize(log, options);
    return log;
}

namespace {

// RFC 4180: quoted fields may contain separators, newlines and doubled quotes.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    bool next_record(std::vector<std::string>& fields) {
        fields.clear();
        std::string field;
        bool in_quotes = false;
        bool any = false;
        int c;
        while ((c = in_.get()) != EOF) {
            any = true;
            char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        field += '"';
                        in_.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field += ch;
                }
            } else if (ch == '"') {
                in_quotes = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n') {
                ++line_;
                break;
            } else if (ch != '\r') {
                field += ch;
            }
        }
        if (!any) return false;
        fields.push_back(std::move(field));
        return true;
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace

EventLog load_csv(const std::filesystem::path& path, const ColumnMapping& mapping,
                  const LoadOptions& options) {
    if (mapping.case_id.empty() || mapping.activity.empty() ||
        mapping.timestamp.empty()) {
        throw ConfigError("CSV column mapping must designate case-id, activity "
                          "and timestamp columns");
    }
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path.string());

    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next_record(header)) {
        throw DataError("CSV file is empty: " + path.string());
    }

    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ConfigError("CSV is missing mapped column '" + name + "' in " +
                              path.string());
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t case_col = column_of(mapping.case_id);
    const std::size_t activity_col = column_of(mapping.activity);
    const std::size_t timestamp_col = column_of(mapping.timestamp);

    EventLog log;
    std::map<std::string, std::size_t> trace_index; // case id -> position
    std::vector<std::string> fields;
    std::size_t row = 1;
    while (reader.next_record(fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue; // blank line
        if (fields.size() != header.size()) {
            throw DataError("CSV row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        Event event;
        event.activity = fields[activity_col];
        if (event.activity.empty()) {
            throw DataError("CSV row " + std::to_string(row) +
                            " has an empty activity");
        }
        Timestamp ts;
        if (!try_parse_timestamp(fields[timestamp_col], ts)) {
            throw DataError("CSV row " + std::to_string(row) +
                            ": unparseable timestamp '" + fields[timestamp_col] +
                            "'");
        }
        event.timestamp = ts;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == case_col || i == activity_col || i == timestamp_col) continue;
            if (!fields[i].empty()) event.attributes[header[i]] = fields[i];
        }
        const std::string& case_id = fields[case_col];
        auto it = trace_index.find(case_id);
        if (it == trace_index.end()) {
            trace_index.emplace(case_id, log.traces.size());
            log.traces.push_back(Trace{case_id, {std::move(event)}});
        } else {
            log.traces[it->second].events.push_back(std::move(event));
        }
    }

    if (log.traces.empty()) {
        throw DataError("CSV file has no data rows: " + path.string());
    }
    finalize(log, options);
    return log;
}

void write_csv(const EventLog& log, const std::filesystem::path& path) {
    std::set<std::string> attribute_names;
    for (const auto& trace : log.traces)
        for (const auto& event : trace.events)
            for (const auto& [name, value] : event.attributes) {
                (void)value;
                attribute_names.insert(name);
            }

    std::ofstream out(path);
    if (!out) throw DataError("cannot write CSV file: " + path.string());
    out << "case_id,activity,timestamp";
    for (const auto& name : attribute_names) out << "," << csv_escape(name);
    out << "\n";
    for (const auto& trace : log.traces) {
        for (const auto& event : trace.events) {
            out << csv_escape(trace.case_id) << "," << csv_escape(event.activity)
                << "," << format_timestamp(event.timestamp);
            for (const auto& name : attribute_names) {
                out << ",";
                auto it = event.attributes.find(name);
                if (it != event.attributes.end()) out << csv_escape(it->second);
            }
            out << "\n";
        }
    }
}

void dump_jsonl(const EventLog& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write JSONL dump: " + path.string());
    for (const auto& trace : log.traces) {
        nlohmann::json record;
        record["case_id"] = trace.case_id;
        nlohmann::json events = nlohmann::json::array();
        for (const auto& event : trace.events) {
            nlohmann::json e;
            e["activity"] = event.activity;
            e["timestamp"] = format_timestamp(event.timestamp);
            e["attributes"] = event.attributes;
            events.push_back(std::move(e));
        }
        record["events"] = std::move(events);
        out << record.dump() << "\n";
    }
}

EventLog load_jsonl(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open JSONL dump: " + path.string());
    EventLog log;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed JSONL at line " +
                            std::to_string(line_number) + ": " + e.what());
        }
        Trace trace;
        trace.case_id = record.at("case_id").get<std::string>();
        for (const auto& e : record.at("events")) {
            Event event;
            event.activity = e.at("activity").get<std::string>();
            event.timestamp = parse_timestamp(e.at("timestamp").get<std::string>());
            if (e.contains("attributes")) {
                for (const auto& [name, value] : e.at("attributes").items()) {
                    event.attributes[name] = value.get<std::string>();
                }
            }
            trace.events.push_back(std::move(event));
        }
        if (!trace.events.empty()) log.traces.push_back(std::move(trace));
    }
    if (log.traces.empty()) {
        throw DataError("JSONL dump has no traces: " + path.string());
    }
    check_unique_case_ids(log);
    finalize(log, options);
    return log;
}

} // namespace snap
