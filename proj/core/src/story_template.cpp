#include "snap/story_template.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "snap/errors.hpp"

namespace snap {

std::string to_string(TemplateSource source) {
    switch (source) {
    case TemplateSource::llm: return "llm";
    case TemplateSource::manual: return "manual";
    case TemplateSource::fallback: return "default";
    }
    return "default";
}

TemplateSource template_source_from_string(const std::string& text) {
    if (text == "llm") return TemplateSource::llm;
    if (text == "manual") return TemplateSource::manual;
    if (text == "default") return TemplateSource::fallback;
    throw ConfigError("unknown template source: " + text + " (expected llm, manual or default)");
}

std::vector<TemplateSegment> parse_template(const std::string& body) {
    std::vector<TemplateSegment> segments;
    const std::string open = kPlaceholderOpen;
    const std::string close = kPlaceholderClose;
    std::size_t at = 0;
    while (at < body.size()) {
        std::size_t start = body.find(open, at);
        if (start == std::string::npos) {
            segments.push_back({TemplateSegment::Kind::literal, body.substr(at)});
            break;
        }
        if (start > at)
            segments.push_back({TemplateSegment::Kind::literal, body.substr(at, start - at)});
        std::size_t end = body.find(close, start + open.size());
        if (end == std::string::npos)
            throw DataError("template has an unterminated placeholder near byte " +
                            std::to_string(start));
        std::string name = body.substr(start + open.size(), end - start - open.size());
        if (name.find(open) != std::string::npos)
            throw DataError("template has a nested placeholder near byte " + std::to_string(start));
        segments.push_back({TemplateSegment::Kind::placeholder, name});
        at = end + close.size();
    }
    return segments;
}

std::vector<std::string> validate_template(const StoryTemplate& tmpl,
                                           const SelectedFeatures& selection) {
    std::vector<std::string> violations;
    std::vector<TemplateSegment> segments;
    try {
        segments = parse_template(tmpl.body);
    } catch (const DataError& e) {
        violations.push_back(e.what());
        return violations;
    }

    std::map<std::string, int> counts;
    for (const auto& segment : segments)
        if (segment.kind == TemplateSegment::Kind::placeholder) ++counts[segment.text];

    const auto features = selection.all_story_features();
    for (const auto& feature : features) {
        int c = counts.count(feature) ? counts[feature] : 0;
        if (c == 0) violations.push_back("feature not covered by any placeholder: " + feature);
        else if (c > 1) violations.push_back("feature placeholder appears more than once: " + feature);
    }
    int seq = counts.count(kSequencePlaceholder) ? counts[kSequencePlaceholder] : 0;
    if (seq == 0) violations.push_back("missing the ⟨sequence⟩ slot");
    else if (seq > 1) violations.push_back("more than one ⟨sequence⟩ slot");

    for (const auto& [name, count] : counts) {
        if (name == kSequencePlaceholder || name == kTurnPlaceholder ||
            name == kActivityPlaceholder)
            continue;
        if (std::find(features.begin(), features.end(), name) == features.end())
            violations.push_back("unknown placeholder: " + name);
    }
    return violations;
}

namespace {

std::string wrap(const std::string& name) {
    return std::string(kPlaceholderOpen) + name + kPlaceholderClose;
}

} // namespace

StoryTemplate default_template(const SelectedFeatures& selection) {
    std::vector<std::string> clauses;
    for (const auto& name : selection.ranked)
        clauses.push_back("The " + name + " was " + wrap(name) + ".");
    for (const auto& name : selection.forced_text)
        clauses.push_back("The " + name + " was '" + wrap(name) + "'.");

    const bool from_start = selection.contains(kTimeFromCaseStart);
    const bool from_prev = selection.contains(kTimeFromPrevious);
    if (from_start && from_prev)
        clauses.push_back("This was " + wrap(kTimeFromCaseStart) + " after the case started and " +
                          wrap(kTimeFromPrevious) + " after the previous activity.");
    else if (from_start)
        clauses.push_back("This was " + wrap(kTimeFromCaseStart) + " after the case started.");
    else if (from_prev)
        clauses.push_back("This was " + wrap(kTimeFromPrevious) + " after the previous activity.");
    for (const auto& name : selection.temporal)
        if (name != kTimeFromCaseStart && name != kTimeFromPrevious)
            clauses.push_back("The " + name + " was " + wrap(name) + ".");

    clauses.push_back("Sequence of recent activities: " + wrap(kSequencePlaceholder) + ".");

    StoryTemplate tmpl;
    tmpl.source = TemplateSource::fallback;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (i) tmpl.body += " ";
        tmpl.body += clauses[i];
    }
    return tmpl;
}

ShotExample default_shot_example() {
    ShotExample shot;
    shot.features = {"resource", "requested amount", "time from case start"};
    shot.template_text =
        "The request for " + wrap("requested amount") + " was handled by " + wrap("resource") +
        ", " + wrap("time from case start") +
        " after the case started. Sequence of recent activities: " + wrap(kSequencePlaceholder) + ".";
    return shot;
}

std::string build_template_prompt(const SelectedFeatures& selection,
                                  const std::vector<ShotExample>& shots) {
    const auto features = selection.all_story_features();
    if (features.empty())
        throw ConfigError("cannot build a template prompt from an empty feature list");
    if (shots.empty())
        throw ConfigError("template prompt needs at least one shot example");

    std::ostringstream out;
    out << "You write short story templates that describe the state of a business process.\n"
        << "A template is one plain-text paragraph. Wrap every feature name in the brackets ⟨ "
           "and ⟩ to mark where its value goes, and use each feature exactly once.\n"
        << "Finish with a clause for the most recent activities, marked by the single placeholder "
        << wrap(kSequencePlaceholder) << ".\n\n";
    for (const auto& shot : shots) {
        out << "Example features:";
        for (std::size_t i = 0; i < shot.features.size(); ++i)
            out << (i ? ", " : " ") << shot.features[i];
        out << "\nExample template: " << shot.template_text << "\n\n";
    }
    out << "Write one template for these features:\n";
    for (const auto& feature : features) out << "- " << feature << "\n";
    out << "Answer with the template text only.\n";
    return out.str();
}

StoryTemplate load_template_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read template file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string body = buffer.str();
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    if (body.empty()) throw DataError("template file is empty: " + path);
    return StoryTemplate{body, TemplateSource::manual};
}

void save_template_file(const StoryTemplate& tmpl, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write template file: " + path);
    out << tmpl.body << "\n";
}

} // namespace snap
