#include "snap/story.hpp"

#include <algorithm>
#include <optional>

#include "snap/errors.hpp"
#include "snap/time.hpp"

namespace snap {

std::string to_string(MissingPolicy policy) {
    return policy == MissingPolicy::omit_clause ? "omit_clause" : "placeholder_token";
}

MissingPolicy missing_policy_from_string(const std::string& text) {
    if (text == "omit_clause") return MissingPolicy::omit_clause;
    if (text == "placeholder_token") return MissingPolicy::placeholder_token;
    throw ConfigError("unknown missing-value policy: " + text);
}

ActivityNumbering::ActivityNumbering(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    for (std::size_t i = 0; i < names_.size(); ++i)
        display_[names_[i]] = "activity " + std::to_string(i);
}

const std::string& ActivityNumbering::display(const std::string& activity) const {
    auto it = display_.find(activity);
    if (it == display_.end()) throw DataError("activity missing from numbering: " + activity);
    return it->second;
}

ActivityNumbering number_activities(const EventLog& log) {
    return ActivityNumbering(log.activity_vocabulary);
}

namespace {

constexpr const char* kMissingToken = "unknown";

std::string utf8_truncate(const std::string& text, std::size_t max_bytes) {
    if (text.size() <= max_bytes) return text;
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return text.substr(0, cut);
}

std::string activity_display(const std::string& activity, const RenderOptions& options) {
    return options.numbering ? options.numbering->display(activity) : activity;
}

std::string sequence_text(const LabeledPrefix& prefix, const RenderOptions& options, int window) {
    const auto events = prefix.events();
    const std::size_t m = std::min<std::size_t>(events.size(), static_cast<std::size_t>(window));
    std::string out;
    for (std::size_t i = events.size() - m; i < events.size(); ++i) {
        if (!out.empty()) out += ", then ";
        out += activity_display(events[i].activity, options);
    }
    return out;
}

// Resolves one placeholder; nullopt marks a missing value. Features outside
// the selection resolve as missing so exclusions genuinely remove data.
std::optional<std::string> resolve(const std::string& name, const LabeledPrefix& prefix,
                                   const SelectedFeatures& selection,
                                   const RenderOptions& options, std::size_t free_text_cap) {
    if (name == kTurnPlaceholder) return std::to_string(prefix.k);
    if (name == kActivityPlaceholder)
        return activity_display(prefix.last_event().activity, options);
    if (!selection.contains(name)) return std::nullopt;

    if (name == kTimeFromCaseStart)
        return render_duration(derive_temporal_features(prefix).time_from_case_start);
    if (name == kTimeFromPrevious)
        return render_duration(derive_temporal_features(prefix).time_from_previous);

    auto it = prefix.last_event().attributes.find(name);
    if (it == prefix.last_event().attributes.end()) return std::nullopt;
    const bool is_free_text = std::find(selection.forced_text.begin(),
                                        selection.forced_text.end(),
                                        name) != selection.forced_text.end();
    if (is_free_text && free_text_cap > 0) return utf8_truncate(it->second, free_text_cap);
    return it->second;
}

// A clause is a run of segments up to and including a sentence terminator
// found inside a literal segment.
std::vector<std::vector<TemplateSegment>> split_clauses(const std::vector<TemplateSegment>& segments) {
    std::vector<std::vector<TemplateSegment>> clauses(1);
    auto is_terminator = [](char c) { return c == '.' || c == '!' || c == '?'; };
    for (const auto& segment : segments) {
        if (segment.kind == TemplateSegment::Kind::placeholder) {
            clauses.back().push_back(segment);
            continue;
        }
        std::string pending;
        for (char c : segment.text) {
            pending += c;
            if (is_terminator(c)) {
                clauses.back().push_back({TemplateSegment::Kind::literal, pending});
                pending.clear();
                clauses.emplace_back();
            }
        }
        if (!pending.empty())
            clauses.back().push_back({TemplateSegment::Kind::literal, pending});
    }
    while (!clauses.empty() && clauses.back().empty()) clauses.pop_back();
    return clauses;
}

std::string render_text(const std::vector<std::vector<TemplateSegment>>& clauses,
                        const LabeledPrefix& prefix, const SelectedFeatures& selection,
                        const RenderOptions& options, int window, std::size_t free_text_cap) {
    std::string out;
    for (const auto& clause : clauses) {
        std::string rendered;
        bool drop = false;
        for (const auto& segment : clause) {
            if (segment.kind == TemplateSegment::Kind::literal) {
                rendered += segment.text;
                continue;
            }
            if (segment.text == kSequencePlaceholder) {
                rendered += sequence_text(prefix, options, window);
                continue;
            }
            auto value = resolve(segment.text, prefix, selection, options, free_text_cap);
            if (value) {
                rendered += *value;
            } else if (options.missing_policy == MissingPolicy::placeholder_token) {
                rendered += kMissingToken;
            } else {
                drop = true;
                break;
            }
        }
        if (!drop) out += rendered;
    }
    // trim whitespace left behind by dropped leading/trailing clauses
    std::size_t begin = out.find_first_not_of(" \t\n");
    std::size_t end = out.find_last_not_of(" \t\n");
    if (begin == std::string::npos) return "";
    return out.substr(begin, end - begin + 1);
}

void check_options(const RenderOptions& options) {
    if (options.window < 1) throw ConfigError("sequence window must be at least 1");
}

} // namespace

Story render_story(const LabeledPrefix& prefix, const StoryTemplate& tmpl,
                   const SelectedFeatures& selection, const RenderOptions& options) {
    check_options(options);
    const auto clauses = split_clauses(parse_template(tmpl.body));

    Story story;
    story.label = prefix.label;
    story.case_id = prefix.case_id();
    story.k = prefix.k;

    story.text = render_text(clauses, prefix, selection, options, options.window, 0);
    if (options.max_story_bytes == 0 || story.text.size() <= options.max_story_bytes) return story;

    // too long: shrink the sequence window first, then cap free-text values
    for (int w = options.window - 1; w >= 1; --w) {
        story.text = render_text(clauses, prefix, selection, options, w, 0);
        if (story.text.size() <= options.max_story_bytes) return story;
    }
    for (std::size_t cap = 512; cap >= 1; cap /= 2) {
        story.text = render_text(clauses, prefix, selection, options, 1, cap);
        if (story.text.size() <= options.max_story_bytes) return story;
    }
    story.text = utf8_truncate(story.text, options.max_story_bytes);
    return story;
}

Story render_list_of_values(const LabeledPrefix& prefix, const SelectedFeatures& selection,
                            const RenderOptions& options) {
    check_options(options);
    Story story;
    story.label = prefix.label;
    story.case_id = prefix.case_id();
    story.k = prefix.k;

    std::vector<std::string> fields;
    for (const auto& name : selection.all_story_features()) {
        auto value = resolve(name, prefix, selection, options, 0);
        if (value) fields.push_back(*value);
        else if (options.missing_policy == MissingPolicy::placeholder_token)
            fields.push_back(kMissingToken);
    }
    {
        // same activities as the story's sequence clause, joined flat
        const auto events = prefix.events();
        const std::size_t m =
            std::min<std::size_t>(events.size(), static_cast<std::size_t>(options.window));
        std::string joined;
        for (std::size_t i = events.size() - m; i < events.size(); ++i) {
            if (!joined.empty()) joined += ", ";
            joined += activity_display(events[i].activity, options);
        }
        fields.push_back(joined);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) story.text += " | ";
        story.text += fields[i];
    }
    if (options.max_story_bytes > 0) story.text = utf8_truncate(story.text, options.max_story_bytes);
    return story;
}

std::vector<Story> render_stories(const EventLog& log, const StoryTemplate& tmpl,
                                  const SelectedFeatures& selection, const RenderOptions& options) {
    std::vector<Story> out;
    for (const auto& prefix : enumerate_prefixes(log))
        out.push_back(render_story(prefix, tmpl, selection, options));
    return out;
}

} // namespace snap
