#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "snap/event_log.hpp"
#include "snap/feature_selection.hpp"
#include "snap/story_template.hpp"

namespace snap {

struct Story {
    std::string text;
    std::string label;
    std::string case_id;
    std::size_t k = 0; // prefix length the story describes
};

enum class MissingPolicy { omit_clause, placeholder_token };

std::string to_string(MissingPolicy policy);
MissingPolicy missing_policy_from_string(const std::string& text);

// Maps sorted activity names to stable numbers 0..N-1 ("activity 3") for the
// ablation that strips activity semantics. Labels are never numbered.
class ActivityNumbering {
public:
    explicit ActivityNumbering(std::vector<std::string> names); // sorted + deduplicated
    const std::string& display(const std::string& activity) const; // "activity N"
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, std::string> display_;
};

ActivityNumbering number_activities(const EventLog& log);

struct RenderOptions {
    int window = 10;                 // most recent activities in the sequence clause
    MissingPolicy missing_policy = MissingPolicy::omit_clause;
    std::size_t max_story_bytes = 0; // 0 = unlimited
    const ActivityNumbering* numbering = nullptr;
};

// Renders one labeled prefix through the template. Placeholders resolve to
// the last event's selected attributes, the derived temporal features, the
// built-ins turn/activity, and the sequence clause ("A, then B, then C").
// Features outside the selection count as missing.
Story render_story(const LabeledPrefix& prefix, const StoryTemplate& tmpl,
                   const SelectedFeatures& selection, const RenderOptions& options = {});

// Structureless ablation: the same values joined by " | " instead of prose.
Story render_list_of_values(const LabeledPrefix& prefix, const SelectedFeatures& selection,
                            const RenderOptions& options = {});

std::vector<Story> render_stories(const EventLog& log, const StoryTemplate& tmpl,
                                  const SelectedFeatures& selection,
                                  const RenderOptions& options = {});

} // namespace snap
