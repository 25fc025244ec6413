#pragma once

#include <string>
#include <vector>

#include "snap/feature_selection.hpp"

namespace snap {

// Placeholders are feature names wrapped in mathematical angle brackets,
// e.g. ⟨role⟩. The reserved ⟨sequence⟩ slot receives the recent-activity
// clause; ⟨turn⟩ and ⟨activity⟩ are built-ins available to any template.
inline constexpr const char* kPlaceholderOpen = "⟨";  // ⟨
inline constexpr const char* kPlaceholderClose = "⟩"; // ⟩
inline constexpr const char* kSequencePlaceholder = "sequence";
inline constexpr const char* kTurnPlaceholder = "turn";
inline constexpr const char* kActivityPlaceholder = "activity";

enum class TemplateSource { llm, manual, fallback };

std::string to_string(TemplateSource source);
TemplateSource template_source_from_string(const std::string& text);

struct StoryTemplate {
    std::string body;
    TemplateSource source = TemplateSource::fallback;
};

struct TemplateSegment {
    enum class Kind { literal, placeholder };
    Kind kind = Kind::literal;
    std::string text; // literal bytes, or the placeholder name
};

// Splits a template body at placeholder boundaries. An unterminated opening
// bracket is a data error.
std::vector<TemplateSegment> parse_template(const std::string& body);

// Returns human-readable violations; empty means the template is usable.
// Every selected feature must appear exactly once, the sequence slot exactly
// once, and no unknown placeholders may remain.
std::vector<std::string> validate_template(const StoryTemplate& tmpl,
                                           const SelectedFeatures& selection);

// Deterministic built-in template covering every selected feature.
StoryTemplate default_template(const SelectedFeatures& selection);

struct ShotExample {
    std::vector<std::string> features;
    std::string template_text;
};

ShotExample default_shot_example();

// Instruction prompt asking a language model to write a story template for
// the selected features. At least one shot example is required.
std::string build_template_prompt(const SelectedFeatures& selection,
                                  const std::vector<ShotExample>& shots = {default_shot_example()});

// Reads a manual template from a file (data error when unreadable).
StoryTemplate load_template_file(const std::string& path);
void save_template_file(const StoryTemplate& tmpl, const std::string& path);

} // namespace snap
