#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "snap/run_config.hpp"

namespace snap {

// CLI-facing operations. Each throws SnapError subclasses; run_command maps
// them to exit codes (config/usage 2, data 3, external service 4).

// Loads the dataset, prints a stats summary and writes the canonical JSONL
// dump to <output_dir>/log.jsonl.
int cmd_ingest(const RunConfig& config, std::ostream& out);

// Resolves the story template (default, manual file or LLM), validates it
// against the selected features and writes <output_dir>/template.txt.
int cmd_template(const RunConfig& config, std::ostream& out);

// Runs every configured variant end to end, then writes combined
// metrics.json / significance.json and prints a comparison table (including
// published benchmark numbers when configured).
int cmd_run(const RunConfig& config, std::ostream& out);

// Executes fn(), translating SnapError kinds into process exit codes.
int run_command(const std::function<int()>& fn, std::ostream& err);

} // namespace snap
