// Command-line front end: ingest event logs, generate story templates, and
// run the full prediction experiment.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "snap/commands.hpp"
#include "snap/errors.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string dataset;
    std::string format;
    std::string output_dir;
};

// config file first, then command-line overrides on top
snap::RunConfig build_config(const CommonFlags& flags) {
    snap::RunConfig config = snap::load_run_config(flags.config_path);
    if (!flags.dataset.empty()) config.dataset.path = flags.dataset;
    if (!flags.format.empty()) config.dataset.format = flags.format;
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    config.validate();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic story next-activity prediction"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string variant_override;
    std::string template_source;
    std::string manual_template;
    std::string benchmarks_path;
    std::optional<int> jobs;
    bool force = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", flags.config_path, "run configuration JSON")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--dataset", flags.dataset, "override dataset.path");
        cmd->add_option("--format", flags.format, "override dataset.format (xes|csv|jsonl)");
        cmd->add_option("-o,--out", flags.output_dir, "override output_dir");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "load a log and print its stats");
    add_common(ingest);

    CLI::App* tmpl = app.add_subcommand("template", "select features and build the template");
    add_common(tmpl);
    tmpl->add_option("--source", template_source, "template source (default|manual|llm)");
    tmpl->add_option("--manual", manual_template, "manual template file (implies --source manual)");
    tmpl->add_flag("--force", force, "regenerate even if template.txt exists");

    CLI::App* run = app.add_subcommand("run", "run the experiment end to end");
    add_common(run);
    run->add_option("--variant", variant_override,
                    "run a single variant (story|list_of_values|numbered|no_utterance)");
    run->add_option("--jobs", [&jobs](const std::vector<std::string>& v) {
        jobs = std::stoi(v.at(0));
        return true;
    }, "train folds in parallel")->expected(1);
    run->add_option("--benchmarks", benchmarks_path, "benchmarks JSON for the comparison table");
    run->add_flag("--force", force, "regenerate cached artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // CLI11 uses 0 for --help; anything else is a usage error
        return code == 0 ? 0 : 2;
    }

    return snap::run_command(
        [&]() -> int {
            snap::RunConfig config = build_config(flags);
            config.force = config.force || force;
            if (ingest->parsed()) return snap::cmd_ingest(config, std::cout);
            if (tmpl->parsed()) {
                if (!manual_template.empty()) {
                    config.story_template.source = "manual";
                    config.story_template.manual_path = manual_template;
                } else if (!template_source.empty()) {
                    config.story_template.source = template_source;
                }
                config.validate();
                return snap::cmd_template(config, std::cout);
            }
            if (run->parsed()) {
                if (!variant_override.empty()) config.evaluation.variants = {variant_override};
                if (jobs) config.jobs = *jobs;
                if (!benchmarks_path.empty()) config.evaluation.benchmarks_path = benchmarks_path;
                config.validate();
                return snap::cmd_run(config, std::cout);
            }
            throw snap::ConfigError("no subcommand given");
        },
        std::cerr);
}
