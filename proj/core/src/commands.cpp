#include "snap/commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "snap/errors.hpp"
#include "snap/experiment.hpp"
#include "snap/stats.hpp"

namespace snap {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

// published reference scores for one dataset, loaded from benchmarks.json
struct BenchmarkEntry {
    std::map<std::string, double> accuracy;
    std::map<std::string, double> weighted_f1;
};

std::optional<BenchmarkEntry> load_benchmark(const std::filesystem::path& path,
                                             const std::string& dataset) {
    if (path.empty() || dataset.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open benchmarks file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
        if (!doc.at("datasets").contains(dataset)) return std::nullopt;
        const auto& entry = doc.at("datasets").at(dataset);
        BenchmarkEntry out;
        if (entry.contains("accuracy"))
            for (auto it = entry["accuracy"].begin(); it != entry["accuracy"].end(); ++it)
                out.accuracy[it.key()] = it.value().get<double>();
        if (entry.contains("weighted_f1"))
            for (auto it = entry["weighted_f1"].begin(); it != entry["weighted_f1"].end(); ++it)
                out.weighted_f1[it.key()] = it.value().get<double>();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed benchmarks file " + path.string() + ": " + e.what());
    }
}

std::string format3(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

} // namespace

int cmd_ingest(const RunConfig& config, std::ostream& out) {
    EventLog log = load_dataset(config.dataset);
    LogStats stats = log_stats(log);
    out << "cases:           " << stats.num_cases << "\n"
        << "events:          " << stats.num_events << "\n"
        << "activities:      " << stats.num_activities << "\n"
        << "avg case length: " << stats.avg_case_length << "\n";

    out << "attributes:\n";
    for (const auto& attr : log.schema)
        out << "  " << attr.name << ": " << to_string(attr.kind) << "\n";

    const auto dump_path = config.output_dir / "log.jsonl";
    std::filesystem::create_directories(config.output_dir);
    dump_jsonl(log, dump_path);
    out << "canonical dump:  " << dump_path.string() << "\n";
    return 0;
}

int cmd_template(const RunConfig& config, std::ostream& out) {
    EventLog log = load_dataset(config.dataset);

    std::unique_ptr<HttpLlmClient> llm;
    if (config.story_template.source == "llm")
        llm = HttpLlmClient::from_environment(config.story_template.llm);

    ExperimentArtifacts artifacts = prepare_experiment(log, config, llm.get());

    out << "selected features:\n";
    for (const auto& name : artifacts.selection.all_story_features())
        out << "  - " << name << "\n";
    out << "template source: " << to_string(artifacts.story_template.source) << "\n"
        << "template: " << artifacts.story_template.body << "\n"
        << "validation: OK\n"
        << "written to: " << (config.output_dir / "template.txt").string() << "\n";
    return 0;
}

int cmd_run(const RunConfig& config, std::ostream& out) {
    EventLog log = load_dataset(config.dataset);

    std::unique_ptr<HttpLlmClient> llm;
    if (config.story_template.source == "llm" &&
        (config.force || !std::filesystem::exists(config.output_dir / "template.txt")))
        llm = HttpLlmClient::from_environment(config.story_template.llm);

    ExperimentArtifacts artifacts = prepare_experiment(log, config, llm.get());
    std::vector<VariantResult> results;
    for (const auto& name : config.evaluation.variants) {
        Variant variant = variant_from_string(name);
        out << "running variant " << name << " (" << artifacts.folds.folds.size()
            << " folds, backend " << config.classifier.backend << ")\n";
        results.push_back(run_variant(log, variant, artifacts, config));
    }

    // combined metrics
    {
        nlohmann::json doc = nlohmann::json::object();
        for (const auto& result : results)
            doc[to_string(result.variant)] = nlohmann::json::parse(to_json(result.metrics));
        write_text(config.output_dir / "metrics.json", doc.dump(2));
    }

    // significance: every variant paired against the first over fold accuracies
    nlohmann::json significance = nlohmann::json::object();
    std::map<std::string, SignificanceReport> variant_tests;
    if (results.size() > 1) {
        auto fold_accuracies = [](const VariantResult& r) {
            std::vector<double> out_scores;
            for (const auto& fold : r.metrics.per_fold) out_scores.push_back(fold.accuracy);
            return out_scores;
        };
        const auto base_scores = fold_accuracies(results.front());
        for (std::size_t i = 1; i < results.size(); ++i) {
            const std::string key =
                to_string(results.front().variant) + "_vs_" + to_string(results[i].variant);
            try {
                auto report = wilcoxon_signed_rank(base_scores, fold_accuracies(results[i]));
                variant_tests[to_string(results[i].variant)] = report;
                significance[key] = nlohmann::json::parse(to_json(report));
            } catch (const DataError&) {
                significance[key] = {{"degenerate", true}};
            }
        }
    }
    write_text(config.output_dir / "significance.json", significance.dump(2));

    // comparison table
    auto benchmark =
        load_benchmark(config.evaluation.benchmarks_path, config.evaluation.benchmark_dataset);
    out << "\nresults";
    if (!config.evaluation.benchmark_dataset.empty())
        out << " (dataset: " << config.evaluation.benchmark_dataset << ")";
    out << "\n" << std::left << std::setw(28) << "model" << std::setw(12) << "accuracy"
        << std::setw(12) << "wgt. F1" << "\n";
    for (const auto& result : results) {
        std::string name = "this run / " + to_string(result.variant);
        if (variant_tests.count(to_string(result.variant)) &&
            variant_tests.at(to_string(result.variant)).p_value < 0.05)
            name += " *";
        out << std::setw(28) << name << std::setw(12)
            << format3(result.metrics.mean_accuracy) << std::setw(12)
            << format3(result.metrics.mean_weighted_f1) << "\n";
    }
    if (benchmark) {
        for (const auto& [model, accuracy] : benchmark->accuracy) {
            out << std::setw(28) << model << std::setw(12) << format3(accuracy);
            auto f1 = benchmark->weighted_f1.find(model);
            out << std::setw(12)
                << (f1 == benchmark->weighted_f1.end() ? std::string("-") : format3(f1->second))
                << "\n";
        }
        // paired test of the first variant against the best published accuracy
        double best = 0.0;
        std::string best_name;
        for (const auto& [model, accuracy] : benchmark->accuracy)
            if (accuracy > best) {
                best = accuracy;
                best_name = model;
            }
        if (!best_name.empty() && !results.empty()) {
            std::vector<double> ours, reference;
            for (const auto& fold : results.front().metrics.per_fold) {
                ours.push_back(fold.accuracy);
                reference.push_back(best);
            }
            try {
                auto report = wilcoxon_signed_rank(ours, reference);
                out << "vs best benchmark (" << best_name << "): p=" << format3(report.p_value)
                    << (report.p_value < 0.05 ? " (significant)" : "") << "\n";
            } catch (const DataError&) {
                out << "vs best benchmark (" << best_name << "): degenerate comparison\n";
            }
        }
    }
    if (results.size() > 1)
        out << "* differs from the " << to_string(results.front().variant)
            << " variant with p < 0.05 (Wilcoxon signed-rank)\n";
    return 0;
}

int run_command(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const SnapError& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace snap
