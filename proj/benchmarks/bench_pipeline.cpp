// Microbenchmarks for the hot paths of the pipeline: prefix enumeration,
// story rendering, frequency encoding, importance ranking, the exact
// Wilcoxon test and the reference classifier.
#include <benchmark/benchmark.h>

#include <set>
#include <string>
#include <vector>

#include "snap/classifier.hpp"
#include "snap/event_log.hpp"
#include "snap/feature_selection.hpp"
#include "snap/stats.hpp"
#include "snap/story.hpp"
#include "snap/story_template.hpp"
#include "snap/tabular.hpp"
#include "support/synthetic.hpp"

namespace {

snap::SelectedFeatures utterance_selection() {
    snap::SelectedFeatures selection;
    selection.forced_text = {"user utterance"};
    selection.temporal = {snap::kTimeFromCaseStart, snap::kTimeFromPrevious};
    return selection;
}

// stories for the classifier benchmarks, split by case id
struct StorySplits {
    snap::StoryDataset train;
    snap::StoryDataset val;
};

StorySplits classifier_data() {
    const snap::EventLog log = testlog::deterministic_log(60);
    const snap::StoryTemplate tmpl = snap::default_template(snap::SelectedFeatures{});
    const auto vocab = snap::label_vocabulary(log);

    std::set<std::string> val_cases;
    for (std::size_t i = 48; i < log.traces.size(); ++i) val_cases.insert(log.traces[i].case_id);

    std::vector<snap::Story> train, val;
    for (const auto& prefix : snap::enumerate_prefixes(log)) {
        auto story = snap::render_story(prefix, tmpl, snap::SelectedFeatures{});
        (val_cases.count(story.case_id) ? val : train).push_back(std::move(story));
    }
    return {snap::StoryDataset::make(std::move(train), vocab),
            snap::StoryDataset::make(std::move(val), vocab)};
}

} // namespace

static void BM_EnumeratePrefixes(benchmark::State& state) {
    const snap::EventLog log = testlog::deterministic_log(200);
    for (auto _ : state) benchmark::DoNotOptimize(snap::enumerate_prefixes(log));
}
BENCHMARK(BM_EnumeratePrefixes);

static void BM_RenderStory(benchmark::State& state) {
    snap::EventLog log = testlog::utterance_log(4);
    for (auto& attr : log.schema)
        if (attr.name == "user utterance") attr.kind = snap::AttributeKind::free_text;
    const auto selection = utterance_selection();
    const snap::StoryTemplate tmpl = snap::default_template(selection);
    const auto prefixes = snap::enumerate_prefixes(log.traces[0]);
    const snap::LabeledPrefix& prefix = prefixes.back();

    for (auto _ : state)
        benchmark::DoNotOptimize(snap::render_story(prefix, tmpl, selection));
}
BENCHMARK(BM_RenderStory);

static void BM_RenderListOfValues(benchmark::State& state) {
    snap::EventLog log = testlog::utterance_log(4);
    const auto selection = utterance_selection();
    const auto prefixes = snap::enumerate_prefixes(log.traces[0]);
    const snap::LabeledPrefix& prefix = prefixes.back();

    for (auto _ : state)
        benchmark::DoNotOptimize(snap::render_list_of_values(prefix, selection));
}
BENCHMARK(BM_RenderListOfValues);

static void BM_FrequencyEncode(benchmark::State& state) {
    const snap::EventLog log = testlog::label_copy_log(120);
    for (auto _ : state) benchmark::DoNotOptimize(snap::frequency_encode(log, log.schema));
}
BENCHMARK(BM_FrequencyEncode);

static void BM_RankFeatures(benchmark::State& state) {
    const snap::EventLog log = testlog::label_copy_log(80);
    const snap::TabularDataset table = snap::frequency_encode(log, log.schema);
    snap::GbdtConfig config;
    config.rounds = 25;
    for (auto _ : state) benchmark::DoNotOptimize(snap::rank_features(table, config));
}
BENCHMARK(BM_RankFeatures);

static void BM_WilcoxonExact25(benchmark::State& state) {
    std::vector<double> a, b;
    for (int i = 0; i < 25; ++i) {
        a.push_back(0.5 + 0.01 * i);
        b.push_back(0.5 + 0.013 * ((i % 3) - 1) + 0.009 * i);
    }
    for (auto _ : state) benchmark::DoNotOptimize(snap::wilcoxon_signed_rank(a, b));
}
BENCHMARK(BM_WilcoxonExact25);

static void BM_ReferenceFit(benchmark::State& state) {
    const StorySplits data = classifier_data();
    const auto config = snap::ClassifierConfig::reference_defaults();
    for (auto _ : state)
        benchmark::DoNotOptimize(snap::fit_classifier("reference", data.train, data.val, config));
}
BENCHMARK(BM_ReferenceFit);

static void BM_ReferencePredict(benchmark::State& state) {
    const StorySplits data = classifier_data();
    const auto model = snap::fit_classifier("reference", data.train, data.val,
                                            snap::ClassifierConfig::reference_defaults());
    const std::string story = data.val.samples.front().text;
    for (auto _ : state) benchmark::DoNotOptimize(model->predict(story));
}
BENCHMARK(BM_ReferencePredict);

BENCHMARK_MAIN();
