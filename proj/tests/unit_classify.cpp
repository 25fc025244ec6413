#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "snap/classifier.hpp"
#include "snap/errors.hpp"
#include "snap/story.hpp"
#include "snap/story_template.hpp"

#include "support/paths.hpp"
#include "support/synthetic.hpp"

using namespace snap;
using testlog::TempDir;

namespace {

Story make_story(std::string text, std::string label, std::string case_id = "c", std::size_t k = 1) {
    Story s;
    s.text = std::move(text);
    s.label = std::move(label);
    s.case_id = std::move(case_id);
    s.k = k;
    return s;
}

// stories whose text literally carries the label through the hint attribute
std::vector<Story> hint_stories(std::size_t n_cases) {
    EventLog log = testlog::label_copy_log(n_cases);
    SelectedFeatures sel;
    sel.ranked = {"hint"};
    StoryTemplate tmpl = default_template(sel);
    return render_stories(log, tmpl, sel);
}

struct SplitSets {
    StoryDataset train;
    StoryDataset val;
};

// case-respecting front/back split with a shared vocabulary
SplitSets split_stories(const std::vector<Story>& stories, double train_share = 0.8) {
    std::vector<std::string> vocab = StoryDataset::make(stories).label_vocabulary;
    std::vector<std::string> case_order;
    for (const auto& story : stories)
        if (case_order.empty() || case_order.back() != story.case_id)
            case_order.push_back(story.case_id);
    std::size_t cut = static_cast<std::size_t>(case_order.size() * train_share);
    std::set<std::string> train_cases(case_order.begin(), case_order.begin() + cut);

    std::vector<Story> train, val;
    for (const auto& story : stories)
        (train_cases.count(story.case_id) ? train : val).push_back(story);
    return {StoryDataset::make(train, vocab), StoryDataset::make(val, vocab)};
}

} // namespace

TEST_CASE("story datasets derive and enforce their vocabulary") {
    std::vector<Story> samples = {make_story("x", "b"), make_story("y", "a"),
                                  make_story("z", "b")};
    StoryDataset derived = StoryDataset::make(samples);
    CHECK(derived.label_vocabulary == std::vector<std::string>{"a", "b"});
    CHECK(derived.label_index("a") == 0);
    CHECK(derived.label_index("b") == 1);
    CHECK(derived.size() == 3);
    CHECK_FALSE(derived.empty());
    CHECK_THROWS_AS(derived.label_index("ghost"), DataError);

    // supplied vocabulary is kept verbatim, even unsorted
    StoryDataset given = StoryDataset::make(samples, {"b", "a", "zzz"});
    CHECK(given.label_vocabulary == std::vector<std::string>{"b", "a", "zzz"});
    CHECK(given.label_index("b") == 0);
    CHECK(given.label_index("zzz") == 2);

    CHECK_THROWS_AS(StoryDataset::make(samples, {"a"}), DataError);        // b uncovered
    CHECK_THROWS_AS(StoryDataset::make(samples, {"a", "b", "a"}), DataError); // duplicate

    StoryDataset empty = StoryDataset::make({});
    CHECK(empty.empty());
    CHECK(empty.label_vocabulary.empty());
}

TEST_CASE("argmax picks the first maximum") {
    PredictionDistribution d;
    d.scores = {0.25, 0.4, 0.4, 0.1};
    CHECK(d.argmax() == 1);
    d.scores = {0.5, 0.2, 0.3};
    CHECK(d.argmax() == 0);
    d.scores.clear();
    CHECK_THROWS_AS(d.argmax(), DataError);
}

TEST_CASE("config validation rejects out-of-range values") {
    ClassifierConfig ok = ClassifierConfig::reference_defaults();
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.backbone_id == "reference");

    ClassifierConfig c = ok;
    c.backbone_id = "";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.dropout = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.dropout = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.max_epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.patience_epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.patience_epochs = c.max_epochs + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.max_input_tokens = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("the reference backend separates a linearly separable corpus") {
    std::vector<Story> train_samples, val_samples;
    for (int i = 0; i < 20; ++i) {
        train_samples.push_back(make_story("the alpha marker appears here", "A", "t" + std::to_string(i)));
        train_samples.push_back(make_story("this text carries beta instead", "B", "u" + std::to_string(i)));
        train_samples.push_back(make_story("gamma closes the set of markers", "C", "v" + std::to_string(i)));
    }
    for (int i = 0; i < 4; ++i) {
        val_samples.push_back(make_story("alpha alpha alpha", "A", "w" + std::to_string(i)));
        val_samples.push_back(make_story("beta beta beta", "B", "x" + std::to_string(i)));
    }
    auto vocab = StoryDataset::make(train_samples).label_vocabulary;
    StoryDataset train = StoryDataset::make(train_samples, vocab);
    StoryDataset val = StoryDataset::make(val_samples, vocab);

    auto model = fit_reference(train, val, ClassifierConfig::reference_defaults());
    CHECK(model->backend_name() == "reference");
    CHECK(model->label_vocabulary() == vocab);
    CHECK(dataset_accuracy(*model, train) == doctest::Approx(1.0));
    CHECK(dataset_accuracy(*model, val) == doctest::Approx(1.0));

    // distribution is a proper probability vector
    auto dist = model->predict("alpha alpha");
    REQUIRE(dist.scores.size() == 3);
    double sum = 0.0;
    for (double p : dist.scores) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(model->label_vocabulary()[dist.argmax()] == "A");
}

TEST_CASE("top-k predictions are ordered and capped") {
    SplitSets sets = split_stories(hint_stories(40));
    auto model = fit_reference(sets.train, sets.val, ClassifierConfig::reference_defaults());

    const std::string text = sets.train.samples.front().text;
    auto dist = model->predict(text);
    auto top1 = predict_top_k(*model, text, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0] == model->label_vocabulary()[dist.argmax()]);

    auto top_all = predict_top_k(*model, text, 3);
    CHECK(top_all.size() == 3);
    // scores decrease along the returned labels
    double previous = 2.0;
    for (const auto& label : top_all) {
        double score = dist.scores[sets.train.label_index(label)];
        CHECK(score <= previous);
        previous = score;
    }

    auto capped = predict_top_k(*model, text, 100);
    CHECK(capped.size() == model->label_vocabulary().size());
    CHECK(predict_top_k(*model, text, 0).empty());
}

TEST_CASE("the reference backend memorizes hint stories") {
    SplitSets sets = split_stories(hint_stories(60));
    auto model = fit_reference(sets.train, sets.val, ClassifierConfig::reference_defaults());
    CHECK(dataset_accuracy(*model, sets.train) >= 0.9);
    CHECK(dataset_accuracy(*model, sets.val) >= 0.8);
}

TEST_CASE("deterministic transitions are learned from the sequence clause") {
    EventLog log = testlog::deterministic_log(40);
    StoryTemplate tmpl = default_template(SelectedFeatures{});
    auto stories = render_stories(log, tmpl, SelectedFeatures{});
    SplitSets sets = split_stories(stories);
    auto model = fit_reference(sets.train, sets.val, ClassifierConfig::reference_defaults());
    CHECK(dataset_accuracy(*model, sets.val) >= 0.95);
}

TEST_CASE("training curve respects the epoch budget") {
    SplitSets sets = split_stories(hint_stories(30));
    ClassifierConfig config = ClassifierConfig::reference_defaults();
    config.max_epochs = 7;
    config.patience_epochs = 2;
    auto model = fit_reference(sets.train, sets.val, config);
    const auto& curve = model->training_curve();
    CHECK(!curve.empty());
    CHECK(curve.size() <= 7);
    for (const auto& epoch : curve) {
        CHECK(epoch.val_accuracy >= 0.0);
        CHECK(epoch.val_accuracy <= 1.0);
        CHECK(epoch.train_loss >= 0.0);
    }
    CHECK(model->config().max_epochs == 7);
}

TEST_CASE("degenerate training inputs are data errors") {
    std::vector<Story> one_label = {make_story("a", "only", "c1"), make_story("b", "only", "c2")};
    StoryDataset train = StoryDataset::make(one_label);
    StoryDataset val = StoryDataset::make({make_story("c", "only", "c3")}, train.label_vocabulary);
    CHECK_THROWS_AS(fit_reference(train, val, ClassifierConfig::reference_defaults()), DataError);

    SplitSets sets = split_stories(hint_stories(20));
    CHECK_THROWS_AS(fit_reference(StoryDataset{}, sets.val, ClassifierConfig::reference_defaults()),
                    DataError);
    CHECK_THROWS_AS(fit_reference(sets.train, StoryDataset{}, ClassifierConfig::reference_defaults()),
                    DataError);

    // mismatched vocabularies between the splits
    StoryDataset other_vocab = StoryDataset::make(sets.val.samples);
    std::vector<std::string> extended = other_vocab.label_vocabulary;
    extended.push_back("zzz-extra");
    StoryDataset mismatched = StoryDataset::make(sets.val.samples, extended);
    CHECK_THROWS_AS(fit_reference(sets.train, mismatched, ClassifierConfig::reference_defaults()),
                    DataError);
}

TEST_CASE("predicting an empty story text is a data error") {
    SplitSets sets = split_stories(hint_stories(20));
    auto model = fit_reference(sets.train, sets.val, ClassifierConfig::reference_defaults());
    CHECK_THROWS_AS(model->predict(""), DataError);
    CHECK_THROWS_AS(dataset_accuracy(*model, StoryDataset{}), DataError);
}

TEST_CASE("saved models reload with bit-identical predictions") {
    SplitSets sets = split_stories(hint_stories(30));
    auto model = fit_reference(sets.train, sets.val, ClassifierConfig::reference_defaults());

    TempDir dir;
    auto path = dir / "model.bin";
    save_classifier(*model, path);
    auto loaded = load_classifier(path);

    CHECK(loaded->backend_name() == "reference");
    CHECK(loaded->label_vocabulary() == model->label_vocabulary());
    CHECK(loaded->config().learning_rate == model->config().learning_rate);
    for (const auto& story : sets.val.samples) {
        auto a = model->predict(story.text);
        auto b = loaded->predict(story.text);
        REQUIRE(a.scores.size() == b.scores.size());
        for (std::size_t i = 0; i < a.scores.size(); ++i) CHECK(a.scores[i] == b.scores[i]);
    }
}

TEST_CASE("model files with bad framing are data errors") {
    TempDir dir;
    CHECK_THROWS_AS(load_classifier(dir / "missing.bin"), DataError);

    auto junk = dir / "junk.bin";
    {
        std::ofstream out(junk, std::ios::binary);
        out << "NOTAMODELFILE-PADDING-PADDING";
    }
    CHECK_THROWS_AS(load_classifier(junk), DataError);

    // valid magic, then nothing
    auto truncated = dir / "truncated.bin";
    {
        std::ofstream out(truncated, std::ios::binary);
        out.write("SNAPMDL1", 8);
    }
    CHECK_THROWS_AS(load_classifier(truncated), DataError);
}

TEST_CASE("fitting is deterministic for a fixed seed") {
    SplitSets sets = split_stories(hint_stories(30));
    ClassifierConfig config = ClassifierConfig::reference_defaults();
    auto a = fit_reference(sets.train, sets.val, config);
    auto b = fit_reference(sets.train, sets.val, config);
    for (const auto& story : sets.val.samples) {
        auto pa = a->predict(story.text);
        auto pb = b->predict(story.text);
        REQUIRE(pa.scores.size() == pb.scores.size());
        for (std::size_t i = 0; i < pa.scores.size(); ++i) CHECK(pa.scores[i] == pb.scores[i]);
    }
    // repeated inference is stable too
    const std::string text = sets.val.samples.front().text;
    auto first = a->predict(text);
    auto second = a->predict(text);
    for (std::size_t i = 0; i < first.scores.size(); ++i)
        CHECK(first.scores[i] == second.scores[i]);
}

TEST_CASE("the backend dispatcher knows its names") {
    SplitSets sets = split_stories(hint_stories(20));
    auto model = fit_classifier("reference", sets.train, sets.val,
                                ClassifierConfig::reference_defaults());
    CHECK(model->backend_name() == "reference");
    CHECK_THROWS_AS(fit_classifier("bogus", sets.train, sets.val,
                                   ClassifierConfig::reference_defaults()),
                    ConfigError);
}
