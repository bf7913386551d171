#include "commgraph/forest.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace commgraph;

namespace {

std::vector<LabeledExample> clusters(std::uint64_t seed, int perClass, double separation) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<LabeledExample> out;
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < perClass; ++i) {
            const double centre = c == 1 ? separation : 0.0;
            out.push_back({"s" + std::to_string(seed) + "-" + std::to_string(c) + "-" + std::to_string(i),
                           c == 1 ? Label::Relevant : Label::Irrelevant,
                           {centre + noise(rng), centre + noise(rng)}});
        }
    }
    return out;
}

DecisionTree leaf(Label l) {
    DecisionTree t;
    t.nodes.push_back({-1, 0.0, -1, -1, l});
    return t;
}

} // namespace

TEST_CASE("labels") {
    CHECK(parseLabel("relevant") == Label::Relevant);
    CHECK(parseLabel("irrelevant") == Label::Irrelevant);
    CHECK(labelName(Label::Relevant) == "relevant");
    CHECK_THROWS_AS(parseLabel("maybe"), UsageError);
}

TEST_CASE("training needs both classes") {
    CHECK_THROWS_AS(train({}, {}), DataError);
    CHECK_THROWS_AS(train({{"a", Label::Relevant, {1.0}}, {"b", Label::Relevant, {2.0}}}, {}), DataError);
    CHECK_THROWS_AS(train({{"a", Label::Relevant, {1.0}}, {"b", Label::Irrelevant, {2.0, 3.0}}}, {}), DataError);
}

TEST_CASE("a separable pair is split on the separating feature") {
    const std::vector<LabeledExample> ex{{"a", Label::Relevant, {0.0, 5.0, 1.0}},
                                         {"b", Label::Irrelevant, {0.0, -5.0, 1.0}}};
    const RelevanceModel m = train(ex, {});
    CHECK(m.trees().size() == 100);
    for (const DecisionTree& t : m.trees()) {
        REQUIRE(!t.nodes.empty());
        CHECK(t.nodes[0].feature == 1);
        CHECK(t.nodes[0].threshold == 0.0);
    }
    for (const auto& e : ex) CHECK(m.score(e.features).p == (e.label == Label::Relevant ? 1.0 : 0.0));
}

TEST_CASE("training is deterministic and order independent") {
    auto ex = clusters(3, 20, 3.0);
    ForestConfig cfg;
    cfg.seed = 42;
    const std::string a = serializeModel(train(ex, cfg));
    std::reverse(ex.begin(), ex.end());
    CHECK(serializeModel(train(ex, cfg)) == a);
    cfg.seed = 43;
    CHECK(serializeModel(train(ex, cfg)) != a);
}

TEST_CASE("held-out accuracy on two clusters") {
    const RelevanceModel m = train(clusters(11, 20, 3.0), {});
    const auto test = clusters(12, 100, 3.0);
    int correct = 0;
    for (const auto& e : test) correct += (m.score(e.features).p >= 0.5) == (e.label == Label::Relevant);
    CHECK(static_cast<double>(correct) / static_cast<double>(test.size()) >= 0.95);
}

TEST_CASE("hand-built model votes") {
    DecisionTree split;
    split.nodes = {{0, 0.5, 1, 2, Label::Irrelevant}, {-1, 0, -1, -1, Label::Irrelevant}, {-1, 0, -1, -1, Label::Relevant}};
    const RelevanceModel m({3, 8, 1, 1}, 1, {leaf(Label::Relevant), split, leaf(Label::Irrelevant)});
    const std::vector<double> hi{1.0}, lo{0.0};
    CHECK(m.score(hi).p == doctest::Approx(2.0 / 3.0));
    CHECK(m.score(lo).p == doctest::Approx(1.0 / 3.0));
    CHECK(m.score(hi).uncertainty == doctest::Approx(2.0 / 3.0));
    const auto paths = m.explain(hi);
    REQUIRE(paths.size() == 3);
    CHECK(paths[1].size() == 2);
    CHECK(paths[1].back() == "relevant");
    CHECK(scoreFromVotes(0.5).uncertainty == 1.0);
    CHECK(scoreFromVotes(1.0).uncertainty == 0.0);
    CHECK(scoreFromVotes(0.0).uncertainty == 0.0);
}

TEST_CASE("serialization reloads identically") {
    const RelevanceModel m = train(clusters(5, 10, 2.0), {20, 4, 2, 9});
    const RelevanceModel back = modelFromJson(nlohmann::json::parse(serializeModel(m)));
    CHECK(back == m);
    CHECK(serializeModel(back) == serializeModel(m));
    nlohmann::json broken = toJson(m);
    broken["trees"][0][0]["f"] = 7;
    CHECK_THROWS(modelFromJson(broken));
    CHECK_THROWS(modelFromJson(nlohmann::json{{"format", "other"}}));
}

TEST_CASE("forest config json") {
    const ForestConfig c = forestConfigFromJson({{"trees", 7}, {"seed", 3}});
    CHECK(c.treeCount == 7);
    CHECK(c.seed == 3);
    CHECK(c.maxDepth == 8);
    CHECK(forestConfigFromJson(toJson(c)) == c);
    CHECK_THROWS(forestConfigFromJson({{"trees", 0}}));
    CHECK_THROWS(forestConfigFromJson({{"bogus", 1}}));
}

TEST_CASE("ambiguity ranking") {
    const RelevanceModel m({1, 8, 1, 1}, 1, {leaf(Label::Relevant)});
    std::vector<ScoredTarget> same{{"c", {0.0}}, {"a", {0.0}}, {"b", {0.0}}};
    CHECK(rankAmbiguous(m, same, 2) == std::vector<std::string>{"a", "b"});
    CHECK(rankAmbiguous(m, same, 10).size() == 3);
    CHECK(rankAmbiguous(m, same, 10, {"a"}) == std::vector<std::string>{"b", "c"});

    const RelevanceModel trained = train(clusters(8, 15, 1.5), {});
    const auto pool = clusters(9, 30, 1.5);
    std::vector<ScoredTarget> targets;
    for (const auto& e : pool) targets.push_back({e.targetId, e.features});
    const auto ranked = rankAmbiguous(trained, targets, 15);
    std::vector<std::pair<double, std::string>> oracle;
    for (const auto& t : targets) oracle.emplace_back(-trained.score(t.features).uncertainty, t.targetId);
    std::sort(oracle.begin(), oracle.end());
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i] == oracle[i].second);
}

TEST_CASE("fade factor") {
    CHECK(fadeFactor(0.7, 0.7) == 1.0);
    CHECK(fadeFactor(0.0, 0.7) == kFadeFloor);
    CHECK(fadeFactor(1.0, 0.0) == 1.0);
    for (int t = 0; t <= 100; t += 5) {
        double last = 0;
        for (int i = 0; i <= 100; ++i) {
            const double f = fadeFactor(i / 100.0, t / 100.0);
            CHECK(f >= kFadeFloor);
            CHECK(f <= 1.0);
            CHECK(f >= last);
            last = f;
        }
    }
}

TEST_CASE("conjunctive decision") {
    const std::vector<double> s{0.9, 0.6}, t{0.5, 0.5}, hi{0.5, 0.7};
    CHECK(conjunctiveDecision(s, t));
    CHECK_FALSE(conjunctiveDecision(s, hi));
    CHECK_THROWS(conjunctiveDecision(std::span<const double>{}, std::span<const double>{}));
    CHECK_THROWS(conjunctiveDecision(s, std::span<const double>(t).first(1)));
}
