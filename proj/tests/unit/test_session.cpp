#include "oracles.hpp"

#include "commgraph/session.hpp"

#include <doctest.h>

using namespace commgraph;

namespace {

Session makeSession(std::uint64_t seed) {
    SessionConfig cfg;
    cfg.clock = [] { return Timestamp{42}; };
    cfg.dynamics.sigma = 4 * 3600;
    cfg.forest.treeCount = 25;
    return Session(std::make_shared<const Corpus>(oracle::syntheticCorpus(seed, {5, 400})), nullptr, cfg);
}

} // namespace

TEST_CASE("root state and commits") {
    Session s = makeSession(1);
    CHECK(s.provenance().size() == 1);
    CHECK(s.selection().size() == s.corpus().messageCount());
    CHECK(s.state().params<DynamicsParams>(kDynamicsLevel).sigma == 4 * 3600);
    CHECK(s.provenance().node(0).createdAt == 42);

    AnalysisState st = s.state();
    st.level(kUserSelectionLevel) = {true, UserSelectionParams{{"p0"}, {}, UserRole::Sender}};
    const NodeId a = s.commit(st);
    CHECK(a == 1);
    CHECK(s.commit(st) == a);
    CHECK(oracle::ids(s.corpus(), s.selection()) == oracle::scanUsers(s.corpus(), {{"p0"}, {}, UserRole::Sender}));

    st.level(kUserSelectionLevel).enabled = false;
    st.level(kTimefilterLevel) = {true, TimeFilterParams{{978307200, 978307200 + 7 * 86400}}};
    s.commit(st);
    CHECK(s.provenance().size() == 3);
    CHECK(s.navigate(1).size() == oracle::scanUsers(s.corpus(), {{"p0"}, {}, UserRole::Sender}).size());
    CHECK(s.provenance().current() == 1);
    CHECK(s.state().level(kUserSelectionLevel).enabled);

    st.level(kUserSelectionLevel) = {true, UserSelectionParams{{"nobody"}, {}, UserRole::Either}};
    CHECK_THROWS_AS(s.commit(st), LevelError);
    CHECK(s.provenance().size() == 3);
    CHECK_THROWS_AS(s.navigate(99), NotFoundError);
}

TEST_CASE("thematic level without annotations is rejected") {
    Session s = makeSession(2);
    AnalysisState st = s.state();
    st.level(kThematicLevel) = {true, ThematicParams{"PERSON"}};
    CHECK_THROWS_AS(s.commit(st), LevelError);
}

TEST_CASE("episodes follow the current selection") {
    Session s = makeSession(3);
    const auto all = s.allEpisodes();
    REQUIRE(!all.empty());
    std::size_t members = 0;
    for (const Episode& e : all) members += e.messages.size();
    CHECK(members == s.corpus().messageCount());

    AnalysisState st = s.state();
    st.level(kUserSelectionLevel) = {true, UserSelectionParams{{}, {"p1"}, UserRole::Either}};
    s.commit(st);
    for (const Episode& e : s.allEpisodes()) {
        CHECK(e.row != 1);
        CHECK(e.col != 1);
    }
    CHECK(s.episodes(0, 1).empty());
    CHECK_THROWS_AS(s.episodes(0, 99), NotFoundError);
    CHECK_THROWS_AS(s.resolveEpisode("bogus"), NotFoundError);
    CHECK_THROWS_AS(s.resolveEpisode("0:1:0"), NotFoundError);
}

TEST_CASE("labels train a model") {
    Session s = makeSession(4);
    const auto eps = s.allEpisodes();
    REQUIRE(eps.size() >= 4);
    CHECK(s.featureNames().size() == s.features(eps[0]).size());
    CHECK(s.featureNames().front() == "volume.pairMessages");

    const auto first = s.label(eps[0].ref().toString(), Label::Relevant);
    CHECK(first.labelCount == 1);
    CHECK_FALSE(first.modelTrained);
    for (const auto& e : first.episodes) CHECK(e.fadeFactor == 1.0);
    CHECK(s.ambiguous(3).empty());

    const auto second = s.label(eps[1].ref().toString(), Label::Irrelevant);
    CHECK(second.modelTrained);
    CHECK(second.episodes.size() == eps.size());
    for (const auto& e : second.episodes) {
        CHECK(e.score.p >= 0.0);
        CHECK(e.score.p <= 1.0);
        CHECK(e.fadeFactor >= kFadeFloor);
    }
    const auto amb = s.ambiguous(eps.size());
    CHECK(amb.size() == eps.size() - 2);
    for (const auto& id : amb) {
        CHECK(id != eps[0].ref().toString());
        CHECK(id != eps[1].ref().toString());
    }

    // Relabeling the same target replaces the example.
    const auto third = s.label(eps[1].ref().toString(), Label::Relevant);
    CHECK(third.labelCount == 2);
    CHECK_FALSE(third.modelTrained);
}

TEST_CASE("the model depends only on the labels") {
    Session a = makeSession(5);
    Session b = makeSession(5);
    const auto eps = a.allEpisodes();
    REQUIRE(eps.size() >= 3);
    std::mt19937_64 rng(2);
    oracle::randomSession(rng, b, 10);
    b.navigate(0);
    for (Session* s : {&a, &b}) {
        s->label(eps[2].ref().toString(), Label::Irrelevant);
        s->label(eps[0].ref().toString(), Label::Relevant);
    }
    REQUIRE(a.model());
    CHECK(serializeModel(*a.model()) == serializeModel(*b.model()));
}
