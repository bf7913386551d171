#include "oracles.hpp"

#include "commgraph/query.hpp"

#include <doctest.h>

using namespace commgraph;

namespace {

const CategorySet& cats() {
    static const CategorySet c = CategorySet::defaults();
    return c;
}

CategoryId id(std::string_view name) { return cats().require(name); }

ConceptQuery parse(std::string_view text) { return parseQuery(text, cats()); }

std::size_t errorAt(std::string_view text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.position();
    }
    FAIL("no parse error for: " << text);
    return 0;
}

EntityAnnotation span(std::uint32_t word, std::string_view category, std::uint32_t len = 1) {
    return {word, word + len, id(category), "x"};
}

} // namespace

TEST_CASE("proximity sequence") {
    const ConceptQuery q = parse("PERSON ~7 GPE");
    REQUIRE(q.kind() == ConceptQuery::Kind::Seq);
    CHECK(q.atoms() == std::vector<CategoryId>{id("PERSON"), id("GPE")});
    CHECK(q.gaps() == std::vector<ConceptQuery::Gap>{7u});
}

TEST_CASE("precedence: sequence binds tighter than AND, AND tighter than OR") {
    const ConceptQuery q = parse("PERSON ~7 GPE AND LAW OR ORG");
    const ConceptQuery expected = ConceptQuery::either(
        ConceptQuery::both(ConceptQuery::sequence({id("PERSON"), id("GPE")}, {7u}), ConceptQuery::atom(id("LAW"))),
        ConceptQuery::atom(id("ORG")));
    CHECK(q == expected);
    CHECK(printQuery(q, cats()) == "PERSON ~7 GPE AND LAW OR ORG");
}

TEST_CASE("parentheses, case and associativity") {
    CHECK(parse("person and (gpe or law)") ==
          ConceptQuery::both(ConceptQuery::atom(id("PERSON")),
                             ConceptQuery::either(ConceptQuery::atom(id("GPE")), ConceptQuery::atom(id("LAW")))));
}

TEST_CASE("unbounded adjacency and single-element sequences") {
    const ConceptQuery q = parse("PERSON ORG ~2 LAW");
    REQUIRE(q.kind() == ConceptQuery::Kind::Seq);
    CHECK(q.gaps() == std::vector<ConceptQuery::Gap>{std::nullopt, 2u});
    CHECK(ConceptQuery::sequence({id("LAW")}, {}) == ConceptQuery::atom(id("LAW")));
    CHECK(parse("(LAW)") == ConceptQuery::atom(id("LAW")));
}

TEST_CASE("parse errors carry positions") {
    CHECK(errorAt("") == 0);
    CHECK(errorAt("   ") == 0);
    CHECK(errorAt("FOO") == 0);
    CHECK(errorAt("PERSON AND") == 10);
    CHECK(errorAt("(PERSON") == 7);
    CHECK(errorAt("PERSON )") == 7);
    CHECK(errorAt("PERSON ~ GPE") == 7);
    CHECK(errorAt("~3 GPE") == 0);
    CHECK(errorAt("PERSON ~3") == 7);
    CHECK(errorAt("PERSON ~3 AND LAW") == 7);
    CHECK(errorAt("PERSON ()") == 8);
    CHECK(errorAt("PERSON & LAW") == 7);
    CHECK(errorAt("PERSON (GPE OR LAW)") == 7);
    CHECK(errorAt("OR LAW") == 0);
}

TEST_CASE("word distance semantics") {
    const ConceptQuery q = parse("PERSON ~7 GPE");
    const std::vector<EntityAnnotation> seven{span(0, "PERSON"), span(8, "GPE")};
    const std::vector<EntityAnnotation> eight{span(0, "PERSON"), span(9, "GPE")};
    CHECK(matches(q, seven));
    CHECK_FALSE(matches(q, eight));
    // Order matters.
    CHECK_FALSE(matches(q, std::vector<EntityAnnotation>{span(0, "GPE"), span(2, "PERSON")}));
    // Multi-word spans measure from the end of the earlier span.
    CHECK(matches(q, std::vector<EntityAnnotation>{span(0, "PERSON", 3), span(10, "GPE")}));
    CHECK(matches(parse("PERSON ~0 GPE"), std::vector<EntityAnnotation>{span(0, "PERSON"), span(1, "GPE")}));
    CHECK_FALSE(matches(parse("PERSON"), std::vector<EntityAnnotation>{}));
}

TEST_CASE("print and parse round trip") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 1000; ++i) {
        const ConceptQuery q = oracle::randomQuery(rng, cats(), 4);
        const std::string text = printQuery(q, cats());
        CHECK_MESSAGE(parse(text) == q, text);
    }
}

TEST_CASE("matcher agrees with exhaustive enumeration") {
    std::mt19937_64 rng(77);
    const CategorySet small({"A", "B", "C", "D"});
    for (int i = 0; i < 2000; ++i) {
        const ConceptQuery q = oracle::randomQuery(rng, small, 3);
        const auto ann = oracle::randomAnnotations(rng, small.size(), 8);
        CHECK(matches(q, ann) == oracle::enumerateMatches(q, ann));
    }
}
