#include "oracles.hpp"

#include "commgraph/api.hpp"
#include "commgraph/server.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace commgraph;
using nlohmann::json;

namespace {

Session annotatedSession() {
    auto corpus = std::make_shared<const Corpus>(oracle::syntheticCorpus(31, {5, 400}));
    GazetteerTagger tagger(CategorySet::defaults());
    tagger.addTerm("ORG", "Enron");
    tagger.addTerm("GPE", "Texas");
    tagger.addTerm("PERSON", "gamma");
    auto annotations = std::make_shared<const AnnotationIndex>(annotate(*corpus, tagger, tagger.categories()));
    SessionConfig cfg;
    cfg.clock = [] { return Timestamp{7}; };
    cfg.forest.treeCount = 15;
    return Session(corpus, annotations, cfg);
}

struct Running {
    Api api{annotatedSession()};
    HttpServer server{api};
    int port = server.bind("127.0.0.1", 0);
    std::thread thread{[this] { server.listen(); }};
    httplib::Client client{"127.0.0.1", port};

    Running() { server.waitUntilReady(); }
    ~Running() {
        server.stop();
        thread.join();
    }

    json get(const std::string& path, int status = 200) {
        auto res = client.Get(path);
        REQUIRE(res);
        CHECK_MESSAGE(res->status == status, path << " -> " << res->body);
        return json::parse(res->body);
    }

    json post(const std::string& path, const json& body, int status = 200) {
        auto res = client.Post(path, body.dump(), "application/json");
        REQUIRE(res);
        CHECK_MESSAGE(res->status == status, path << " -> " << res->body);
        return json::parse(res->body);
    }
};

} // namespace

TEST_CASE("summary and matrix") {
    Running r;
    const json summary = r.get("/corpus/summary");
    CHECK(summary["participants"] == 5);
    CHECK(summary["messages"] == 400);
    CHECK(summary["annotated"] == true);
    CHECK(summary["categories"].size() == 18);

    const json volume = r.get("/matrix");
    CHECK(volume["view"] == "volume");
    CHECK(volume["totalCount"] == 400);
    CHECK(volume["rows"].size() == 5);
    CHECK(r.get("/matrix?cellSize=40")["view"] == "distribution");
    CHECK(r.get("/matrix?cellSize=64")["cells"][0]["histogram"].size() == kDistributionPlusBins);
    const json dyn = r.get("/matrix?view=dynamics");
    CHECK(dyn["cells"][0].contains("episodes"));
    CHECK(r.get("/matrix?rowOrder=manual&rows=p4,p3,p2,p1,p0")["rows"][0] == "p4");
    const json window = r.get("/matrix?rowStart=1&rowCount=2&colStart=3");
    CHECK(window["window"] == json{{"rowStart", 1}, {"rowEnd", 3}, {"colStart", 3}, {"colEnd", 5}});
    for (const json& c : window["cells"]) CHECK((c["row"] == "p1" || c["row"] == "p2"));
    CHECK(r.get("/matrix?rowCount=-1", 400)["kind"] == "badRequest");

    CHECK(r.get("/matrix?view=bogus", 400)["kind"] == "badRequest");
    CHECK(r.get("/matrix?cellSize=abc", 400)["kind"] == "badRequest");
    CHECK(r.get("/matrix?node=9", 404)["kind"] == "notFound");
    CHECK(r.get("/matrix?rowOrder=manual&rows=p0", 400)["kind"] == "badRequest");
}

TEST_CASE("filters, cells and provenance") {
    Running r;
    const json sel = r.post("/filters", {{"levels",
                                          {{{"level", "thematic"}, {"enabled", true}, {"params", {{"query", "ORG OR GPE"}}}},
                                           {{"level", "userselection"},
                                            {"enabled", true},
                                            {"params", {{"exclude", {"p4"}}}}}}}});
    CHECK(sel["node"] == 1);
    CHECK(sel["messages"].get<std::size_t>() > 0);
    CHECK(sel["messages"].get<std::size_t>() < 400);
    CHECK(sel["state"]["levels"].size() == 7);

    const json cell = r.get("/cell/p0/p1?view=distribution&limit=3");
    CHECK(cell["records"].size() <= 3);
    CHECK(cell["histogram"].size() == kDistributionBins);
    for (const json& e : cell["entities"]) CHECK(e["count"].get<int>() > 0);
    CHECK(r.get("/cell/p0/nobody", 404)["kind"] == "notFound");

    const json err = r.post("/filters", {{"levels", {{{"level", "thematic"}, {"enabled", true}, {"params", {{"query", "ORG AND"}}}}}}}, 400);
    CHECK(err["kind"] == "level");
    CHECK(err["level"] == "thematic");
    const json bad = r.post("/filters", {{"levels", {{{"level", "timefilter"}, {"enabled", true}, {"params", {{"start", 5}, {"end", 1}}}}}}}, 400);
    CHECK(bad["level"] == "timefilter");
    CHECK(r.post("/filters", {{"levels", {{{"level", "nope"}}}}}, 400)["kind"] == "level");

    const json starred = r.post("/provenance/star", {{"nodeId", 1}, {"starred", true}, {"note", "ORG mail"}});
    CHECK(starred["starred"] == true);
    CHECK(starred["note"] == "ORG mail");
    const json back = r.post("/provenance/navigate", {{"nodeId", 0}});
    CHECK(back["messages"] == 400);
    const json g = r.get("/provenance/graph");
    CHECK(g["current"] == 0);
    CHECK(g["nodes"].size() == 2);
    CHECK(g["nodes"][1]["parent"] == 0);
    CHECK(r.post("/provenance/navigate", {{"nodeId", 50}}, 404)["kind"] == "notFound");
    CHECK(r.post("/provenance/navigate", json::object(), 400)["kind"] == "badRequest");

    auto report = r.client.Get("/report");
    REQUIRE(report);
    CHECK(report->status == 200);
    CHECK(report->get_header_value("Content-Type").find("text/markdown") == 0);
    CHECK(report->body.find("ORG mail") != std::string::npos);
    const ReplayResult replay = r.api.withSession([&](Session& s) { return replayReport(report->body, s.context()); });
    CHECK(replay.ok());
}

TEST_CASE("episodes and labels") {
    Running r;
    std::vector<std::string> ids;
    const json dyn = r.get("/matrix?view=dynamics");
    for (const json& c : dyn["cells"]) {
        for (const json& e : c["episodes"]) ids.push_back(e["id"]);
    }
    REQUIRE(ids.size() >= 3);
    const json ep = r.get("/episode/" + ids[0]);
    CHECK(ep["id"] == ids[0]);
    CHECK(ep["messages"].size() == ep["messageCount"]);
    CHECK(ep["features"].size() == 1 + 18 + 6);
    CHECK(r.get("/episode/9:9:9", 404)["kind"] == "notFound");

    CHECK(r.post("/episode/" + ids[0] + "/label", {{"label", "relevant"}})["modelTrained"] == false);
    CHECK(r.get("/ambiguous")["episodes"].empty());
    const json trained = r.post("/episode/" + ids[1] + "/label", {{"label", "irrelevant"}});
    CHECK(trained["modelTrained"] == true);
    CHECK(trained["labelCount"] == 2);
    const json amb = r.get("/ambiguous?k=2");
    CHECK(amb["episodes"].size() <= 2);
    CHECK(r.post("/episode/" + ids[2] + "/label", {{"label", "maybe"}}, 400)["kind"] == "badRequest");
    CHECK(r.post("/episode/" + ids[2] + "/label", json::object(), 400)["kind"] == "badRequest");

    const json scored = r.get("/episode/" + ids[1]);
    CHECK(scored["label"] == "irrelevant");
    CHECK(scored["modelTrained"] == true);
}

TEST_CASE("query parsing endpoint") {
    Running r;
    const json ok = r.post("/query/parse", {{"q", "person ~7 gpe AND law OR org"}});
    CHECK(ok["canonical"] == "PERSON ~7 GPE AND LAW OR ORG");
    CHECK(ok["ast"]["type"] == "or");
    CHECK(ok["ast"]["lhs"]["lhs"]["type"] == "seq");
    CHECK(ok["ast"]["lhs"]["lhs"]["gaps"][0] == 7);
    const json err = r.post("/query/parse", {{"q", "PERSON AND"}}, 400);
    CHECK(err["kind"] == "parse");
    CHECK(err["position"] == 10);
    auto raw = r.client.Post("/query/parse", "{oops", "application/json");
    REQUIRE(raw);
    CHECK(raw->status == 400);
}

TEST_CASE("error mapping") {
    CHECK(errorResponse(ParseError("x", 3)).first == 400);
    CHECK(errorResponse(NotFoundError("x")).first == 404);
    CHECK(errorResponse(DataError("x")).first == 400);
    CHECK(errorResponse(std::runtime_error("x")).first == 500);
}
