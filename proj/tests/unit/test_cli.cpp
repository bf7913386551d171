#include <doctest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(COMMGRAPH_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("commgraph-cli-" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("demo fixture through ingest, annotate and query") {
    TempDir dir;
    REQUIRE(cli("demo --out-dir " + dir / "a" + " --messages 4000").code == 0);
    REQUIRE(cli("demo --out-dir " + dir / "b" + " --messages 4000").code == 0);
    CHECK(slurp(dir / "a/fraud.csv") == slurp(dir / "b/fraud.csv"));
    const auto truth = nlohmann::json::parse(slurp(dir / "a/truth.json"));

    const Run ingest = cli("ingest --input " + dir / "a/fraud.csv" + " --map " + truth["mapping"].get<std::string>() +
                           " --out " + dir / "c.corpus");
    REQUIRE(ingest.code == 0);
    CHECK(ingest.out.find("rejected 0") != std::string::npos);
    REQUIRE(cli("annotate --corpus " + dir / "c.corpus" + " --gazetteer " + dir / "a/gazetteer.txt" + " --out " +
                dir / "c.ann")
                .code == 0);
    const Run q = cli("query --corpus " + dir / "c.corpus" + " --annotations " + dir / "c.ann" + " --q \"PERSON ~7 GPE\"");
    REQUIRE(q.code == 0);
    std::string expected;
    for (const auto& id : truth["plantedMessageIds"]) expected += id.get<std::string>() + "\n";
    CHECK(q.out == expected);

    const Run windowed = cli("query --corpus " + dir / "c.corpus" + " --annotations " + dir / "c.ann" +
                             " --q \"PERSON AND ORG AND GPE AND LAW\" --from 2001-01-01 --to 2001-09-30T23:59:59Z");
    CHECK(windowed.code == 0);
    CHECK(!windowed.out.empty());

    const Run bad = cli("query --corpus " + dir / "c.corpus" + " --annotations " + dir / "c.ann" + " --q \"PERSON AND\"");
    CHECK(bad.code == 2);

    const Run eps = cli("episodes --corpus " + dir / "c.corpus" + " --sigma 3600 --theta 1.5");
    CHECK(eps.code == 0);
    CHECK(!eps.out.empty());
    CHECK(cli("episodes --corpus " + dir / "c.corpus" + " --sigma -1").code == 2);
}

TEST_CASE("empty corpus and exit codes") {
    TempDir dir;
    spit(dir / "empty.csv", "from,to,date\n");
    REQUIRE(cli("ingest --input " + dir / "empty.csv" + " --map sender=from,receiver=to,time=date --out " +
                dir / "e.corpus")
                .code == 0);
    const Run eps = cli("episodes --corpus " + dir / "e.corpus");
    CHECK(eps.code == 0);
    CHECK(eps.out.empty());

    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("episodes").code == 1);
    CHECK(cli("ingest --input " + dir / "empty.csv" + " --map sender=from --out " + dir / "x").code == 1);
    CHECK(cli("episodes --corpus " + dir / "missing.corpus").code == 2);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("rejected records are counted") {
    TempDir dir;
    spit(dir / "m.csv", "id,from,to,date,body\n1,a,b,2001-01-01,hi\n2,,b,2001-01-02,x\n3,a,b,not a date,x\n1,a,c,2001-01-03,dup\n");
    const Run r = cli("ingest --input " + dir / "m.csv" + " --map id=id,sender=from,receiver=to,time=date,content=body --out " +
                      dir / "m.corpus");
    CHECK(r.code == 0);
    CHECK(r.out == "records 4, messages 1, participants 2, rejected 3\n");
}

TEST_CASE("script, report and replay") {
    TempDir dir;
    spit(dir / "m.jsonl",
         "{\"id\":\"a1\",\"from\":\"ann\",\"to\":[\"bob\",\"cy\"],\"t\":\"2001-02-01T10:00:00Z\",\"body\":\"deal\"}\n"
         "{\"id\":\"a2\",\"from\":\"bob\",\"to\":\"ann\",\"t\":981025200,\"body\":\"ok\"}\n"
         "{\"id\":\"a3\",\"from\":\"cy\",\"to\":\"ann\",\"t\":\"2001-03-01\",\"body\":\"deal again\"}\n");
    REQUIRE(cli("ingest --format jsonl --input " + dir / "m.jsonl" +
                " --map id=id,sender=from,receiver=to,time=t,content=body --out " + dir / "m.corpus")
                .code == 0);
    spit(dir / "script.json",
         R"([{"filters":{"levels":[{"level":"keyword","enabled":true,"params":{"terms":["deal"]}}]}},)"
         R"({"star":1,"note":"deals"},{"navigate":0},)"
         R"({"filters":{"levels":[{"level":"timefilter","enabled":true,"params":{"start":"2001-02-01","end":"2001-02-28"}}]}}])");
    REQUIRE(cli("report --corpus " + dir / "m.corpus" + " --script " + dir / "script.json" + " --out " + dir / "r.md")
                .code == 0);
    const std::string report = slurp(dir / "r.md");
    CHECK(report.find("deals") != std::string::npos);
    const Run replay = cli("report --corpus " + dir / "m.corpus" + " --replay " + dir / "r.md");
    CHECK(replay.code == 0);
    CHECK(replay.out == "nodes 3, corpus matches, mismatches 0\n");

    spit(dir / "other.jsonl", "{\"id\":\"z\",\"from\":\"ann\",\"to\":\"bob\",\"t\":1}\n");
    REQUIRE(cli("ingest --format jsonl --input " + dir / "other.jsonl" + " --map id=id,sender=from,receiver=to,time=t --out " +
                dir / "o.corpus")
                .code == 0);
    CHECK(cli("report --corpus " + dir / "o.corpus" + " --replay " + dir / "r.md").code == 2);

    spit(dir / "bad.json", R"([{"jump":1}])");
    CHECK(cli("report --corpus " + dir / "m.corpus" + " --script " + dir / "bad.json").code == 2);
}
