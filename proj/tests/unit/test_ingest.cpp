#include "commgraph/demo.hpp"
#include "commgraph/ingest.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace commgraph;

namespace {

IngestResult ingestText(const std::string& text, InputFormat format, const std::string& mapping) {
    std::istringstream in(text);
    return ingest(in, format, FieldMapping::parse(mapping));
}

std::string serialized(const Corpus& c) {
    std::ostringstream out;
    saveCorpus(c, out);
    return out.str();
}

} // namespace

TEST_CASE("mapping parser") {
    const FieldMapping m = FieldMapping::parse("sender=from,receiver=to,time=date,content=body");
    CHECK(m.sender == "from");
    CHECK(m.receiver == "to");
    CHECK(m.time == "date");
    CHECK(m.content == "body");
    CHECK_THROWS_AS(FieldMapping::parse("sender=from,time=date"), UsageError);
    CHECK_THROWS_AS(FieldMapping::parse("sender=from,receiver=to,time=date,colour=x"), UsageError);
    CHECK_THROWS_AS(FieldMapping::parse("sender"), UsageError);
}

TEST_CASE("csv reader handles quotes and embedded newlines") {
    std::istringstream in("a,b,c\n\"x, y\",\"he said \"\"hi\"\"\",\"line1\nline2\"\nlast,,\n");
    CsvReader r(in, ',');
    std::vector<std::string> f;
    std::size_t line = 0;
    REQUIRE(r.next(f, line));
    CHECK(f == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(r.next(f, line));
    CHECK(line == 2);
    CHECK(f == std::vector<std::string>{"x, y", "he said \"hi\"", "line1\nline2"});
    REQUIRE(r.next(f, line));
    CHECK(line == 4);
    CHECK(f == std::vector<std::string>{"last", "", ""});
    CHECK_FALSE(r.next(f, line));
}

TEST_CASE("empty stream gives an empty corpus") {
    const auto r = ingestText("", InputFormat::Csv, "sender=from,receiver=to,time=date");
    CHECK(r.corpus.messageCount() == 0);
    CHECK(r.corpus.participantCount() == 0);
    CHECK_FALSE(r.corpus.timeExtent().has_value());
}

TEST_CASE("multiple recipients become one message each with a shared group") {
    const auto r = ingestText("id,from,to,date,body\nx1,A,B;C;D,2001-01-01,hello\n", InputFormat::Csv,
                              "id=id,sender=from,receiver=to,time=date,content=body");
    REQUIRE(r.corpus.messageCount() == 3);
    std::set<std::string> receivers;
    for (const Message& m : r.corpus.messages()) {
        CHECK(r.corpus.participantId(m.sender) == "A");
        CHECK(m.meta.at("group") == "x1");
        CHECK(m.content == "hello");
        receivers.insert(r.corpus.participantId(m.receiver));
    }
    CHECK(receivers == std::set<std::string>{"B", "C", "D"});
    CHECK(r.corpus.participantCount() == 4);
}

TEST_CASE("bad records are rejected with line numbers and ingest continues") {
    const std::string csv =
        "from,to,date,body,subject\n"
        "A,B,2001-01-01,ok,s1\n"
        ",B,2001-01-01,no sender,s2\n"
        "A,,2001-01-01,no recipient,s3\n"
        "A,B,,no time,s4\n"
        "A,B,someday,bad time,s5\n"
        "B,A,978307300,ok too,s6\n";
    const auto r = ingestText(csv, InputFormat::Csv, "sender=from,receiver=to,time=date,content=body");
    CHECK(r.records == 6);
    CHECK(r.corpus.messageCount() == 2);
    REQUIRE(r.rejects.size() == 4);
    CHECK(r.rejects[0].line == 3);
    CHECK(r.rejects[1].line == 4);
    CHECK(r.rejects[2].line == 5);
    CHECK(r.rejects[3].line == 6);
    CHECK(r.rejects[3].reason.find("someday") != std::string::npos);
    // Unmapped columns land in meta; generated ids use the line.
    const Message& first = r.corpus.message(*r.corpus.findMessage("r2"));
    CHECK(first.meta.at("subject") == "s1");
}

TEST_CASE("duplicate ids are rejected per record") {
    const auto r = ingestText("id,from,to,date\na,A,B,1\na,A,C,2\nb,A,B;C,3\nb:0,A,B,4\n", InputFormat::Csv,
                              "id=id,sender=from,receiver=to,time=date");
    CHECK(r.corpus.messageCount() == 3);
    REQUIRE(r.rejects.size() == 2);
    CHECK(r.rejects[0].line == 3);
    CHECK(r.rejects[1].line == 5);
}

TEST_CASE("jsonl ingest") {
    const std::string text =
        "{\"id\":\"1\",\"from\":\"a\",\"to\":[\"b\",\"c\"],\"t\":978307200,\"body\":\"hi\",\"x\":5}\n"
        "\n"
        "not json\n"
        "{\"id\":\"2\",\"from\":\"b\",\"to\":\"a\",\"t\":\"2001-01-02T00:00:00Z\"}\n";
    const auto r = ingestText(text, InputFormat::Jsonl, "id=id,sender=from,receiver=to,time=t,content=body");
    CHECK(r.corpus.messageCount() == 3);
    REQUIRE(r.rejects.size() == 1);
    CHECK(r.rejects[0].line == 3);
    const Message& m = r.corpus.message(*r.corpus.findMessage("1:0"));
    CHECK(m.meta.at("x") == "5");
    CHECK(r.corpus.message(*r.corpus.findMessage("2")).timestamp == 978393600);
}

TEST_CASE("ingest is deterministic") {
    const DemoFixture fx = makeFraudFixture({151, 2000, 5, 9});
    std::istringstream a(fx.csv), b(fx.csv);
    const auto r1 = ingest(a, InputFormat::Csv, demoMapping());
    const auto r2 = ingest(b, InputFormat::Csv, demoMapping());
    CHECK(serialized(r1.corpus) == serialized(r2.corpus));
    CHECK(r1.rejects.empty());
}

TEST_CASE("mapping to a missing column is a usage error") {
    CHECK_THROWS_AS(ingestText("a,b,c\n1,2,3\n", InputFormat::Csv, "sender=a,receiver=b,time=zzz"), UsageError);
}
