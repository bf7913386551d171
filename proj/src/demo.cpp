#include "commgraph/demo.hpp"

#include "commgraph/timeparse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace commgraph {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::size_t below(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <class T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

private:
    std::mt19937_64 engine_;
};

const std::vector<std::string> kFirstNames{"Avery", "Blake",  "Casey", "Devon",  "Emery", "Finley", "Harper",
                                           "Jordan", "Kendall", "Logan", "Morgan", "Parker", "Quinn",  "Reese",
                                           "Rowan", "Sawyer", "Taylor", "Tatum",  "Wren",  "Skyler"};
const std::vector<std::string> kLastNames{"Abernathy", "Brightwater", "Castellano", "Drummond", "Ellsworth",
                                          "Fairbanks", "Galloway",    "Hargrove",   "Iverson",  "Kensington",
                                          "Lockhart",  "Merriweather", "Northcott", "Pendleton", "Ravensworth"};
const std::vector<std::string> kOrgs{"Northwind Energy", "Pacific Grid Partners", "Sierra Power Trading",
                                     "Golden Gate Utilities", "Redwood Capital", "Summit Gas Marketing"};
const std::vector<std::string> kLaws{"Federal Power Act", "Securities Exchange Act", "Public Utility Code",
                                     "Market Conduct Rules", "Emergency Tariff Order"};
const std::vector<std::string> kFiller{
    "schedule", "meeting",  "report",   "draft",    "update",  "forecast", "numbers", "review",  "call",
    "please",   "attached", "comments", "tomorrow", "thanks",  "deal",     "desk",    "volume",  "prices",
    "team",     "offsite",  "budget",   "contract", "position", "storage", "pipeline", "weekly", "notes",
    "agenda",   "follow",   "quick",    "question", "summary", "lunch",    "travel",  "plan",    "status"};

std::string fillerSentence(Rng& rng, std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out += ' ';
        out += rng.pick(kFiller);
    }
    return out;
}

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string participantId(std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "user%03zu@northwind.example", i);
    return buf;
}

/// Heavy-tailed participant sampler: weight 1/(rank+1)^1.1 over a seeded
/// permutation.
class ZipfPicker {
public:
    ZipfPicker(std::size_t n, Rng& rng) : order_(n), cumulative_(n) {
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
        double total = 0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), 1.1);
            cumulative_[r] = total;
        }
        for (double& c : cumulative_) c /= total;
    }

    std::size_t operator()(Rng& rng) const {
        const double u = rng.unit();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return order_[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), order_.size() - 1)];
    }

private:
    std::vector<std::size_t> order_;
    std::vector<double> cumulative_;
};

struct Row {
    std::string id;
    std::string from;
    std::string to;
    Timestamp time = 0;
    std::string subject;
    std::string body;
};

void writeRows(std::ostringstream& out, std::vector<Row>& rows) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time || (a.time == b.time && a.id < b.id); });
    out << "id,from,to,date,subject,body\n";
    for (const Row& r : rows) {
        out << r.id << ',' << csvField(r.from) << ',' << csvField(r.to) << ',' << formatTimestamp(r.time) << ','
            << csvField(r.subject) << ',' << csvField(r.body) << '\n';
    }
}

Timestamp uniformTime(Rng& rng, Timestamp lo, Timestamp hi) {
    return lo + static_cast<Timestamp>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
}

/// Background message: filler, sometimes a person, organization or law but
/// never a place.
Row backgroundRow(Rng& rng, const ZipfPicker& senders, const ZipfPicker& receivers, std::size_t participants,
                  const std::string& id, Timestamp lo, Timestamp hi, bool allowMulti) {
    Row r;
    r.id = id;
    const std::size_t from = senders(rng);
    std::size_t to = receivers(rng);
    if (to == from) to = (to + 1) % participants;
    r.from = participantId(from);
    r.to = participantId(to);
    if (allowMulti && rng.below(20) == 0) {
        std::size_t cc = receivers(rng);
        if (cc != from && cc != to) r.to += ";" + participantId(cc);
    }
    r.time = uniformTime(rng, lo, hi);
    r.subject = fillerSentence(rng, 2 + rng.below(3));
    r.body = fillerSentence(rng, 6 + rng.below(20));
    const std::size_t extra = rng.below(10);
    if (extra == 0) r.body += " ask " + rng.pick(kFirstNames) + " " + rng.pick(kLastNames) + " " + fillerSentence(rng, 3);
    else if (extra == 1) r.body += " with " + rng.pick(kOrgs) + " " + fillerSentence(rng, 2);
    else if (extra == 2) r.body += " under the " + rng.pick(kLaws);
    r.body += ".";
    return r;
}

std::string personName(Rng& rng) { return rng.pick(kFirstNames) + " " + rng.pick(kLastNames); }

} // namespace

FieldMapping demoMapping() { return FieldMapping::parse("id=id,sender=from,receiver=to,time=date,content=body"); }

DemoFixture makeFraudFixture(const DemoOptions& options) {
    if (options.participants < options.plantedSenders + 2) throw UsageError("too few participants for the fixture");
    Rng rng(options.seed);
    const std::size_t n = options.participants;

    // Planted actors.
    std::vector<std::size_t> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) shuffled[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const std::size_t receiver = shuffled[0];
    std::vector<std::size_t> senders(shuffled.begin() + 1, shuffled.begin() + 1 + static_cast<std::ptrdiff_t>(options.plantedSenders));

    const Timestamp windowStart = makeTimestamp(2001, 1, 1);
    const Timestamp windowEnd = makeTimestamp(2001, 9, 30, 23, 59, 59);
    const Timestamp corpusStart = makeTimestamp(1999, 1, 1);
    const Timestamp corpusEnd = makeTimestamp(2002, 6, 30, 23, 59, 59);

    const std::size_t planted = std::min<std::size_t>(options.messages / 20, 12 * options.plantedSenders);
    const std::size_t decoysPerKind = std::min<std::size_t>(options.messages / 20, 40);
    const std::size_t special = planted + 3 * decoysPerKind;
    if (options.messages < special) throw UsageError("too few messages for the fixture");

    std::vector<Row> rows;
    rows.reserve(options.messages);
    DemoFixture fx;
    std::size_t counter = 0;
    auto nextId = [&](const char* prefix) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%06zu", prefix, counter++);
        return std::string(buf);
    };

    // Planted: PERSON a few words before California, then ORG and LAW.
    for (std::size_t i = 0; i < planted; ++i) {
        Row r;
        r.id = nextId("m");
        r.from = participantId(senders[i % senders.size()]);
        r.to = participantId(receiver);
        r.time = uniformTime(rng, windowStart, windowEnd);
        r.subject = "re: " + fillerSentence(rng, 2);
        r.body = personName(rng) + " flagged trades in California that " + rng.pick(kOrgs) + " booked under the " +
                 rng.pick(kLaws) + " review. " + fillerSentence(rng, 5) + ".";
        fx.plantedMessageIds.push_back(r.id);
        rows.push_back(std::move(r));
    }

    auto decoyBody = [&](bool withLaw) {
        // California comes before the person, so "PERSON ~7 GPE" cannot match.
        std::string body = "Regulators in California asked " + personName(rng) + " about " + rng.pick(kOrgs);
        if (withLaw) body += " and the " + rng.pick(kLaws);
        return body + ". " + fillerSentence(rng, 4) + ".";
    };
    auto otherThan = [&](std::size_t excluded) {
        std::size_t p;
        do {
            p = rng.below(n);
        } while (p == excluded);
        return p;
    };
    for (std::size_t i = 0; i < decoysPerKind; ++i) {
        // Full concept set outside the window, to the planted receiver.
        Row a;
        a.id = nextId("m");
        a.from = participantId(rng.below(2) ? senders[rng.below(senders.size())] : otherThan(receiver));
        a.to = participantId(receiver);
        a.time = rng.below(2) ? uniformTime(rng, makeTimestamp(2000, 1, 1), windowStart - 1)
                              : uniformTime(rng, windowEnd + 1, makeTimestamp(2001, 12, 31, 23, 59, 59));
        a.subject = fillerSentence(rng, 3);
        a.body = decoyBody(true);
        rows.push_back(std::move(a));

        // In the window, to the planted receiver, without a law.
        Row b;
        b.id = nextId("m");
        b.from = participantId(otherThan(receiver));
        b.to = participantId(receiver);
        b.time = uniformTime(rng, windowStart, windowEnd);
        b.subject = fillerSentence(rng, 3);
        b.body = decoyBody(false);
        rows.push_back(std::move(b));

        // In the window, full concept set, to someone else.
        Row c;
        c.id = nextId("m");
        const std::size_t to = otherThan(receiver);
        c.to = participantId(to);
        c.from = participantId(otherThan(to));
        c.time = uniformTime(rng, windowStart, windowEnd);
        c.subject = fillerSentence(rng, 3);
        c.body = decoyBody(true);
        rows.push_back(std::move(c));
    }

    const ZipfPicker senderPick(n, rng);
    const ZipfPicker receiverPick(n, rng);
    while (rows.size() < options.messages) {
        rows.push_back(backgroundRow(rng, senderPick, receiverPick, n, nextId("m"), corpusStart, corpusEnd, true));
    }

    std::ostringstream csv;
    writeRows(csv, rows);
    fx.csv = csv.str();

    std::ostringstream gaz;
    gaz << "# demo gazetteer\n";
    for (const auto& f : kFirstNames) {
        for (const auto& l : kLastNames) gaz << "PERSON:" << f << ' ' << l << '\n';
    }
    for (const auto& o : kOrgs) gaz << "ORG:" << o << '\n';
    for (const auto& l : kLaws) gaz << "LAW:" << l << '\n';
    gaz << "GPE:California\n";
    fx.gazetteer = gaz.str();

    for (std::size_t s : senders) fx.plantedSenders.push_back(participantId(s));
    std::sort(fx.plantedSenders.begin(), fx.plantedSenders.end());
    fx.plantedReceiver = participantId(receiver);
    std::sort(fx.plantedMessageIds.begin(), fx.plantedMessageIds.end());
    return fx;
}

std::string makeEnronShapedCsv(std::size_t participants, std::size_t messages, std::uint64_t seed) {
    if (participants < 2) throw UsageError("need at least two participants");
    Rng rng(seed);
    const ZipfPicker senders(participants, rng);
    const ZipfPicker receivers(participants, rng);
    const Timestamp lo = makeTimestamp(1999, 1, 1);
    const Timestamp hi = makeTimestamp(2002, 6, 30, 23, 59, 59);
    std::vector<Row> rows;
    rows.reserve(messages);
    for (std::size_t i = 0; i < messages; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "e%07zu", i);
        rows.push_back(backgroundRow(rng, senders, receivers, participants, buf, lo, hi, false));
    }
    std::ostringstream csv;
    writeRows(csv, rows);
    return csv.str();
}

} // namespace commgraph
