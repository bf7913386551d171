#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

namespace oracle {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words{"alpha", "beta",  "gamma", "delta", "Enron", "gas",   "power",
                                                "deal",  "price", "call",  "trade", "Texas", "memo",  "report"};
    return words;
}

Corpus syntheticCorpus(std::uint64_t seed, const SyntheticOptions& o) {
    std::mt19937_64 rng(seed);
    CorpusBuilder b;
    auto pid = [](std::size_t i) { return "p" + std::to_string(i); };
    for (std::size_t i = 0; i < o.participants; ++i) b.addParticipant({pid(i), "P" + std::to_string(i), {}});
    const auto& vocab = vocabulary();
    for (std::size_t i = 0; i < o.messages; ++i) {
        const std::size_t s = rng() % o.participants;
        std::size_t r = rng() % o.participants;
        if (!o.selfMessages && r == s) r = (r + 1) % o.participants;
        const Timestamp t = o.start + static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(o.span));
        std::string content;
        const std::size_t words = 1 + rng() % 8;
        for (std::size_t w = 0; w < words; ++w) {
            if (w) content += (rng() % 4 == 0) ? ", " : " ";
            std::string word = vocab[rng() % vocab.size()];
            if (rng() % 5 == 0) {
                for (char& ch : word) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            }
            content += word;
        }
        b.addMessage("m" + std::to_string(i), pid(s), pid(r), t, content, "email");
    }
    return std::move(b).build();
}

std::set<std::string> scanTime(const Corpus& c, TimeRange r) {
    std::set<std::string> out;
    for (const Message& m : c.messages()) {
        if (m.timestamp >= r.start && m.timestamp <= r.end) out.insert(m.id);
    }
    return out;
}

std::set<std::string> scanUsers(const Corpus& c, const UserSelectionParams& p) {
    const std::set<std::string> inc(p.include.begin(), p.include.end());
    const std::set<std::string> exc(p.exclude.begin(), p.exclude.end());
    std::set<std::string> out;
    for (const Message& m : c.messages()) {
        const std::string& s = c.participantId(m.sender);
        const std::string& r = c.participantId(m.receiver);
        std::vector<std::string> side;
        if (p.role != UserRole::Receiver) side.push_back(s);
        if (p.role != UserRole::Sender) side.push_back(r);
        bool included = inc.empty();
        bool excluded = false;
        for (const auto& x : side) {
            included = included || inc.count(x);
            excluded = excluded || exc.count(x);
        }
        if (included && !excluded) out.insert(m.id);
    }
    return out;
}

namespace {

std::vector<std::string> asciiWords(const std::string& text, bool fold) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += fold ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch))) : ch;
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

std::set<std::string> scanKeyword(const Corpus& c, const KeywordParams& p) {
    std::set<std::string> out;
    for (const Message& m : c.messages()) {
        const auto words = asciiWords(m.content, p.caseFold);
        std::size_t hits = 0;
        for (const std::string& term : p.terms) {
            const auto tw = asciiWords(term, p.caseFold);
            bool found = false;
            for (std::size_t i = 0; i + tw.size() <= words.size() && !found; ++i) {
                found = std::equal(tw.begin(), tw.end(), words.begin() + static_cast<std::ptrdiff_t>(i));
            }
            hits += found ? 1 : 0;
        }
        const bool pass = p.mode == KeywordMode::All ? hits == p.terms.size() : hits > 0;
        if (pass) out.insert(m.id);
    }
    return out;
}

std::set<std::string> ids(const Corpus& c, const Selection& s) {
    std::set<std::string> out;
    for (MessageIndex m : s.messages) out.insert(c.message(m).id);
    return out;
}

std::set<std::string> ids(const Corpus& c, const MessageMask& mask) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out.insert(c.message(static_cast<MessageIndex>(i)).id);
    }
    return out;
}

std::map<std::pair<std::string, std::string>, std::uint64_t> groupBy(const Corpus& c,
                                                                     const std::vector<MessageIndex>& sel) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> out;
    for (MessageIndex m : sel) {
        const Message& msg = c.message(m);
        ++out[{c.participantId(msg.sender), c.participantId(msg.receiver)}];
    }
    return out;
}

std::size_t histogramBin(Timestamp t, TimeRange r, int bins) {
    if (r.end <= r.start) return 0;
    t = std::clamp(t, r.start, r.end);
    std::size_t best = 0;
    const long double span = static_cast<long double>(r.end - r.start);
    for (int k = 0; k < bins; ++k) {
        // Bin k starts at start + k*span/bins.
        if (static_cast<long double>(t - r.start) * bins >= k * span) best = static_cast<std::size_t>(k);
    }
    return best;
}

double fullDensity(const std::vector<Timestamp>& times, double t, const DynamicsParams& p) {
    const double w = p.sigma * p.h;
    double sum = 0;
    for (Timestamp ti : times) {
        const double d = t - static_cast<double>(ti) - p.mu;
        sum += std::exp(-d * d / (2 * w * w));
    }
    return sum;
}

std::vector<std::vector<std::size_t>> gridEpisodes(const std::vector<Timestamp>& times, const DynamicsParams& p) {
    std::vector<std::vector<std::size_t>> out;
    if (times.empty()) return out;
    const double w = p.sigma * p.h;
    const double step = w / 20;
    // Work relative to the first timestamp.
    const Timestamp origin = times.front();
    std::vector<Timestamp> rel;
    for (Timestamp t : times) rel.push_back(t - origin);
    std::vector<double> shifted;
    for (Timestamp t : rel) shifted.push_back(static_cast<double>(t) + p.mu);

    std::vector<double> grid;
    const double lo = shifted.front() - 5 * w;
    const double hi = shifted.back() + 5 * w;
    for (double x = lo; x <= hi; x += step) grid.push_back(x);
    grid.insert(grid.end(), shifted.begin(), shifted.end());
    std::sort(grid.begin(), grid.end());

    // Run id per grid point, -1 below threshold.
    std::vector<int> run(grid.size(), -1);
    int current = -1;
    bool inside = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool above = fullDensity(rel, grid[i], p) >= p.theta;
        if (above && !inside) ++current;
        inside = above;
        if (above) run[i] = current;
    }
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < shifted.size(); ++k) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), shifted[k]);
        const int r = run[static_cast<std::size_t>(it - grid.begin())];
        if (r >= 0) members[r].push_back(k);
    }
    for (auto& [r, m] : members) {
        if (m.size() >= static_cast<std::size_t>(p.minMessages)) out.push_back(std::move(m));
    }
    return out;
}

namespace {

bool seqFrom(const ConceptQuery& q, const std::vector<EntityAnnotation>& a, std::size_t atom, const EntityAnnotation* prev) {
    if (atom == q.atoms().size()) return true;
    for (const EntityAnnotation& e : a) {
        if (e.category != q.atoms()[atom]) continue;
        if (prev) {
            if (e.startWord <= prev->startWord) continue;
            const auto& gap = q.gaps()[atom - 1];
            const long long between = static_cast<long long>(e.startWord) - static_cast<long long>(prev->endWord);
            if (gap && between > static_cast<long long>(*gap)) continue;
        }
        if (seqFrom(q, a, atom + 1, &e)) return true;
    }
    return false;
}

} // namespace

bool enumerateMatches(const ConceptQuery& q, const std::vector<EntityAnnotation>& a) {
    switch (q.kind()) {
    case ConceptQuery::Kind::Atom:
    case ConceptQuery::Kind::Seq:
        if (q.kind() == ConceptQuery::Kind::Atom) {
            return std::any_of(a.begin(), a.end(), [&](const auto& e) { return e.category == q.atoms()[0]; });
        }
        return seqFrom(q, a, 0, nullptr);
    case ConceptQuery::Kind::And:
        return enumerateMatches(q.lhs(), a) && enumerateMatches(q.rhs(), a);
    case ConceptQuery::Kind::Or:
        return enumerateMatches(q.lhs(), a) || enumerateMatches(q.rhs(), a);
    }
    return false;
}

ConceptQuery randomQuery(std::mt19937_64& rng, const CategorySet& categories, int depth) {
    const auto cat = [&] { return static_cast<CategoryId>(rng() % categories.size()); };
    const unsigned pick = depth <= 0 ? static_cast<unsigned>(rng() % 2) : static_cast<unsigned>(rng() % 4);
    switch (pick) {
    case 0:
        return ConceptQuery::atom(cat());
    case 1: {
        const std::size_t k = 2 + rng() % 3;
        std::vector<CategoryId> atoms;
        std::vector<ConceptQuery::Gap> gaps;
        for (std::size_t i = 0; i < k; ++i) atoms.push_back(cat());
        for (std::size_t i = 0; i + 1 < k; ++i) {
            if (rng() % 2) gaps.emplace_back(static_cast<std::uint32_t>(rng() % 10));
            else gaps.emplace_back(std::nullopt);
        }
        return ConceptQuery::sequence(std::move(atoms), std::move(gaps));
    }
    case 2:
        return ConceptQuery::both(randomQuery(rng, categories, depth - 1), randomQuery(rng, categories, depth - 1));
    default:
        return ConceptQuery::either(randomQuery(rng, categories, depth - 1), randomQuery(rng, categories, depth - 1));
    }
}

std::vector<EntityAnnotation> randomAnnotations(std::mt19937_64& rng, std::size_t categories, std::size_t maxCount) {
    std::vector<EntityAnnotation> out;
    const std::size_t n = rng() % (maxCount + 1);
    std::uint32_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        word += static_cast<std::uint32_t>(rng() % 6);
        const std::uint32_t len = 1 + static_cast<std::uint32_t>(rng() % 3);
        out.push_back({word, word + len, static_cast<CategoryId>(rng() % categories), "x"});
        word += len;
    }
    return out;
}

std::vector<LevelState> randomStates(std::mt19937_64& rng, const Corpus& c) {
    std::vector<LevelState> out;
    const std::size_t n = rng() % 5;
    const auto extent = c.timeExtent().value_or(TimeRange{0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        LevelState s;
        s.enabled = rng() % 6 != 0;
        switch (rng() % 4) {
        case 0: {
            const Timestamp span = extent.end - extent.start + 1;
            Timestamp a = extent.start + static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(span));
            Timestamp b = extent.start + static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(span));
            if (a > b) std::swap(a, b);
            s.params = TimeFilterParams{{a, b}};
            break;
        }
        case 1: {
            UserSelectionParams p;
            for (const Participant& part : c.participants()) {
                const auto r = rng() % 5;
                if (r == 0) p.include.push_back(part.id);
                else if (r == 1) p.exclude.push_back(part.id);
            }
            p.role = static_cast<UserRole>(rng() % 3);
            s.params = p;
            break;
        }
        case 2: {
            KeywordParams p;
            const std::size_t k = 1 + rng() % 3;
            for (std::size_t t = 0; t < k; ++t) p.terms.push_back(vocabulary()[rng() % vocabulary().size()]);
            p.mode = rng() % 2 ? KeywordMode::All : KeywordMode::Any;
            p.caseFold = rng() % 3 != 0;
            s.params = p;
            break;
        }
        default: {
            DynamicsParams p;
            p.sigma = 3600.0 * static_cast<double>(1 + rng() % 24);
            p.theta = 0.3 + static_cast<double>(rng() % 20) / 10;
            p.minMessages = 1 + static_cast<int>(rng() % 3);
            s.params = p;
            break;
        }
        }
        out.push_back(std::move(s));
    }
    return out;
}

AnalysisState perturbState(std::mt19937_64& rng, const Corpus& c, AnalysisState state) {
    for (int tries = 0; tries < 8; ++tries) {
        const auto levels = randomStates(rng, c);
        if (levels.empty()) continue;
        for (const LevelState& l : levels) state.level(l.levelId()) = l;
        if (rng() % 4 == 0) state.fadeThreshold = static_cast<double>(rng() % 101) / 100;
        return state;
    }
    state.level(kTimefilterLevel).enabled = !state.level(kTimefilterLevel).enabled;
    return state;
}

void randomSession(std::mt19937_64& rng, Session& session, int steps) {
    for (int i = 0; i < steps; ++i) {
        const auto size = session.provenance().size();
        switch (rng() % 6) {
        case 0:
            session.navigate(static_cast<NodeId>(rng() % size));
            break;
        case 1:
            session.setStarred(static_cast<NodeId>(rng() % size), rng() % 2 == 0);
            break;
        case 2:
            session.setNote(static_cast<NodeId>(rng() % size), "note " + std::to_string(rng() % 1000) + "\n| *x*");
            break;
        default:
            session.commit(perturbState(rng, session.corpus(), session.state()));
            break;
        }
    }
}

} // namespace oracle
