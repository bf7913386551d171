#include "commgraph/thematic.hpp"

#include "commgraph/tokenize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

namespace commgraph {

using nlohmann::json;

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

struct Pattern {
    const char* category;
    std::regex re;
};

const std::vector<Pattern>& builtinPatterns() {
    static const std::vector<Pattern> patterns = [] {
        const auto flags = std::regex::ECMAScript | std::regex::optimize;
        const std::string months =
            "(?:January|February|March|April|May|June|July|August|September|October|November|December)";
        std::vector<Pattern> p;
        p.push_back({"DATE", std::regex("\\b\\d{4}-\\d{2}-\\d{2}\\b|\\b\\d{1,2}/\\d{1,2}/\\d{2,4}\\b|\\b" + months +
                                            "(?:\\s+\\d{1,2}(?:st|nd|rd|th)?)?(?:,?\\s+\\d{4})?\\b",
                                        flags)});
        p.push_back({"TIME", std::regex("\\b\\d{1,2}:\\d{2}(?::\\d{2})?(?:\\s?[AaPp]\\.?[Mm]\\b\\.?)?|"
                                        "\\b\\d{1,2}\\s?[AaPp]\\.?[Mm]\\b\\.?",
                                        flags)});
        p.push_back({"MONEY", std::regex("(?:\\$|\xE2\x82\xAC|\xC2\xA3)\\s?\\d[\\d,]*(?:\\.\\d+)?"
                                         "(?:\\s?(?:million|billion|thousand)\\b)?|"
                                         "\\b\\d[\\d,]*(?:\\.\\d+)?\\s?(?:dollars|USD|EUR|euros)\\b",
                                         flags)});
        p.push_back({"PERCENT", std::regex("\\b\\d+(?:\\.\\d+)?\\s?(?:%|percent\\b)", flags)});
        p.push_back({"ORDINAL", std::regex("\\b\\d+(?:st|nd|rd|th)\\b|\\b(?:first|second|third|fourth|fifth|"
                                           "sixth|seventh|eighth|ninth|tenth)\\b",
                                           flags | std::regex::icase)});
        p.push_back({"CARDINAL", std::regex("\\b\\d[\\d,]*(?:\\.\\d+)?\\b", flags)});
        return p;
    }();
    return patterns;
}

} // namespace

CategorySet::CategorySet(std::vector<std::string> names) {
    for (auto& n : names) {
        std::string u = upper(n);
        if (u.empty()) throw UsageError("category names must not be empty");
        if (std::find(names_.begin(), names_.end(), u) != names_.end()) {
            throw UsageError("duplicate category '" + u + "'");
        }
        names_.push_back(std::move(u));
    }
    if (names_.size() > 0xffff) throw UsageError("too many categories");
}

CategorySet CategorySet::defaults() {
    return CategorySet({"PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT", "WORK_OF_ART", "LAW",
                        "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY", "QUANTITY", "ORDINAL", "CARDINAL"});
}

std::optional<CategoryId> CategorySet::find(std::string_view name) const {
    const std::string u = upper(name);
    auto it = std::find(names_.begin(), names_.end(), u);
    if (it == names_.end()) return std::nullopt;
    return static_cast<CategoryId>(it - names_.begin());
}

CategoryId CategorySet::require(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw UsageError("unknown entity category '" + std::string(name) + "'");
}

GazetteerTagger::GazetteerTagger(CategorySet categories) : categories_(std::move(categories)) {}

void GazetteerTagger::addTerm(std::string_view category, std::string_view term) {
    const CategoryId id = categories_.require(category);
    std::vector<std::string> ws = words(term, true);
    if (ws.empty()) return;
    auto& bucket = phrases_[ws.front()];
    for (const Phrase& p : bucket) {
        if (p.words == ws) return;  // first definition wins
    }
    bucket.push_back({std::move(ws), id});
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const Phrase& a, const Phrase& b) { return a.words.size() > b.words.size(); });
}

void GazetteerTagger::load(std::istream& in) {
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw DataError("gazetteer line " + std::to_string(lineNo) + ": expected CATEGORY:term");
        }
        std::string category = line.substr(first, colon - first);
        while (!category.empty() && std::isspace(static_cast<unsigned char>(category.back()))) category.pop_back();
        if (!categories_.find(category)) {
            throw DataError("gazetteer line " + std::to_string(lineNo) + ": unknown category '" + category + "'");
        }
        addTerm(category, std::string_view(line).substr(colon + 1));
    }
}

void GazetteerTagger::loadFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gazetteer '" + path + "'");
    load(in);
}

AnnotationList GazetteerTagger::tag(std::string_view content) const {
    AnnotationList out;
    const std::vector<Token> tokens = tokenize(content);
    if (tokens.empty()) return out;
    std::vector<std::string> folded;
    folded.reserve(tokens.size());
    for (const Token& t : tokens) folded.push_back(foldCase(content.substr(t.begin, t.end - t.begin)));
    std::vector<bool> claimed(tokens.size(), false);

    auto emit = [&](std::size_t from, std::size_t to, CategoryId category) {
        for (std::size_t i = from; i < to; ++i) claimed[i] = true;
        out.push_back({static_cast<std::uint32_t>(from), static_cast<std::uint32_t>(to), category,
                       std::string(content.substr(tokens[from].begin, tokens[to - 1].end - tokens[from].begin))});
    };

    for (std::size_t i = 0; i < tokens.size();) {
        std::size_t matched = 0;
        if (auto it = phrases_.find(folded[i]); it != phrases_.end()) {
            for (const Phrase& p : it->second) {
                if (i + p.words.size() > tokens.size()) continue;
                if (std::equal(p.words.begin(), p.words.end(), folded.begin() + static_cast<std::ptrdiff_t>(i))) {
                    emit(i, i + p.words.size(), p.category);
                    matched = p.words.size();
                    break;
                }
            }
        }
        i += matched > 0 ? matched : 1;
    }

    if (patternsEnabled_) {
        const std::string text(content);
        for (const Pattern& pattern : builtinPatterns()) {
            const auto category = categories_.find(pattern.category);
            if (!category) continue;
            for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern.re); it != std::sregex_iterator();
                 ++it) {
                const auto mb = static_cast<std::size_t>(it->position());
                const auto me = mb + static_cast<std::size_t>(it->length());
                auto first = std::partition_point(tokens.begin(), tokens.end(), [&](const Token& t) { return t.end <= mb; });
                auto last = std::partition_point(first, tokens.end(), [&](const Token& t) { return t.begin < me; });
                if (first == last) continue;
                const auto from = static_cast<std::size_t>(first - tokens.begin());
                const auto to = static_cast<std::size_t>(last - tokens.begin());
                if (std::any_of(claimed.begin() + static_cast<std::ptrdiff_t>(from),
                                claimed.begin() + static_cast<std::ptrdiff_t>(to), [](bool c) { return c; })) {
                    continue;
                }
                emit(from, to, *category);
            }
        }
    }

    std::sort(out.begin(), out.end(),
              [](const EntityAnnotation& a, const EntityAnnotation& b) { return a.startWord < b.startWord; });
    return out;
}

AnnotationIndex::AnnotationIndex(CategorySet categories, std::vector<AnnotationList> perMessage)
    : categories_(std::move(categories)), perMessage_(std::move(perMessage)) {}

std::vector<std::size_t> AnnotationIndex::tally(std::span<const MessageIndex> messages) const {
    std::vector<std::size_t> counts(categories_.size(), 0);
    for (MessageIndex m : messages) {
        for (const EntityAnnotation& a : forMessage(m)) ++counts[a.category];
    }
    return counts;
}

AnnotationIndex annotate(const Corpus& corpus, const Tagger& tagger, const CategorySet& categories) {
    std::vector<AnnotationList> perMessage(corpus.messageCount());
    const auto n = static_cast<std::int64_t>(perMessage.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        perMessage[static_cast<std::size_t>(i)] = tagger.tag(corpus.message(static_cast<MessageIndex>(i)).content);
    }
    return AnnotationIndex(categories, std::move(perMessage));
}

void saveAnnotations(const AnnotationIndex& index, const Corpus& corpus, std::ostream& out) {
    std::size_t annotated = 0;
    for (std::size_t i = 0; i < index.size(); ++i) annotated += index.forMessage(static_cast<MessageIndex>(i)).empty() ? 0 : 1;
    json header = {{"format", "commgraph-annotations"},
                   {"version", 1},
                   {"categories", index.categories().names()},
                   {"messages", annotated}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& list = index.forMessage(static_cast<MessageIndex>(i));
        if (list.empty()) continue;
        json spans = json::array();
        for (const EntityAnnotation& a : list) {
            spans.push_back({a.startWord, a.endWord, index.categories().name(a.category), a.surface});
        }
        out << json{{"id", corpus.message(static_cast<MessageIndex>(i)).id}, {"a", spans}}.dump() << '\n';
    }
}

AnnotationIndex loadAnnotations(std::istream& in, const Corpus& corpus) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty annotations file");
    try {
        const json header = json::parse(line);
        if (header.value("format", "") != "commgraph-annotations" || header.value("version", 0) != 1) {
            throw DataError("not a commgraph annotations file (version 1)");
        }
        CategorySet categories(header.at("categories").get<std::vector<std::string>>());
        std::vector<AnnotationList> perMessage(corpus.messageCount());
        std::size_t lineNo = 1;
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.empty()) continue;
            const json rec = json::parse(line);
            const auto id = rec.at("id").get<std::string>();
            const auto m = corpus.findMessage(id);
            if (!m) throw DataError("annotations line " + std::to_string(lineNo) + ": unknown message '" + id + "'");
            AnnotationList list;
            for (const json& a : rec.at("a")) {
                EntityAnnotation e;
                e.startWord = a.at(0).get<std::uint32_t>();
                e.endWord = a.at(1).get<std::uint32_t>();
                e.category = categories.require(a.at(2).get<std::string>());
                e.surface = a.at(3).get<std::string>();
                if (e.startWord >= e.endWord) {
                    throw DataError("annotations line " + std::to_string(lineNo) + ": empty span");
                }
                list.push_back(std::move(e));
            }
            perMessage[*m] = std::move(list);
        }
        return AnnotationIndex(std::move(categories), std::move(perMessage));
    } catch (const json::exception& e) {
        throw DataError(std::string("annotations file: ") + e.what());
    }
}

} // namespace commgraph
