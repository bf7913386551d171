#include "commgraph/query.hpp"

#include "commgraph/kernels.hpp"

#include <cctype>
#include <charconv>

namespace commgraph {

ConceptQuery ConceptQuery::atom(CategoryId category) {
    ConceptQuery q;
    q.kind_ = Kind::Atom;
    q.atoms_ = {category};
    return q;
}

ConceptQuery ConceptQuery::sequence(std::vector<CategoryId> atoms, std::vector<Gap> gaps) {
    if (atoms.empty()) throw UsageError("a sequence needs at least one category");
    if (gaps.size() + 1 != atoms.size()) throw UsageError("a sequence of k categories needs k-1 gaps");
    if (atoms.size() == 1) return atom(atoms.front());
    ConceptQuery q;
    q.kind_ = Kind::Seq;
    q.atoms_ = std::move(atoms);
    q.gaps_ = std::move(gaps);
    return q;
}

ConceptQuery ConceptQuery::both(ConceptQuery lhs, ConceptQuery rhs) {
    ConceptQuery q;
    q.kind_ = Kind::And;
    q.lhs_ = std::make_shared<const ConceptQuery>(std::move(lhs));
    q.rhs_ = std::make_shared<const ConceptQuery>(std::move(rhs));
    return q;
}

ConceptQuery ConceptQuery::either(ConceptQuery lhs, ConceptQuery rhs) {
    ConceptQuery q = both(std::move(lhs), std::move(rhs));
    q.kind_ = Kind::Or;
    return q;
}

bool operator==(const ConceptQuery& a, const ConceptQuery& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case ConceptQuery::Kind::Atom:
    case ConceptQuery::Kind::Seq:
        return a.atoms_ == b.atoms_ && a.gaps_ == b.gaps_;
    case ConceptQuery::Kind::And:
    case ConceptQuery::Kind::Or:
        return *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
    }
    return false;
}

namespace {

struct Lexeme {
    enum class Type { Word, LParen, RParen, Tilde, End };
    Type type = Type::End;
    std::string_view text;
    std::uint32_t distance = 0;  // Tilde only
    std::size_t position = 0;
};

bool isWordChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool keyword(const Lexeme& l, std::string_view kw) {
    if (l.type != Lexeme::Type::Word || l.text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(l.text[i])) != kw[i]) return false;
    }
    return true;
}

std::vector<Lexeme> lex(std::string_view text) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            out.push_back({c == '(' ? Lexeme::Type::LParen : Lexeme::Type::RParen, text.substr(i, 1), 0, i});
            ++i;
        } else if (c == '~') {
            const std::size_t at = i++;
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            const std::size_t digits = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (digits == i) throw ParseError("expected a word distance after '~'", at);
            std::uint32_t n = 0;
            auto [ptr, ec] = std::from_chars(text.data() + digits, text.data() + i, n);
            if (ec != std::errc{}) throw ParseError("word distance out of range", digits);
            out.push_back({Lexeme::Type::Tilde, text.substr(at, i - at), n, at});
        } else if (isWordChar(c)) {
            const std::size_t at = i;
            while (i < text.size() && isWordChar(text[i])) ++i;
            out.push_back({Lexeme::Type::Word, text.substr(at, i - at), 0, at});
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
    }
    out.push_back({Lexeme::Type::End, {}, 0, text.size()});
    return out;
}

class Parser {
public:
    Parser(std::vector<Lexeme> lexemes, const CategorySet& categories)
        : lex_(std::move(lexemes)), categories_(categories) {}

    ConceptQuery parse() {
        if (peek().type == Lexeme::Type::End) throw ParseError("empty query", 0);
        ConceptQuery q = parseOr();
        if (peek().type == Lexeme::Type::RParen) throw ParseError("unbalanced parenthesis: unexpected ')'", peek().position);
        if (peek().type != Lexeme::Type::End) throw ParseError("unexpected '" + std::string(peek().text) + "'", peek().position);
        return q;
    }

private:
    const Lexeme& peek() const { return lex_[pos_]; }
    const Lexeme& take() { return lex_[pos_++]; }

    bool startsAtom() const {
        const Lexeme& l = peek();
        return l.type == Lexeme::Type::LParen ||
               (l.type == Lexeme::Type::Word && !keyword(l, "AND") && !keyword(l, "OR"));
    }

    ConceptQuery parseOr() {
        ConceptQuery q = parseAnd();
        while (keyword(peek(), "OR")) {
            take();
            q = ConceptQuery::either(std::move(q), parseAnd());
        }
        return q;
    }

    ConceptQuery parseAnd() {
        ConceptQuery q = parseSeq();
        while (keyword(peek(), "AND")) {
            take();
            q = ConceptQuery::both(std::move(q), parseSeq());
        }
        return q;
    }

    ConceptQuery parseSeq() {
        std::size_t firstPos = peek().position;
        ConceptQuery first = parseAtom();
        std::vector<std::pair<ConceptQuery, std::size_t>> items{{std::move(first), firstPos}};
        std::vector<ConceptQuery::Gap> gaps;
        while (true) {
            if (peek().type == Lexeme::Type::Tilde) {
                const Lexeme& tilde = take();
                if (!startsAtom()) throw ParseError("dangling '~': expected a category after it", tilde.position);
                gaps.emplace_back(tilde.distance);
            } else if (startsAtom()) {
                gaps.emplace_back(std::nullopt);
            } else {
                break;
            }
            const std::size_t at = peek().position;
            items.emplace_back(parseAtom(), at);
        }
        if (items.size() == 1) return std::move(items.front().first);
        std::vector<CategoryId> atoms;
        for (auto& [q, at] : items) {
            if (q.kind() != ConceptQuery::Kind::Atom) {
                throw ParseError("sequence elements must be single categories", at);
            }
            atoms.push_back(q.atoms().front());
        }
        return ConceptQuery::sequence(std::move(atoms), std::move(gaps));
    }

    ConceptQuery parseAtom() {
        const Lexeme& l = peek();
        if (l.type == Lexeme::Type::LParen) {
            take();
            if (peek().type == Lexeme::Type::RParen) throw ParseError("empty parentheses", peek().position);
            ConceptQuery inner = parseOr();
            if (peek().type != Lexeme::Type::RParen) {
                throw ParseError("unbalanced parenthesis: expected ')'", peek().position);
            }
            take();
            return inner;
        }
        if (l.type == Lexeme::Type::Word && !keyword(l, "AND") && !keyword(l, "OR")) {
            const auto id = categories_.find(l.text);
            if (!id) throw ParseError("unknown category '" + std::string(l.text) + "'", l.position);
            take();
            return ConceptQuery::atom(*id);
        }
        if (l.type == Lexeme::Type::Tilde) throw ParseError("dangling '~': expected a category before it", l.position);
        if (l.type == Lexeme::Type::RParen) throw ParseError("unbalanced parenthesis: unexpected ')'", l.position);
        if (l.type == Lexeme::Type::End) throw ParseError("unexpected end of query", l.position);
        throw ParseError("expected a category or '(' but found '" + std::string(l.text) + "'", l.position);
    }

    std::vector<Lexeme> lex_;
    const CategorySet& categories_;
    std::size_t pos_ = 0;
};

void print(const ConceptQuery& q, const CategorySet& categories, std::string& out) {
    auto wrapped = [&](const ConceptQuery& child, bool parens) {
        if (parens) out += '(';
        print(child, categories, out);
        if (parens) out += ')';
    };
    using Kind = ConceptQuery::Kind;
    switch (q.kind()) {
    case Kind::Atom:
        out += categories.name(q.atoms().front());
        break;
    case Kind::Seq:
        for (std::size_t i = 0; i < q.atoms().size(); ++i) {
            if (i > 0) {
                out += ' ';
                if (const auto& g = q.gaps()[i - 1]) out += "~" + std::to_string(*g) + " ";
            }
            out += categories.name(q.atoms()[i]);
        }
        break;
    case Kind::And:
        wrapped(q.lhs(), q.lhs().kind() == Kind::Or);
        out += " AND ";
        wrapped(q.rhs(), q.rhs().kind() == Kind::Or || q.rhs().kind() == Kind::And);
        break;
    case Kind::Or:
        wrapped(q.lhs(), false);
        out += " OR ";
        wrapped(q.rhs(), q.rhs().kind() == Kind::Or);
        break;
    }
}

bool matchSequence(const ConceptQuery& q, std::span<const EntityAnnotation> annotations) {
    const auto& atoms = q.atoms();
    std::vector<char> reach(annotations.size(), 0);
    bool any = false;
    for (std::size_t j = 0; j < annotations.size(); ++j) {
        reach[j] = annotations[j].category == atoms[0];
        any = any || reach[j];
    }
    for (std::size_t i = 1; i < atoms.size() && any; ++i) {
        const auto& gap = q.gaps()[i - 1];
        std::vector<char> next(annotations.size(), 0);
        any = false;
        for (std::size_t b = 0; b < annotations.size(); ++b) {
            if (annotations[b].category != atoms[i]) continue;
            for (std::size_t a = 0; a < annotations.size(); ++a) {
                if (!reach[a] || annotations[a].startWord >= annotations[b].startWord) continue;
                const auto between = static_cast<std::int64_t>(annotations[b].startWord) -
                                     static_cast<std::int64_t>(annotations[a].endWord);
                if (!gap || between <= static_cast<std::int64_t>(*gap)) {
                    next[b] = 1;
                    any = true;
                    break;
                }
            }
        }
        reach = std::move(next);
    }
    return any;
}

} // namespace

ConceptQuery parseQuery(std::string_view text, const CategorySet& categories) {
    return Parser(lex(text), categories).parse();
}

std::string printQuery(const ConceptQuery& query, const CategorySet& categories) {
    std::string out;
    print(query, categories, out);
    return out;
}

bool matches(const ConceptQuery& query, std::span<const EntityAnnotation> annotations) {
    using Kind = ConceptQuery::Kind;
    switch (query.kind()) {
    case Kind::Atom:
        for (const auto& a : annotations) {
            if (a.category == query.atoms().front()) return true;
        }
        return false;
    case Kind::Seq:
        return matchSequence(query, annotations);
    case Kind::And:
        return matches(query.lhs(), annotations) && matches(query.rhs(), annotations);
    case Kind::Or:
        return matches(query.lhs(), annotations) || matches(query.rhs(), annotations);
    }
    return false;
}

MessageMask thematicMask(const AnnotationIndex& index, const ConceptQuery& query) {
    return kernels::queryMask(index, query);
}

} // namespace commgraph
