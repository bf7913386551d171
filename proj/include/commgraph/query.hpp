#pragma once

#include "commgraph/thematic.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

/// Concept query AST. Immutable; subtrees are shared between copies.
///
///   Atom(c)          some annotation has category c
///   Seq(c1..ck, g)   annotations of c1..ck in strictly increasing word
///                    order; gap i (when set) bounds the number of words
///                    strictly between span i and span i+1
///   And(l, r), Or(l, r)
///
/// A sequence of a single atom is represented as that Atom.
class ConceptQuery {
public:
    enum class Kind { Atom, Seq, And, Or };
    using Gap = std::optional<std::uint32_t>;

    static ConceptQuery atom(CategoryId category);
    /// gaps.size() must be atoms.size() - 1.
    static ConceptQuery sequence(std::vector<CategoryId> atoms, std::vector<Gap> gaps);
    static ConceptQuery both(ConceptQuery lhs, ConceptQuery rhs);
    static ConceptQuery either(ConceptQuery lhs, ConceptQuery rhs);

    Kind kind() const { return kind_; }
    /// Atom: one entry. Seq: two or more.
    const std::vector<CategoryId>& atoms() const { return atoms_; }
    const std::vector<Gap>& gaps() const { return gaps_; }
    const ConceptQuery& lhs() const { return *lhs_; }
    const ConceptQuery& rhs() const { return *rhs_; }

    friend bool operator==(const ConceptQuery& a, const ConceptQuery& b);

private:
    ConceptQuery() = default;

    Kind kind_ = Kind::Atom;
    std::vector<CategoryId> atoms_;
    std::vector<Gap> gaps_;
    std::shared_ptr<const ConceptQuery> lhs_;
    std::shared_ptr<const ConceptQuery> rhs_;
};

/// Grammar:
///   query := or
///   or    := and ("OR" and)*
///   and   := seq ("AND" seq)*
///   seq   := atom ( ("~" INT)? atom )*
///   atom  := CATEGORY | "(" or ")"
/// Keywords and categories are case-insensitive. AND/OR associate left.
/// Throws ParseError with the byte offset of the offending token.
ConceptQuery parseQuery(std::string_view text, const CategorySet& categories);

/// Canonical text with parentheses only where reparsing needs them.
std::string printQuery(const ConceptQuery& query, const CategorySet& categories);

/// Evaluates the query against one message's annotations.
bool matches(const ConceptQuery& query, std::span<const EntityAnnotation> annotations);

/// Message passes iff matches() on its annotations.
MessageMask thematicMask(const AnnotationIndex& index, const ConceptQuery& query);

} // namespace commgraph
