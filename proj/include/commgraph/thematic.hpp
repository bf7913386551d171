#pragma once

#include "commgraph/corpus.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

using CategoryId = std::uint16_t;

/// The configured entity categories. Lookup is case-insensitive; names are
/// stored upper case.
class CategorySet {
public:
    CategorySet() = default;
    explicit CategorySet(std::vector<std::string> names);

    /// PERSON, NORP, FAC, ORG, GPE, LOC, PRODUCT, EVENT, WORK_OF_ART, LAW,
    /// LANGUAGE, DATE, TIME, PERCENT, MONEY, QUANTITY, ORDINAL, CARDINAL.
    static CategorySet defaults();

    std::size_t size() const { return names_.size(); }
    const std::string& name(CategoryId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<CategoryId> find(std::string_view name) const;
    CategoryId require(std::string_view name) const;

    friend bool operator==(const CategorySet&, const CategorySet&) = default;

private:
    std::vector<std::string> names_;
};

struct EntityAnnotation {
    std::uint32_t startWord = 0;  ///< inclusive word index
    std::uint32_t endWord = 0;    ///< exclusive word index
    CategoryId category = 0;
    std::string surface;

    friend bool operator==(const EntityAnnotation&, const EntityAnnotation&) = default;
};

using AnnotationList = std::vector<EntityAnnotation>;

/// Tokenizes and tags one message's content. Implementations must be
/// safe to call concurrently.
class Tagger {
public:
    virtual ~Tagger() = default;
    /// Annotations sorted by startWord, word indices per tokenize().
    virtual AnnotationList tag(std::string_view content) const = 0;
};

/// Deterministic rule-based tagger: longest-match gazetteer phrases first,
/// then patterns for DATE, TIME, MONEY, PERCENT and CARDINAL on the
/// remaining words. Spans never overlap.
class GazetteerTagger : public Tagger {
public:
    explicit GazetteerTagger(CategorySet categories);

    /// Matching is case-insensitive on whole words.
    void addTerm(std::string_view category, std::string_view term);

    /// "CATEGORY:term" per line; blank lines and '#' comments ignored.
    void load(std::istream& in);
    void loadFile(const std::string& path);

    /// Built-in patterns are only applied to categories present in the set.
    void setPatternsEnabled(bool enabled) { patternsEnabled_ = enabled; }

    AnnotationList tag(std::string_view content) const override;

    const CategorySet& categories() const { return categories_; }

private:
    struct Phrase {
        std::vector<std::string> words;
        CategoryId category;
    };

    CategorySet categories_;
    /// first folded word -> phrases, longest first
    std::map<std::string, std::vector<Phrase>, std::less<>> phrases_;
    bool patternsEnabled_ = true;
};

/// Per-message annotations for a whole corpus, indexed by MessageIndex.
class AnnotationIndex {
public:
    AnnotationIndex() = default;
    AnnotationIndex(CategorySet categories, std::vector<AnnotationList> perMessage);

    const CategorySet& categories() const { return categories_; }
    std::size_t size() const { return perMessage_.size(); }
    const AnnotationList& forMessage(MessageIndex i) const { return perMessage_.at(i); }

    /// Per-category annotation counts over `messages`.
    std::vector<std::size_t> tally(std::span<const MessageIndex> messages) const;

private:
    CategorySet categories_;
    std::vector<AnnotationList> perMessage_;
};

/// Tags every message. Parallel over messages; results are identical to
/// a serial run.
AnnotationIndex annotate(const Corpus& corpus, const Tagger& tagger, const CategorySet& categories);

/// Line-oriented annotations file keyed by message id (docs/formats.md).
void saveAnnotations(const AnnotationIndex& index, const Corpus& corpus, std::ostream& out);
AnnotationIndex loadAnnotations(std::istream& in, const Corpus& corpus);

} // namespace commgraph
