#pragma once

#include "commgraph/corpus.hpp"
#include "commgraph/dynamics.hpp"
#include "commgraph/query.hpp"
#include "commgraph/thematic.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace commgraph {

// Level identifiers, in registration order.
inline constexpr std::string_view kVolumeLevel = "volume";
inline constexpr std::string_view kDistributionLevel = "distribution";
inline constexpr std::string_view kTimefilterLevel = "timefilter";
inline constexpr std::string_view kUserSelectionLevel = "userselection";
inline constexpr std::string_view kKeywordLevel = "keyword";
inline constexpr std::string_view kThematicLevel = "thematic";
inline constexpr std::string_view kDynamicsLevel = "dynamics";

enum class UserRole { Sender, Receiver, Either };
enum class KeywordMode { Any, All };

struct VolumeParams {
    friend bool operator==(const VolumeParams&, const VolumeParams&) = default;
};

struct DistributionParams {
    friend bool operator==(const DistributionParams&, const DistributionParams&) = default;
};

struct TimeFilterParams {
    TimeRange range;
    friend bool operator==(const TimeFilterParams&, const TimeFilterParams&) = default;
};

struct UserSelectionParams {
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    UserRole role = UserRole::Either;
    friend bool operator==(const UserSelectionParams&, const UserSelectionParams&) = default;
};

struct KeywordParams {
    std::vector<std::string> terms;
    KeywordMode mode = KeywordMode::Any;
    bool caseFold = true;
    friend bool operator==(const KeywordParams&, const KeywordParams&) = default;
};

struct ThematicParams {
    std::string query;  ///< concept query DSL
    friend bool operator==(const ThematicParams&, const ThematicParams&) = default;
};

using LevelParams = std::variant<VolumeParams, DistributionParams, TimeFilterParams,
                                 UserSelectionParams, KeywordParams, ThematicParams, DynamicsParams>;

struct LevelState {
    bool enabled = false;
    LevelParams params;

    std::string_view levelId() const;
    friend bool operator==(const LevelState&, const LevelState&) = default;
};

struct LevelDescriptor {
    std::string levelId;
    bool hasView = false;
    bool hasProperties = false;
    std::vector<std::string> featureNames;
};

/// All levels in registration order. Feature names depend only on the
/// category set.
std::vector<LevelDescriptor> levelRegistry(const CategorySet& categories);

/// What a level needs to evaluate against a corpus. Annotations are only
/// required by an enabled thematic level.
struct LevelContext {
    const Corpus& corpus;
    const AnnotationIndex* annotations = nullptr;
    CategorySet categories = CategorySet::defaults();
};

struct Selection {
    std::vector<MessageIndex> messages;          ///< ascending
    std::vector<ParticipantIndex> participants;  ///< endpoints of messages, ascending

    std::size_t size() const { return messages.size(); }
    bool contains(MessageIndex m) const;
};

/// Checks parameters against the level schema and the corpus. Throws
/// LevelError naming level and field.
void validateLevel(const LevelContext& ctx, const LevelState& state);

/// The level's predicate as a mask. A disabled level passes everything.
MessageMask levelMask(const LevelContext& ctx, const LevelState& state);

/// Conjunction of every enabled level's predicate.
Selection applyAll(const LevelContext& ctx, std::span<const LevelState> states);

Selection selectionFromMask(const Corpus& corpus, const MessageMask& mask);

// Individual predicates.
MessageMask timefilter(const Corpus& corpus, TimeRange range);
MessageMask userSelection(const Corpus& corpus, const UserSelectionParams& params);
MessageMask keywordSearch(const Corpus& corpus, const KeywordParams& params);
/// Messages that belong to some episode of their pair.
MessageMask episodeMembership(const Corpus& corpus, const DynamicsParams& params);

/// Range the distribution bins span: the enabled timefilter's range, else
/// the corpus extent.
std::optional<TimeRange> activeTimeRange(const Corpus& corpus, std::span<const LevelState> states);

struct MessageTarget {
    std::string messageId;
};
using FeatureTarget = std::variant<MessageTarget, EpisodeRef>;

/// Concatenated features of the enabled feature-emitting levels, in
/// registration order. Episode refs are resolved over the pair's full
/// traffic with the dynamics level's parameters (defaults if absent).
FeatureVector featureVector(const LevelContext& ctx, const FeatureTarget& target,
                            std::span<const LevelState> states);
/// Same, for an already segmented episode.
FeatureVector featureVector(const LevelContext& ctx, const Episode& episode,
                            std::span<const LevelState> states);
std::vector<std::string> featureNames(const CategorySet& categories, std::span<const LevelState> states);

/// The full, canonical filter state of a session: one LevelState per
/// registered level, in registration order, plus the fade threshold.
struct AnalysisState {
    std::vector<LevelState> levels;
    double fadeThreshold = 0.5;

    /// Every level present and disabled, default parameters.
    static AnalysisState initial();

    LevelState& level(std::string_view id);
    const LevelState& level(std::string_view id) const;

    template <class Params>
    const Params& params(std::string_view id) const { return std::get<Params>(level(id).params); }

    friend bool operator==(const AnalysisState&, const AnalysisState&) = default;
};

nlohmann::json toJson(const LevelState& state);
LevelState levelStateFromJson(const nlohmann::json& doc);

nlohmann::json toJson(const AnalysisState& state);
/// Missing levels take their initial (disabled) state; unknown levels or
/// malformed fields throw LevelError.
AnalysisState analysisStateFromJson(const nlohmann::json& doc);

/// Canonical serialization: stable key order, all levels present.
std::string canonicalText(const AnalysisState& state);

} // namespace commgraph
