#pragma once

#include "commgraph/corpus.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

/// Conversational-dynamics parameters. Each message contributes a Gaussian
/// bump centred at (timestamp + mu) with standard deviation sigma * h; an
/// episode is a maximal run where the summed density stays >= theta.
struct DynamicsParams {
    double mu = 0.0;          ///< seconds; response shift (signed)
    double sigma = 6 * 3600;  ///< seconds; width of temporal influence
    double h = 1.0;           ///< bandwidth scale, spikes vs tendencies
    double theta = 0.5;       ///< density threshold, in "simultaneous messages"
    int minMessages = 1;      ///< shorter runs are discarded

    double width() const { return sigma * h; }

    /// Throws LevelError(level "dynamics") naming the bad field.
    void validate() const;

    friend bool operator==(const DynamicsParams&, const DynamicsParams&) = default;
};

/// Identifies an episode by orientation and its first message. Stable for a
/// fixed message stream and parameter set. Text form "row:col:first".
struct EpisodeRef {
    ParticipantIndex row = 0;
    ParticipantIndex col = 0;
    MessageIndex first = 0;

    std::string toString() const;
    static std::optional<EpisodeRef> parse(std::string_view text);
    friend auto operator<=>(const EpisodeRef&, const EpisodeRef&) = default;
};

struct Episode {
    ParticipantIndex row = 0;  ///< orientation: the "a" of the pair
    ParticipantIndex col = 0;
    std::vector<MessageIndex> messages;  ///< chronological
    Timestamp start = 0;
    Timestamp end = 0;
    ParticipantIndex initiator = 0;
    double peakDensity = 0.0;

    EpisodeRef ref() const { return {row, col, messages.front()}; }
};

/// Summed-kernel density of `times` at t. Zero for no messages.
double density(std::span<const Timestamp> times, double t, const DynamicsParams& params);

/// Segments one chronological message stream (typically both directions
/// of a pair) into episodes, sorted by start. `row`/`col` only set the
/// orientation of the results.
std::vector<Episode> segmentStream(const Corpus& corpus, std::span<const MessageIndex> stream,
                                   ParticipantIndex row, ParticipantIndex col,
                                   const DynamicsParams& params);

/// Episodes over the full bidirectional traffic of (a, b).
std::vector<Episode> segmentEpisodes(const Corpus& corpus, ParticipantIndex a, ParticipantIndex b,
                                     const DynamicsParams& params);

/// durationSeconds, messageCount, directionBalance, initiatorIsRowParticipant,
/// meanInterMessageGap, peakDensity.
const std::vector<std::string>& episodeFeatureNames();
FeatureVector episodeFeatures(const Episode& episode, const Corpus& corpus);

/// Finds the episode with this ref among the segmentation of `stream`.
std::optional<Episode> findEpisode(const Corpus& corpus, std::span<const MessageIndex> stream,
                                   const EpisodeRef& ref, const DynamicsParams& params);

} // namespace commgraph
