#pragma once

#include "commgraph/levels.hpp"

#include <span>
#include <vector>

namespace commgraph {

struct PairCount {
    ParticipantPair pair;
    std::uint64_t count = 0;
    friend bool operator==(const PairCount&, const PairCount&) = default;
};

/// Nonzero (sender, receiver) counts, ascending by pair.
using VolumeTable = std::vector<PairCount>;

struct Histogram {
    std::vector<double> edges;  ///< bins + 1 edges
    std::vector<std::uint64_t> counts;
};

/// Message counts per ordered pair over the selection. Counts sum to
/// selection.size().
VolumeTable volumeAggregate(const Corpus& corpus, const Selection& selection);

/// Uniform bins over `range` for the selected sender->receiver messages.
/// Throws UsageError when bins < 1.
Histogram distributionAggregate(const Corpus& corpus, const Selection& selection,
                                ParticipantPair pair, int bins, TimeRange range);

/// Bin of t for `bins` uniform bins over the closed range; timestamps
/// outside are clamped. A zero-width range maps everything to bin 0.
std::size_t binOf(Timestamp t, TimeRange range, int bins);
std::vector<double> binEdges(TimeRange range, int bins);

/// Per-participant totals of a volume table; rows are senders, columns receivers.
std::vector<std::uint64_t> rowMarginals(const VolumeTable& table, std::size_t participants);
std::vector<std::uint64_t> colMarginals(const VolumeTable& table, std::size_t participants);

} // namespace commgraph
