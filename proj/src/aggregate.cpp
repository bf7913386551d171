#include "commgraph/aggregate.hpp"

#include "commgraph/kernels.hpp"

#include <algorithm>

namespace commgraph {

VolumeTable volumeAggregate(const Corpus& corpus, const Selection& selection) {
    return kernels::volumeTable(corpus, selection.messages);
}

std::size_t binOf(Timestamp t, TimeRange range, int bins) {
    if (bins < 1) throw UsageError("bin count must be >= 1");
    if (range.end <= range.start || t <= range.start) return 0;
    if (t >= range.end) return static_cast<std::size_t>(bins - 1);
    const auto offset = static_cast<__int128>(t - range.start) * bins;
    const auto index = static_cast<std::size_t>(offset / (range.end - range.start));
    return std::min(index, static_cast<std::size_t>(bins - 1));
}

std::vector<double> binEdges(TimeRange range, int bins) {
    if (bins < 1) throw UsageError("bin count must be >= 1");
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    const double span = static_cast<double>(range.end - range.start);
    for (int k = 0; k <= bins; ++k) {
        edges[static_cast<std::size_t>(k)] = static_cast<double>(range.start) + span * k / bins;
    }
    return edges;
}

Histogram distributionAggregate(const Corpus& corpus, const Selection& selection, ParticipantPair pair, int bins,
                                TimeRange range) {
    if (bins < 1) throw UsageError("bin count must be >= 1");
    Histogram h;
    h.edges = binEdges(range, bins);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (pair.sender >= corpus.participantCount() || pair.receiver >= corpus.participantCount()) return h;
    for (MessageIndex m : corpus.pairMessages(pair.sender, pair.receiver)) {
        if (selection.contains(m)) ++h.counts[binOf(corpus.message(m).timestamp, range, bins)];
    }
    return h;
}

std::vector<std::uint64_t> rowMarginals(const VolumeTable& table, std::size_t participants) {
    std::vector<std::uint64_t> out(participants, 0);
    for (const PairCount& c : table) out.at(c.pair.sender) += c.count;
    return out;
}

std::vector<std::uint64_t> colMarginals(const VolumeTable& table, std::size_t participants) {
    std::vector<std::uint64_t> out(participants, 0);
    for (const PairCount& c : table) out.at(c.pair.receiver) += c.count;
    return out;
}

} // namespace commgraph
