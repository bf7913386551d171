#include "commgraph/kernels.hpp"

#include <map>

namespace commgraph::reference {

void intersectInto(MessageMask& acc, const MessageMask& other) {
    for (std::size_t i = 0; i < acc.size() && i < other.size(); ++i) acc[i] &= other[i];
}

VolumeTable volumeTable(const Corpus& corpus, std::span<const MessageIndex> selected) {
    std::map<ParticipantPair, std::uint64_t> counts;
    for (MessageIndex i : selected) {
        const Message& m = corpus.message(i);
        ++counts[{m.sender, m.receiver}];
    }
    VolumeTable table;
    table.reserve(counts.size());
    for (const auto& [pair, count] : counts) table.push_back({pair, count});
    return table;
}

std::vector<std::uint64_t> pairHistograms(const Corpus& corpus, std::span<const MessageIndex> selected,
                                          const VolumeTable& table, TimeRange range, int bins) {
    if (bins < 1) throw UsageError("bins must be >= 1");
    std::map<ParticipantPair, std::size_t> rowOf;
    for (std::size_t r = 0; r < table.size(); ++r) rowOf[table[r].pair] = r;
    std::vector<std::uint64_t> out(table.size() * static_cast<std::size_t>(bins), 0);
    for (MessageIndex i : selected) {
        const Message& m = corpus.message(i);
        auto it = rowOf.find({m.sender, m.receiver});
        if (it == rowOf.end()) continue;
        ++out[it->second * static_cast<std::size_t>(bins) + binOf(m.timestamp, range, bins)];
    }
    return out;
}

std::vector<std::vector<Episode>> segmentAll(const Corpus& corpus, std::span<const ConversationStream> streams,
                                             const DynamicsParams& params) {
    std::vector<std::vector<Episode>> out;
    out.reserve(streams.size());
    for (const auto& s : streams) out.push_back(segmentStream(corpus, s.messages, s.row, s.col, params));
    return out;
}

MessageMask queryMask(const AnnotationIndex& index, const ConceptQuery& query) {
    return maskWhere(index.size(), [&](MessageIndex m) { return matches(query, index.forMessage(m)); });
}

} // namespace commgraph::reference
