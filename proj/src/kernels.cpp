#include "commgraph/kernels.hpp"

#include <algorithm>

#include <omp.h>

namespace commgraph {

namespace {

// Dense per-thread P x P accumulators are used up to this many cells.
constexpr std::size_t kDenseCellLimit = std::size_t{1} << 22;

} // namespace

std::vector<ConversationStream> conversationsOf(const Corpus& corpus, std::span<const MessageIndex> selected) {
    std::vector<std::pair<std::uint64_t, MessageIndex>> keyed;
    keyed.reserve(selected.size());
    for (MessageIndex m : selected) {
        const Message& msg = corpus.message(m);
        const ParticipantPair p{std::min(msg.sender, msg.receiver), std::max(msg.sender, msg.receiver)};
        keyed.emplace_back(p.key(), m);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<ConversationStream> out;
    for (std::size_t i = 0; i < keyed.size();) {
        ConversationStream s;
        s.row = static_cast<ParticipantIndex>(keyed[i].first >> 32);
        s.col = static_cast<ParticipantIndex>(keyed[i].first);
        std::size_t j = i;
        for (; j < keyed.size() && keyed[j].first == keyed[i].first; ++j) s.messages.push_back(keyed[j].second);
        out.push_back(std::move(s));
        i = j;
    }
    return out;
}

namespace kernels {

void intersectInto(MessageMask& acc, const MessageMask& other) {
    const auto n = static_cast<std::int64_t>(std::min(acc.size(), other.size()));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] &= other[static_cast<std::size_t>(i)];
}

VolumeTable volumeTable(const Corpus& corpus, std::span<const MessageIndex> selected) {
    const std::size_t p = corpus.participantCount();
    if (p * p > kDenseCellLimit) return reference::volumeTable(corpus, selected);

    std::vector<std::uint64_t> total(p * p, 0);
    const auto n = static_cast<std::int64_t>(selected.size());
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(p * p, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const Message& m = corpus.message(selected[static_cast<std::size_t>(i)]);
            ++local[std::size_t{m.sender} * p + m.receiver];
        }
#pragma omp critical(commgraph_volume_reduce)
        for (std::size_t c = 0; c < local.size(); ++c) total[c] += local[c];
    }

    VolumeTable table;
    for (std::size_t c = 0; c < total.size(); ++c) {
        if (total[c] == 0) continue;
        table.push_back({{static_cast<ParticipantIndex>(c / p), static_cast<ParticipantIndex>(c % p)}, total[c]});
    }
    return table;
}

std::vector<std::uint64_t> pairHistograms(const Corpus& corpus, std::span<const MessageIndex> selected,
                                          const VolumeTable& table, TimeRange range, int bins) {
    const std::size_t p = corpus.participantCount();
    if (bins < 1) throw UsageError("bins must be >= 1");
    if (p * p > kDenseCellLimit) return reference::pairHistograms(corpus, selected, table, range, bins);

    std::vector<std::int32_t> rowOf(p * p, -1);
    for (std::size_t r = 0; r < table.size(); ++r) {
        rowOf[std::size_t{table[r].pair.sender} * p + table[r].pair.receiver] = static_cast<std::int32_t>(r);
    }
    const std::size_t width = static_cast<std::size_t>(bins);
    std::vector<std::uint64_t> total(table.size() * width, 0);
    const auto n = static_cast<std::int64_t>(selected.size());
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(total.size(), 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const Message& m = corpus.message(selected[static_cast<std::size_t>(i)]);
            const std::int32_t r = rowOf[std::size_t{m.sender} * p + m.receiver];
            if (r >= 0) ++local[static_cast<std::size_t>(r) * width + binOf(m.timestamp, range, bins)];
        }
#pragma omp critical(commgraph_histogram_reduce)
        for (std::size_t c = 0; c < local.size(); ++c) total[c] += local[c];
    }
    return total;
}

std::vector<std::vector<Episode>> segmentAll(const Corpus& corpus, std::span<const ConversationStream> streams,
                                             const DynamicsParams& params) {
    params.validate();
    std::vector<std::vector<Episode>> out(streams.size());
    const auto n = static_cast<std::int64_t>(streams.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& s = streams[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = segmentStream(corpus, s.messages, s.row, s.col, params);
    }
    return out;
}

MessageMask queryMask(const AnnotationIndex& index, const ConceptQuery& query) {
    return maskWhere(index.size(), [&](MessageIndex m) { return matches(query, index.forMessage(m)); });
}

} // namespace kernels

} // namespace commgraph
