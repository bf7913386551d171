#pragma once

// Data-parallel kernels. Each function in `kernels` has a serial twin in
// `reference` with identical results; the reference versions exist for
// tests and the benchmark.

#include "commgraph/aggregate.hpp"
#include "commgraph/dynamics.hpp"
#include "commgraph/query.hpp"

#include <span>
#include <vector>

namespace commgraph {

/// One pair's chronological bidirectional traffic to segment.
struct ConversationStream {
    ParticipantIndex row = 0;
    ParticipantIndex col = 0;
    std::vector<MessageIndex> messages;
};

/// Groups selected messages into unordered-pair conversations (row < col,
/// self-pairs with row == col), ascending by (row, col).
std::vector<ConversationStream> conversationsOf(const Corpus& corpus, std::span<const MessageIndex> selected);

namespace kernels {

template <class Predicate>
MessageMask maskWhere(std::size_t n, Predicate pred) {
    MessageMask mask(n, 0);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        mask[static_cast<std::size_t>(i)] = pred(static_cast<MessageIndex>(i)) ? 1 : 0;
    }
    return mask;
}

void intersectInto(MessageMask& acc, const MessageMask& other);

VolumeTable volumeTable(const Corpus& corpus, std::span<const MessageIndex> selected);

/// Flat counts, table.size() x bins, row-major in table order.
std::vector<std::uint64_t> pairHistograms(const Corpus& corpus, std::span<const MessageIndex> selected,
                                          const VolumeTable& table, TimeRange range, int bins);

std::vector<std::vector<Episode>> segmentAll(const Corpus& corpus,
                                             std::span<const ConversationStream> streams,
                                             const DynamicsParams& params);

MessageMask queryMask(const AnnotationIndex& index, const ConceptQuery& query);

} // namespace kernels

namespace reference {

template <class Predicate>
MessageMask maskWhere(std::size_t n, Predicate pred) {
    MessageMask mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = pred(static_cast<MessageIndex>(i)) ? 1 : 0;
    }
    return mask;
}

void intersectInto(MessageMask& acc, const MessageMask& other);

VolumeTable volumeTable(const Corpus& corpus, std::span<const MessageIndex> selected);

std::vector<std::uint64_t> pairHistograms(const Corpus& corpus, std::span<const MessageIndex> selected,
                                          const VolumeTable& table, TimeRange range, int bins);

std::vector<std::vector<Episode>> segmentAll(const Corpus& corpus,
                                             std::span<const ConversationStream> streams,
                                             const DynamicsParams& params);

MessageMask queryMask(const AnnotationIndex& index, const ConceptQuery& query);

} // namespace reference

} // namespace commgraph
