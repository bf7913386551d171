#pragma once

#include "commgraph/common.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace commgraph {

using Attributes = std::map<std::string, std::string>;

struct Participant {
    std::string id;
    std::string displayName;
    Attributes attributes;
};

/// One directed communication event. Sender and receiver are indices into
/// the owning corpus' participant list.
struct Message {
    std::string id;
    ParticipantIndex sender = 0;
    ParticipantIndex receiver = 0;
    Timestamp timestamp = 0;
    std::string content;
    std::string channel;
    Attributes meta;
};

/// An ordered (sender, receiver) pair.
struct ParticipantPair {
    ParticipantIndex sender = 0;
    ParticipantIndex receiver = 0;

    std::uint64_t key() const { return (std::uint64_t{sender} << 32) | receiver; }
    friend auto operator<=>(const ParticipantPair&, const ParticipantPair&) = default;
};

class CorpusBuilder;

/// The immutable communication multidigraph: participants as vertices,
/// messages as parallel directed edges, content and metadata attached to
/// each edge.
///
/// Participants are sorted by id and messages by (timestamp, id); every
/// index handed out by this class refers to those orders.
class Corpus {
public:
    Corpus() = default;

    std::span<const Participant> participants() const { return participants_; }
    std::span<const Message> messages() const { return messages_; }
    std::size_t participantCount() const { return participants_.size(); }
    std::size_t messageCount() const { return messages_.size(); }

    const Participant& participant(ParticipantIndex i) const { return participants_.at(i); }
    const Message& message(MessageIndex i) const { return messages_.at(i); }
    const std::string& participantId(ParticipantIndex i) const { return participants_.at(i).id; }

    std::optional<ParticipantIndex> findParticipant(std::string_view id) const;
    /// Throws NotFoundError naming the id.
    ParticipantIndex requireParticipant(std::string_view id) const;

    std::optional<MessageIndex> findMessage(std::string_view id) const;
    MessageIndex requireMessage(std::string_view id) const;

    /// Messages sent from `sender` to `receiver`, in corpus order.
    std::span<const MessageIndex> pairMessages(ParticipantIndex sender, ParticipantIndex receiver) const;

    /// Every ordered pair with at least one message, ascending.
    std::span<const ParticipantPair> activePairs() const { return activePairs_; }

    /// [min, max] timestamp; empty for an empty corpus.
    std::optional<TimeRange> timeExtent() const { return timeExtent_; }

    /// Messages a->b whose timestamp lies in `range` (inclusive), in corpus order.
    std::vector<MessageIndex> messagesBetween(std::string_view a, std::string_view b,
                                              std::optional<TimeRange> range = std::nullopt) const;
    std::vector<MessageIndex> messagesBetween(ParticipantIndex a, ParticipantIndex b,
                                              std::optional<TimeRange> range = std::nullopt) const;

    /// Chronological union of a->b and b->a traffic (a single list for a == b).
    std::vector<MessageIndex> conversation(ParticipantIndex a, ParticipantIndex b) const;

private:
    friend class CorpusBuilder;

    std::vector<Participant> participants_;
    std::vector<Message> messages_;
    std::unordered_map<std::string, ParticipantIndex> participantLookup_;
    std::unordered_map<std::string, MessageIndex> messageLookup_;
    std::unordered_map<std::uint64_t, std::vector<MessageIndex>> pairIndex_;
    std::vector<ParticipantPair> activePairs_;
    std::optional<TimeRange> timeExtent_;
};

/// Accumulates participants and messages by participant id, then freezes
/// them into a sorted, indexed Corpus.
class CorpusBuilder {
public:
    /// Adds a participant, or merges display name / attributes into an
    /// existing one with the same id.
    void addParticipant(Participant p);

    /// Participants referenced by id are created on demand.
    void addMessage(std::string id, const std::string& sender, const std::string& receiver,
                    Timestamp timestamp, std::string content = {}, std::string channel = {},
                    Attributes meta = {});

    std::size_t messageCount() const { return drafts_.size(); }

    /// Throws DataError on duplicate message ids.
    Corpus build() &&;

private:
    struct Draft {
        std::string id;
        std::string sender;
        std::string receiver;
        Timestamp timestamp;
        std::string content;
        std::string channel;
        Attributes meta;
    };

    std::map<std::string, Participant> participants_;
    std::vector<Draft> drafts_;
};

/// Line-oriented structured-text corpus file (format documented in
/// docs/formats.md). Writing is deterministic; loading validates.
void saveCorpus(const Corpus& corpus, std::ostream& out);
Corpus loadCorpus(std::istream& in);

void saveCorpusFile(const Corpus& corpus, const std::string& path);
Corpus loadCorpusFile(const std::string& path);

/// SHA-256 over the serialized corpus, hex encoded.
std::string corpusHash(const Corpus& corpus);

} // namespace commgraph
