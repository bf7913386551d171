#include "commgraph/corpus.hpp"

#include "commgraph/digest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace commgraph {

using nlohmann::json;

namespace {

constexpr std::string_view kCorpusFormat = "commgraph-corpus";
constexpr int kCorpusVersion = 1;

const std::vector<MessageIndex> kNoMessages;

} // namespace

std::optional<ParticipantIndex> Corpus::findParticipant(std::string_view id) const {
    auto it = participantLookup_.find(std::string(id));
    if (it == participantLookup_.end()) return std::nullopt;
    return it->second;
}

ParticipantIndex Corpus::requireParticipant(std::string_view id) const {
    if (auto p = findParticipant(id)) return *p;
    throw NotFoundError("unknown participant '" + std::string(id) + "'");
}

std::optional<MessageIndex> Corpus::findMessage(std::string_view id) const {
    auto it = messageLookup_.find(std::string(id));
    if (it == messageLookup_.end()) return std::nullopt;
    return it->second;
}

MessageIndex Corpus::requireMessage(std::string_view id) const {
    if (auto m = findMessage(id)) return *m;
    throw NotFoundError("unknown message '" + std::string(id) + "'");
}

std::span<const MessageIndex> Corpus::pairMessages(ParticipantIndex sender, ParticipantIndex receiver) const {
    auto it = pairIndex_.find(ParticipantPair{sender, receiver}.key());
    if (it == pairIndex_.end()) return kNoMessages;
    return it->second;
}

std::vector<MessageIndex> Corpus::messagesBetween(std::string_view a, std::string_view b,
                                                  std::optional<TimeRange> range) const {
    const ParticipantIndex pa = requireParticipant(a);
    const ParticipantIndex pb = requireParticipant(b);
    return messagesBetween(pa, pb, range);
}

std::vector<MessageIndex> Corpus::messagesBetween(ParticipantIndex a, ParticipantIndex b,
                                                  std::optional<TimeRange> range) const {
    if (a >= participants_.size()) throw NotFoundError("unknown participant index " + std::to_string(a));
    if (b >= participants_.size()) throw NotFoundError("unknown participant index " + std::to_string(b));
    const auto list = pairMessages(a, b);
    if (!range) return {list.begin(), list.end()};
    // The pair list is in corpus order, hence sorted by timestamp.
    const auto lo = std::partition_point(list.begin(), list.end(),
                                         [&](MessageIndex m) { return messages_[m].timestamp < range->start; });
    const auto hi = std::partition_point(lo, list.end(),
                                         [&](MessageIndex m) { return messages_[m].timestamp <= range->end; });
    return {lo, hi};
}

std::vector<MessageIndex> Corpus::conversation(ParticipantIndex a, ParticipantIndex b) const {
    const auto ab = pairMessages(a, b);
    if (a == b) return {ab.begin(), ab.end()};
    const auto ba = pairMessages(b, a);
    std::vector<MessageIndex> merged;
    merged.reserve(ab.size() + ba.size());
    std::merge(ab.begin(), ab.end(), ba.begin(), ba.end(), std::back_inserter(merged));
    return merged;
}

void CorpusBuilder::addParticipant(Participant p) {
    if (p.id.empty()) throw DataError("participant id must not be empty");
    auto [it, inserted] = participants_.try_emplace(p.id, p);
    if (!inserted) {
        if (!p.displayName.empty()) it->second.displayName = p.displayName;
        for (auto& [k, v] : p.attributes) it->second.attributes[k] = v;
    }
}

void CorpusBuilder::addMessage(std::string id, const std::string& sender, const std::string& receiver,
                               Timestamp timestamp, std::string content, std::string channel, Attributes meta) {
    if (id.empty()) throw DataError("message id must not be empty");
    for (const std::string* pid : {&sender, &receiver}) {
        if (pid->empty()) throw DataError("message '" + id + "': participant id must not be empty");
        if (!participants_.contains(*pid)) participants_.emplace(*pid, Participant{*pid, *pid, {}});
    }
    drafts_.push_back({std::move(id), sender, receiver, timestamp, std::move(content), std::move(channel),
                       std::move(meta)});
}

Corpus CorpusBuilder::build() && {
    Corpus c;
    c.participants_.reserve(participants_.size());
    for (auto& [id, p] : participants_) {
        if (p.displayName.empty()) p.displayName = id;
        c.participantLookup_.emplace(id, static_cast<ParticipantIndex>(c.participants_.size()));
        c.participants_.push_back(std::move(p));
    }
    participants_.clear();

    std::sort(drafts_.begin(), drafts_.end(), [](const Draft& a, const Draft& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });
    c.messages_.reserve(drafts_.size());
    c.messageLookup_.reserve(drafts_.size());
    for (auto& d : drafts_) {
        const auto index = static_cast<MessageIndex>(c.messages_.size());
        if (!c.messageLookup_.emplace(d.id, index).second) {
            throw DataError("duplicate message id '" + d.id + "'");
        }
        Message m;
        m.id = std::move(d.id);
        m.sender = c.participantLookup_.at(d.sender);
        m.receiver = c.participantLookup_.at(d.receiver);
        m.timestamp = d.timestamp;
        m.content = std::move(d.content);
        m.channel = std::move(d.channel);
        m.meta = std::move(d.meta);
        c.pairIndex_[ParticipantPair{m.sender, m.receiver}.key()].push_back(index);
        c.messages_.push_back(std::move(m));
    }
    drafts_.clear();

    c.activePairs_.reserve(c.pairIndex_.size());
    for (const auto& [key, list] : c.pairIndex_) {
        c.activePairs_.push_back({static_cast<ParticipantIndex>(key >> 32), static_cast<ParticipantIndex>(key)});
    }
    std::sort(c.activePairs_.begin(), c.activePairs_.end());

    if (!c.messages_.empty()) c.timeExtent_ = TimeRange{c.messages_.front().timestamp, c.messages_.back().timestamp};
    return c;
}

void saveCorpus(const Corpus& corpus, std::ostream& out) {
    json header = {{"format", kCorpusFormat},
                   {"version", kCorpusVersion},
                   {"participants", corpus.participantCount()},
                   {"messages", corpus.messageCount()}};
    out << header.dump() << '\n';
    for (const Participant& p : corpus.participants()) {
        json line = {{"id", p.id}, {"name", p.displayName}};
        if (!p.attributes.empty()) line["attributes"] = p.attributes;
        out << line.dump() << '\n';
    }
    for (const Message& m : corpus.messages()) {
        json line = {{"id", m.id},
                     {"from", corpus.participantId(m.sender)},
                     {"to", corpus.participantId(m.receiver)},
                     {"time", m.timestamp}};
        if (!m.content.empty()) line["content"] = m.content;
        if (!m.channel.empty()) line["channel"] = m.channel;
        if (!m.meta.empty()) line["meta"] = m.meta;
        out << line.dump() << '\n';
    }
}

Corpus loadCorpus(std::istream& in) {
    std::string line;
    std::size_t lineNo = 0;
    auto nextLine = [&]() -> json {
        if (!std::getline(in, line)) throw DataError("corpus file truncated after line " + std::to_string(lineNo));
        ++lineNo;
        try {
            return json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("corpus file line " + std::to_string(lineNo) + ": " + e.what());
        }
    };

    const json header = nextLine();
    if (header.value("format", "") != kCorpusFormat) throw DataError("not a commgraph corpus file");
    if (header.value("version", 0) != kCorpusVersion) {
        throw DataError("unsupported corpus file version " + header.value("version", json()).dump());
    }
    const auto participants = header.at("participants").get<std::size_t>();
    const auto messages = header.at("messages").get<std::size_t>();

    CorpusBuilder builder;
    try {
        for (std::size_t i = 0; i < participants; ++i) {
            const json p = nextLine();
            builder.addParticipant({p.at("id").get<std::string>(), p.value("name", ""),
                                    p.value("attributes", Attributes{})});
        }
        for (std::size_t i = 0; i < messages; ++i) {
            const json m = nextLine();
            builder.addMessage(m.at("id").get<std::string>(), m.at("from").get<std::string>(),
                               m.at("to").get<std::string>(), m.at("time").get<Timestamp>(),
                               m.value("content", ""), m.value("channel", ""), m.value("meta", Attributes{}));
        }
    } catch (const json::exception& e) {
        throw DataError("corpus file line " + std::to_string(lineNo) + ": " + e.what());
    }
    return std::move(builder).build();
}

void saveCorpusFile(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    saveCorpus(corpus, out);
    if (!out.flush()) throw Error("write to '" + path + "' failed");
}

Corpus loadCorpusFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file '" + path + "'");
    return loadCorpus(in);
}

std::string corpusHash(const Corpus& corpus) {
    std::ostringstream out;
    saveCorpus(corpus, out);
    return sha256Hex(out.str());
}

} // namespace commgraph
