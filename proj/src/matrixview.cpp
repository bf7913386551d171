#include "commgraph/matrixview.hpp"

#include "commgraph/kernels.hpp"
#include "commgraph/timeparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace commgraph {

using nlohmann::json;

ZoomView viewForCellSize(int px) {
    if (px < 1) throw UsageError("cell size must be >= 1 px");
    if (px < 2 * kBaseCellSize) return ZoomView::Volume;
    if (px < 4 * kBaseCellSize) return ZoomView::Distribution;
    if (px < 8 * kBaseCellSize) return ZoomView::DistributionPlus;
    return ZoomView::Dynamics;
}

std::string_view viewName(ZoomView view) {
    switch (view) {
    case ZoomView::Volume: return "volume";
    case ZoomView::Distribution: return "distribution";
    case ZoomView::DistributionPlus: return "distributionPlus";
    case ZoomView::Dynamics: return "dynamics";
    }
    return "volume";
}

ZoomView parseView(std::string_view name) {
    std::string lower(name);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "volume") return ZoomView::Volume;
    if (lower == "distribution") return ZoomView::Distribution;
    if (lower == "distributionplus" || lower == "distribution+") return ZoomView::DistributionPlus;
    if (lower == "dynamics") return ZoomView::Dynamics;
    throw UsageError("unknown view '" + std::string(name) + "'");
}

int binsForView(ZoomView view) {
    switch (view) {
    case ZoomView::Volume: return 1;
    case ZoomView::Distribution: return kDistributionBins;
    case ZoomView::DistributionPlus:
    case ZoomView::Dynamics: return kDistributionPlusBins;
    }
    return 1;
}

AxisOrder AxisOrder::parse(std::string_view kind, std::vector<std::string> manual) {
    AxisOrder o;
    if (kind == "alphabetical") o.kind = Kind::Alphabetical;
    else if (kind == "volumeDesc") o.kind = Kind::VolumeDesc;
    else if (kind == "manual") o.kind = Kind::Manual;
    else throw UsageError("unknown axis order '" + std::string(kind) + "'");
    o.manual = std::move(manual);
    return o;
}

namespace {

std::vector<ParticipantIndex> axis(const Corpus& corpus, const AxisOrder& order,
                                   const std::vector<std::uint64_t>& marginals, const char* name) {
    const std::size_t n = corpus.participantCount();
    std::vector<ParticipantIndex> out(n);
    std::iota(out.begin(), out.end(), ParticipantIndex{0});
    switch (order.kind) {
    case AxisOrder::Kind::Alphabetical:
        break;
    case AxisOrder::Kind::VolumeDesc:
        std::stable_sort(out.begin(), out.end(),
                         [&](ParticipantIndex a, ParticipantIndex b) { return marginals[a] > marginals[b]; });
        break;
    case AxisOrder::Kind::Manual: {
        if (order.manual.size() != n) {
            throw UsageError(std::string("manual ") + name + " order must list all " + std::to_string(n) +
                             " participants");
        }
        std::vector<char> seen(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = corpus.findParticipant(order.manual[i]);
            if (!p) throw UsageError(std::string("manual ") + name + " order names unknown participant '" + order.manual[i] + "'");
            if (seen[*p]++) throw UsageError(std::string("manual ") + name + " order repeats '" + order.manual[i] + "'");
            out[i] = *p;
        }
        break;
    }
    }
    return out;
}

json rangeJson(const std::optional<TimeRange>& r) {
    if (!r) return nullptr;
    return json{{"start", r->start}, {"end", r->end}};
}

std::pair<std::size_t, std::size_t> clampWindow(const AxisWindow& w, std::size_t n) {
    const std::size_t first = std::min(w.start, n);
    const std::size_t last = w.count ? first + std::min(*w.count, n - first) : n;
    return {first, last};
}

} // namespace

MatrixResponse computeMatrix(const Session& session, const MatrixRequest& request) {
    const Corpus& corpus = session.corpus();
    MatrixResponse out;
    out.view = request.view;

    const bool current = !request.node || *request.node == session.provenance().current();
    out.node = current ? session.provenance().current() : *request.node;
    const AnalysisState state = current ? session.state() : session.stateOf(out.node);
    const Selection owned = current ? Selection{} : session.selectionOf(out.node);
    const Selection& selection = current ? session.selection() : owned;

    const VolumeTable full = kernels::volumeTable(corpus, selection.messages);
    const std::size_t n = corpus.participantCount();
    out.rows = axis(corpus, request.rowOrder, rowMarginals(full, n), "row");
    out.cols = axis(corpus, request.colOrder, colMarginals(full, n), "column");
    for (const PairCount& c : full) {
        out.maxCount = std::max(out.maxCount, c.count);
        out.totalCount += c.count;
    }

    std::vector<std::size_t> rowPos(n), colPos(n);
    for (std::size_t i = 0; i < n; ++i) {
        rowPos[out.rows[i]] = i;
        colPos[out.cols[i]] = i;
    }
    out.rowRange = clampWindow(request.rowWindow, n);
    out.colRange = clampWindow(request.colWindow, n);
    const auto inRows = [&](ParticipantIndex p) { return rowPos[p] >= out.rowRange.first && rowPos[p] < out.rowRange.second; };
    const auto inCols = [&](ParticipantIndex p) { return colPos[p] >= out.colRange.first && colPos[p] < out.colRange.second; };
    VolumeTable table;
    for (const PairCount& c : full) {
        if (inRows(c.pair.sender) && inCols(c.pair.receiver)) table.push_back(c);
    }

    std::vector<std::uint64_t> histograms;
    int bins = 0;
    if (request.view == ZoomView::Distribution || request.view == ZoomView::DistributionPlus) {
        out.timeRange = activeTimeRange(corpus, state.levels);
        bins = binsForView(request.view);
        if (out.timeRange) {
            out.binEdges = binEdges(*out.timeRange, bins);
            histograms = kernels::pairHistograms(corpus, selection.messages, table, *out.timeRange, bins);
        }
    }

    std::unordered_map<std::uint64_t, std::vector<Episode>> episodes;
    if (request.view == ZoomView::Dynamics) {
        // A cell shows its pair's episodes, which include the reverse direction.
        std::vector<MessageIndex> visible;
        for (MessageIndex m : selection.messages) {
            const Message& msg = corpus.message(m);
            if ((inRows(msg.sender) && inCols(msg.receiver)) || (inRows(msg.receiver) && inCols(msg.sender))) {
                visible.push_back(m);
            }
        }
        const auto streams = conversationsOf(corpus, visible);
        auto segmented = kernels::segmentAll(corpus, streams, state.params<DynamicsParams>(kDynamicsLevel));
        for (std::size_t i = 0; i < streams.size(); ++i) {
            episodes[ParticipantPair{streams[i].row, streams[i].col}.key()] = std::move(segmented[i]);
        }
    }

    out.cells.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const PairCount& c = table[i];
        CellAggregate cell;
        cell.row = c.pair.sender;
        cell.col = c.pair.receiver;
        cell.count = c.count;
        cell.normalizedCount = out.maxCount ? static_cast<double>(c.count) / static_cast<double>(out.maxCount) : 0.0;
        if (!histograms.empty()) {
            const auto b = static_cast<std::size_t>(bins);
            cell.histogram.assign(histograms.begin() + static_cast<std::ptrdiff_t>(i * b),
                                  histograms.begin() + static_cast<std::ptrdiff_t>((i + 1) * b));
        }
        if (request.view == ZoomView::Dynamics) {
            const ParticipantIndex lo = std::min(cell.row, cell.col), hi = std::max(cell.row, cell.col);
            for (Episode e : episodes[ParticipantPair{lo, hi}.key()]) {
                e.row = cell.row;
                e.col = cell.col;
                EpisodeSummary s;
                s.episodeId = e.ref().toString();
                s.start = e.start;
                s.end = e.end;
                s.messageCount = e.messages.size();
                if (session.model()) {
                    const Score score = session.model()->score(session.features(e));
                    s.score = score.p;
                    s.fadeFactor = fadeFactor(score.p, state.fadeThreshold);
                }
                cell.episodes.push_back(std::move(s));
            }
        }
        out.cells.push_back(std::move(cell));
    }

    std::sort(out.cells.begin(), out.cells.end(), [&](const CellAggregate& a, const CellAggregate& b) {
        return rowPos[a.row] < rowPos[b.row] || (rowPos[a.row] == rowPos[b.row] && colPos[a.col] < colPos[b.col]);
    });
    return out;
}

namespace {

/// Appends JSON text directly; the matrix body is the one hot response.
class JsonWriter {
public:
    explicit JsonWriter(std::string& out) : out_(out) {}

    JsonWriter& raw(std::string_view s) {
        out_ += s;
        return *this;
    }
    JsonWriter& key(std::string_view k) {
        out_ += '"';
        out_ += k;
        out_ += "\":";
        return *this;
    }
    JsonWriter& str(std::string_view s) {
        out_ += json(s).dump();
        return *this;
    }
    template <class T>
    JsonWriter& num(T v) {
        char buf[32];
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(v)) return raw("null");
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            std::string_view text(buf, static_cast<std::size_t>(end - buf));
            out_ += text;
            if (text.find_first_of(".e") == std::string_view::npos) out_ += ".0";
        } else {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out_.append(buf, end);
        }
        return *this;
    }
    template <class Seq>
    JsonWriter& nums(const Seq& values) {
        out_ += '[';
        bool first = true;
        for (const auto& v : values) {
            if (!first) out_ += ',';
            first = false;
            num(v);
        }
        out_ += ']';
        return *this;
    }

private:
    std::string& out_;
};

} // namespace

std::string matrixJson(const MatrixResponse& r, const Corpus& corpus) {
    std::vector<std::string> ids(corpus.participantCount());
    for (ParticipantIndex p = 0; p < ids.size(); ++p) ids[p] = json(corpus.participantId(p)).dump();
    auto idList = [&](const std::vector<ParticipantIndex>& axis) {
        std::string s = "[";
        for (std::size_t i = 0; i < axis.size(); ++i) {
            if (i > 0) s += ',';
            s += ids[axis[i]];
        }
        return s + "]";
    };

    std::string out;
    out.reserve(64 * r.cells.size() + 1024);
    JsonWriter w(out);
    w.raw("{").key("node").num(r.node);
    w.raw(",").key("view").str(viewName(r.view));
    w.raw(",").key("rows").raw(idList(r.rows));
    w.raw(",").key("cols").raw(idList(r.cols));
    w.raw(",").key("window").raw("{").key("rowStart").num(r.rowRange.first);
    w.raw(",").key("rowEnd").num(r.rowRange.second);
    w.raw(",").key("colStart").num(r.colRange.first);
    w.raw(",").key("colEnd").num(r.colRange.second).raw("}");
    w.raw(",").key("maxCount").num(r.maxCount);
    w.raw(",").key("totalCount").num(r.totalCount);
    w.raw(",").key("timeRange").raw(rangeJson(r.timeRange).dump());
    w.raw(",").key("binEdges").nums(r.binEdges);
    w.raw(",").key("cells").raw("[");
    const bool histograms = r.view == ZoomView::Distribution || r.view == ZoomView::DistributionPlus;
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        const CellAggregate& c = r.cells[i];
        if (i > 0) w.raw(",");
        w.raw("{").key("row").raw(ids[c.row]);
        w.raw(",").key("col").raw(ids[c.col]);
        w.raw(",").key("count").num(c.count);
        w.raw(",").key("normalizedCount").num(c.normalizedCount);
        if (histograms) w.raw(",").key("histogram").nums(c.histogram);
        if (r.view == ZoomView::Dynamics) {
            w.raw(",").key("episodes").raw("[");
            for (std::size_t k = 0; k < c.episodes.size(); ++k) {
                const EpisodeSummary& e = c.episodes[k];
                if (k > 0) w.raw(",");
                w.raw("{").key("id").str(e.episodeId);
                w.raw(",").key("start").num(e.start);
                w.raw(",").key("end").num(e.end);
                w.raw(",").key("messageCount").num(e.messageCount);
                w.raw(",").key("fadeFactor").num(e.fadeFactor);
                w.raw(",").key("score");
                if (e.score) w.num(*e.score);
                else w.raw("null");
                w.raw("}");
            }
            w.raw("]");
        }
        w.raw("}");
    }
    w.raw("]}");
    return out;
}

CellDetails cellDetails(const Session& session, ParticipantIndex row, ParticipantIndex col, ZoomView view,
                        std::size_t offset, std::size_t limit) {
    const Corpus& corpus = session.corpus();
    if (row >= corpus.participantCount() || col >= corpus.participantCount()) {
        throw NotFoundError("unknown participant index");
    }
    if (limit == 0) throw UsageError("limit must be >= 1");
    CellDetails d;
    d.row = row;
    d.col = col;
    d.view = view;
    d.offset = offset;
    d.limit = limit;

    std::vector<MessageIndex> messages;
    for (MessageIndex m : corpus.conversation(row, col)) {
        if (session.selection().contains(m)) messages.push_back(m);
    }
    d.messageCount = messages.size();

    if (const auto range = activeTimeRange(corpus, session.state().levels)) {
        const int bins = binsForView(view);
        d.binEdges = binEdges(*range, bins);
        d.histogram.assign(static_cast<std::size_t>(bins), 0);
        for (MessageIndex m : messages) ++d.histogram[binOf(corpus.message(m).timestamp, *range, bins)];
    }

    if (const AnnotationIndex* index = session.annotations()) {
        const auto counts = index->tally(messages);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] > 0) d.entities.emplace_back(static_cast<CategoryId>(c), counts[c]);
        }
        const CategorySet& names = index->categories();
        std::sort(d.entities.begin(), d.entities.end(), [&](const auto& a, const auto& b) {
            return a.second > b.second || (a.second == b.second && names.name(a.first) < names.name(b.first));
        });
    }

    if (offset < messages.size()) {
        const std::size_t end = std::min(messages.size(), offset + limit);
        d.records.assign(messages.begin() + static_cast<std::ptrdiff_t>(offset),
                         messages.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return d;
}

namespace {

json messageJson(const Corpus& corpus, MessageIndex m) {
    const Message& msg = corpus.message(m);
    json j{{"id", msg.id},
           {"from", corpus.participantId(msg.sender)},
           {"to", corpus.participantId(msg.receiver)},
           {"time", msg.timestamp},
           {"content", msg.content}};
    if (!msg.channel.empty()) j["channel"] = msg.channel;
    if (!msg.meta.empty()) j["meta"] = msg.meta;
    return j;
}

} // namespace

json toJson(const CellDetails& d, const Session& session) {
    const Corpus& corpus = session.corpus();
    json entities = json::array();
    if (const AnnotationIndex* index = session.annotations()) {
        for (const auto& [category, count] : d.entities) {
            entities.push_back({{"category", index->categories().name(category)}, {"count", count}});
        }
    }
    json records = json::array();
    for (MessageIndex m : d.records) records.push_back(messageJson(corpus, m));
    return json{{"row", corpus.participantId(d.row)},
                {"col", corpus.participantId(d.col)},
                {"view", viewName(d.view)},
                {"messageCount", d.messageCount},
                {"binEdges", d.binEdges},
                {"histogram", d.histogram},
                {"entities", std::move(entities)},
                {"offset", d.offset},
                {"limit", d.limit},
                {"records", std::move(records)}};
}

std::vector<ChatRecord> episodeTranscript(const Session& session, std::string_view episodeId) {
    const Episode e = session.resolveEpisode(episodeId);
    std::vector<ChatRecord> out;
    for (MessageIndex m : e.messages) {
        const Message& msg = session.corpus().message(m);
        out.push_back({msg.sender == e.row ? ChatRecord::Side::Left : ChatRecord::Side::Right, m, msg.timestamp});
    }
    return out;
}

json transcriptJson(const Session& session, std::string_view episodeId) {
    const Corpus& corpus = session.corpus();
    const Episode e = session.resolveEpisode(episodeId);
    const auto names = session.featureNames();
    const auto values = session.features(e);
    json features = json::object();
    for (std::size_t i = 0; i < names.size() && i < values.size(); ++i) features[names[i]] = values[i];

    const EpisodeScore score = session.scoreEpisode(e);
    json messages = json::array();
    for (const ChatRecord& r : episodeTranscript(session, episodeId)) {
        json m = messageJson(corpus, r.message);
        m["side"] = r.senderSide == ChatRecord::Side::Left ? "left" : "right";
        messages.push_back(std::move(m));
    }
    json label = nullptr;
    if (auto it = session.labels().find(std::string(episodeId)); it != session.labels().end()) {
        label = labelName(it->second.label);
    }
    return json{{"id", std::string(episodeId)},
                {"row", corpus.participantId(e.row)},
                {"col", corpus.participantId(e.col)},
                {"start", e.start},
                {"end", e.end},
                {"messageCount", e.messages.size()},
                {"peakDensity", e.peakDensity},
                {"features", std::move(features)},
                {"score", {{"p", score.score.p}, {"uncertainty", score.score.uncertainty}, {"fadeFactor", score.fadeFactor}}},
                {"modelTrained", session.model().has_value()},
                {"label", std::move(label)},
                {"messages", std::move(messages)}};
}

json toJson(const LabelOutcome& outcome) {
    json episodes = json::array();
    for (const EpisodeScore& e : outcome.episodes) {
        episodes.push_back({{"id", e.episodeId},
                            {"p", e.score.p},
                            {"uncertainty", e.score.uncertainty},
                            {"fadeFactor", e.fadeFactor}});
    }
    return json{{"labelCount", outcome.labelCount}, {"modelTrained", outcome.modelTrained}, {"episodes", std::move(episodes)}};
}

} // namespace commgraph
