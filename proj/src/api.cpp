#include "commgraph/api.hpp"

#include "commgraph/timeparse.hpp"

#include <charconv>

namespace commgraph {

using nlohmann::json;

namespace {

std::optional<std::string> param(const QueryParams& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::uint64_t unsignedParam(const std::string& text, const std::string& name) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("parameter '" + name + "' must be a non-negative integer");
    }
    return v;
}

std::vector<std::string> splitList(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        if (comma > pos) out.push_back(text.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

ZoomView viewFrom(const QueryParams& params, ZoomView fallback) {
    if (auto v = param(params, "view")) return parseView(*v);
    if (auto px = param(params, "cellSize")) {
        const auto size = unsignedParam(*px, "cellSize");
        if (size > 1 << 20) throw UsageError("parameter 'cellSize' is too large");
        return viewForCellSize(static_cast<int>(size));
    }
    return fallback;
}

const json& requireField(const json& body, const char* field) {
    if (!body.is_object()) throw UsageError("request body must be a JSON object");
    auto it = body.find(field);
    if (it == body.end()) throw UsageError(std::string("request body is missing '") + field + "'");
    return *it;
}

json astJson(const ConceptQuery& q, const CategorySet& categories) {
    using Kind = ConceptQuery::Kind;
    switch (q.kind()) {
    case Kind::Atom:
        return {{"type", "atom"}, {"category", categories.name(q.atoms().front())}};
    case Kind::Seq: {
        json atoms = json::array(), gaps = json::array();
        for (CategoryId c : q.atoms()) atoms.push_back(categories.name(c));
        for (const auto& g : q.gaps()) gaps.push_back(g ? json(*g) : json(nullptr));
        return {{"type", "seq"}, {"atoms", atoms}, {"gaps", gaps}};
    }
    case Kind::And:
    case Kind::Or:
        return {{"type", q.kind() == Kind::And ? "and" : "or"},
                {"lhs", astJson(q.lhs(), categories)},
                {"rhs", astJson(q.rhs(), categories)}};
    }
    return nullptr;
}

json nodeJson(const ProvenanceNode& n) {
    return {{"id", n.id},
            {"parent", n.parent ? json(*n.parent) : json(nullptr)},
            {"starred", n.starred},
            {"note", n.note},
            {"createdAt", n.createdAt},
            {"selectionDigest", n.selectionDigest},
            {"state", json::parse(n.snapshot)}};
}

json selectionSummary(const Session& s) {
    return {{"node", s.provenance().current()},
            {"messages", s.selection().size()},
            {"participants", s.selection().participants.size()},
            {"selectionDigest", s.provenance().node(s.provenance().current()).selectionDigest},
            {"state", toJson(s.state())}};
}

} // namespace

json Api::corpusSummary() const {
    std::shared_lock lock(mutex_);
    const Corpus& c = session_.corpus();
    json participants = json::array();
    for (const Participant& p : c.participants()) participants.push_back(p.id);
    json extent = nullptr;
    if (auto r = c.timeExtent()) extent = {{"start", r->start}, {"end", r->end}};
    return {{"participants", c.participantCount()},
            {"messages", c.messageCount()},
            {"participantIds", std::move(participants)},
            {"timeRange", std::move(extent)},
            {"corpusHash", session_.corpusHash()},
            {"annotated", session_.annotations() != nullptr},
            {"categories", session_.config().categories.names()},
            {"currentNode", session_.provenance().current()},
            {"selectionSize", session_.selection().size()}};
}

std::string Api::matrix(const QueryParams& params) const {
    MatrixRequest req;
    req.view = viewFrom(params, ZoomView::Volume);
    if (auto n = param(params, "node")) req.node = unsignedParam(*n, "node");
    auto order = [&](const char* key, const char* listKey) {
        const std::string kind = param(params, key).value_or("alphabetical");
        return AxisOrder::parse(kind, splitList(param(params, listKey).value_or("")));
    };
    req.rowOrder = order("rowOrder", "rows");
    req.colOrder = order("colOrder", "cols");
    auto window = [&](const char* startKey, const char* countKey) {
        AxisWindow w;
        if (auto v = param(params, startKey)) w.start = unsignedParam(*v, startKey);
        if (auto v = param(params, countKey)) w.count = unsignedParam(*v, countKey);
        return w;
    };
    req.rowWindow = window("rowStart", "rowCount");
    req.colWindow = window("colStart", "colCount");
    std::shared_lock lock(mutex_);
    return matrixJson(computeMatrix(session_, req), session_.corpus());
}

json Api::cell(const std::string& row, const std::string& col, const QueryParams& params) const {
    const ZoomView view = viewFrom(params, ZoomView::Volume);
    const std::size_t offset = param(params, "offset") ? unsignedParam(*param(params, "offset"), "offset") : 0;
    const std::size_t limit =
        param(params, "limit") ? unsignedParam(*param(params, "limit"), "limit") : kDefaultRecordLimit;
    std::shared_lock lock(mutex_);
    const Corpus& c = session_.corpus();
    const CellDetails d = cellDetails(session_, c.requireParticipant(row), c.requireParticipant(col), view, offset, limit);
    return toJson(d, session_);
}

json Api::episode(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return transcriptJson(session_, id);
}

json Api::postFilters(const json& body) {
    if (!body.is_object()) throw UsageError("request body must be a JSON object");
    std::unique_lock lock(mutex_);
    AnalysisState state = session_.state();
    if (auto it = body.find("levels"); it != body.end()) {
        if (!it->is_array()) throw UsageError("'levels' must be a list");
        for (const json& l : *it) {
            LevelState s = levelStateFromJson(l);
            state.level(s.levelId()) = std::move(s);
        }
    }
    if (auto it = body.find("fadeThreshold"); it != body.end()) {
        if (!it->is_number()) throw LevelError("retrieval", "fadeThreshold", "expected a number");
        state.fadeThreshold = it->get<double>();
    }
    session_.commit(state);
    return selectionSummary(session_);
}

json Api::labelEpisode(const std::string& id, const json& body) {
    const json& label = requireField(body, "label");
    if (!label.is_string()) throw UsageError("'label' must be 'relevant' or 'irrelevant'");
    const Label parsed = parseLabel(label.get<std::string>());
    std::unique_lock lock(mutex_);
    return toJson(session_.label(id, parsed));
}

json Api::ambiguous(const QueryParams& params) const {
    const std::size_t k = param(params, "k") ? unsignedParam(*param(params, "k"), "k") : 10;
    std::shared_lock lock(mutex_);
    json out = json::array();
    for (const std::string& id : session_.ambiguous(k)) {
        const Episode e = session_.resolveEpisode(id);
        const EpisodeScore s = session_.scoreEpisode(e);
        out.push_back({{"id", id}, {"p", s.score.p}, {"uncertainty", s.score.uncertainty}});
    }
    return {{"modelTrained", session_.model().has_value()}, {"episodes", std::move(out)}};
}

json Api::navigate(const json& body) {
    const json& id = requireField(body, "nodeId");
    if (!id.is_number_unsigned()) throw UsageError("'nodeId' must be a non-negative integer");
    std::unique_lock lock(mutex_);
    session_.navigate(id.get<NodeId>());
    return selectionSummary(session_);
}

json Api::star(const json& body) {
    const json& id = requireField(body, "nodeId");
    if (!id.is_number_unsigned()) throw UsageError("'nodeId' must be a non-negative integer");
    const json& starred = requireField(body, "starred");
    if (!starred.is_boolean()) throw UsageError("'starred' must be true or false");
    std::unique_lock lock(mutex_);
    const auto node = id.get<NodeId>();
    session_.setStarred(node, starred.get<bool>());
    if (auto it = body.find("note"); it != body.end()) {
        if (!it->is_string()) throw UsageError("'note' must be a string");
        session_.setNote(node, it->get<std::string>());
    }
    return nodeJson(session_.provenance().node(node));
}

json Api::graph() const {
    std::shared_lock lock(mutex_);
    const ProvenanceGraph& g = session_.provenance();
    json nodes = json::array();
    for (const ProvenanceNode& n : g.nodes()) nodes.push_back(nodeJson(n));
    json leaves = g.leaves();
    return {{"root", g.root()}, {"current", g.current()}, {"leaves", std::move(leaves)}, {"nodes", std::move(nodes)}};
}

std::string Api::report() const {
    std::shared_lock lock(mutex_);
    return session_.report();
}

json Api::parseQuery(const json& body) const {
    const json& q = requireField(body, "q");
    if (!q.is_string()) throw UsageError("'q' must be a string");
    const CategorySet& categories = session_.config().categories;
    const ConceptQuery query = commgraph::parseQuery(q.get<std::string>(), categories);
    return {{"canonical", printQuery(query, categories)}, {"ast", astJson(query, categories)}};
}

std::pair<int, json> errorResponse(const std::exception& e) {
    json body{{"error", e.what()}};
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
        body["kind"] = "parse";
        body["position"] = p->position();
        return {400, body};
    }
    if (const auto* l = dynamic_cast<const LevelError*>(&e)) {
        body["kind"] = "level";
        body["level"] = l->level();
        body["field"] = l->field();
        return {400, body};
    }
    if (dynamic_cast<const NotFoundError*>(&e)) {
        body["kind"] = "notFound";
        return {404, body};
    }
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const DataError*>(&e) ||
        dynamic_cast<const json::exception*>(&e)) {
        body["kind"] = "badRequest";
        return {400, body};
    }
    body["kind"] = "internal";
    return {500, body};
}

} // namespace commgraph
