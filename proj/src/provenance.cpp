#include "commgraph/provenance.hpp"

#include "commgraph/digest.hpp"
#include "commgraph/timeparse.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace commgraph {

using nlohmann::json;

ProvenanceGraph::ProvenanceGraph(std::string rootSnapshot, std::string rootDigest, Timestamp createdAt) {
    ProvenanceNode root;
    root.snapshot = std::move(rootSnapshot);
    root.selectionDigest = std::move(rootDigest);
    root.createdAt = createdAt;
    nodes_.push_back(std::move(root));
}

NodeId ProvenanceGraph::commit(std::string snapshot, std::string digest, Timestamp createdAt) {
    if (nodes_[current_].snapshot == snapshot) return current_;
    ProvenanceNode n;
    n.id = nodes_.size();
    n.parent = current_;
    n.snapshot = std::move(snapshot);
    n.selectionDigest = std::move(digest);
    n.createdAt = createdAt;
    nodes_.push_back(std::move(n));
    current_ = nodes_.back().id;
    return current_;
}

void ProvenanceGraph::moveTo(NodeId id) {
    node(id);
    current_ = id;
}

const ProvenanceNode& ProvenanceGraph::node(NodeId id) const {
    if (id >= nodes_.size()) throw NotFoundError("unknown provenance node " + std::to_string(id));
    return nodes_[id];
}

std::vector<NodeId> ProvenanceGraph::children(NodeId id) const {
    node(id);
    std::vector<NodeId> out;
    for (const ProvenanceNode& n : nodes_) {
        if (n.parent == id) out.push_back(n.id);
    }
    return out;
}

std::vector<NodeId> ProvenanceGraph::leaves() const {
    std::vector<char> hasChild(nodes_.size(), 0);
    for (const ProvenanceNode& n : nodes_) {
        if (n.parent) hasChild[*n.parent] = 1;
    }
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
        if (!hasChild[i]) out.push_back(i);
    }
    return out;
}

void ProvenanceGraph::setStarred(NodeId id, bool starred) {
    node(id);
    nodes_[id].starred = starred;
}

void ProvenanceGraph::setNote(NodeId id, std::string note) {
    node(id);
    nodes_[id].note = std::move(note);
}

void ProvenanceGraph::validate() const {
    if (nodes_.empty()) throw DataError("provenance graph has no root");
    for (NodeId i = 0; i < nodes_.size(); ++i) {
        const ProvenanceNode& n = nodes_[i];
        if (n.id != i) throw DataError("provenance node ids must be dense, found " + std::to_string(n.id));
        if (i == 0 && n.parent) throw DataError("provenance root must not have a parent");
        if (i > 0 && !n.parent) throw DataError("provenance node " + std::to_string(i) + " has no parent");
        if (i > 0 && *n.parent >= i) {
            throw DataError("provenance node " + std::to_string(i) + " has a parent that is not older");
        }
    }
    if (current_ >= nodes_.size()) throw DataError("provenance current node does not exist");
}

ProvenanceGraph ProvenanceGraph::fromNodes(std::vector<ProvenanceNode> nodes, NodeId current) {
    ProvenanceGraph g;
    g.nodes_ = std::move(nodes);
    g.current_ = current;
    g.validate();
    return g;
}

std::string selectionDigest(const Corpus& corpus, const Selection& selection) {
    std::vector<std::string_view> ids;
    ids.reserve(selection.messages.size());
    for (MessageIndex m : selection.messages) ids.push_back(corpus.message(m).id);
    std::sort(ids.begin(), ids.end());
    Sha256 h;
    for (std::string_view id : ids) {
        h.update(id);
        h.update("\n");
    }
    return h.hexDigest();
}

namespace {

constexpr std::string_view kMachineHeading = "## Machine-readable record";

std::string describeLevel(const json& level) {
    const std::string id = level.at("level").get<std::string>();
    const json& p = level.at("params");
    if (id == kTimefilterLevel) {
        return id + " " + formatTimestamp(p.at("start").get<Timestamp>()) + " .. " +
               formatTimestamp(p.at("end").get<Timestamp>());
    }
    if (id == kThematicLevel) return id + " `" + p.at("query").get<std::string>() + "`";
    if (p.empty()) return id;
    return id + " " + p.dump();
}

std::string describeState(const std::string& snapshot) {
    const json state = json::parse(snapshot);
    std::string out;
    for (const json& level : state.at("levels")) {
        if (!level.at("enabled").get<bool>()) continue;
        if (!out.empty()) out += "; ";
        out += describeLevel(level);
    }
    return out.empty() ? "no filters" : out;
}

} // namespace

std::string renderReport(const ProvenanceGraph& graph, const std::string& corpusHash) {
    std::ostringstream md;
    md << "# Analysis report\n\n";
    md << "- Corpus: `" << corpusHash << "`\n";
    md << "- States: " << graph.size() << ", current: " << graph.current() << "\n\n";

    md << "## Starred states\n\n";
    bool any = false;
    for (const ProvenanceNode& n : graph.nodes()) {
        if (!n.starred) continue;
        any = true;
        md << "- State " << n.id << ": " << describeState(n.snapshot);
        if (!n.note.empty()) md << " (" << n.note << ")";
        md << "\n";
    }
    if (!any) md << "None.\n";

    md << "\n## Steps\n\n";
    for (const ProvenanceNode& n : graph.nodes()) {
        md << "### State " << n.id << (n.starred ? " *" : "") << "\n\n";
        md << "- Created: " << formatTimestamp(n.createdAt) << "\n";
        if (n.parent) md << "- From: state " << *n.parent << "\n";
        md << "- Filters: " << describeState(n.snapshot) << "\n";
        md << "- Selection digest: `" << n.selectionDigest << "`\n";
        if (!n.note.empty()) md << "- Note: " << n.note << "\n";
        md << "\n";
    }

    json nodes = json::array();
    for (const ProvenanceNode& n : graph.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                         {"snapshot", n.snapshot},
                         {"starred", n.starred},
                         {"note", n.note},
                         {"createdAt", n.createdAt},
                         {"selectionDigest", n.selectionDigest}});
    }
    const json record{{"format", kReportFormat},
                      {"version", kReportVersion},
                      {"corpusHash", corpusHash},
                      {"current", graph.current()},
                      {"nodes", std::move(nodes)}};
    md << kMachineHeading << "\n\n```json\n" << record.dump(2) << "\n```\n";
    return md.str();
}

void writeReportFile(const std::string& path, const std::string& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report '" + path + "'");
    out << report;
    if (!out) throw Error("failed writing report '" + path + "'");
}

ParsedReport parseReport(std::string_view text) {
    const auto heading = text.rfind(kMachineHeading);
    if (heading == std::string_view::npos) throw DataError("report has no machine-readable record");
    const auto open = text.find("```json\n", heading);
    if (open == std::string_view::npos) throw DataError("report record is not fenced");
    const auto body = open + 8;
    const auto close = text.find("\n```", body);
    if (close == std::string_view::npos) throw DataError("report record is not terminated");
    try {
        const json doc = json::parse(text.substr(body, close - body));
        if (doc.at("format").get<std::string>() != kReportFormat || doc.at("version").get<int>() != kReportVersion) {
            throw DataError("unsupported report format");
        }
        std::vector<ProvenanceNode> nodes;
        for (const json& j : doc.at("nodes")) {
            ProvenanceNode n;
            n.id = j.at("id").get<NodeId>();
            if (!j.at("parent").is_null()) n.parent = j.at("parent").get<NodeId>();
            n.snapshot = j.at("snapshot").get<std::string>();
            n.starred = j.at("starred").get<bool>();
            n.note = j.at("note").get<std::string>();
            n.createdAt = j.at("createdAt").get<Timestamp>();
            n.selectionDigest = j.at("selectionDigest").get<std::string>();
            nodes.push_back(std::move(n));
        }
        return {doc.at("corpusHash").get<std::string>(),
                ProvenanceGraph::fromNodes(std::move(nodes), doc.at("current").get<NodeId>())};
    } catch (const json::exception& e) {
        throw DataError(std::string("report record: ") + e.what());
    }
}

ReplayResult replayReport(std::string_view reportText, const LevelContext& ctx) {
    const ParsedReport parsed = parseReport(reportText);
    ReplayResult result;
    result.corpusMatches = parsed.corpusHash == corpusHash(ctx.corpus);
    result.nodes = parsed.graph.size();
    for (const ProvenanceNode& n : parsed.graph.nodes()) {
        std::string actual;
        try {
            const AnalysisState state = analysisStateFromJson(json::parse(n.snapshot));
            actual = selectionDigest(ctx.corpus, applyAll(ctx, state.levels));
        } catch (const std::exception& e) {
            actual = std::string("error: ") + e.what();
        }
        if (actual != n.selectionDigest) result.mismatches.push_back({n.id, n.selectionDigest, std::move(actual)});
    }
    return result;
}

} // namespace commgraph
