#pragma once

#include "commgraph/levels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commgraph {

using NodeId = std::uint64_t;

struct ProvenanceNode {
    NodeId id = 0;
    std::optional<NodeId> parent;  ///< empty only for the root
    std::string snapshot;          ///< canonicalText(AnalysisState)
    bool starred = false;
    std::string note;
    Timestamp createdAt = 0;
    std::string selectionDigest;

    friend bool operator==(const ProvenanceNode&, const ProvenanceNode&) = default;
};

/// Append-only branching history of analysis states. Node ids are assigned
/// 0, 1, 2, ... in creation order, so a parent id is always smaller than
/// its children's.
class ProvenanceGraph {
public:
    ProvenanceGraph(std::string rootSnapshot, std::string rootDigest, Timestamp createdAt);

    /// Appends a child of the current node and moves to it. Committing the
    /// current node's snapshot again is a no-op returning the current id.
    NodeId commit(std::string snapshot, std::string digest, Timestamp createdAt);

    /// Moves the current pointer. Throws NotFoundError.
    void moveTo(NodeId id);

    NodeId current() const { return current_; }
    NodeId root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    const ProvenanceNode& node(NodeId id) const;
    const std::vector<ProvenanceNode>& nodes() const { return nodes_; }
    std::vector<NodeId> children(NodeId id) const;
    std::vector<NodeId> leaves() const;

    void setStarred(NodeId id, bool starred);
    void setNote(NodeId id, std::string note);

    /// Throws DataError unless: exactly one root (id 0), every parent id is
    /// smaller than its child's, ids are dense.
    void validate() const;

    /// Rebuilds a graph from stored nodes (report replay). Validates.
    static ProvenanceGraph fromNodes(std::vector<ProvenanceNode> nodes, NodeId current);

private:
    ProvenanceGraph() = default;

    std::vector<ProvenanceNode> nodes_;
    NodeId current_ = 0;
};

/// SHA-256 over the selected message ids, sorted lexicographically and
/// newline terminated.
std::string selectionDigest(const Corpus& corpus, const Selection& selection);

inline constexpr std::string_view kReportFormat = "commgraph-report";
inline constexpr int kReportVersion = 1;

/// Human-readable markdown (steps, notes, stars, state summaries) followed
/// by a machine-readable JSON section for replay.
std::string renderReport(const ProvenanceGraph& graph, const std::string& corpusHash);

/// Writes the report; throws Error on I/O failure.
void writeReportFile(const std::string& path, const std::string& report);

struct ParsedReport {
    std::string corpusHash;
    ProvenanceGraph graph;
};

/// Extracts the machine-readable section. Throws DataError.
ParsedReport parseReport(std::string_view text);

struct ReplayMismatch {
    NodeId node = 0;
    std::string expected;
    std::string actual;
};

struct ReplayResult {
    bool corpusMatches = false;
    std::size_t nodes = 0;
    std::vector<ReplayMismatch> mismatches;

    bool ok() const { return corpusMatches && mismatches.empty(); }
};

/// Re-evaluates every node's snapshot against the corpus and compares
/// digests.
ReplayResult replayReport(std::string_view reportText, const LevelContext& ctx);

} // namespace commgraph
