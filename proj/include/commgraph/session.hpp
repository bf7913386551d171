#pragma once

#include "commgraph/forest.hpp"
#include "commgraph/levels.hpp"
#include "commgraph/provenance.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace commgraph {

struct SessionConfig {
    CategorySet categories = CategorySet::defaults();
    ForestConfig forest;
    /// Initial dynamics parameters and fade threshold of the root state.
    DynamicsParams dynamics;
    double fadeThreshold = 0.5;
    /// Levels whose features feed the relevance model, in registration order.
    std::vector<std::string> featureLevels{std::string(kVolumeLevel), std::string(kThematicLevel),
                                           std::string(kDynamicsLevel)};
    /// Source of ProvenanceNode::createdAt. Defaults to the system clock.
    std::function<Timestamp()> clock;
};

struct EpisodeScore {
    std::string episodeId;
    Score score;
    double fadeFactor = 1.0;
};

struct LabelOutcome {
    std::size_t labelCount = 0;
    bool modelTrained = false;
    std::vector<EpisodeScore> episodes;  ///< every episode of the current selection
};

/// One analyst's working state over an immutable corpus: the provenance
/// history with its current node, the relevance labels and the model
/// trained from them. Not internally synchronized; callers serialize
/// writers (see Api).
class Session {
public:
    Session(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const AnnotationIndex> annotations,
            SessionConfig config = {});

    const Corpus& corpus() const { return *corpus_; }
    const AnnotationIndex* annotations() const { return annotations_.get(); }
    const SessionConfig& config() const { return config_; }
    LevelContext context() const;
    const std::string& corpusHash() const;

    // Provenance.
    const ProvenanceGraph& provenance() const { return graph_; }
    const AnalysisState& state() const { return state_; }
    AnalysisState stateOf(NodeId node) const;
    /// Validates, evaluates and records the state. Identical to the current
    /// snapshot: no new node.
    NodeId commit(const AnalysisState& state);
    /// Restores the node's state; verifies the stored digest.
    const Selection& navigate(NodeId node);
    void setStarred(NodeId node, bool starred) { graph_.setStarred(node, starred); }
    void setNote(NodeId node, std::string note) { graph_.setNote(node, std::move(note)); }
    std::string report() const;
    void exportReport(const std::string& path) const;

    // Selections.
    const Selection& selection() const { return selection_; }
    Selection selectionOf(NodeId node) const;
    MessageMask selectionMask() const;

    // Episodes and relevance feedback.
    /// Episodes of (row, col) over the current selection, oriented row->col.
    std::vector<Episode> episodes(ParticipantIndex row, ParticipantIndex col) const;
    /// All episodes of the current selection, one orientation per unordered pair.
    std::vector<Episode> allEpisodes() const;
    /// Throws NotFoundError.
    Episode resolveEpisode(std::string_view episodeId) const;
    FeatureVector features(const Episode& episode) const;
    std::vector<std::string> featureNames() const;

    LabelOutcome label(std::string_view episodeId, Label label);
    const std::map<std::string, LabeledExample>& labels() const { return labels_; }
    const std::optional<RelevanceModel>& model() const { return model_; }
    /// Score and fade of one episode; p = 1 when no model is trained.
    EpisodeScore scoreEpisode(const Episode& episode) const;
    std::vector<std::string> ambiguous(std::size_t k) const;

private:
    Selection evaluate(const AnalysisState& state) const;
    Timestamp now() const;
    std::vector<LevelState> featureStates() const;

    std::shared_ptr<const Corpus> corpus_;
    std::shared_ptr<const AnnotationIndex> annotations_;
    SessionConfig config_;
    ProvenanceGraph graph_;
    AnalysisState state_;
    Selection selection_;
    mutable std::optional<std::string> corpusHash_;
    std::map<std::string, LabeledExample> labels_;
    std::optional<RelevanceModel> model_;
};

} // namespace commgraph
