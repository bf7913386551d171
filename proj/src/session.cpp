#include "commgraph/session.hpp"

#include "commgraph/kernels.hpp"

#include <algorithm>
#include <chrono>

namespace commgraph {

using nlohmann::json;

namespace {

AnalysisState rootState(const SessionConfig& config) {
    AnalysisState s = AnalysisState::initial();
    config.dynamics.validate();
    s.level(kDynamicsLevel).params = config.dynamics;
    s.fadeThreshold = config.fadeThreshold;
    return s;
}

} // namespace

Session::Session(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const AnnotationIndex> annotations,
                 SessionConfig config)
    : corpus_(std::move(corpus)),
      annotations_(std::move(annotations)),
      config_(std::move(config)),
      graph_("", "", 0) {
    if (!corpus_) throw UsageError("session needs a corpus");
    config_.forest.validate();
    for (const std::string& id : config_.featureLevels) {
        const auto registry = levelRegistry(config_.categories);
        if (std::none_of(registry.begin(), registry.end(), [&](const auto& d) { return d.levelId == id; })) {
            throw UsageError("unknown feature level '" + id + "'");
        }
    }
    state_ = rootState(config_);
    selection_ = evaluate(state_);
    graph_ = ProvenanceGraph(canonicalText(state_), selectionDigest(*corpus_, selection_), now());
}

LevelContext Session::context() const { return LevelContext{*corpus_, annotations_.get(), config_.categories}; }

const std::string& Session::corpusHash() const {
    if (!corpusHash_) corpusHash_ = commgraph::corpusHash(*corpus_);
    return *corpusHash_;
}

Timestamp Session::now() const {
    if (config_.clock) return config_.clock();
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Selection Session::evaluate(const AnalysisState& state) const {
    if (!(state.fadeThreshold >= 0 && state.fadeThreshold <= 1)) {
        throw LevelError("retrieval", "fadeThreshold", "must lie in [0, 1]");
    }
    return applyAll(context(), state.levels);
}

AnalysisState Session::stateOf(NodeId node) const {
    return analysisStateFromJson(json::parse(graph_.node(node).snapshot));
}

NodeId Session::commit(const AnalysisState& state) {
    // Round-trip through the canonical form so the stored state is exactly
    // what a replay will see.
    AnalysisState canonical = analysisStateFromJson(toJson(state));
    Selection selection = evaluate(canonical);
    const NodeId id = graph_.commit(canonicalText(canonical), selectionDigest(*corpus_, selection), now());
    state_ = std::move(canonical);
    selection_ = std::move(selection);
    return id;
}

const Selection& Session::navigate(NodeId node) {
    AnalysisState state = stateOf(node);
    Selection selection = evaluate(state);
    if (selectionDigest(*corpus_, selection) != graph_.node(node).selectionDigest) {
        throw DataError("state " + std::to_string(node) + " no longer reproduces its recorded selection");
    }
    graph_.moveTo(node);
    state_ = std::move(state);
    selection_ = std::move(selection);
    return selection_;
}

std::string Session::report() const { return renderReport(graph_, corpusHash()); }

void Session::exportReport(const std::string& path) const { writeReportFile(path, report()); }

Selection Session::selectionOf(NodeId node) const { return evaluate(stateOf(node)); }

MessageMask Session::selectionMask() const {
    MessageMask mask(corpus_->messageCount(), 0);
    for (MessageIndex m : selection_.messages) mask[m] = 1;
    return mask;
}

std::vector<Episode> Session::episodes(ParticipantIndex row, ParticipantIndex col) const {
    if (row >= corpus_->participantCount() || col >= corpus_->participantCount()) {
        throw NotFoundError("unknown participant index");
    }
    std::vector<MessageIndex> stream;
    for (MessageIndex m : corpus_->conversation(row, col)) {
        if (selection_.contains(m)) stream.push_back(m);
    }
    return segmentStream(*corpus_, stream, row, col, state_.params<DynamicsParams>(kDynamicsLevel));
}

std::vector<Episode> Session::allEpisodes() const {
    const auto streams = conversationsOf(*corpus_, selection_.messages);
    auto perStream = kernels::segmentAll(*corpus_, streams, state_.params<DynamicsParams>(kDynamicsLevel));
    std::vector<Episode> out;
    for (auto& list : perStream) {
        for (Episode& e : list) out.push_back(std::move(e));
    }
    return out;
}

Episode Session::resolveEpisode(std::string_view episodeId) const {
    const auto ref = EpisodeRef::parse(episodeId);
    if (!ref || ref->row >= corpus_->participantCount() || ref->col >= corpus_->participantCount()) {
        throw NotFoundError("unknown episode '" + std::string(episodeId) + "'");
    }
    for (Episode& e : episodes(ref->row, ref->col)) {
        if (e.messages.front() == ref->first) return std::move(e);
    }
    throw NotFoundError("unknown episode '" + std::string(episodeId) + "' in the current selection");
}

std::vector<LevelState> Session::featureStates() const {
    std::vector<LevelState> states;
    for (const std::string& id : config_.featureLevels) {
        LevelState s = state_.level(id);
        s.enabled = true;
        states.push_back(std::move(s));
    }
    return states;
}

FeatureVector Session::features(const Episode& episode) const {
    return featureVector(context(), episode, featureStates());
}

std::vector<std::string> Session::featureNames() const {
    return commgraph::featureNames(config_.categories, featureStates());
}

LabelOutcome Session::label(std::string_view episodeId, Label label) {
    const Episode episode = resolveEpisode(episodeId);
    const std::string id(episodeId);
    labels_[id] = LabeledExample{id, label, features(episode)};

    bool relevant = false, irrelevant = false;
    std::vector<LabeledExample> examples;
    for (const auto& [key, example] : labels_) {
        relevant = relevant || example.label == Label::Relevant;
        irrelevant = irrelevant || example.label == Label::Irrelevant;
        examples.push_back(example);
    }
    if (relevant && irrelevant) model_ = train(std::move(examples), config_.forest);
    else model_.reset();

    LabelOutcome outcome;
    outcome.labelCount = labels_.size();
    outcome.modelTrained = model_.has_value();
    for (const Episode& e : allEpisodes()) outcome.episodes.push_back(scoreEpisode(e));
    return outcome;
}

EpisodeScore Session::scoreEpisode(const Episode& episode) const {
    EpisodeScore s;
    s.episodeId = EpisodeRef{episode.row, episode.col, episode.messages.front()}.toString();
    if (!model_) {
        s.score = scoreFromVotes(1.0);
        s.fadeFactor = 1.0;
        return s;
    }
    s.score = model_->score(features(episode));
    s.fadeFactor = fadeFactor(s.score.p, state_.fadeThreshold);
    return s;
}

std::vector<std::string> Session::ambiguous(std::size_t k) const {
    if (!model_) return {};
    std::vector<ScoredTarget> targets;
    std::set<std::string> labeled;
    for (const auto& [id, example] : labels_) labeled.insert(id);
    for (const Episode& e : allEpisodes()) {
        targets.push_back({EpisodeRef{e.row, e.col, e.messages.front()}.toString(), features(e)});
    }
    return rankAmbiguous(*model_, targets, k, labeled);
}

} // namespace commgraph
