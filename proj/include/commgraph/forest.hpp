#pragma once

#include "commgraph/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace commgraph {

enum class Label { Irrelevant = 0, Relevant = 1 };

std::string_view labelName(Label label);
/// "relevant" / "irrelevant"; throws UsageError otherwise.
Label parseLabel(std::string_view text);

struct LabeledExample {
    std::string targetId;
    Label label = Label::Irrelevant;
    FeatureVector features;
};

struct ForestConfig {
    int treeCount = 100;
    int maxDepth = 8;
    int minLeaf = 1;
    std::uint64_t seed = 1;

    void validate() const;
    friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// Axis-aligned binary tree stored flat. Internal nodes send x[feature] <=
/// threshold left; leaves carry the majority label.
struct DecisionTree {
    struct Node {
        int feature = -1;  ///< -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        Label label = Label::Irrelevant;

        bool isLeaf() const { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    std::vector<Node> nodes;  ///< nodes[0] is the root

    Label predict(std::span<const double> x) const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Score {
    double p = 0.0;            ///< fraction of trees voting relevant
    double uncertainty = 0.0;  ///< 1 - |2p - 1|
};

class RelevanceModel {
public:
    RelevanceModel() = default;
    RelevanceModel(ForestConfig config, std::size_t featureDim, std::vector<DecisionTree> trees);

    const ForestConfig& config() const { return config_; }
    std::size_t featureDim() const { return featureDim_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    Score score(std::span<const double> features) const;

    /// For one input, every tree's path as "f3 <= 1.5" style steps ending in
    /// the leaf label.
    std::vector<std::vector<std::string>> explain(std::span<const double> features) const;

    friend bool operator==(const RelevanceModel&, const RelevanceModel&) = default;

private:
    ForestConfig config_;
    std::size_t featureDim_ = 0;
    std::vector<DecisionTree> trees_;
};

/// Random forest over class-weighted Gini splits. Examples are sorted by
/// targetId first, so the result depends only on the example set and seed.
/// Throws DataError unless both classes are present and all vectors share a
/// dimension.
RelevanceModel train(std::vector<LabeledExample> examples, const ForestConfig& config);

Score scoreFromVotes(double p);

struct ScoredTarget {
    std::string targetId;
    FeatureVector features;
};

/// Top-k most uncertain unlabeled targets; ties by targetId ascending.
std::vector<std::string> rankAmbiguous(const RelevanceModel& model, std::span<const ScoredTarget> targets,
                                       std::size_t k, const std::set<std::string>& labeled = {});

inline constexpr double kFadeFloor = 0.15;

/// 1 when p >= threshold, otherwise linear from kFadeFloor at p = 0 up to 1
/// at the threshold. Never 0.
double fadeFactor(double p, double threshold);

/// Combined decision of several classifiers: relevant only if every score
/// clears its threshold.
bool conjunctiveDecision(std::span<const double> scores, std::span<const double> thresholds);

nlohmann::json toJson(const RelevanceModel& model);
RelevanceModel modelFromJson(const nlohmann::json& doc);
std::string serializeModel(const RelevanceModel& model);

nlohmann::json toJson(const ForestConfig& config);
ForestConfig forestConfigFromJson(const nlohmann::json& doc, ForestConfig base = {});

} // namespace commgraph
