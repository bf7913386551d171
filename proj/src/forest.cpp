#include "commgraph/forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace commgraph {

using nlohmann::json;

std::string_view labelName(Label label) { return label == Label::Relevant ? "relevant" : "irrelevant"; }

Label parseLabel(std::string_view text) {
    if (text == "relevant") return Label::Relevant;
    if (text == "irrelevant") return Label::Irrelevant;
    throw UsageError("label must be 'relevant' or 'irrelevant', got '" + std::string(text) + "'");
}

void ForestConfig::validate() const {
    if (treeCount < 1) throw UsageError("forest.trees must be >= 1");
    if (maxDepth < 0) throw UsageError("forest.maxDepth must be >= 0");
    if (minLeaf < 1) throw UsageError("forest.minLeaf must be >= 1");
}

Label DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].isLeaf()) {
        const Node& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].label;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 with its own bounded draw, so results do not depend on the
/// standard library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

private:
    std::mt19937_64 engine_;
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<LabeledExample>& examples, const std::array<double, 2>& weights,
                const ForestConfig& config, std::size_t dim, Rng& rng)
        : examples_(examples), weights_(weights), config_(config), dim_(dim), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> sample) {
        tree_.nodes.clear();
        grow(sample, 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t>& idx, int depth) {
        const int self = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::array<double, 2> w{0.0, 0.0};
        for (std::size_t i : idx) w[label(i)] += weights_[label(i)];
        tree_.nodes[self].label = w[1] > w[0] ? Label::Relevant : Label::Irrelevant;

        const bool pure = w[0] == 0.0 || w[1] == 0.0;
        if (pure || depth >= config_.maxDepth || idx.size() < 2 * static_cast<std::size_t>(config_.minLeaf)) {
            return self;
        }
        const Split split = findSplit(idx);
        if (split.feature < 0) return self;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) {
            (value(i, split.feature) <= split.threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        DecisionTree::Node& node = tree_.nodes[self];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        node.label = Label::Irrelevant;  // only leaves carry a label
        return self;
    }

    Split findSplit(std::vector<std::size_t>& idx) {
        std::vector<int> order(dim_);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);
        const auto sampled = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim_))));

        Split best;
        for (std::size_t k = 0; k < order.size(); ++k) {
            // Past the sampled subset, keep looking only until something splits.
            if (k >= sampled && best.feature >= 0) break;
            evaluate(idx, order[k], best);
        }
        return best;
    }

    void evaluate(std::vector<std::size_t>& idx, int feature, Split& best) const {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double va = value(a, feature), vb = value(b, feature);
            return va < vb || (va == vb && a < b);
        });
        std::array<double, 2> total{0.0, 0.0};
        for (std::size_t i : idx) total[label(i)] += weights_[label(i)];
        std::array<double, 2> left{0.0, 0.0};
        const auto minLeaf = static_cast<std::size_t>(config_.minLeaf);
        for (std::size_t n = 1; n < idx.size(); ++n) {
            const std::size_t prev = idx[n - 1];
            left[label(prev)] += weights_[label(prev)];
            const double a = value(prev, feature);
            const double b = value(idx[n], feature);
            if (!(a < b) || n < minLeaf || idx.size() - n < minLeaf) continue;
            const std::array<double, 2> right{total[0] - left[0], total[1] - left[1]};
            const double score = weightedGini(left) + weightedGini(right);
            if (score < best.score) {
                double t = a + (b - a) / 2;
                if (!(t < b)) t = a;
                best = {feature, t, score};
            }
        }
    }

    /// W * (1 - sum p_c^2)
    static double weightedGini(const std::array<double, 2>& w) {
        const double total = w[0] + w[1];
        if (total <= 0) return 0.0;
        return total - (w[0] * w[0] + w[1] * w[1]) / total;
    }

    int label(std::size_t i) const { return static_cast<int>(examples_[i].label); }
    double value(std::size_t i, int feature) const { return examples_[i].features[static_cast<std::size_t>(feature)]; }

    const std::vector<LabeledExample>& examples_;
    const std::array<double, 2>& weights_;
    const ForestConfig& config_;
    std::size_t dim_;
    Rng& rng_;
    DecisionTree tree_;
};

} // namespace

RelevanceModel::RelevanceModel(ForestConfig config, std::size_t featureDim, std::vector<DecisionTree> trees)
    : config_(config), featureDim_(featureDim), trees_(std::move(trees)) {}

Score RelevanceModel::score(std::span<const double> features) const {
    if (features.size() != featureDim_) {
        throw UsageError("feature vector has " + std::to_string(features.size()) + " values, model expects " +
                         std::to_string(featureDim_));
    }
    if (trees_.empty()) return scoreFromVotes(0.0);
    std::size_t votes = 0;
    for (const DecisionTree& t : trees_) votes += t.predict(features) == Label::Relevant ? 1 : 0;
    return scoreFromVotes(static_cast<double>(votes) / static_cast<double>(trees_.size()));
}

std::vector<std::vector<std::string>> RelevanceModel::explain(std::span<const double> features) const {
    score(features);  // dimension check
    std::vector<std::vector<std::string>> out;
    for (const DecisionTree& t : trees_) {
        std::vector<std::string> path;
        std::size_t i = 0;
        while (!t.nodes[i].isLeaf()) {
            const auto& n = t.nodes[i];
            const bool left = features[static_cast<std::size_t>(n.feature)] <= n.threshold;
            path.push_back("f" + std::to_string(n.feature) + (left ? " <= " : " > ") + json(n.threshold).dump());
            i = static_cast<std::size_t>(left ? n.left : n.right);
        }
        path.emplace_back(labelName(t.nodes[i].label));
        out.push_back(std::move(path));
    }
    return out;
}

RelevanceModel train(std::vector<LabeledExample> examples, const ForestConfig& config) {
    config.validate();
    if (examples.empty()) throw DataError("no labeled examples");
    const std::size_t dim = examples.front().features.size();
    std::array<std::vector<std::size_t>, 2> byClass;
    std::sort(examples.begin(), examples.end(), [](const LabeledExample& a, const LabeledExample& b) {
        return a.targetId < b.targetId || (a.targetId == b.targetId && a.label < b.label);
    });
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& e = examples[i];
        if (e.features.size() != dim) {
            throw DataError("example '" + e.targetId + "' has " + std::to_string(e.features.size()) +
                            " features, expected " + std::to_string(dim));
        }
        for (double v : e.features) {
            if (!std::isfinite(v)) throw DataError("example '" + e.targetId + "' has a non-finite feature");
        }
        byClass[static_cast<std::size_t>(e.label)].push_back(i);
    }
    if (byClass[0].empty() || byClass[1].empty()) {
        throw DataError("training needs at least one relevant and one irrelevant example");
    }
    if (dim == 0) throw DataError("examples have no features");

    const double n = static_cast<double>(examples.size());
    const std::array<double, 2> weights{n / (2.0 * static_cast<double>(byClass[0].size())),
                                        n / (2.0 * static_cast<double>(byClass[1].size()))};

    std::vector<DecisionTree> trees;
    trees.reserve(static_cast<std::size_t>(config.treeCount));
    for (int t = 0; t < config.treeCount; ++t) {
        Rng rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(t))));
        // Stratified bootstrap: each class resampled to its own size.
        std::vector<std::size_t> sample;
        sample.reserve(examples.size());
        for (const auto& members : byClass) {
            for (std::size_t k = 0; k < members.size(); ++k) sample.push_back(members[rng.below(members.size())]);
        }
        TreeBuilder builder(examples, weights, config, dim, rng);
        trees.push_back(builder.build(std::move(sample)));
    }
    return RelevanceModel(config, dim, std::move(trees));
}

Score scoreFromVotes(double p) { return {p, 1.0 - std::abs(2.0 * p - 1.0)}; }

std::vector<std::string> rankAmbiguous(const RelevanceModel& model, std::span<const ScoredTarget> targets,
                                       std::size_t k, const std::set<std::string>& labeled) {
    std::vector<std::pair<double, const std::string*>> ranked;
    for (const ScoredTarget& t : targets) {
        if (labeled.count(t.targetId)) continue;
        ranked.emplace_back(model.score(t.features).uncertainty, &t.targetId);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && *a.second < *b.second);
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(*ranked[i].second);
    return out;
}

double fadeFactor(double p, double threshold) {
    if (p >= threshold) return 1.0;
    const double clamped = std::max(0.0, p);
    return kFadeFloor + (1.0 - kFadeFloor) * clamped / threshold;
}

bool conjunctiveDecision(std::span<const double> scores, std::span<const double> thresholds) {
    if (scores.size() != thresholds.size()) throw UsageError("one threshold per classifier is required");
    if (scores.empty()) throw UsageError("no classifiers to combine");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] < thresholds[i]) return false;
    }
    return true;
}

json toJson(const ForestConfig& config) {
    return json{{"trees", config.treeCount}, {"maxDepth", config.maxDepth}, {"minLeaf", config.minLeaf}, {"seed", config.seed}};
}

ForestConfig forestConfigFromJson(const json& doc, ForestConfig base) {
    if (!doc.is_object()) throw UsageError("forest config must be an object");
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (it.key() == "trees") base.treeCount = it->get<int>();
            else if (it.key() == "maxDepth") base.maxDepth = it->get<int>();
            else if (it.key() == "minLeaf") base.minLeaf = it->get<int>();
            else if (it.key() == "seed") base.seed = it->get<std::uint64_t>();
            else throw UsageError("unknown forest setting '" + it.key() + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("forest config: ") + e.what());
    }
    base.validate();
    return base;
}

json toJson(const RelevanceModel& model) {
    json trees = json::array();
    for (const DecisionTree& t : model.trees()) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            if (n.isLeaf()) nodes.push_back({{"leaf", n.label == Label::Relevant}});
            else nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
        }
        trees.push_back(std::move(nodes));
    }
    return json{{"format", "commgraph-model"},
                {"version", 1},
                {"config", toJson(model.config())},
                {"featureDim", model.featureDim()},
                {"trees", std::move(trees)}};
}

RelevanceModel modelFromJson(const json& doc) {
    try {
        if (doc.value("format", "") != "commgraph-model" || doc.value("version", 0) != 1) {
            throw DataError("not a commgraph model (version 1)");
        }
        const ForestConfig config = forestConfigFromJson(doc.at("config"));
        const auto dim = doc.at("featureDim").get<std::size_t>();
        std::vector<DecisionTree> trees;
        for (const json& jt : doc.at("trees")) {
            DecisionTree t;
            for (const json& jn : jt) {
                DecisionTree::Node n;
                if (jn.contains("leaf")) {
                    n.label = jn.at("leaf").get<bool>() ? Label::Relevant : Label::Irrelevant;
                } else {
                    n.feature = jn.at("f").get<int>();
                    n.threshold = jn.at("t").get<double>();
                    n.left = jn.at("l").get<int>();
                    n.right = jn.at("r").get<int>();
                }
                t.nodes.push_back(n);
            }
            const auto count = static_cast<int>(t.nodes.size());
            if (count == 0) throw DataError("model contains an empty tree");
            for (int i = 0; i < count; ++i) {
                const auto& n = t.nodes[static_cast<std::size_t>(i)];
                if (n.isLeaf()) continue;
                if (n.feature >= static_cast<int>(dim) || n.left <= i || n.right <= i || n.left >= count ||
                    n.right >= count) {
                    throw DataError("model tree node " + std::to_string(i) + " is malformed");
                }
            }
            trees.push_back(std::move(t));
        }
        return RelevanceModel(config, dim, std::move(trees));
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

std::string serializeModel(const RelevanceModel& model) { return toJson(model).dump(); }

} // namespace commgraph
