#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfidzone/dataset.hpp"

namespace rfidzone {

enum class Criterion { Gini, Entropy };

std::string to_string(Criterion c);
/// Accepts "gini" or "entropy"; throws ValidationError otherwise.
Criterion parse_criterion(std::string_view s);

struct Hyperparams {
    Criterion criterion = Criterion::Gini;
    int max_depth = 8;
    std::size_t min_samples_split = 20;
    /// Per-class sample weight indexed like the dataset's classes; empty means uniform.
    std::vector<double> class_weights;

    void validate(std::size_t num_classes) const;
};

/// Splits with gain at or below this are not taken.
inline constexpr double kMinGain = 1e-12;

/// Gain differences within this are treated as ties during split search.
inline constexpr double kGainTieTolerance = 1e-12;

/// 1 - sum p_k^2 over weighted shares. Throws DomainError on zero total weight.
double gini(std::span<const double> tallies);

/// -sum p_k ln p_k, with 0 ln 0 = 0. Throws DomainError on zero total weight.
double entropy(std::span<const double> tallies);

double impurity(std::span<const double> tallies, Criterion criterion);

/// I(parent) - (W_L/W) I(left) - (W_R/W) I(right), W being weighted mass.
/// Throws ValidationError when left + right does not reproduce parent to 1e-9
/// relative.
double information_gain(std::span<const double> parent, std::span<const double> left, std::span<const double> right,
                        Criterion criterion);

/// Sends x left when x[feature] <= threshold.
struct SplitRule {
    std::size_t feature = 0;
    double threshold = 0.0;

    friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

struct SplitCandidate {
    SplitRule rule;
    double gain = 0.0;
};

/// Exhaustive search over every feature and every midpoint between consecutive
/// distinct values. Maximal gain wins; near-ties (kGainTieTolerance) go to the
/// smaller feature index, then the smaller threshold. Empty when no split beats
/// kMinGain.
std::optional<SplitCandidate> best_split(std::span<const FeatureRow> rows, std::span<const std::size_t> labels,
                                         std::span<const double> sample_weights, std::size_t num_classes,
                                         Criterion criterion);

struct TreeNode {
    /// Children are indices into DecisionTree::nodes(); -1 for leaves.
    std::int32_t left = -1;
    std::int32_t right = -1;
    SplitRule rule;
    std::size_t samples = 0;
    std::vector<double> tallies;  // weighted class mass reaching the node
    std::size_t prediction = 0;   // argmax of tallies, lowest index on ties

    bool is_leaf() const noexcept { return left < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    /// Node 0 is the root; nodes are stored in preorder.
    DecisionTree(std::vector<std::string> classes, std::vector<TreeNode> nodes);

    std::size_t predict(const FeatureRow& row) const;
    std::vector<std::size_t> predict(std::span<const FeatureRow> rows) const;

    const std::vector<std::string>& classes() const noexcept { return classes_; }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const noexcept;
    /// Edges on the longest root-to-leaf path.
    int depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<std::string> classes_;
    std::vector<TreeNode> nodes_;
};

/// Greedy recursive induction. Throws ValidationError on empty data or invalid
/// hyperparameters.
DecisionTree fit(const LabeledDataset& train, const Hyperparams& hp);

/// Indented if/else listing, one node per line.
std::string export_rules(const DecisionTree& tree);

/// Inverse of export_rules. Tallies are restored to the printed precision.
DecisionTree parse_rules(std::string_view text, std::vector<std::string> classes);

/// Versioned JSON document; load_tree(save_tree(t)) == t.
std::string save_tree(const DecisionTree& tree);
DecisionTree load_tree(std::string_view text);

/// Shortest decimal form of v: six significant digits when that parses back to
/// v exactly, otherwise the shortest exact representation.
std::string format_threshold(double v);

}  // namespace rfidzone
