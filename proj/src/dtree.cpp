#include "rfidzone/dtree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rfidzone/error.hpp"

namespace rfidzone {

std::string to_string(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

Criterion parse_criterion(std::string_view s) {
    if (s == "gini") return Criterion::Gini;
    if (s == "entropy") return Criterion::Entropy;
    throw ValidationError("unknown criterion '" + std::string(s) + "' (expected gini or entropy)");
}

void Hyperparams::validate(std::size_t num_classes) const {
    if (max_depth < 1) throw ValidationError("hyperparams: max_depth must be >= 1");
    if (min_samples_split < 2) throw ValidationError("hyperparams: min_samples_split must be >= 2");
    if (!class_weights.empty()) {
        if (class_weights.size() != num_classes)
            throw ValidationError("hyperparams: class weight count does not match class count");
        for (double w : class_weights)
            if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("hyperparams: class weights must be positive");
    }
}

// ---------------------------------------------------------------------------
// Impurity

namespace {

double total_mass(std::span<const double> t) { return std::accumulate(t.begin(), t.end(), 0.0); }

}  // namespace

double gini(std::span<const double> tallies) {
    const double w = total_mass(tallies);
    if (!(w > 0.0)) throw DomainError("gini: zero total weight");
    double sum_sq = 0.0;
    for (double t : tallies) {
        const double p = t / w;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double entropy(std::span<const double> tallies) {
    const double w = total_mass(tallies);
    if (!(w > 0.0)) throw DomainError("entropy: zero total weight");
    double h = 0.0;
    for (double t : tallies) {
        if (t <= 0.0) continue;
        const double p = t / w;
        h -= p * std::log(p);
    }
    return h;
}

double impurity(std::span<const double> tallies, Criterion criterion) {
    return criterion == Criterion::Gini ? gini(tallies) : entropy(tallies);
}

double information_gain(std::span<const double> parent, std::span<const double> left, std::span<const double> right,
                        Criterion criterion) {
    if (parent.size() != left.size() || parent.size() != right.size())
        throw ValidationError("information_gain: tally vectors differ in length");
    const double w = total_mass(parent);
    for (std::size_t k = 0; k < parent.size(); ++k)
        if (std::abs(left[k] + right[k] - parent[k]) > 1e-9 * std::max(1.0, std::abs(w)))
            throw ValidationError("information_gain: left + right tallies do not sum to parent");
    const double wl = total_mass(left);
    const double wr = total_mass(right);
    double g = impurity(parent, criterion);
    if (wl > 0.0) g -= wl / w * impurity(left, criterion);
    if (wr > 0.0) g -= wr / w * impurity(right, criterion);
    return g;
}

// ---------------------------------------------------------------------------
// Split search

std::optional<SplitCandidate> best_split(std::span<const FeatureRow> rows, std::span<const std::size_t> labels,
                                         std::span<const double> sample_weights, std::size_t num_classes,
                                         Criterion criterion) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;

    std::vector<double> parent(num_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) parent[labels[i]] += sample_weights[i];
    const double w = total_mass(parent);
    if (!(w > 0.0)) return std::nullopt;
    const double parent_impurity = impurity(parent, criterion);

    std::vector<SplitCandidate> candidates;
    std::vector<std::size_t> order(n);
    std::vector<double> left(num_classes), right(num_classes);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rows[a][j] < rows[b][j]; });
        std::fill(left.begin(), left.end(), 0.0);
        double wl = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t r = order[i];
            left[labels[r]] += sample_weights[r];
            wl += sample_weights[r];
            const double lo = rows[r][j];
            const double hi = rows[order[i + 1]][j];
            if (!(lo < hi)) continue;
            double tau = lo + (hi - lo) / 2.0;
            if (!(tau < hi)) tau = lo;  // adjacent doubles

            for (std::size_t k = 0; k < num_classes; ++k) right[k] = std::max(0.0, parent[k] - left[k]);
            const double wr = total_mass(right);
            double gain = parent_impurity;
            if (wl > 0.0) gain -= wl / w * impurity(left, criterion);
            if (wr > 0.0) gain -= wr / w * impurity(right, criterion);
            candidates.push_back({{j, tau}, gain});
        }
    }
    if (candidates.empty()) return std::nullopt;

    double top = -std::numeric_limits<double>::infinity();
    for (const SplitCandidate& c : candidates) top = std::max(top, c.gain);
    if (!(top > kMinGain)) return std::nullopt;
    // Candidates are already in (feature, threshold) order.
    for (const SplitCandidate& c : candidates)
        if (c.gain >= top - kGainTieTolerance) return c;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tree

namespace {

std::size_t argmax_lowest(std::span<const double> tallies) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < tallies.size(); ++k)
        if (tallies[k] > tallies[best]) best = k;
    return best;
}

}  // namespace

DecisionTree::DecisionTree(std::vector<std::string> classes, std::vector<TreeNode> nodes)
    : classes_(std::move(classes)), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("decision tree: no nodes");
    const auto count = static_cast<std::int32_t>(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TreeNode& n = nodes_[i];
        if ((n.left < 0) != (n.right < 0)) throw ValidationError("decision tree: internal node missing a child");
        if (!n.is_leaf()) {
            if (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) || n.left >= count ||
                n.right >= count)
                throw ValidationError("decision tree: child index out of range");
            if (n.rule.feature >= kFeatureCount) throw ValidationError("decision tree: feature index out of range");
        }
        if (n.prediction >= classes_.size()) throw ValidationError("decision tree: prediction out of range");
        if (!n.tallies.empty() && n.tallies.size() != classes_.size())
            throw ValidationError("decision tree: tally length does not match class count");
    }
}

std::size_t DecisionTree::predict(const FeatureRow& row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& n = nodes_[i];
        i = static_cast<std::size_t>(row[n.rule.feature] <= n.rule.threshold ? n.left : n.right);
    }
    return nodes_[i].prediction;
}

std::vector<std::size_t> DecisionTree::predict(std::span<const FeatureRow> rows) const {
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (const FeatureRow& r : rows) out.push_back(predict(r));
    return out;
}

std::size_t DecisionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

namespace {

struct Builder {
    const LabeledDataset& data;
    const Hyperparams& hp;
    std::vector<double> weight_of_row;
    std::vector<TreeNode> nodes;

    std::int32_t grow(std::vector<std::size_t> idx, int depth) {
        const std::size_t k = data.classes.size();
        TreeNode node;
        node.samples = idx.size();
        node.tallies.assign(k, 0.0);
        bool pure = true;
        for (std::size_t i : idx) {
            node.tallies[data.labels[i]] += weight_of_row[i];
            pure = pure && data.labels[i] == data.labels[idx.front()];
        }
        node.prediction = argmax_lowest(node.tallies);

        const auto self = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
        if (depth >= hp.max_depth || idx.size() < hp.min_samples_split || pure) return self;

        std::vector<FeatureRow> rows;
        std::vector<std::size_t> labels;
        std::vector<double> weights;
        rows.reserve(idx.size());
        labels.reserve(idx.size());
        weights.reserve(idx.size());
        for (std::size_t i : idx) {
            rows.push_back(data.rows[i]);
            labels.push_back(data.labels[i]);
            weights.push_back(weight_of_row[i]);
        }
        const auto split = best_split(rows, labels, weights, k, hp.criterion);
        if (!split) return self;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (data.rows[i][split->rule.feature] <= split->rule.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        nodes[static_cast<std::size_t>(self)].rule = split->rule;
        const std::int32_t l = grow(std::move(left), depth + 1);
        const std::int32_t r = grow(std::move(right), depth + 1);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

}  // namespace

DecisionTree fit(const LabeledDataset& train, const Hyperparams& hp) {
    if (train.empty()) throw ValidationError("fit: empty training data");
    train.validate();
    hp.validate(train.classes.size());

    Builder b{train, hp, {}, {}};
    b.weight_of_row.reserve(train.size());
    for (std::size_t l : train.labels) b.weight_of_row.push_back(hp.class_weights.empty() ? 1.0 : hp.class_weights[l]);
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), 0);
    b.grow(std::move(all), 0);
    return DecisionTree(train.classes, std::move(b.nodes));
}

// ---------------------------------------------------------------------------
// Rule text

std::string format_threshold(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == v) return buf;
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

namespace {

std::string format_tally(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void emit_rules(const DecisionTree& tree, std::size_t i, int indent, bool as_else, std::string& out) {
    const TreeNode& n = tree.nodes()[i];
    if (!as_else) out.append(static_cast<std::size_t>(indent), ' ');
    if (n.is_leaf()) {
        out += "predict " + tree.classes()[n.prediction] + " [";
        bool first = true;
        for (std::size_t k = 0; k < n.tallies.size(); ++k) {
            if (n.tallies[k] == 0.0) continue;
            if (!first) out += ", ";
            out += tree.classes()[k] + "=" + format_tally(n.tallies[k]);
            first = false;
        }
        out += "]\n";
        return;
    }
    out += std::string("if ") + kFeatureNames[n.rule.feature] + " <= " + format_threshold(n.rule.threshold) + "\n";
    emit_rules(tree, static_cast<std::size_t>(n.left), indent + 2, false, out);
    out.append(static_cast<std::size_t>(indent), ' ');
    out += "else ";
    emit_rules(tree, static_cast<std::size_t>(n.right), indent, true, out);
}

struct RuleParser {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    const std::vector<std::string>& classes;
    std::vector<TreeNode> nodes;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("rules line " + std::to_string(pos + 1) + ": " + what);
    }

    std::size_t class_index(std::string_view name) const {
        for (std::size_t k = 0; k < classes.size(); ++k)
            if (classes[k] == name) return k;
        fail("unknown class '" + std::string(name) + "'");
    }

    static double number(std::string_view s, const RuleParser& p) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) p.fail("bad number '" + std::string(s) + "'");
        return v;
    }

    // `body` is the line content after indentation (and after "else " when applicable).
    std::int32_t node(std::string_view body, int indent) {
        const auto self = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        TreeNode n;
        n.tallies.assign(classes.size(), 0.0);
        if (body.starts_with("predict ")) {
            body.remove_prefix(8);
            const std::size_t sp = body.find(" [");
            if (sp == std::string_view::npos || !body.ends_with("]")) fail("malformed leaf");
            n.prediction = class_index(body.substr(0, sp));
            std::string_view tallies = body.substr(sp + 2, body.size() - sp - 3);
            while (!tallies.empty()) {
                const std::size_t comma = tallies.find(", ");
                const std::string_view item = tallies.substr(0, comma);
                const std::size_t eq = item.rfind('=');
                if (eq == std::string_view::npos) fail("malformed tally");
                n.tallies[class_index(item.substr(0, eq))] = number(item.substr(eq + 1), *this);
                tallies = comma == std::string_view::npos ? std::string_view{} : tallies.substr(comma + 2);
            }
            ++pos;
            nodes[static_cast<std::size_t>(self)] = std::move(n);
            return self;
        }
        if (!body.starts_with("if ")) fail("expected 'if' or 'predict'");
        body.remove_prefix(3);
        const std::size_t le = body.find(" <= ");
        if (le == std::string_view::npos) fail("expected '<='");
        const std::string_view feature = body.substr(0, le);
        bool found = false;
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            if (feature == kFeatureNames[j]) {
                n.rule.feature = j;
                found = true;
            }
        if (!found) fail("unknown feature '" + std::string(feature) + "'");
        n.rule.threshold = number(body.substr(le + 4), *this);
        ++pos;

        n.left = node(expect_indent(indent + 2, false), indent + 2);
        n.right = node(expect_indent(indent, true), indent);
        n.prediction = 0;
        nodes[static_cast<std::size_t>(self)] = std::move(n);
        return self;
    }

    std::string_view expect_indent(int indent, bool with_else) {
        if (pos >= lines.size()) fail("unexpected end of rules");
        std::string_view line = lines[pos];
        const std::string prefix = std::string(static_cast<std::size_t>(indent), ' ') + (with_else ? "else " : "");
        if (!line.starts_with(prefix)) fail("bad indentation");
        line.remove_prefix(prefix.size());
        if (!line.empty() && line.front() == ' ') fail("bad indentation");
        return line;
    }
};

// Internal nodes carry no tallies in the rule text; rebuild them from leaves.
void fill_internal(std::vector<TreeNode>& nodes, std::size_t i) {
    TreeNode& n = nodes[i];
    if (n.is_leaf()) return;
    fill_internal(nodes, static_cast<std::size_t>(n.left));
    fill_internal(nodes, static_cast<std::size_t>(n.right));
    const auto& l = nodes[static_cast<std::size_t>(n.left)].tallies;
    const auto& r = nodes[static_cast<std::size_t>(n.right)].tallies;
    for (std::size_t k = 0; k < n.tallies.size(); ++k) n.tallies[k] = l[k] + r[k];
    n.prediction = argmax_lowest(n.tallies);
}

}  // namespace

std::string export_rules(const DecisionTree& tree) {
    std::string out;
    emit_rules(tree, 0, 0, false, out);
    return out;
}

DecisionTree parse_rules(std::string_view text, std::vector<std::string> classes) {
    RuleParser p{{}, 0, classes, {}};
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        p.lines.push_back(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    if (p.lines.empty()) throw ParseError("rules: empty text");
    p.node(p.expect_indent(0, false), 0);
    if (p.pos != p.lines.size()) p.fail("trailing content");
    fill_internal(p.nodes, 0);
    return DecisionTree(std::move(classes), std::move(p.nodes));
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

using nlohmann::json;

constexpr const char* kTreeFormat = "rfidzone-decision-tree";
constexpr int kTreeVersion = 1;

json node_to_json(const DecisionTree& tree, std::size_t i) {
    const TreeNode& n = tree.nodes()[i];
    json j;
    j["samples"] = n.samples;
    j["tallies"] = n.tallies;
    if (n.is_leaf()) {
        j["predict"] = tree.classes()[n.prediction];
    } else {
        j["feature"] = kFeatureNames[n.rule.feature];
        j["threshold"] = n.rule.threshold;
        j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
        j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
    }
    return j;
}

std::int32_t node_from_json(const json& j, const std::vector<std::string>& classes, std::vector<TreeNode>& nodes) {
    const auto self = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    TreeNode n;
    n.samples = j.at("samples").get<std::size_t>();
    n.tallies = j.at("tallies").get<std::vector<double>>();
    if (n.tallies.size() != classes.size()) throw ParseError("tree: tally length does not match class count");
    if (j.contains("predict")) {
        const auto name = j.at("predict").get<std::string>();
        auto it = std::find(classes.begin(), classes.end(), name);
        if (it == classes.end()) throw ParseError("tree: unknown class '" + name + "'");
        n.prediction = static_cast<std::size_t>(it - classes.begin());
    } else {
        const auto feature = j.at("feature").get<std::string>();
        auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), feature);
        if (it == kFeatureNames.end()) throw ParseError("tree: unknown feature '" + feature + "'");
        n.rule = {static_cast<std::size_t>(it - kFeatureNames.begin()), j.at("threshold").get<double>()};
        n.prediction = argmax_lowest(n.tallies);
        n.left = node_from_json(j.at("left"), classes, nodes);
        n.right = node_from_json(j.at("right"), classes, nodes);
    }
    nodes[static_cast<std::size_t>(self)] = std::move(n);
    return self;
}

}  // namespace

std::string save_tree(const DecisionTree& tree) {
    json doc;
    doc["format"] = kTreeFormat;
    doc["version"] = kTreeVersion;
    doc["classes"] = tree.classes();
    doc["features"] = kFeatureNames;
    doc["stats"] = {{"depth", tree.depth()}, {"nodes", tree.node_count()}, {"leaves", tree.leaf_count()}};
    doc["root"] = node_to_json(tree, 0);
    return doc.dump(1) + "\n";
}

DecisionTree load_tree(std::string_view text) {
    try {
        const json doc = json::parse(text.begin(), text.end());
        if (doc.at("format").get<std::string>() != kTreeFormat) throw ParseError("tree: unrecognized format");
        if (doc.at("version").get<int>() != kTreeVersion)
            throw ParseError("tree: unsupported version " + doc.at("version").dump());
        auto classes = doc.at("classes").get<std::vector<std::string>>();
        std::vector<TreeNode> nodes;
        node_from_json(doc.at("root"), classes, nodes);
        return DecisionTree(std::move(classes), std::move(nodes));
    } catch (const json::exception& e) {
        throw ParseError(std::string("tree: malformed document: ") + e.what());
    }
}

}  // namespace rfidzone
