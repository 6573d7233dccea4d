#include "rfidzone/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rfidzone/error.hpp"
#include "rfidzone/rng.hpp"

namespace rfidzone {

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : cells_) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < k_; ++i) t += cells_[i * k_ + i];
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::uint64_t t = 0;
    for (std::size_t j = 0; j < k_; ++j) t += (*this)(i, j);
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < k_; ++i) t += (*this)(i, j);
    return t;
}

namespace {

void check_pair(Labels truth, Labels predicted, const char* what) {
    if (truth.size() != predicted.size())
        throw ValidationError(std::string(what) + ": truth and prediction lengths differ");
    if (truth.empty()) throw ValidationError(std::string(what) + ": empty input");
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) {
    if (p == r) return p;  // harmonic mean of equal values, kept exact
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

ConfusionMatrix confusion(Labels truth, Labels predicted, std::size_t k) {
    check_pair(truth, predicted, "confusion");
    ConfusionMatrix c(k);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= k || predicted[i] >= k) throw ValidationError("confusion: unknown label");
        ++c.at(truth[i], predicted[i]);
    }
    return c;
}

std::vector<ClassScores> per_class_prf(const ConfusionMatrix& c) {
    std::vector<ClassScores> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double tp = static_cast<double>(c(k, k));
        const double predicted = static_cast<double>(c.col_sum(k));
        const auto support = c.row_sum(k);
        out[k].precision = ratio(tp, predicted);
        out[k].recall = ratio(tp, static_cast<double>(support));
        out[k].f1 = f1_of(out[k].precision, out[k].recall);
        out[k].support = support;
    }
    return out;
}

Aggregates macro_micro(const ConfusionMatrix& c) {
    Aggregates a;
    if (c.size() == 0) return a;
    for (const ClassScores& s : per_class_prf(c)) a.macro_f1 += s.f1;
    a.macro_f1 /= static_cast<double>(c.size());

    // Pooled FP and pooled FN both equal the off-diagonal mass.
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        tp += static_cast<double>(c(k, k));
        fp += static_cast<double>(c.col_sum(k) - c(k, k));
        fn += static_cast<double>(c.row_sum(k) - c(k, k));
    }
    a.micro_precision = ratio(tp, tp + fp);
    a.micro_recall = ratio(tp, tp + fn);
    a.micro_f1 = f1_of(a.micro_precision, a.micro_recall);
    return a;
}

double accuracy(Labels truth, Labels predicted) {
    check_pair(truth, predicted, "accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double adjacency_accuracy(Labels truth, Labels predicted, const AdjacencyGraph& adj) {
    check_pair(truth, predicted, "adjacency_accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= adj.size() || predicted[i] >= adj.size())
            throw ValidationError("adjacency_accuracy: unknown zone");
        hits += truth[i] == predicted[i] || adj.adjacent(truth[i], predicted[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CostMatrix::CostMatrix(std::size_t k, std::vector<double> costs) : k_(k), costs_(std::move(costs)) {
    if (costs_.size() != k_ * k_) throw ValidationError("cost matrix: expected K*K entries");
    for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t j = 0; j < k_; ++j) {
            const double v = costs_[i * k_ + j];
            if (!std::isfinite(v) || v < 0.0) throw ValidationError("cost matrix: entries must be finite and >= 0");
            if (i == j && v != 0.0) throw ValidationError("cost matrix: diagonal must be zero");
        }
}

CostMatrix CostMatrix::from_adjacency(const AdjacencyGraph& adj, double adjacent, double non_adjacent) {
    const std::size_t k = adj.size();
    std::vector<double> c(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) c[i * k + j] = adj.adjacent(i, j) ? adjacent : non_adjacent;
    return CostMatrix(k, std::move(c));
}

CostMatrix CostMatrix::zero_one(std::size_t k) {
    std::vector<double> c(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) c[i * k + i] = 0.0;
    return CostMatrix(k, std::move(c));
}

double cost_risk(Labels truth, Labels predicted, const CostMatrix& costs) {
    check_pair(truth, predicted, "cost_risk");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= costs.size() || predicted[i] >= costs.size())
            throw ValidationError("cost_risk: label outside cost matrix dimension");
        sum += costs(truth[i], predicted[i]);
    }
    return sum / static_cast<double>(truth.size());
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ValidationError("quantile: empty input");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(const Metric& metric, Labels truth, Labels predicted, std::size_t resamples, double level,
                      std::uint64_t seed, unsigned threads) {
    check_pair(truth, predicted, "bootstrap_ci");
    if (resamples < 1) throw ValidationError("bootstrap_ci: need at least one resample");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap_ci: level must lie in (0, 1)");

    const std::size_t n = truth.size();
    std::vector<double> values(resamples);
    auto run = [&](std::size_t first, std::size_t stride) {
        std::vector<std::size_t> yt(n), yp(n);
        for (std::size_t b = first; b < resamples; b += stride) {
            StreamRng rng(seed, {0x424f4f54ULL, b});
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = static_cast<std::size_t>(rng.below(n));
                yt[i] = truth[idx];
                yp[i] = predicted[idx];
            }
            values[b] = metric(yt, yp);
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(resamples)));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
        for (auto& t : pool) t.join();
    }
    std::sort(values.begin(), values.end());
    const double alpha = 1.0 - level;
    return {metric(truth, predicted), quantile_sorted(values, alpha / 2.0), quantile_sorted(values, 1.0 - alpha / 2.0),
            level};
}

EvalReport evaluate(std::vector<std::string> classes, Labels truth, Labels predicted, const AdjacencyGraph& adj,
                    const CostMatrix& costs, const EvalOptions& opt) {
    const std::size_t k = classes.size();
    if (adj.size() != k || costs.size() != k)
        throw ValidationError("evaluate: adjacency/cost dimension does not match class count");
    EvalReport r;
    r.classes = std::move(classes);
    r.confusion = confusion(truth, predicted, k);
    r.per_class = per_class_prf(r.confusion);
    r.accuracy = accuracy(truth, predicted);
    r.aggregates = macro_micro(r.confusion);
    r.adjacency_accuracy = adjacency_accuracy(truth, predicted, adj);
    r.risk = cost_risk(truth, predicted, costs);
    r.n = truth.size();

    if (opt.bootstrap_resamples > 0) {
        const std::vector<std::pair<std::string, Metric>> metrics = {
            {"accuracy", [](Labels y, Labels p) { return accuracy(y, p); }},
            {"macro_f1", [k](Labels y, Labels p) { return macro_micro(confusion(y, p, k)).macro_f1; }},
            {"micro_f1", [k](Labels y, Labels p) { return macro_micro(confusion(y, p, k)).micro_f1; }},
            {"adjacency_accuracy", [&adj](Labels y, Labels p) { return adjacency_accuracy(y, p, adj); }},
            {"risk", [&costs](Labels y, Labels p) { return cost_risk(y, p, costs); }},
        };
        for (const auto& [name, m] : metrics)
            r.intervals.emplace_back(
                name, bootstrap_ci(m, truth, predicted, opt.bootstrap_resamples, opt.level, opt.seed, opt.threads));
    }
    return r;
}

}  // namespace rfidzone
