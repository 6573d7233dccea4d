#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfidzone/floorplan.hpp"

namespace rfidzone {

using Labels = std::span<const std::size_t>;

/// K x K counts; rows are true zones, columns predicted zones.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t k = 0) : k_(k), cells_(k * k, 0) {}

    std::size_t size() const noexcept { return k_; }
    std::uint64_t operator()(std::size_t truth, std::size_t pred) const { return cells_.at(truth * k_ + pred); }
    std::uint64_t& at(std::size_t truth, std::size_t pred) { return cells_.at(truth * k_ + pred); }

    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;
    std::uint64_t row_sum(std::size_t i) const;
    std::uint64_t col_sum(std::size_t j) const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t k_;
    std::vector<std::uint64_t> cells_;
};

/// Throws ValidationError on length mismatch, empty input or a label >= k.
ConfusionMatrix confusion(Labels truth, Labels predicted, std::size_t k);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

/// 0/0 resolves to 0 for precision, recall and F1.
std::vector<ClassScores> per_class_prf(const ConfusionMatrix& c);

struct Aggregates {
    double macro_f1 = 0.0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
};

/// Macro-F1 averages over all K classes, zero-support classes included.
Aggregates macro_micro(const ConfusionMatrix& c);

double accuracy(Labels truth, Labels predicted);

/// Fraction of predictions equal or adjacent to the truth.
double adjacency_accuracy(Labels truth, Labels predicted, const AdjacencyGraph& adj);

/// K x K non-negative cost matrix with zero diagonal.
class CostMatrix {
public:
    /// Throws ValidationError for a non-square, negative, non-finite or
    /// non-zero-diagonal matrix.
    CostMatrix(std::size_t k, std::vector<double> costs);

    /// Adjacent errors cost `adjacent`, all other errors `non_adjacent`.
    static CostMatrix from_adjacency(const AdjacencyGraph& adj, double adjacent = 1.0, double non_adjacent = 5.0);
    /// 1 off the diagonal.
    static CostMatrix zero_one(std::size_t k);

    std::size_t size() const noexcept { return k_; }
    double operator()(std::size_t truth, std::size_t pred) const { return costs_.at(truth * k_ + pred); }

private:
    std::size_t k_;
    std::vector<double> costs_;
};

/// Mean of cost(truth, predicted).
double cost_risk(Labels truth, Labels predicted, const CostMatrix& costs);

using Metric = std::function<double(Labels truth, Labels predicted)>;

struct Interval {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
};

/// Percentile bootstrap. Resample b draws its indices from a counter-based
/// stream keyed by (seed, b); quantiles use linear interpolation between order
/// statistics. Results do not depend on `threads`.
Interval bootstrap_ci(const Metric& metric, Labels truth, Labels predicted, std::size_t resamples, double level,
                      std::uint64_t seed, unsigned threads = 1);

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct EvalReport {
    std::vector<std::string> classes;
    ConfusionMatrix confusion;
    std::vector<ClassScores> per_class;
    double accuracy = 0.0;
    Aggregates aggregates;
    double adjacency_accuracy = 0.0;
    double risk = 0.0;
    std::size_t n = 0;
    /// Filled when bootstrap resamples > 0: accuracy, macro_f1, micro_f1,
    /// adjacency_accuracy, risk.
    std::vector<std::pair<std::string, Interval>> intervals;
};

struct EvalOptions {
    std::size_t bootstrap_resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

EvalReport evaluate(std::vector<std::string> classes, Labels truth, Labels predicted, const AdjacencyGraph& adj,
                    const CostMatrix& costs, const EvalOptions& opt);

}  // namespace rfidzone
