#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfidzone/classweights.hpp"
#include "rfidzone/dtree.hpp"
#include "rfidzone/floorplan.hpp"
#include "rfidzone/metrics.hpp"
#include "rfidzone/propagation.hpp"

namespace rfidzone {

inline constexpr const char* kToolVersion = "0.1.0";

enum class WeightMode { PreSubsample, PostSubsample };
enum class ClassWeighting { Balanced, Uniform };

std::string to_string(WeightMode m);
std::string to_string(ClassWeighting w);
WeightMode parse_weight_mode(std::string_view s);
ClassWeighting parse_class_weighting(std::string_view s);

struct RunConfig {
    /// Empty selects the bundled floorplan.
    std::string floorplan;
    SimConfig sim;
    std::size_t subsample_target = 5000;
    double test_fraction = 0.10;
    Criterion criterion = Criterion::Gini;
    int max_depth = 8;
    std::size_t min_samples_split = 20;
    ClassWeighting class_weight = ClassWeighting::Balanced;
    WeightMode weight_mode = WeightMode::PreSubsample;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "out";
    std::size_t bootstrap_resamples = 1000;
    double ci_level = 0.95;
    double adjacent_cost = 1.0;
    double non_adjacent_cost = 5.0;
    unsigned threads = 1;
};

Floorplan resolve_floorplan(const RunConfig& cfg);

struct GenerateResult {
    std::filesystem::path reads_csv;
    std::size_t read_count = 0;
    std::vector<std::pair<std::string, std::size_t>> reads_per_zone;
};

/// Writes <output_dir>/reads.csv.
GenerateResult run_generate(const RunConfig& cfg);

struct TrainResult {
    DecisionTree tree;
    ClassWeightTable weights;
    SplitPair split;
    std::filesystem::path model;
    std::filesystem::path split_manifest;
    std::filesystem::path weight_report;
};

/// Label, weight, subsample, split and fit. Writes model.json, rules.txt,
/// split.json, train.csv, test.csv, weights.csv, weights_figure.csv and the
/// figure feeds for the subsampled data.
TrainResult run_train(const RunConfig& cfg, const std::filesystem::path& reads_csv);

struct EvaluateInput {
    std::filesystem::path model;
    /// Either a split manifest (with `fold`) or a labeled CSV.
    std::filesystem::path split_manifest;
    std::string fold = "test";
    std::filesystem::path labeled_csv;
    bool self_only_adjacency = false;
};

/// Predicts on the chosen fold and writes report.json plus the report CSVs.
EvalReport run_evaluate(const RunConfig& cfg, const EvaluateInput& in);

struct Artifact {
    std::string name;
    std::filesystem::path path;  // relative to output_dir
    std::string sha256;
};

struct PipelineResult {
    EvalReport report;
    TrainResult train;
    std::vector<Artifact> artifacts;
    std::vector<Artifact> auxiliary;
    std::filesystem::path manifest;
};

/// generate -> train -> evaluate from one seed, then manifest.json.
PipelineResult run_pipeline(const RunConfig& cfg);

std::string sha256_file(const std::filesystem::path& p);

}  // namespace rfidzone
