// rfidzone: simulate RFID reads on a zoned floorplan, train a weighted decision
// tree on (ReaderIP, Antenna, RSSI), and evaluate zone inference.
//
// Exit status: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rfidzone/classweights.hpp"
#include "rfidzone/dataset.hpp"
#include "rfidzone/error.hpp"
#include "rfidzone/pipeline.hpp"

namespace {

using namespace rfidzone;
namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Options {
    RunConfig cfg;
    std::string criterion = "gini";
    std::string class_weight = "balanced";
    std::string weight_mode = "pre-subsample";
    std::string reads;
    std::string model;
    std::string split;
    std::string data;
    std::string fold = "test";
    bool self_only = false;
};

void add_sim_flags(CLI::App* app, Options& o) {
    app->add_option("--floorplan", o.cfg.floorplan, "Floorplan JSON (default: bundled 12-zone facility)");
    app->add_option("--sessions", o.cfg.sim.sessions, "Acquisition sessions")->check(CLI::PositiveNumber);
    app->add_option("--reads-per-tag-per-session,--reads_per_tag_per_session", o.cfg.sim.reads_per_tag_per_session,
                    "Candidate reads per tag/antenna pair per session")
        ->check(CLI::PositiveNumber);
    app->add_option("--p0", o.cfg.sim.model.p0_dbm, "Power at reference distance (dBm)");
    app->add_option("--d0", o.cfg.sim.model.d0_m, "Reference distance (m)");
    app->add_option("--eta", o.cfg.sim.model.eta, "Path-loss exponent");
    app->add_option("--sigma", o.cfg.sim.model.sigma_db, "Shadowing standard deviation (dB)");
}

void add_train_flags(CLI::App* app, Options& o) {
    app->add_option("--subsample-target,--subsample_target", o.cfg.subsample_target, "Stratified subsample size");
    app->add_option("--test-fraction,--test_fraction", o.cfg.test_fraction, "Held-out session fraction");
    app->add_option("--criterion", o.criterion, "gini | entropy");
    app->add_option("--max-depth,--max_depth", o.cfg.max_depth, "Maximum tree depth");
    app->add_option("--min-samples-split,--min_samples_split", o.cfg.min_samples_split, "Minimum samples to split");
    app->add_option("--class-weight,--class_weight", o.class_weight, "balanced | uniform");
    app->add_option("--weight-mode,--weight_mode", o.weight_mode, "pre-subsample | post-subsample");
}

void add_eval_flags(CLI::App* app, Options& o) {
    app->add_option("--bootstrap-resamples,--bootstrap_resamples", o.cfg.bootstrap_resamples,
                    "Bootstrap resamples (0 disables intervals)");
    app->add_option("--ci-level,--ci_level", o.cfg.ci_level, "Confidence level");
    app->add_option("--adjacent-cost,--adjacent_cost", o.cfg.adjacent_cost, "Cost of an adjacent-zone error");
    app->add_option("--non-adjacent-cost,--non_adjacent_cost", o.cfg.non_adjacent_cost,
                    "Cost of a non-adjacent-zone error");
    app->add_flag("--self-only-adjacency", o.self_only, "Treat zones as adjacent only to themselves");
}

void finalize(Options& o) {
    o.cfg.criterion = parse_criterion(o.criterion);
    o.cfg.class_weight = parse_class_weighting(o.class_weight);
    o.cfg.weight_mode = parse_weight_mode(o.weight_mode);
    o.cfg.sim.validate();
    if (!(o.cfg.test_fraction > 0.0 && o.cfg.test_fraction < 1.0))
        throw ValidationError("--test-fraction must lie in (0, 1)");
    if (!(o.cfg.ci_level > 0.0 && o.cfg.ci_level < 1.0)) throw ValidationError("--ci-level must lie in (0, 1)");
    if (o.cfg.max_depth < 1) throw ValidationError("--max-depth must be >= 1");
    if (o.cfg.min_samples_split < 2) throw ValidationError("--min-samples-split must be >= 2");
    if (!o.cfg.floorplan.empty() && !fs::exists(o.cfg.floorplan))
        throw ValidationError("floorplan '" + o.cfg.floorplan + "' is not readable");
}

void print_report(const EvalReport& r) {
    std::printf("rows               %zu\n", r.n);
    std::printf("accuracy           %.4f\n", r.accuracy);
    std::printf("macro_f1           %.4f\n", r.aggregates.macro_f1);
    std::printf("micro_f1           %.4f\n", r.aggregates.micro_f1);
    std::printf("adjacency_accuracy %.4f\n", r.adjacency_accuracy);
    std::printf("risk               %.4f\n", r.risk);
    for (const auto& [name, iv] : r.intervals)
        std::printf("ci %-18s %.4f [%.4f, %.4f] @ %.2f\n", name.c_str(), iv.point, iv.lower, iv.upper, iv.level);
}

void print_weights(const ClassWeightTable& t) { write_weight_report(std::cout, t); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RFID zone inference: simulate, train, evaluate"};
    app.require_subcommand(1);
    Options o;
    std::string out_dir = "out";
    app.add_option("--seed", o.cfg.seed, "Seed for every stage")->capture_default_str();
    app.add_option("--threads", o.cfg.threads, "Worker threads (results do not depend on this)");

    auto* generate = app.add_subcommand("generate", "Simulate reads and write reads.csv");
    add_sim_flags(generate, o);
    generate->add_option("--output-dir,--output_dir", out_dir, "Output directory");

    auto* train = app.add_subcommand("train", "Label, weight, subsample, split and fit");
    train->add_option("--floorplan", o.cfg.floorplan, "Floorplan JSON (default: bundled)");
    train->add_option("--reads", o.reads, "reads.csv from generate")->required();
    add_train_flags(train, o);
    train->add_option("--output-dir,--output_dir", out_dir, "Output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the held-out fold");
    evaluate->add_option("--floorplan", o.cfg.floorplan, "Floorplan JSON (default: bundled)");
    evaluate->add_option("--model", o.model, "model.json from train")->required();
    auto* split_opt = evaluate->add_option("--split", o.split, "split.json from train");
    auto* data_opt = evaluate->add_option("--data", o.data, "Labeled CSV (read schema plus Zone)");
    split_opt->excludes(data_opt);
    evaluate->add_option("--fold", o.fold, "Fold named in the split manifest: test | train");
    add_eval_flags(evaluate, o);
    evaluate->add_option("--output-dir,--output_dir", out_dir, "Output directory");

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage from one seed and write manifest.json");
    add_sim_flags(pipeline, o);
    add_train_flags(pipeline, o);
    add_eval_flags(pipeline, o);
    pipeline->add_option("--output-dir,--output_dir", out_dir, "Output directory");

    auto* weights = app.add_subcommand("weights", "Print balanced class weights for a reads file");
    weights->add_option("--floorplan", o.cfg.floorplan, "Floorplan JSON (default: bundled)");
    weights->add_option("--reads", o.reads, "reads.csv (or labeled CSV)")->required();
    weights->add_option("--output-dir,--output_dir", out_dir, "Also write weights.csv and weights_figure.csv here");

    try {
        app.parse(argc, argv);
        o.cfg.output_dir = out_dir;
        finalize(o);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*generate) {
            const GenerateResult r = run_generate(o.cfg);
            std::printf("wrote %s (%zu reads)\n", r.reads_csv.string().c_str(), r.read_count);
            for (const auto& [zone, n] : r.reads_per_zone) std::printf("  %-10s %zu\n", zone.c_str(), n);
        } else if (*train) {
            const TrainResult r = run_train(o.cfg, o.reads);
            print_weights(r.weights);
            std::printf("train rows %zu (sessions %zu), test rows %zu (sessions %zu)\n", r.split.train.size(),
                        r.split.train_sessions.size(), r.split.test.size(), r.split.test_sessions.size());
            std::printf("tree depth %d, %zu nodes, %zu leaves -> %s\n", r.tree.depth(), r.tree.node_count(),
                        r.tree.leaf_count(), r.model.string().c_str());
        } else if (*evaluate) {
            if (o.split.empty() && o.data.empty()) throw ValidationError("evaluate: pass --split or --data");
            EvaluateInput in{o.model, o.split, o.fold, o.data, o.self_only};
            print_report(run_evaluate(o.cfg, in));
        } else if (*pipeline) {
            const PipelineResult r = run_pipeline(o.cfg);
            print_report(r.report);
            std::printf("manifest %s\n", r.manifest.string().c_str());
        } else if (*weights) {
            const Floorplan fp = resolve_floorplan(o.cfg);
            std::ifstream in(o.reads, std::ios::binary);
            if (!in) throw Error("cannot read '" + o.reads + "'");
            const LabeledDataset ds = label_reads(to_read_set(drop_nulls(read_reads_csv(in))), fp);
            std::vector<std::string> zones;
            std::vector<std::size_t> counts;
            const auto all = ds.class_counts();
            for (std::size_t k = 0; k < all.size(); ++k)
                if (all[k] > 0) {
                    zones.push_back(ds.classes[k]);
                    counts.push_back(all[k]);
                }
            const ClassWeightTable t = balanced_weights(zones, counts);
            print_weights(t);
            if (weights->count("--output-dir") > 0) {
                fs::create_directories(o.cfg.output_dir);
                std::ofstream report(o.cfg.output_dir / "weights.csv", std::ios::binary);
                write_weight_report(report, t);
                std::ofstream figure(o.cfg.output_dir / "weights_figure.csv", std::ios::binary);
                write_weight_figure_csv(figure, t);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
