#include "rfidzone/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "rfidzone/dataset.hpp"
#include "rfidzone/error.hpp"
#include "rfidzone/report.hpp"

namespace rfidzone {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(WeightMode m) { return m == WeightMode::PreSubsample ? "pre-subsample" : "post-subsample"; }
std::string to_string(ClassWeighting w) { return w == ClassWeighting::Balanced ? "balanced" : "uniform"; }

WeightMode parse_weight_mode(std::string_view s) {
    if (s == "pre-subsample") return WeightMode::PreSubsample;
    if (s == "post-subsample") return WeightMode::PostSubsample;
    throw ValidationError("unknown weight mode '" + std::string(s) + "' (expected pre-subsample or post-subsample)");
}

ClassWeighting parse_class_weighting(std::string_view s) {
    if (s == "balanced") return ClassWeighting::Balanced;
    if (s == "uniform") return ClassWeighting::Uniform;
    throw ValidationError("unknown class weighting '" + std::string(s) + "' (expected balanced or uniform)");
}

Floorplan resolve_floorplan(const RunConfig& cfg) {
    return cfg.floorplan.empty() ? default_floorplan() : load_floorplan_file(cfg.floorplan);
}

namespace {

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    return out;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<RawRead> read_csv_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    try {
        return read_reads_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

// Balanced over the classes that have rows; classes without rows keep weight 1
// and count 0 so the table still covers every zone.
ClassWeightTable weights_for(const LabeledDataset& ds, ClassWeighting mode) {
    const auto counts = ds.class_counts();
    if (mode == ClassWeighting::Uniform) return uniform_weights(ds.classes, counts);
    std::vector<std::string> present;
    std::vector<std::size_t> present_counts;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] > 0) {
            present.push_back(ds.classes[k]);
            present_counts.push_back(counts[k]);
        }
    const ClassWeightTable computed = balanced_weights(present, present_counts);
    ClassWeightTable out;
    for (std::size_t k = 0; k < counts.size(); ++k)
        out.entries.push_back({ds.classes[k], counts[k], counts[k] > 0 ? computed.weight_of(ds.classes[k]) : 1.0});
    return out;
}

ordered_json config_json(const RunConfig& cfg) {
    return {{"floorplan", cfg.floorplan.empty() ? "<bundled>" : cfg.floorplan},
            {"sessions", cfg.sim.sessions},
            {"reads_per_tag_per_session", cfg.sim.reads_per_tag_per_session},
            {"p0", cfg.sim.model.p0_dbm},
            {"d0", cfg.sim.model.d0_m},
            {"eta", cfg.sim.model.eta},
            {"sigma", cfg.sim.model.sigma_db},
            {"subsample_target", cfg.subsample_target},
            {"test_fraction", cfg.test_fraction},
            {"criterion", to_string(cfg.criterion)},
            {"max_depth", cfg.max_depth},
            {"min_samples_split", cfg.min_samples_split},
            {"class_weight", to_string(cfg.class_weight)},
            {"weight_mode", to_string(cfg.weight_mode)},
            {"bootstrap_resamples", cfg.bootstrap_resamples},
            {"ci_level", cfg.ci_level},
            {"adjacent_cost", cfg.adjacent_cost},
            {"non_adjacent_cost", cfg.non_adjacent_cost}};
}

}  // namespace

std::string sha256_file(const fs::path& p) {
    const std::string data = read_text(p);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed for '" + p.string() + "'");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

GenerateResult run_generate(const RunConfig& cfg) {
    const Floorplan fp = resolve_floorplan(cfg);
    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;
    sim.threads = cfg.threads;
    const ReadSet reads = generate_reads(fp, sim);

    GenerateResult r;
    r.reads_csv = cfg.output_dir / "reads.csv";
    auto out = open_out(r.reads_csv);
    write_reads_csv(out, reads);
    r.read_count = reads.size();
    std::vector<std::size_t> per_zone(fp.zones().size(), 0);
    for (const ReadRecord& rec : reads) ++per_zone[*fp.zone_of_container(rec.container_id)];
    for (std::size_t k = 0; k < per_zone.size(); ++k) r.reads_per_zone.emplace_back(fp.zones()[k].id, per_zone[k]);
    return r;
}

TrainResult run_train(const RunConfig& cfg, const fs::path& reads_csv) {
    const Floorplan fp = resolve_floorplan(cfg);
    const std::vector<RawRead> raw = drop_nulls(read_csv_file(reads_csv));
    const LabeledDataset labeled = label_reads(to_read_set(raw), fp);
    if (labeled.empty()) throw ValidationError("train: no usable reads in '" + reads_csv.string() + "'");

    ClassWeightTable weights;
    if (cfg.weight_mode == WeightMode::PreSubsample) weights = weights_for(labeled, cfg.class_weight);
    const LabeledDataset sampled = stratified_subsample(labeled, cfg.subsample_target, cfg.seed);
    if (cfg.weight_mode == WeightMode::PostSubsample) weights = weights_for(sampled, cfg.class_weight);

    TrainResult r;
    r.split = session_split(sampled, cfg.test_fraction, cfg.seed);

    Hyperparams hp;
    hp.criterion = cfg.criterion;
    hp.max_depth = cfg.max_depth;
    hp.min_samples_split = cfg.min_samples_split;
    hp.class_weights = weights.weights();
    r.tree = fit(r.split.train, hp);
    r.weights = weights;

    const fs::path& dir = cfg.output_dir;
    r.model = dir / "model.json";
    r.split_manifest = dir / "split.json";
    r.weight_report = dir / "weights.csv";
    {
        auto out = open_out(r.model);
        out << save_tree(r.tree);
    }
    {
        auto out = open_out(dir / "rules.txt");
        out << export_rules(r.tree);
    }
    {
        auto out = open_out(r.weight_report);
        write_weight_report(out, weights);
    }
    {
        auto out = open_out(dir / "weights_figure.csv");
        write_weight_figure_csv(out, weights);
    }
    {
        auto out = open_out(dir / "train.csv");
        write_labeled_csv(out, r.split.train);
    }
    {
        auto out = open_out(dir / "test.csv");
        write_labeled_csv(out, r.split.test);
    }
    {
        auto out = open_out(dir / "zone_rssi_summary.csv");
        write_zone_rssi_summary_csv(out, sampled);
    }
    {
        auto out = open_out(dir / "rssi_histogram.csv");
        write_rssi_histogram_csv(out, sampled);
    }
    {
        auto out = open_out(dir / "reader_rssi_scatter.csv");
        write_reader_rssi_scatter_csv(out, sampled);
    }
    {
        ordered_json m;
        m["seed"] = cfg.seed;
        m["source_rows"] = labeled.size();
        m["subsample_target"] = cfg.subsample_target;
        m["test_fraction"] = cfg.test_fraction;
        m["train_sessions"] = r.split.train_sessions;
        m["test_sessions"] = r.split.test_sessions;
        m["train_rows"] = r.split.train.size();
        m["test_rows"] = r.split.test.size();
        m["train_csv"] = "train.csv";
        m["test_csv"] = "test.csv";
        auto out = open_out(r.split_manifest);
        out << m.dump(2) << '\n';
    }
    return r;
}

EvalReport run_evaluate(const RunConfig& cfg, const EvaluateInput& in) {
    const DecisionTree tree = load_tree(read_text(in.model));

    fs::path data = in.labeled_csv;
    if (!in.split_manifest.empty()) {
        if (in.fold != "test" && in.fold != "train")
            throw ValidationError("evaluate: fold must be 'test' or 'train', got '" + in.fold + "'");
        ordered_json m;
        try {
            m = ordered_json::parse(read_text(in.split_manifest));
            data = in.split_manifest.parent_path() / m.at(in.fold + "_csv").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("split manifest '" + in.split_manifest.string() + "': " + e.what());
        }
    }
    if (data.empty()) throw ValidationError("evaluate: need a split manifest or a labeled CSV");

    const std::vector<RawRead> raw = read_csv_file(data);
    for (const RawRead& r : raw)
        if (r.reader_ip && !r.zone) throw ValidationError("evaluate: '" + data.string() + "' has no Zone column values");
    const LabeledDataset ds = label_from_zone_column(drop_nulls(raw), tree.classes());
    if (ds.empty()) throw ValidationError("evaluate: no rows in '" + data.string() + "'");

    const Floorplan fp = resolve_floorplan(cfg);
    if (fp.zone_labels() != tree.classes())
        throw ValidationError("evaluate: model classes do not match the floorplan zones");
    const AdjacencyGraph adj = in.self_only_adjacency ? AdjacencyGraph::self_only(tree.classes()) : adjacency(fp);
    const CostMatrix costs = CostMatrix::from_adjacency(adjacency(fp), cfg.adjacent_cost, cfg.non_adjacent_cost);

    const std::vector<std::size_t> predicted = tree.predict(ds.rows);
    EvalOptions opt;
    opt.bootstrap_resamples = cfg.bootstrap_resamples;
    opt.level = cfg.ci_level;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    EvalReport report = evaluate(tree.classes(), ds.labels, predicted, adj, costs, opt);

    const fs::path& dir = cfg.output_dir;
    {
        auto out = open_out(dir / "report.json");
        out << report_json(report);
    }
    {
        auto out = open_out(dir / "confusion.csv");
        write_confusion_csv(out, report);
    }
    {
        auto out = open_out(dir / "confusion_heatmap.csv");
        write_confusion_heatmap_csv(out, report);
    }
    {
        auto out = open_out(dir / "per_class.csv");
        write_per_class_csv(out, report);
    }
    {
        auto out = open_out(dir / "aggregate.csv");
        write_aggregate_csv(out, report);
    }
    return report;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    PipelineResult result;
    const GenerateResult gen = run_generate(cfg);
    result.train = run_train(cfg, gen.reads_csv);
    EvaluateInput in;
    in.model = result.train.model;
    in.split_manifest = result.train.split_manifest;
    result.report = run_evaluate(cfg, in);

    const fs::path& dir = cfg.output_dir;
    auto artifact = [&](const std::string& name, const std::string& file) {
        return Artifact{name, file, sha256_file(dir / file)};
    };
    result.artifacts = {artifact("reads", "reads.csv"), artifact("weights", "weights.csv"),
                        artifact("split", "split.json"), artifact("model", "model.json"),
                        artifact("report", "report.json")};
    for (const char* f : {"rules.txt", "weights_figure.csv", "train.csv", "test.csv", "zone_rssi_summary.csv",
                          "rssi_histogram.csv", "reader_rssi_scatter.csv", "confusion.csv", "confusion_heatmap.csv",
                          "per_class.csv", "aggregate.csv"})
        result.auxiliary.push_back(artifact(f, f));

    ordered_json m;
    m["tool"] = "rfidzone";
    m["version"] = kToolVersion;
    m["tree_format_version"] = 1;
    m["seed"] = cfg.seed;
    m["config"] = config_json(cfg);
    auto list = [](const std::vector<Artifact>& as) {
        ordered_json a = ordered_json::array();
        for (const Artifact& x : as) a.push_back({{"name", x.name}, {"path", x.path.string()}, {"sha256", x.sha256}});
        return a;
    };
    m["artifacts"] = list(result.artifacts);
    m["auxiliary"] = list(result.auxiliary);
    m["summary"] = {{"accuracy", result.report.accuracy},
                    {"macro_f1", result.report.aggregates.macro_f1},
                    {"micro_f1", result.report.aggregates.micro_f1},
                    {"adjacency_accuracy", result.report.adjacency_accuracy},
                    {"risk", result.report.risk},
                    {"tree_depth", result.train.tree.depth()},
                    {"tree_nodes", result.train.tree.node_count()},
                    {"tree_leaves", result.train.tree.leaf_count()}};
    result.manifest = dir / "manifest.json";
    auto out = open_out(result.manifest);
    out << m.dump(2) << '\n';
    return result;
}

}  // namespace rfidzone
