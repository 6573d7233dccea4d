#include "rfidzone/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <json.hpp>

namespace rfidzone {

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string report_json(const EvalReport& r) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["n"] = r.n;
    doc["classes"] = r.classes;
    doc["accuracy"] = r.accuracy;
    doc["macro_f1"] = r.aggregates.macro_f1;
    doc["micro_precision"] = r.aggregates.micro_precision;
    doc["micro_recall"] = r.aggregates.micro_recall;
    doc["micro_f1"] = r.aggregates.micro_f1;
    doc["adjacency_accuracy"] = r.adjacency_accuracy;
    doc["risk"] = r.risk;
    ordered_json per_class = ordered_json::array();
    for (std::size_t k = 0; k < r.classes.size(); ++k) {
        const ClassScores& s = r.per_class[k];
        per_class.push_back({{"zone", r.classes[k]},
                             {"support", s.support},
                             {"precision", s.precision},
                             {"recall", s.recall},
                             {"f1", s.f1}});
    }
    doc["per_class"] = per_class;
    ordered_json matrix = ordered_json::array();
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < r.confusion.size(); ++j) row.push_back(r.confusion(i, j));
        matrix.push_back(row);
    }
    doc["confusion"] = matrix;
    ordered_json intervals = ordered_json::object();
    for (const auto& [name, iv] : r.intervals)
        intervals[name] = {{"point", iv.point}, {"lower", iv.lower}, {"upper", iv.upper}, {"level", iv.level}};
    doc["bootstrap"] = intervals;
    return doc.dump(2) + "\n";
}

void write_confusion_csv(std::ostream& out, const EvalReport& r) {
    out << "Actual\\Predicted";
    for (const std::string& z : r.classes) out << ',' << z;
    out << '\n';
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
        out << r.classes[i];
        for (std::size_t j = 0; j < r.classes.size(); ++j) out << ',' << r.confusion(i, j);
        out << '\n';
    }
}

void write_per_class_csv(std::ostream& out, const EvalReport& r) {
    out << "Zone,Support,Precision,Recall,F1\n";
    for (std::size_t k = 0; k < r.classes.size(); ++k) {
        const ClassScores& s = r.per_class[k];
        out << r.classes[k] << ',' << s.support << ',' << fixed(s.precision) << ',' << fixed(s.recall) << ','
            << fixed(s.f1) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const EvalReport& r) {
    out << "Metric,Value,CI_Lower,CI_Upper,Level\n";
    auto row = [&](const std::string& name, double value) {
        out << name << ',' << fixed(value);
        auto it = std::find_if(r.intervals.begin(), r.intervals.end(), [&](const auto& p) { return p.first == name; });
        if (it != r.intervals.end())
            out << ',' << fixed(it->second.lower) << ',' << fixed(it->second.upper) << ',' << fixed(it->second.level, 2);
        else
            out << ",,,";
        out << '\n';
    };
    row("accuracy", r.accuracy);
    row("macro_f1", r.aggregates.macro_f1);
    row("micro_precision", r.aggregates.micro_precision);
    row("micro_recall", r.aggregates.micro_recall);
    row("micro_f1", r.aggregates.micro_f1);
    row("adjacency_accuracy", r.adjacency_accuracy);
    row("risk", r.risk);
}

void write_confusion_heatmap_csv(std::ostream& out, const EvalReport& r) {
    out << "True,Predicted,Count,RowShare\n";
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
        const auto support = r.confusion.row_sum(i);
        for (std::size_t j = 0; j < r.classes.size(); ++j) {
            const auto c = r.confusion(i, j);
            const double share = support > 0 ? static_cast<double>(c) / static_cast<double>(support) : 0.0;
            out << r.classes[i] << ',' << r.classes[j] << ',' << c << ',' << fixed(share) << '\n';
        }
    }
}

void write_zone_rssi_summary_csv(std::ostream& out, const LabeledDataset& ds) {
    std::vector<std::vector<double>> by_zone(ds.classes.size());
    for (std::size_t i = 0; i < ds.size(); ++i) by_zone[ds.labels[i]].push_back(ds.rows[i].rssi());
    out << "Zone,Count,Min,Q1,Median,Q3,Max,Mean,StdDev\n";
    for (std::size_t k = 0; k < ds.classes.size(); ++k) {
        auto& v = by_zone[k];
        out << ds.classes[k] << ',' << v.size();
        if (v.empty()) {
            out << ",,,,,,,\n";
            continue;
        }
        std::sort(v.begin(), v.end());
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out << ',' << fixed(v.front(), 2) << ',' << fixed(quantile_sorted(v, 0.25), 2) << ','
            << fixed(quantile_sorted(v, 0.5), 2) << ',' << fixed(quantile_sorted(v, 0.75), 2) << ','
            << fixed(v.back(), 2) << ',' << fixed(mean, 4) << ',' << fixed(sd, 4) << '\n';
    }
}

void write_rssi_histogram_csv(std::ostream& out, const LabeledDataset& ds, double bin_width_db) {
    std::map<std::pair<std::size_t, long long>, std::size_t> bins;
    for (std::size_t i = 0; i < ds.size(); ++i)
        ++bins[{ds.labels[i], static_cast<long long>(std::floor(ds.rows[i].rssi() / bin_width_db))}];
    out << "Zone,BinLow,BinHigh,Count\n";
    for (const auto& [key, count] : bins) {
        const double lo = static_cast<double>(key.second) * bin_width_db;
        out << ds.classes[key.first] << ',' << fixed(lo, 2) << ',' << fixed(lo + bin_width_db, 2) << ',' << count
            << '\n';
    }
}

void write_reader_rssi_scatter_csv(std::ostream& out, const LabeledDataset& ds) {
    out << "ReaderIP,Antenna,RSSI,Zone\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const FeatureRow& r = ds.rows[i];
        out << decode_reader_ip(r.ip_code()) << ',' << static_cast<long long>(r.antenna()) << ',' << fixed(r.rssi(), 2)
            << ',' << ds.classes[ds.labels[i]] << '\n';
    }
}

}  // namespace rfidzone
