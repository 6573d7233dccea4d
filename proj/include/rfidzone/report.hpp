#pragma once

#include <iosfwd>
#include <string>

#include "rfidzone/dataset.hpp"
#include "rfidzone/metrics.hpp"

namespace rfidzone {

/// Structured-text (JSON) rendering of an evaluation.
std::string report_json(const EvalReport& r);

/// K x K with a header row and a leading label column.
void write_confusion_csv(std::ostream& out, const EvalReport& r);
void write_per_class_csv(std::ostream& out, const EvalReport& r);
/// Metric,Value,CI_Lower,CI_Upper,Level
void write_aggregate_csv(std::ostream& out, const EvalReport& r);
/// Long-form heatmap cells: True,Predicted,Count,RowShare.
void write_confusion_heatmap_csv(std::ostream& out, const EvalReport& r);

/// Box-plot feed: per-zone five-number summary plus mean and standard deviation.
void write_zone_rssi_summary_csv(std::ostream& out, const LabeledDataset& ds);
/// Histogram feed: per-zone counts over fixed-width RSSI bins.
void write_rssi_histogram_csv(std::ostream& out, const LabeledDataset& ds, double bin_width_db = 2.0);
/// Scatter feed: ReaderIP,Antenna,RSSI,Zone per row.
void write_reader_rssi_scatter_csv(std::ostream& out, const LabeledDataset& ds);

}  // namespace rfidzone
