#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfidzone/floorplan.hpp"
#include "rfidzone/propagation.hpp"

namespace rfidzone {

inline constexpr std::size_t kFeatureCount = 3;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {"ReaderIP", "Antenna", "RSSI"};

/// x = [IP, ANT, RSSI]. The antenna index is used as an ordinal number.
struct FeatureRow {
    std::array<double, kFeatureCount> values{};

    static FeatureRow make(std::uint32_t ip_code, int antenna, double rssi) {
        return {{static_cast<double>(ip_code), static_cast<double>(antenna), rssi}};
    }
    std::uint32_t ip_code() const noexcept { return static_cast<std::uint32_t>(values[0]); }
    double antenna() const noexcept { return values[1]; }
    double rssi() const noexcept { return values[2]; }
    double operator[](std::size_t j) const noexcept { return values[j]; }

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Feature rows with zone labels. Labels index into `classes`, which holds the
/// zone labels in canonical order. The remaining parallel arrays carry the
/// provenance needed for leakage-safe splitting and for writing the rows back
/// out as labeled CSV.
struct LabeledDataset {
    std::vector<std::string> classes;
    std::vector<FeatureRow> rows;
    std::vector<std::size_t> labels;
    std::vector<std::string> tag_of_row;
    std::vector<std::uint32_t> session_of_row;
    std::vector<std::string> container_of_row;
    std::vector<std::uint64_t> timestamp_of_row;

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }

    /// Throws ValidationError if the parallel arrays disagree or a label is out of range.
    void validate() const;
    /// Rows at the given indices, in the given order.
    LabeledDataset subset(std::span<const std::size_t> indices) const;
    /// Row count per class, length classes.size().
    std::vector<std::size_t> class_counts() const;
    /// Distinct session ids, ascending.
    std::vector<std::uint32_t> sessions() const;
};

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::uint32_t> train_sessions;  // ascending
    std::vector<std::uint32_t> test_sessions;   // ascending
};

/// A CSV row where any of the model-relevant fields may be missing.
struct RawRead {
    std::optional<std::string> reader_ip;
    std::optional<int> antenna;
    std::optional<double> rssi;
    std::optional<std::string> tag_id;
    std::optional<std::string> container_id;
    std::optional<std::uint32_t> session_id;
    std::optional<std::uint64_t> timestamp;
    std::optional<std::string> zone;  // only in labeled CSV
};

/// o1 * 2^24 + o2 * 2^16 + o3 * 2^8 + o4. Throws ParseError on malformed input.
std::uint32_t encode_reader_ip(std::string_view ip);
std::string decode_reader_ip(std::uint32_t code);

/// Keeps records with reader ip, antenna, rssi and container id all present.
std::vector<RawRead> drop_nulls(std::span<const RawRead> reads);

/// Converts complete raw rows to ReadRecords. Throws ValidationError when a row
/// lacks a field drop_nulls does not filter on (tag, session, timestamp).
ReadSet to_read_set(std::span<const RawRead> reads);

/// Labels each read by the zone of its container.
LabeledDataset label_reads(const ReadSet& reads, const Floorplan& fp);

/// Labels each read by its Zone column. Throws ValidationError for rows without
/// a zone or with a zone outside `classes`.
LabeledDataset label_from_zone_column(std::span<const RawRead> reads, std::vector<std::string> classes);

/// Per-class quotas of target_n by largest remainder over target_n * n_k / n;
/// ties go to the class earlier in canonical order.
std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> counts, std::size_t target_n);

/// Stratified subsample without replacement. Selected rows keep their source order.
LabeledDataset stratified_subsample(const LabeledDataset& ds, std::size_t target_n, std::uint64_t seed);

/// Assigns whole sessions to the test fold, in seeded random order, until the
/// test row count first reaches test_fraction * n. Tags present in both halves
/// pull every session that contains them into train.
SplitPair session_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

/// Parses a read CSV. The header must be exactly the read header, optionally
/// followed by a Zone column. Empty fields are nulls.
std::vector<RawRead> read_reads_csv(std::istream& in);

/// Writes the dataset as read CSV with a trailing Zone column.
void write_labeled_csv(std::ostream& out, const LabeledDataset& ds);

}  // namespace rfidzone
