#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfidzone/floorplan.hpp"

namespace rfidzone {

/// Log-distance path loss with Gaussian shadowing:
///   RSSI(d) = p0 - 10 * eta * log10(d / d0) + X_sigma
struct PropagationModel {
    double p0_dbm = -45.0;
    double d0_m = 1.0;
    double eta = 3.9;
    double sigma_db = 4.0;

    void validate() const;
};

struct SimConfig {
    std::uint32_t sessions = 20;
    std::uint32_t reads_per_tag_per_session = 5;
    std::uint64_t seed = 42;
    PropagationModel model;
    /// Worker threads used by generate_reads; the output does not depend on it.
    unsigned threads = 1;

    void validate() const;
};

/// Tag-antenna distances below this are clamped before evaluating the model.
inline constexpr double kMinDistanceM = 0.1;

struct ReadRecord {
    std::string reader_ip;
    int antenna = 0;
    double rssi = 0.0;
    std::string tag_id;
    std::string container_id;
    std::uint32_t session_id = 0;
    std::uint64_t timestamp = 0;

    friend bool operator==(const ReadRecord&, const ReadRecord&) = default;
};

using ReadSet = std::vector<ReadRecord>;

/// Exact model evaluation; throws DomainError when d <= 0.
double rssi_at(const PropagationModel& model, double d, double noise_db);

/// Session a tag is inventoried in. Tags are dealt round-robin over sessions in
/// floorplan order, so no tag is read in more than one session.
std::uint32_t session_of_tag(std::size_t global_tag_index, std::uint32_t sessions) noexcept;

/// Synthesizes reads. Order is (session, container, tag, reader, antenna,
/// repetition); every noise draw comes from a counter-based stream keyed by
/// (seed, session, tag, antenna, repetition).
ReadSet generate_reads(const Floorplan& fp, const SimConfig& cfg);

inline constexpr const char* kReadCsvHeader = "ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp";

void write_reads_csv(std::ostream& out, const ReadSet& reads);

}  // namespace rfidzone
