#include "rfidzone/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "rfidzone/error.hpp"
#include "rfidzone/rng.hpp"

namespace rfidzone {

void PropagationModel::validate() const {
    if (!std::isfinite(p0_dbm)) throw ValidationError("propagation model: p0 must be finite");
    if (!(d0_m > 0.0) || !std::isfinite(d0_m)) throw ValidationError("propagation model: d0 must be > 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("propagation model: eta must be > 0");
    if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db)) throw ValidationError("propagation model: sigma must be >= 0");
}

void SimConfig::validate() const {
    if (sessions < 1) throw ValidationError("sim config: sessions must be >= 1");
    if (reads_per_tag_per_session < 1) throw ValidationError("sim config: reads_per_tag_per_session must be >= 1");
    model.validate();
}

double rssi_at(const PropagationModel& model, double d, double noise_db) {
    if (!(d > 0.0)) throw DomainError("rssi_at: distance must be > 0");
    return model.p0_dbm - 10.0 * model.eta * std::log10(d / model.d0_m) + noise_db;
}

std::uint32_t session_of_tag(std::size_t global_tag_index, std::uint32_t sessions) noexcept {
    return static_cast<std::uint32_t>(global_tag_index % sessions);
}

namespace {

struct AntennaRef {
    const std::string* ip;
    const Antenna* antenna;
};

struct TagRef {
    std::size_t global_index;
    std::size_t container;
    const std::string* id;
};

}  // namespace

ReadSet generate_reads(const Floorplan& fp, const SimConfig& cfg) {
    cfg.validate();

    std::vector<AntennaRef> antennas;
    for (const Reader& r : fp.readers())
        for (const Antenna& a : r.antennas) antennas.push_back({&r.ip, &a});

    // Tags grouped by session, preserving floorplan (container, tag) order.
    std::vector<std::vector<TagRef>> by_session(cfg.sessions);
    std::size_t global = 0;
    for (std::size_t c = 0; c < fp.containers().size(); ++c)
        for (const std::string& t : fp.containers()[c].tag_ids) {
            by_session[session_of_tag(global, cfg.sessions)].push_back({global, c, &t});
            ++global;
        }

    const std::uint32_t reps = cfg.reads_per_tag_per_session;
    // Timestamps count candidate reads, so they do not depend on the detection floor.
    std::vector<std::uint64_t> tick_base(cfg.sessions + 1, 0);
    for (std::uint32_t s = 0; s < cfg.sessions; ++s)
        tick_base[s + 1] = tick_base[s] + by_session[s].size() * antennas.size() * reps;

    auto run_session = [&](std::uint32_t s, ReadSet& out) {
        std::uint64_t tick = tick_base[s];
        for (const TagRef& tag : by_session[s]) {
            const Container& cont = fp.containers()[tag.container];
            for (std::size_t a = 0; a < antennas.size(); ++a) {
                const Antenna& ant = *antennas[a].antenna;
                const double d = std::max(distance(cont.position, ant.position), kMinDistanceM);
                for (std::uint32_t rep = 0; rep < reps; ++rep, ++tick) {
                    StreamRng rng(cfg.seed, {s, tag.global_index, a, rep});
                    const double noise = cfg.model.sigma_db > 0.0 ? cfg.model.sigma_db * rng.normal() : 0.0;
                    const double rssi = rssi_at(cfg.model, d, noise);
                    if (rssi < ant.detection_floor_dbm) continue;
                    out.push_back({*antennas[a].ip, ant.index, rssi, *tag.id, cont.container_id, s, tick});
                }
            }
        }
    };

    std::vector<ReadSet> parts(cfg.sessions);
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, cfg.sessions));
    if (workers == 1) {
        for (std::uint32_t s = 0; s < cfg.sessions; ++s) run_session(s, parts[s]);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint32_t s = w; s < cfg.sessions; s += workers) run_session(s, parts[s]);
            });
        for (auto& t : pool) t.join();
    }

    ReadSet reads;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    reads.reserve(total);
    for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(reads));
    return reads;
}

void write_reads_csv(std::ostream& out, const ReadSet& reads) {
    out << kReadCsvHeader << '\n';
    char rssi[32];
    for (const ReadRecord& r : reads) {
        std::snprintf(rssi, sizeof rssi, "%.2f", r.rssi);
        out << r.reader_ip << ',' << r.antenna << ',' << rssi << ',' << r.tag_id << ',' << r.container_id << ','
            << r.session_id << ',' << r.timestamp << '\n';
    }
}

}  // namespace rfidzone
