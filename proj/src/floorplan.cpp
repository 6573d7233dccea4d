#include "rfidzone/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rfidzone/dataset.hpp"
#include "rfidzone/error.hpp"

namespace rfidzone {

using nlohmann::json;

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool valid_dotted_quad(std::string_view ip) noexcept {
    try {
        (void)encode_reader_ip(ip);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// AdjacencyGraph

AdjacencyGraph::AdjacencyGraph(std::vector<std::string> zones)
    : zones_(std::move(zones)), adj_(zones_.size() * zones_.size(), 0) {
    for (std::size_t i = 0; i < zones_.size(); ++i) adj_[i * zones_.size() + i] = 1;
}

AdjacencyGraph AdjacencyGraph::self_only(std::vector<std::string> zones) {
    return AdjacencyGraph(std::move(zones));
}

void AdjacencyGraph::connect(std::size_t a, std::size_t b) {
    const std::size_t k = zones_.size();
    if (a >= k || b >= k) throw std::out_of_range("AdjacencyGraph::connect: zone index out of range");
    adj_[a * k + b] = 1;
    adj_[b * k + a] = 1;
}

std::size_t AdjacencyGraph::degree(std::size_t a) const {
    std::size_t d = 0;
    for (std::size_t b = 0; b < zones_.size(); ++b)
        if (b != a && adjacent(a, b)) ++d;
    return d;
}

// ---------------------------------------------------------------------------
// Floorplan

namespace {

bool interiors_overlap(const Rect& a, const Rect& b) noexcept {
    return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

bool finite_point(Point p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

Floorplan::Floorplan(std::vector<Zone> zones, std::vector<Reader> readers, std::vector<Container> containers)
    : zones_(std::move(zones)), readers_(std::move(readers)), containers_(std::move(containers)) {
    if (zones_.empty()) throw ValidationError("floorplan has no zones");
    std::sort(zones_.begin(), zones_.end(), [](const Zone& a, const Zone& b) { return a.id < b.id; });

    for (std::size_t i = 0; i < zones_.size(); ++i) {
        const Zone& z = zones_[i];
        if (z.id.empty()) throw ValidationError("zone with empty label");
        if (i > 0 && zones_[i - 1].id == z.id) throw ValidationError("duplicate zone label '" + z.id + "'");
        const Rect& r = z.rect;
        if (!(std::isfinite(r.x_min) && std::isfinite(r.x_max) && std::isfinite(r.y_min) && std::isfinite(r.y_max)))
            throw ValidationError("zone '" + z.id + "' has non-finite bounds");
        if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max))
            throw ValidationError("zone '" + z.id + "' requires x_min < x_max and y_min < y_max");
    }
    for (std::size_t i = 0; i < zones_.size(); ++i)
        for (std::size_t j = i + 1; j < zones_.size(); ++j)
            if (interiors_overlap(zones_[i].rect, zones_[j].rect))
                throw ValidationError("overlapping zones '" + zones_[i].id + "' and '" + zones_[j].id + "'");

    Rect bbox = zones_.front().rect;
    for (const Zone& z : zones_) {
        bbox.x_min = std::min(bbox.x_min, z.rect.x_min);
        bbox.y_min = std::min(bbox.y_min, z.rect.y_min);
        bbox.x_max = std::max(bbox.x_max, z.rect.x_max);
        bbox.y_max = std::max(bbox.y_max, z.rect.y_max);
    }

    std::set<std::string> ips;
    std::size_t antennas = 0;
    for (const Reader& rd : readers_) {
        if (!valid_dotted_quad(rd.ip)) throw ValidationError("reader ip '" + rd.ip + "' is not a valid dotted quad");
        if (!ips.insert(rd.ip).second) throw ValidationError("duplicate reader ip '" + rd.ip + "'");
        std::set<int> indices;
        for (const Antenna& a : rd.antennas) {
            if (a.index < 1) throw ValidationError("reader " + rd.ip + ": antenna index must be >= 1");
            if (!indices.insert(a.index).second)
                throw ValidationError("reader " + rd.ip + ": duplicate antenna index " + std::to_string(a.index));
            if (!finite_point(a.position) || !bbox.contains(a.position))
                throw ValidationError("reader " + rd.ip + ": antenna " + std::to_string(a.index) +
                                      " lies outside the floorplan bounding box");
            if (std::isnan(a.detection_floor_dbm))
                throw ValidationError("reader " + rd.ip + ": antenna detection floor is NaN");
            ++antennas;
        }
    }
    if (antennas == 0) throw ValidationError("floorplan has no antennas");
    if (containers_.empty()) throw ValidationError("floorplan has no containers");

    std::set<std::string> tags;
    container_zone_.reserve(containers_.size());
    for (const Container& c : containers_) {
        if (c.container_id.empty()) throw ValidationError("container with empty id");
        if (!container_lookup_.emplace(c.container_id, container_zone_.size()).second)
            throw ValidationError("duplicate container id '" + c.container_id + "'");
        if (c.tag_ids.empty()) throw ValidationError("container '" + c.container_id + "' has no tags");
        for (const std::string& t : c.tag_ids) {
            if (t.empty()) throw ValidationError("container '" + c.container_id + "' has an empty tag id");
            if (!tags.insert(t).second) throw ValidationError("duplicate tag id '" + t + "'");
        }
        std::optional<std::size_t> zone;
        std::size_t hits = 0;
        if (finite_point(c.position)) {
            for (std::size_t i = 0; i < zones_.size(); ++i) {
                if (zones_[i].rect.contains_strictly(c.position)) {
                    zone = i;
                    ++hits;
                }
            }
        }
        if (hits == 0) throw ValidationError("container outside all zones: '" + c.container_id + "'");
        container_zone_.push_back(*zone);
    }
}

std::vector<std::string> Floorplan::zone_labels() const {
    std::vector<std::string> out;
    out.reserve(zones_.size());
    for (const Zone& z : zones_) out.push_back(z.id);
    return out;
}

std::optional<std::size_t> Floorplan::zone_index(std::string_view label) const {
    auto it = std::lower_bound(zones_.begin(), zones_.end(), label,
                               [](const Zone& z, std::string_view l) { return z.id < l; });
    if (it == zones_.end() || it->id != label) return std::nullopt;
    return static_cast<std::size_t>(it - zones_.begin());
}

std::optional<std::size_t> Floorplan::container_index(std::string_view container_id) const {
    auto it = container_lookup_.find(container_id);
    if (it == container_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Floorplan::zone_of_container(std::string_view container_id) const {
    if (auto i = container_index(container_id)) return container_zone_[*i];
    return std::nullopt;
}

std::size_t Floorplan::antenna_count() const noexcept {
    std::size_t n = 0;
    for (const Reader& r : readers_) n += r.antennas.size();
    return n;
}

std::size_t Floorplan::tag_count() const noexcept {
    std::size_t n = 0;
    for (const Container& c : containers_) n += c.tag_ids.size();
    return n;
}

std::optional<std::size_t> zone_of_point(const Floorplan& fp, Point p) {
    // Zones are stored in canonical order, so the first hit wins border ties.
    const auto& zones = fp.zones();
    for (std::size_t i = 0; i < zones.size(); ++i)
        if (zones[i].rect.contains(p)) return i;
    return std::nullopt;
}

AdjacencyGraph adjacency(const Floorplan& fp) {
    AdjacencyGraph g(fp.zone_labels());
    const auto& zones = fp.zones();
    auto overlap_len = [](double a0, double a1, double b0, double b1) {
        return std::min(a1, b1) - std::max(a0, b0);
    };
    for (std::size_t i = 0; i < zones.size(); ++i) {
        for (std::size_t j = i + 1; j < zones.size(); ++j) {
            const Rect& a = zones[i].rect;
            const Rect& b = zones[j].rect;
            const bool vertical_edge = (a.x_max == b.x_min || b.x_max == a.x_min) &&
                                       overlap_len(a.y_min, a.y_max, b.y_min, b.y_max) > 0.0;
            const bool horizontal_edge = (a.y_max == b.y_min || b.y_max == a.y_min) &&
                                         overlap_len(a.x_min, a.x_max, b.x_min, b.x_max) > 0.0;
            if (vertical_edge || horizontal_edge) g.connect(i, j);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
    }
    for (const char* a : allowed)
        if (!obj.contains(a)) throw ParseError(where + ": missing field '" + std::string(a) + "'");
}

double number(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::string string(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_array()) throw ParseError(where + ": field '" + key + "' must be an array");
    return v;
}

}  // namespace

Floorplan load_floorplan(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("floorplan: malformed document: ") + e.what());
    }
    require_keys(doc, {"zones", "readers", "containers"}, "floorplan");

    std::vector<Zone> zones;
    for (const json& z : array(doc, "zones", "floorplan")) {
        const std::string where = "zones[" + std::to_string(zones.size()) + "]";
        require_keys(z, {"label", "x_min", "y_min", "x_max", "y_max"}, where);
        zones.push_back({string(z, "label", where),
                         {number(z, "x_min", where), number(z, "y_min", where), number(z, "x_max", where),
                          number(z, "y_max", where)}});
    }

    std::vector<Reader> readers;
    for (const json& r : array(doc, "readers", "floorplan")) {
        const std::string where = "readers[" + std::to_string(readers.size()) + "]";
        require_keys(r, {"ip", "antennas"}, where);
        Reader reader{string(r, "ip", where), {}};
        for (const json& a : array(r, "antennas", where)) {
            const std::string aw = where + ".antennas[" + std::to_string(reader.antennas.size()) + "]";
            require_keys(a, {"index", "x", "y", "detection_floor_dbm"}, aw);
            if (!a.at("index").is_number_integer()) throw ParseError(aw + ": field 'index' must be an integer");
            reader.antennas.push_back(
                {a.at("index").get<int>(), {number(a, "x", aw), number(a, "y", aw)}, number(a, "detection_floor_dbm", aw)});
        }
        readers.push_back(std::move(reader));
    }

    std::vector<Container> containers;
    for (const json& c : array(doc, "containers", "floorplan")) {
        const std::string where = "containers[" + std::to_string(containers.size()) + "]";
        require_keys(c, {"container_id", "x", "y", "tag_ids"}, where);
        Container container{string(c, "container_id", where), {number(c, "x", where), number(c, "y", where)}, {}};
        for (const json& t : array(c, "tag_ids", where)) {
            if (!t.is_string()) throw ParseError(where + ": tag ids must be strings");
            container.tag_ids.push_back(t.get<std::string>());
        }
        containers.push_back(std::move(container));
    }
    return Floorplan(std::move(zones), std::move(readers), std::move(containers));
}

Floorplan load_floorplan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read floorplan '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_floorplan(ss.str());
}

std::string save_floorplan(const Floorplan& fp) {
    json doc;
    doc["zones"] = json::array();
    for (const Zone& z : fp.zones())
        doc["zones"].push_back(
            {{"label", z.id}, {"x_min", z.rect.x_min}, {"y_min", z.rect.y_min}, {"x_max", z.rect.x_max}, {"y_max", z.rect.y_max}});
    doc["readers"] = json::array();
    for (const Reader& r : fp.readers()) {
        json ants = json::array();
        for (const Antenna& a : r.antennas)
            ants.push_back({{"index", a.index}, {"x", a.position.x}, {"y", a.position.y},
                            {"detection_floor_dbm", a.detection_floor_dbm}});
        doc["readers"].push_back({{"ip", r.ip}, {"antennas", ants}});
    }
    doc["containers"] = json::array();
    for (const Container& c : fp.containers())
        doc["containers"].push_back(
            {{"container_id", c.container_id}, {"x", c.position.x}, {"y", c.position.y}, {"tag_ids", c.tag_ids}});
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Bundled facility

namespace {

constexpr double kCell = 6.0;
constexpr int kCols = 4;
constexpr int kRows = 3;
constexpr int kTagsPerContainer = 10;

// Containers per zone, row-major from LabZoneA. LabZoneC is the sparsest.
constexpr int kContainersPerZone[kRows * kCols] = {6, 6, 3, 5, 8, 8, 9, 7, 7, 8, 9, 7};

struct AntennaSite {
    const char* ip;
    int index;
    double x, y;
};

constexpr AntennaSite kAntennaSites[] = {
    {"192.168.1.10", 1, 3.0, 3.0},   {"192.168.1.10", 2, 9.0, 3.0},
    {"192.168.1.11", 1, 21.0, 3.0},  {"192.168.1.11", 2, 3.0, 9.0},
    {"192.168.1.12", 1, 9.0, 9.0},   {"192.168.1.12", 2, 15.0, 9.0},
    {"192.168.1.13", 1, 21.0, 9.0},  {"192.168.1.13", 2, 3.0, 15.0},
    {"192.168.1.14", 1, 9.0, 15.0},  {"192.168.1.14", 2, 15.0, 15.0},
    {"192.168.1.15", 1, 21.0, 15.0}, {"192.168.1.15", 2, 12.0, 18.0},
};

Floorplan build_default() {
    std::vector<Zone> zones;
    std::vector<Container> containers;
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const int z = r * kCols + c;
            const std::string label = std::string("LabZone") + static_cast<char>('A' + z);
            const Rect rect{c * kCell, r * kCell, (c + 1) * kCell, (r + 1) * kCell};
            zones.push_back({label, rect});

            const int n = kContainersPerZone[z];
            const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
            const int rows = (n + cols - 1) / cols;
            for (int k = 0; k < n; ++k) {
                const double fx = (k % cols + 0.5) / cols;
                const double fy = (k / cols + 0.5) / rows;
                char id[32];
                std::snprintf(id, sizeof id, "CNT-%c%02d", 'A' + z, k + 1);
                Container cont{id, {rect.x_min + 0.5 + fx * (kCell - 1.0), rect.y_min + 0.5 + fy * (kCell - 1.0)}, {}};
                for (int t = 0; t < kTagsPerContainer; ++t) {
                    char tag[48];
                    std::snprintf(tag, sizeof tag, "TAG-%c%02d-%02d", 'A' + z, k + 1, t + 1);
                    cont.tag_ids.emplace_back(tag);
                }
                containers.push_back(std::move(cont));
            }
        }
    }

    std::vector<Reader> readers;
    for (const AntennaSite& s : kAntennaSites) {
        if (readers.empty() || readers.back().ip != s.ip) readers.push_back({s.ip, {}});
        readers.back().antennas.push_back({s.index, {s.x, s.y}, -80.0});
    }
    return Floorplan(std::move(zones), std::move(readers), std::move(containers));
}

}  // namespace

const Floorplan& default_floorplan() {
    static const Floorplan fp = build_default();
    return fp;
}

}  // namespace rfidzone
