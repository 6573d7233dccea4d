#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfidzone {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b) noexcept;

/// Axis-aligned rectangle in meters.
struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool contains(Point p) const noexcept {  // closed rectangle
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    bool contains_strictly(Point p) const noexcept {
        return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
    }
};

struct Zone {
    std::string id;  // "LabZoneA" ...
    Rect rect;
};

struct Antenna {
    int index = 1;
    Point position;
    double detection_floor_dbm = -80.0;
};

struct Reader {
    std::string ip;
    std::vector<Antenna> antennas;
};

struct Container {
    std::string container_id;
    Point position;
    std::vector<std::string> tag_ids;
};

/// Symmetric, reflexive zone relation indexed by canonical zone position.
class AdjacencyGraph {
public:
    AdjacencyGraph() = default;
    explicit AdjacencyGraph(std::vector<std::string> zones);

    /// Graph where every zone is adjacent only to itself.
    static AdjacencyGraph self_only(std::vector<std::string> zones);

    void connect(std::size_t a, std::size_t b);

    bool adjacent(std::size_t a, std::size_t b) const { return adj_.at(a * zones_.size() + b) != 0; }
    /// Neighbour count excluding the zone itself.
    std::size_t degree(std::size_t a) const;
    std::size_t size() const noexcept { return zones_.size(); }
    const std::vector<std::string>& zones() const noexcept { return zones_; }

private:
    std::vector<std::string> zones_;
    std::vector<unsigned char> adj_;
};

/// Zoned facility. Zones are kept in canonical (lexicographic label) order and
/// every container is resolved to its zone at construction; the object is
/// immutable afterwards.
class Floorplan {
public:
    /// Validates every invariant; throws ValidationError naming the violation.
    Floorplan(std::vector<Zone> zones, std::vector<Reader> readers, std::vector<Container> containers);

    const std::vector<Zone>& zones() const noexcept { return zones_; }
    const std::vector<Reader>& readers() const noexcept { return readers_; }
    const std::vector<Container>& containers() const noexcept { return containers_; }

    std::vector<std::string> zone_labels() const;
    std::optional<std::size_t> zone_index(std::string_view label) const;

    /// Zone index of containers()[i].
    std::size_t container_zone(std::size_t container) const { return container_zone_.at(container); }
    /// Lookup by container id; empty when unknown.
    std::optional<std::size_t> zone_of_container(std::string_view container_id) const;
    std::optional<std::size_t> container_index(std::string_view container_id) const;

    std::size_t antenna_count() const noexcept;
    std::size_t tag_count() const noexcept;

private:
    std::vector<Zone> zones_;
    std::vector<Reader> readers_;
    std::vector<Container> containers_;
    std::vector<std::size_t> container_zone_;
    std::map<std::string, std::size_t, std::less<>> container_lookup_;
};

/// Zone containing p. Points on shared borders resolve to the zone earliest in
/// canonical order.
std::optional<std::size_t> zone_of_point(const Floorplan& fp, Point p);

/// Zones sharing a boundary segment of positive length are adjacent; corner
/// contact is not. Every zone is adjacent to itself.
AdjacencyGraph adjacency(const Floorplan& fp);

/// Parses the JSON floorplan document. Throws ParseError on malformed JSON or
/// schema violations (including unknown fields) and ValidationError on
/// invariant violations.
Floorplan load_floorplan(std::string_view text);
Floorplan load_floorplan_file(const std::string& path);
std::string save_floorplan(const Floorplan& fp);

/// Bundled 12-zone facility: 3x4 grid of 6 m zones, 6 readers with 2 antennas
/// each, imbalanced container counts per zone.
const Floorplan& default_floorplan();

bool valid_dotted_quad(std::string_view ip) noexcept;

}  // namespace rfidzone
