#include "rfidzone/classweights.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "rfidzone/error.hpp"

namespace rfidzone {

std::size_t ClassWeightTable::total() const noexcept {
    std::size_t n = 0;
    for (const ClassWeight& e : entries) n += e.count;
    return n;
}

double ClassWeightTable::weight_of(const std::string& zone) const {
    for (const ClassWeight& e : entries)
        if (e.zone == zone) return e.weight;
    throw std::out_of_range("no class weight for zone '" + zone + "'");
}

std::vector<double> ClassWeightTable::weights() const {
    std::vector<double> w;
    w.reserve(entries.size());
    for (const ClassWeight& e : entries) w.push_back(e.weight);
    return w;
}

ClassWeightTable balanced_weights(const std::vector<std::string>& zones, const std::vector<std::size_t>& counts) {
    if (zones.size() != counts.size()) throw ValidationError("class weights: zones and counts differ in length");
    if (zones.empty()) throw ValidationError("class weights: no classes");
    double n = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) throw ValidationError("class weights: zone '" + zones[i] + "' has zero samples");
        n += static_cast<double>(counts[i]);
    }
    const double k = static_cast<double>(counts.size());
    ClassWeightTable t;
    for (std::size_t i = 0; i < counts.size(); ++i)
        t.entries.push_back({zones[i], counts[i], n / (k * static_cast<double>(counts[i]))});
    return t;
}

ClassWeightTable uniform_weights(const std::vector<std::string>& zones, const std::vector<std::size_t>& counts) {
    if (zones.size() != counts.size()) throw ValidationError("class weights: zones and counts differ in length");
    ClassWeightTable t;
    for (std::size_t i = 0; i < counts.size(); ++i) t.entries.push_back({zones[i], counts[i], 1.0});
    return t;
}

void write_weight_report(std::ostream& out, const ClassWeightTable& table) {
    std::vector<ClassWeight> rows = table.entries;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ClassWeight& a, const ClassWeight& b) { return a.weight < b.weight; });
    out << "Zone,Count,Weight\n";
    char w[32];
    for (const ClassWeight& r : rows) {
        std::snprintf(w, sizeof w, "%.2f", r.weight);
        out << r.zone << ',' << r.count << ',' << w << '\n';
    }
}

void write_weight_figure_csv(std::ostream& out, const ClassWeightTable& table) {
    out << "Zone,Count,Weight\n";
    char w[32];
    for (const ClassWeight& r : table.entries) {
        std::snprintf(w, sizeof w, "%.17g", r.weight);
        out << r.zone << ',' << r.count << ',' << w << '\n';
    }
}

}  // namespace rfidzone
