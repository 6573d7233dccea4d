#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfidzone {

struct ClassWeight {
    std::string zone;
    std::size_t count = 0;
    double weight = 1.0;
};

/// Balanced class weights w_k = n / (K * n_k), in the order the counts were given.
/// Full precision is kept; rounding happens only when reports are written.
struct ClassWeightTable {
    std::vector<ClassWeight> entries;

    std::size_t total() const noexcept;
    /// Weight of the named zone; throws std::out_of_range if absent.
    double weight_of(const std::string& zone) const;
    std::vector<double> weights() const;
};

/// Throws ValidationError if there are no classes or any count is zero.
ClassWeightTable balanced_weights(const std::vector<std::string>& zones, const std::vector<std::size_t>& counts);

/// Every class weighted 1.0.
ClassWeightTable uniform_weights(const std::vector<std::string>& zones, const std::vector<std::size_t>& counts);

/// Summary report: Zone,Count,Weight with weights to 2 decimals, sorted by
/// ascending weight.
void write_weight_report(std::ostream& out, const ClassWeightTable& table);

/// Bar + line data (count and full-precision weight per zone, canonical order).
void write_weight_figure_csv(std::ostream& out, const ClassWeightTable& table);

}  // namespace rfidzone
