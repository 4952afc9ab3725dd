#include "mabm/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mabm/csv.hpp"

namespace mabm {

std::vector<double> midpoint_grid(std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("midpoint_grid: cells must be positive");
    std::vector<double> grid(cells);
    const double h = 1.0 / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) grid[i] = (static_cast<double>(i) + 0.5) * h;
    return grid;
}

DensityCurve DensityCurve::from_log_density(std::span<const double> log_density) {
    if (log_density.empty()) throw std::invalid_argument("DensityCurve: empty grid");
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : log_density) {
        if (std::isnan(v)) throw std::domain_error("DensityCurve: NaN in log-density");
        peak = std::max(peak, v);
    }
    if (!std::isfinite(peak)) throw std::domain_error("DensityCurve: log-density is not finite");

    DensityCurve curve;
    curve.grid_ = midpoint_grid(log_density.size());
    curve.density_.resize(log_density.size());
    const double h = curve.cell_width();
    double sum = 0.0;
    for (std::size_t i = 0; i < log_density.size(); ++i) {
        curve.density_[i] = std::exp(log_density[i] - peak);
        sum += curve.density_[i];
    }
    const double scaled = sum * h;
    if (!(scaled > 0.0) || !std::isfinite(scaled))
        throw std::domain_error("DensityCurve: normalization integral diverges");
    for (double& d : curve.density_) d /= scaled;
    curve.log_normalization_ = peak + std::log(scaled);
    return curve;
}

double DensityCurve::integral() const {
    double sum = 0.0;
    for (double d : density_) sum += d;
    return sum * cell_width();
}

double DensityCurve::mean() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < density_.size(); ++i) sum += grid_[i] * density_[i];
    return sum * cell_width();
}

std::vector<double> DensityCurve::bin_masses(std::size_t bins) const {
    if (bins == 0 || density_.size() % bins != 0)
        throw std::invalid_argument("bin_masses: cell count must be a multiple of the bin count");
    const std::size_t per_bin = density_.size() / bins;
    std::vector<double> masses(bins, 0.0);
    for (std::size_t i = 0; i < density_.size(); ++i) masses[i / per_bin] += density_[i];
    for (double& m : masses) m *= cell_width();
    return masses;
}

double l1_distance(const DensityCurve& a, const DensityCurve& b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: grids differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.density()[i] - b.density()[i]);
    return sum * a.cell_width();
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: bin counts differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum;
}

void write_csv(std::ostream& out, const DensityCurve& curve) {
    out << "x,density\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out << format_double(curve.grid()[i]) << ',' << format_double(curve.density()[i]) << '\n';
}

}  // namespace mabm
