#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace mabm {

/// Default number of midpoint cells on (0,1).
inline constexpr std::size_t kDefaultCells = 2000;

/// Cell midpoints (i + 1/2) / cells of a uniform partition of (0, 1).
std::vector<double> midpoint_grid(std::size_t cells);

/// Probability density over the chartist fraction x, sampled at the midpoints
/// of a uniform partition of the open interval (0, 1).
///
/// Endpoints are never evaluated, so integrable edge singularities (the
/// bimodal Beta-type shapes) stay finite. The density integrates to one under
/// the midpoint rule on its own grid.
class DensityCurve {
public:
    /// Builds a curve from an unnormalized log-density given at the midpoints.
    /// Throws std::domain_error if any value is NaN or the midpoint integral is
    /// not finite and positive.
    static DensityCurve from_log_density(std::span<const double> log_density);

    std::span<const double> grid() const { return grid_; }
    std::span<const double> density() const { return density_; }
    std::size_t size() const { return density_.size(); }
    double cell_width() const { return 1.0 / static_cast<double>(density_.size()); }

    /// Natural log of the midpoint integral of the unnormalized input.
    double log_normalization() const { return log_normalization_; }

    /// Midpoint integral of the stored density (1 up to rounding).
    double integral() const;
    double mean() const;

    /// Probability mass in each of `bins` equal coarse bins. The cell count must
    /// be a multiple of `bins`.
    std::vector<double> bin_masses(std::size_t bins) const;

private:
    std::vector<double> grid_;
    std::vector<double> density_;
    double log_normalization_ = 0.0;
};

/// L1 distance of two curves on the same grid: sum |f - g| * h.
double l1_distance(const DensityCurve& a, const DensityCurve& b);

/// L1 distance of two probability vectors over the same bins.
double l1_distance(std::span<const double> a, std::span<const double> b);

/// Two-column CSV `x,density`.
void write_csv(std::ostream& out, const DensityCurve& curve);

}  // namespace mabm
