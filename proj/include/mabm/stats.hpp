#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace mabm {

/// Sample autocorrelation at lags 1..max_lag (biased estimator: every lag is
/// normalized by the full-sample variance). Requires size > 3 * max_lag and a
/// non-constant series.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

enum class VolatilityProxy { Squared, Absolute };

/// acf of squared (default) or absolute returns.
std::vector<double> volatility_acf(std::span<const double> returns, std::size_t max_lag,
                                   VolatilityProxy proxy = VolatilityProxy::Squared);

/// Fourth standardized moment minus 3. Requires at least 1000 values.
double excess_kurtosis(std::span<const double> returns);

struct TailEstimate {
    double alpha = 0.0;
    double std_error = 0.0;
    std::size_t k = 0;
};

/// Hill estimator on the largest tail_fraction of |r - mean(r)|.
/// Requires tail_fraction in (0, 0.2] and at least 200 tail values.
TailEstimate tail_exponent(std::span<const double> returns, double tail_fraction = 0.05);

/// Excess kurtosis of non-overlapping sums of h consecutive returns, per
/// horizon. The largest horizon must leave at least 1000 sums.
std::map<std::size_t, double> aggregation_kurtosis(std::span<const double> returns,
                                                   std::span<const std::size_t> horizons);

struct StatsReport {
    std::vector<double> acf_returns;
    std::vector<double> acf_squared;
    double excess_kurtosis = 0.0;
    TailEstimate tail;
    std::map<std::size_t, double> aggregation_kurtosis;
    std::size_t n_samples = 0;
};

/// Full report with horizons {1, 10, 100}.
StatsReport analyze(std::span<const double> returns, std::size_t max_lag = 50,
                    double tail_fraction = 0.05);

/// Key-value CSV `key,value`.
void write_report_csv(std::ostream& out, const StatsReport& report);

/// CSV `lag,acf`.
void write_acf_csv(std::ostream& out, std::span<const double> values);

}  // namespace mabm
