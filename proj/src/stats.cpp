#include "mabm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mabm/csv.hpp"

namespace mabm {

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
    if (max_lag == 0) throw std::invalid_argument("acf: max_lag must be positive");
    if (series.size() <= 3 * max_lag)
        throw std::invalid_argument("acf: series length must exceed 3 * max_lag");
    const double mu = mean_of(series);
    std::vector<double> c(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) c[i] = series[i] - mu;
    double c0 = 0.0;
    for (double v : c) c0 += v * v;
    if (!(c0 > 0.0)) throw std::domain_error("acf: zero variance");
    std::vector<double> out(max_lag);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t i = lag; i < c.size(); ++i) s += c[i] * c[i - lag];
        out[lag - 1] = std::clamp(s / c0, -1.0, 1.0);
    }
    return out;
}

std::vector<double> volatility_acf(std::span<const double> returns, std::size_t max_lag,
                                   VolatilityProxy proxy) {
    std::vector<double> v(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i)
        v[i] = proxy == VolatilityProxy::Squared ? returns[i] * returns[i] : std::abs(returns[i]);
    return acf(v, max_lag);
}

double excess_kurtosis(std::span<const double> returns) {
    if (returns.size() < 1000) throw std::invalid_argument("excess_kurtosis: at least 1000 values required");
    const double mu = mean_of(returns);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double r : returns) {
        const double d = (r - mu) * (r - mu);
        m2 += d;
        m4 += d * d;
    }
    const double n = static_cast<double>(returns.size());
    m2 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw std::domain_error("excess_kurtosis: zero variance");
    return m4 / (m2 * m2) - 3.0;
}

TailEstimate tail_exponent(std::span<const double> returns, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.2))
        throw std::invalid_argument("tail_exponent: tail_fraction in (0, 0.2] required");
    const auto k = static_cast<std::size_t>(std::floor(tail_fraction * returns.size()));
    if (k < 200) throw std::invalid_argument("tail_exponent: at least 200 tail values required");
    const double mu = mean_of(returns);
    std::vector<double> a(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) a[i] = std::abs(returns[i] - mu);
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
    const double threshold = a[k];
    if (!(threshold > 0.0)) throw std::domain_error("tail_exponent: degenerate tail");
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(a[i] / threshold);
    if (!(s > 0.0)) throw std::domain_error("tail_exponent: degenerate tail");
    TailEstimate t;
    t.k = k;
    t.alpha = static_cast<double>(k) / s;
    t.std_error = t.alpha / std::sqrt(static_cast<double>(k));
    return t;
}

std::map<std::size_t, double> aggregation_kurtosis(std::span<const double> returns,
                                                   std::span<const std::size_t> horizons) {
    if (horizons.empty()) throw std::invalid_argument("aggregation_kurtosis: no horizons");
    std::map<std::size_t, double> out;
    for (std::size_t h : horizons) {
        if (h == 0) throw std::invalid_argument("aggregation_kurtosis: horizon must be positive");
        const std::size_t blocks = returns.size() / h;
        if (blocks < 1000)
            throw std::invalid_argument("aggregation_kurtosis: horizon " + std::to_string(h) +
                                        " leaves fewer than 1000 sums");
        std::vector<double> sums(blocks, 0.0);
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t i = 0; i < h; ++i) sums[b] += returns[b * h + i];
        out[h] = excess_kurtosis(sums);
    }
    return out;
}

StatsReport analyze(std::span<const double> returns, std::size_t max_lag, double tail_fraction) {
    StatsReport r;
    r.n_samples = returns.size();
    r.acf_returns = acf(returns, max_lag);
    r.acf_squared = volatility_acf(returns, max_lag);
    r.excess_kurtosis = excess_kurtosis(returns);
    r.tail = tail_exponent(returns, tail_fraction);
    const std::size_t horizons[] = {1, 10, 100};
    r.aggregation_kurtosis = aggregation_kurtosis(returns, horizons);
    return r;
}

void write_report_csv(std::ostream& out, const StatsReport& report) {
    out << "key,value\n";
    out << "n_samples," << report.n_samples << '\n';
    out << "excess_kurtosis," << format_double(report.excess_kurtosis) << '\n';
    out << "tail_alpha," << format_double(report.tail.alpha) << '\n';
    out << "tail_alpha_stderr," << format_double(report.tail.std_error) << '\n';
    out << "tail_k," << report.tail.k << '\n';
    for (const auto& [h, k] : report.aggregation_kurtosis)
        out << "aggregation_kurtosis_h" << h << ',' << format_double(k) << '\n';
    for (std::size_t i = 0; i < report.acf_returns.size(); ++i)
        out << "acf_returns_" << i + 1 << ',' << format_double(report.acf_returns[i]) << '\n';
    for (std::size_t i = 0; i < report.acf_squared.size(); ++i)
        out << "acf_squared_" << i + 1 << ',' << format_double(report.acf_squared[i]) << '\n';
}

void write_acf_csv(std::ostream& out, std::span<const double> values) {
    out << "lag,acf\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << i + 1 << ',' << format_double(values[i]) << '\n';
}

}  // namespace mabm
