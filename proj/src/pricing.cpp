#include "mabm/pricing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mabm {

PriceHistory::PriceHistory(std::size_t capacity) : buffer_(capacity, 0.0) {
    if (capacity == 0) throw std::invalid_argument("PriceHistory: capacity must be positive");
}

void PriceHistory::push(double price) {
    buffer_[head_] = price;
    head_ = (head_ + 1) % buffer_.size();
    if (size_ < buffer_.size()) ++size_;
}

double PriceHistory::current() const { return at_lag(0); }

double PriceHistory::at_lag(std::size_t lag) const {
    if (lag >= size_) throw std::out_of_range("PriceHistory: lag beyond buffered prices");
    const std::size_t cap = buffer_.size();
    return buffer_[(head_ + cap - 1 - lag) % cap];
}

double PriceHistory::moving_average(std::size_t m) const {
    if (m == 0) throw std::invalid_argument("moving_average: window must be positive");
    if (m > size_)
        throw std::out_of_range("moving_average: window " + std::to_string(m) + " exceeds " +
                                std::to_string(size_) + " buffered prices");
    double sum = 0.0;
    for (std::size_t lag = 0; lag < m; ++lag) sum += at_lag(lag);
    return sum / static_cast<double>(m);
}

void PriceHistory::trailing_means(std::span<double> out) const {
    const std::size_t cap = buffer_.size();
    std::size_t idx = (head_ + cap - 1) % cap;
    double sum = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (k >= size_) {
            out[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        sum += buffer_[idx];
        idx = (idx + cap - 1) % cap;
        out[k] = sum / static_cast<double>(k + 1);
    }
}

void PricingParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("pricing: 0 < gamma < 1 required");
    if (m < 2) throw std::invalid_argument("pricing: m >= 2 required");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("pricing: sigma >= 0 required");
    if (!std::isfinite(b)) throw std::invalid_argument("pricing: b must be finite");
    if (!std::isfinite(p_f)) throw std::invalid_argument("pricing: p_f must be finite");
}

double effective_potential(double d, double b, int m) {
    if (m < 2) throw std::invalid_argument("effective_potential: m >= 2 required");
    return -(b / (2.0 * (m - 1))) * d * d;
}

double chartist_step(const PriceHistory& hist, const PricingParams& params, Random& rng) {
    const double p = hist.current();
    const double pm = hist.moving_average(static_cast<std::size_t>(params.m));
    return p + (params.b / (params.m - 1)) * chartist_force(p, pm) + params.sigma * rng.normal();
}

double fundamentalist_step(double p, const PricingParams& params, Random& rng) {
    return p + params.gamma * (params.p_f - p) + params.sigma * rng.normal();
}

double excess_demand(double p, std::span<const double> means, std::size_t buffered, int n_c,
                     int n_f, std::span<const Agent> agents, const PricingParams& params,
                     WarmUp warm_up) {
    const int n = n_c + n_f;
    if (n_c < 0 || n_f < 0 || n == 0)
        throw std::invalid_argument("excess_demand: need n_c, n_f >= 0 and n_c + n_f > 0");
    double chart = 0.0;
    int seen = 0;
    for (const Agent& a : agents) {
        if (!a.active || a.strategy != Strategy::Chartist) continue;
        ++seen;
        const auto m = static_cast<std::size_t>(a.m);
        if (m > buffered || m > means.size()) {
            if (warm_up == WarmUp::Strict)
                throw std::out_of_range("excess_demand: history shorter than window " +
                                        std::to_string(a.m));
            continue;
        }
        chart += (a.b / (a.m - 1)) * chartist_force(p, means[m - 1]);
    }
    if (seen != n_c) throw std::invalid_argument("excess_demand: roster chartist count differs from n_c");
    const double nd = n;
    return (n_f / nd) * params.gamma * (params.p_f - p) + chart / nd;
}

double excess_demand(const PriceHistory& hist, int n_c, int n_f, std::span<const Agent> agents,
                     const PricingParams& params, WarmUp warm_up) {
    std::vector<double> means(hist.capacity());
    hist.trailing_means(means);
    return excess_demand(hist.current(), means, hist.size(), n_c, n_f, agents, params, warm_up);
}

double price_step(PriceHistory& hist, double ed, double sigma, Random& rng) {
    const double next = hist.current() + ed + sigma * rng.normal();
    hist.push(next);
    return next;
}

std::vector<double> chartist_path(const PricingParams& params, std::size_t steps, Random& rng) {
    params.validate();
    PriceHistory hist(static_cast<std::size_t>(params.m));
    hist.push(params.p_f);
    std::vector<double> path{params.p_f};
    path.reserve(steps + 1);
    for (std::size_t t = 0; t < steps; ++t) {
        double next;
        if (hist.size() < static_cast<std::size_t>(params.m)) {
            next = hist.current() + params.sigma * rng.normal();
        } else {
            next = chartist_step(hist, params, rng);
        }
        hist.push(next);
        path.push_back(next);
    }
    return path;
}

std::vector<double> fundamentalist_path(const PricingParams& params, double p0, std::size_t steps,
                                        Random& rng) {
    params.validate();
    std::vector<double> path{p0};
    path.reserve(steps + 1);
    for (std::size_t t = 0; t < steps; ++t) path.push_back(fundamentalist_step(path.back(), params, rng));
    return path;
}

}  // namespace mabm
