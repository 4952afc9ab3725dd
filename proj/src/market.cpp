#include "mabm/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mabm/csv.hpp"

namespace mabm {

void MarketConfig::validate() const {
    pricing.validate();
    if (!(exp_cap >= 1.0)) throw std::invalid_argument("market: exp_cap >= 1 required");
    if (initial_chartists < 0 || initial_chartists > herding.n_agents())
        throw std::invalid_argument("market: 0 <= initial_chartists <= n required");
    if (heterogeneity) {
        const auto& h = *heterogeneity;
        if (h.m_min < 2 || h.m_max < h.m_min)
            throw std::invalid_argument("market: 2 <= m_min <= m_max required");
        if (!(h.b_min >= 0.0) || !(h.b_max >= h.b_min) || !std::isfinite(h.b_max))
            throw std::invalid_argument("market: 0 <= b_min <= b_max required");
    } else if (!(pricing.b >= 0.0)) {
        throw std::invalid_argument("market: chartist strength b >= 0 required");
    }
}

int MarketConfig::max_window() const {
    return heterogeneity ? std::max(heterogeneity->m_max, pricing.m) : pricing.m;
}

MarketState initial_state(const MarketConfig& config, Random& rng) {
    config.validate();
    MarketState state;
    const int n = config.herding.n_agents();
    state.agents.resize(static_cast<std::size_t>(n));
    for (auto& a : state.agents) {
        if (config.heterogeneity) {
            const auto& h = *config.heterogeneity;
            a.m = static_cast<int>(rng.uniform_int(h.m_min, h.m_max));
            a.b = rng.uniform_real(h.b_min, h.b_max);
        } else {
            a.m = config.pricing.m;
            a.b = config.pricing.b;
        }
    }
    for (int i = 0; i < config.initial_chartists; ++i)
        state.agents[static_cast<std::size_t>(i)].strategy = Strategy::Chartist;
    state.hist = PriceHistory(static_cast<std::size_t>(config.max_window()));
    state.hist.push(config.pricing.p_f);
    state.n_active = n;
    state.n_chartists = config.initial_chartists;
    return state;
}

namespace {

struct StepRates {
    double base_to_f;  // before the price factor
    double base_to_c;
};

StepRates base_rates(const MarketState& state, const MarketConfig& config) {
    const auto& h = config.herding;
    const double n = state.n_active;
    const double scale = static_cast<double>(h.n_agents()) / n;
    const double beta = h.beta() * scale;
    const double nc = state.n_chartists;
    const double nf = n - nc;
    return {beta * (1.0 + h.delta()) * (h.k2() * scale + nf / n),
            beta * (1.0 - h.delta()) * (h.k1() * scale + nc / n)};
}

double fundamental_factor(double p, const MarketConfig& config) {
    return std::min(std::exp(config.pricing.gamma * std::abs(p - config.pricing.p_f)), config.exp_cap);
}

double chartist_factor(const Agent& a, double p, std::span<const double> means, std::size_t buffered,
                       const MarketConfig& config) {
    const auto m = static_cast<std::size_t>(a.m);
    if (m > buffered) return 1.0;
    const double signal = (a.b / (a.m - 1)) * std::abs(chartist_force(p, means[m - 1]));
    return std::min(std::exp(signal), config.exp_cap);
}

}  // namespace

SwitchProbabilities transition_probabilities(const Agent& agent, const MarketState& state,
                                             const MarketConfig& config) {
    if (!agent.active || state.n_active == 0) return {};
    const StepRates base = base_rates(state, config);
    double f_factor = 1.0;
    double c_factor = 1.0;
    if (config.use_price_terms) {
        std::vector<double> means(state.hist.capacity());
        state.hist.trailing_means(means);
        const double p = state.hist.current();
        f_factor = fundamental_factor(p, config);
        c_factor = chartist_factor(agent, p, means, state.hist.size(), config);
    }
    return {std::min(base.base_to_f * f_factor, 1.0), std::min(base.base_to_c * c_factor, 1.0)};
}

namespace {

/// Bernoulli(q) trials skipped before the next success.
std::int64_t geometric_gap(double q, Random& rng) {
    if (q >= 1.0) return 0;
    if (!(q > 0.0)) return std::numeric_limits<std::int64_t>::max();
    const double g = std::floor(std::log1p(-rng.uniform()) / std::log1p(-q));
    return g < 9.0e18 ? static_cast<std::int64_t>(g) : std::numeric_limits<std::int64_t>::max();
}

}  // namespace

void market_step(MarketState& state, const MarketConfig& config, Random& rng) {
    thread_local std::vector<double> means;
    means.resize(state.hist.capacity());
    state.hist.trailing_means(means);
    const double p = state.hist.current();
    const std::size_t buffered = state.hist.size();

    const StepRates base = base_rates(state, config);
    const bool price_terms = config.use_price_terms;
    double to_f = std::min(base.base_to_f, 1.0);
    if (price_terms) to_f = std::min(base.base_to_f * fundamental_factor(p, config), 1.0);
    const double to_c_bound = std::min(price_terms ? base.base_to_c * config.exp_cap : base.base_to_c, 1.0);

    // Chartists share one switch probability. Fundamentalists are thinned
    // against the bound base * exp_cap and accepted with prob / bound.
    // Both are exact Bernoulli draws per agent in roster order.
    std::int64_t skip_c = geometric_gap(to_f, rng);
    std::int64_t skip_f = geometric_gap(to_c_bound, rng);
    int chartists = state.n_chartists;
    for (Agent& a : state.agents) {
        if (!a.active) continue;
        if (a.strategy == Strategy::Chartist) {
            if (skip_c > 0) {
                --skip_c;
                continue;
            }
            a.strategy = Strategy::Fundamentalist;
            --chartists;
            skip_c = geometric_gap(to_f, rng);
        } else {
            if (skip_f > 0) {
                --skip_f;
                continue;
            }
            double prob = base.base_to_c;
            if (price_terms) prob *= chartist_factor(a, p, means, buffered, config);
            prob = std::min(prob, 1.0);
            if (prob >= to_c_bound || rng.uniform() * to_c_bound < prob) {
                a.strategy = Strategy::Chartist;
                ++chartists;
            }
            skip_f = geometric_gap(to_c_bound, rng);
        }
    }
    state.n_chartists = chartists;

    const double ed = excess_demand(p, means, buffered, chartists, state.n_active - chartists,
                                    state.agents, config.pricing, WarmUp::ZeroForce);
    price_step(state.hist, ed, config.pricing.sigma, rng);
    ++state.t;
}

void record(SimulationOutput& out, const MarketState& state) {
    const double p = state.hist.current();
    if (!out.prices.empty()) out.returns.push_back(p - out.prices.back());
    out.prices.push_back(p);
    out.x_series.push_back(static_cast<double>(state.n_chartists) / state.n_active);
    out.n_series.push_back(state.n_active);
}

SimulationOutput run(const MarketConfig& config, std::int64_t steps, std::uint64_t seed) {
    config.validate();
    if (steps < config.max_window())
        throw std::invalid_argument("market run: steps must cover the longest window");
    Random rng(derive_seed(seed, 0));
    MarketState state = initial_state(config, rng);
    SimulationOutput out;
    out.seed = seed;
    const auto reserve = static_cast<std::size_t>(steps) + 1;
    out.prices.reserve(reserve);
    out.returns.reserve(reserve);
    out.x_series.reserve(reserve);
    out.n_series.reserve(reserve);
    record(out, state);
    for (std::int64_t i = 0; i < steps; ++i) {
        market_step(state, config, rng);
        record(out, state);
    }
    return out;
}

void write_csv(std::ostream& out, const SimulationOutput& output) {
    out << "t,price,return,x,n\n";
    for (std::size_t t = 0; t < output.prices.size(); ++t) {
        out << t << ',' << format_double(output.prices[t]) << ',';
        if (t < output.returns.size()) out << format_double(output.returns[t]);
        out << ',' << format_double(output.x_series[t]) << ',' << output.n_series[t] << '\n';
    }
}

}  // namespace mabm
