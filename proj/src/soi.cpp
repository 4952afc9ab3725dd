#include "mabm/soi.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mabm {

void SoiConfig::validate() const {
    if (!(n0 > 0 && n0 <= n_pool)) throw std::invalid_argument("soi: 0 < n0 <= n_pool required");
    if (window < 1) throw std::invalid_argument("soi: window >= 1 required");
    if (!(threshold > 0.0)) throw std::invalid_argument("soi: threshold > 0 required");
    if (!(p_enter >= 0.0 && p_enter <= 1.0) || !(p_exit >= 0.0 && p_exit <= 1.0))
        throw std::invalid_argument("soi: p_enter, p_exit in [0, 1] required");
}

double realized_volatility(std::span<const double> returns, std::size_t window) {
    if (window == 0) throw std::invalid_argument("realized_volatility: window must be positive");
    if (returns.size() < window)
        throw std::out_of_range("realized_volatility: fewer returns than the window");
    double sum = 0.0;
    for (double r : returns.last(window)) sum += std::abs(r);
    return sum / static_cast<double>(window);
}

void entry_exit_step(MarketState& state, double vol, const SoiConfig& config, Random& rng) {
    if (vol > config.threshold) {
        for (Agent& a : state.agents) {
            if (a.active) continue;
            if (rng.uniform() < config.p_enter) {
                a.active = true;
                a.strategy = Strategy::Fundamentalist;
                ++state.n_active;
            }
        }
    } else if (vol < config.threshold) {
        for (Agent& a : state.agents) {
            if (!a.active) continue;
            if (rng.uniform() < config.p_exit && state.n_active > 1) {
                a.active = false;
                --state.n_active;
                if (a.strategy == Strategy::Chartist) --state.n_chartists;
            }
        }
    }
}

SimulationOutput run_soi(const MarketConfig& market_config, const SoiConfig& soi_config,
                         std::int64_t steps, std::uint64_t seed) {
    market_config.validate();
    soi_config.validate();
    if (market_config.initial_chartists > soi_config.n0)
        throw std::invalid_argument("soi: initial_chartists <= n0 required");
    if (steps < market_config.max_window())
        throw std::invalid_argument("soi run: steps must cover the longest window");

    // The main stream sees exactly what run() would at population n0.
    MarketConfig at_n0 = market_config;
    at_n0.herding = market_config.herding.for_population(soi_config.n0);
    Random rng(derive_seed(seed, 0));
    Random pool_rng(derive_seed(seed, 1));
    MarketState state = initial_state(at_n0, rng);

    const auto extra = static_cast<std::size_t>(soi_config.n_pool - soi_config.n0);
    for (std::size_t i = 0; i < extra; ++i) {
        Agent a;
        if (market_config.heterogeneity) {
            const auto& h = *market_config.heterogeneity;
            a.m = static_cast<int>(pool_rng.uniform_int(h.m_min, h.m_max));
            a.b = pool_rng.uniform_real(h.b_min, h.b_max);
        } else {
            a.m = market_config.pricing.m;
            a.b = market_config.pricing.b;
        }
        a.active = false;
        state.agents.push_back(a);
    }

    SimulationOutput out;
    out.seed = seed;
    const auto reserve = static_cast<std::size_t>(steps) + 1;
    out.prices.reserve(reserve);
    out.returns.reserve(reserve);
    out.x_series.reserve(reserve);
    out.n_series.reserve(reserve);
    record(out, state);
    const auto window = static_cast<std::size_t>(soi_config.window);
    for (std::int64_t i = 0; i < steps; ++i) {
        market_step(state, at_n0, rng);
        if ((i + 1) % soi_config.window == 0) {
            // Record the price first so the window's last return is included.
            record(out, state);
            const double vol = realized_volatility(out.returns, window);
            entry_exit_step(state, vol, soi_config, pool_rng);
            out.x_series.back() = static_cast<double>(state.n_chartists) / state.n_active;
            out.n_series.back() = state.n_active;
        } else {
            record(out, state);
        }
    }
    return out;
}

ConvergenceSummary summarize_convergence(const SimulationOutput& output, int n0, double n_star) {
    if (!(n_star > 0.0)) throw std::invalid_argument("summarize_convergence: n_star > 0 required");
    ConvergenceSummary s;
    s.seed = output.seed;
    s.n0 = n0;
    if (output.n_series.empty()) return s;
    s.n_final = output.n_series.back();
    const double lo = n_star / 2.0;
    const double hi = n_star * 2.0;
    std::optional<std::int64_t> entered;
    for (std::size_t t = 0; t < output.n_series.size(); ++t) {
        const double n = output.n_series[t];
        if (n >= lo && n <= hi) {
            if (!entered) entered = static_cast<std::int64_t>(t);
        } else {
            entered.reset();
        }
    }
    s.steps_to_band = entered;
    return s;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceSummary> rows) {
    out << "seed,n0,n_final,steps_to_band\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << r.n0 << ',' << r.n_final << ',';
        if (r.steps_to_band) out << *r.steps_to_band;
        out << '\n';
    }
}

}  // namespace mabm
