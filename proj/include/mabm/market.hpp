#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mabm/agent.hpp"
#include "mabm/herding.hpp"
#include "mabm/pricing.hpp"
#include "mabm/random.hpp"

namespace mabm {

/// Uniform bounds for quenched per-agent characteristics.
struct Heterogeneity {
    int m_min = 10;
    int m_max = 50;
    double b_min = 0.0;
    double b_max = 2.0;
};

struct MarketConfig {
    PricingParams pricing;
    HerdingParams herding;
    bool use_price_terms = true;
    std::optional<Heterogeneity> heterogeneity = Heterogeneity{};
    double exp_cap = 10.0;
    int initial_chartists = 0;

    /// Throws std::invalid_argument naming the violated condition.
    void validate() const;

    /// Largest moving-average window any agent can hold.
    int max_window() const;
};

struct MarketState {
    std::vector<Agent> agents;
    PriceHistory hist{1};
    std::int64_t t = 0;
    int n_active = 0;
    int n_chartists = 0;  ///< active chartists
};

/// Builds the initial roster and a history holding p_f. Heterogeneous
/// characteristics are drawn here, once, from `rng`.
MarketState initial_state(const MarketConfig& config, Random& rng);

struct SwitchProbabilities {
    double to_fundamentalist = 0.0;
    double to_chartist = 0.0;
};

/// Per-agent switch probabilities in the current state.
///
/// Rates are rescaled by N_ref / N_active (N_ref = herding.n_agents()), which
/// keeps beta * N and K * N fixed when the active population moves.
SwitchProbabilities transition_probabilities(const Agent& agent, const MarketState& state,
                                             const MarketConfig& config);

/// Switch every active agent, then update the price from the new roster.
void market_step(MarketState& state, const MarketConfig& config, Random& rng);

struct SimulationOutput {
    std::vector<double> prices;   ///< p(0..T)
    std::vector<double> returns;  ///< p(t+1) - p(t), length T
    std::vector<double> x_series; ///< chartist fraction, length T + 1
    std::vector<int> n_series;    ///< active agents, length T + 1
    std::uint64_t seed = 0;
};

/// Records the observable state of `state` as one more row.
void record(SimulationOutput& out, const MarketState& state);

/// Deterministic in (config, seed). The main stream is derive_seed(seed, 0).
SimulationOutput run(const MarketConfig& config, std::int64_t steps, std::uint64_t seed);

/// CSV with header `t,price,return,x,n`; return is empty on the last row.
void write_csv(std::ostream& out, const SimulationOutput& output);

}  // namespace mabm
