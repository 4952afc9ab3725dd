#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mabm/market.hpp"

namespace mabm {

/// Volatility-thresholded entry and exit of agents.
struct SoiConfig {
    int n_pool = 5000;
    int n0 = 500;
    int window = 100;
    double threshold = 0.878;
    double p_enter = 0.0025;
    double p_exit = 0.0025;

    /// Throws std::invalid_argument naming the violated condition.
    /// Zero probabilities are accepted and switch the mechanism off.
    void validate() const;
};

/// Mean absolute return over the trailing `window` entries.
/// Throws std::out_of_range when fewer are available.
double realized_volatility(std::span<const double> returns, std::size_t window);

/// Above the threshold each inactive agent joins (as a fundamentalist) with
/// probability p_enter; below it each active agent leaves with probability
/// p_exit. Nothing happens at vol == threshold. At least one agent stays active.
void entry_exit_step(MarketState& state, double vol, const SoiConfig& config, Random& rng);

/// Coupled run: market_step every step, entry_exit_step after every
/// `window` steps using the volatility of that window.
///
/// The first n0 agents and all market noise come from the main stream
/// derive_seed(seed, 0), exactly as in run(); the remaining pool agents and
/// the entry/exit draws use derive_seed(seed, 1).
SimulationOutput run_soi(const MarketConfig& market_config, const SoiConfig& soi_config,
                         std::int64_t steps, std::uint64_t seed);

struct ConvergenceSummary {
    std::uint64_t seed = 0;
    int n0 = 0;
    int n_final = 0;
    /// First step after which N(t) stays within [n_star / 2, 2 n_star].
    std::optional<std::int64_t> steps_to_band;
};

ConvergenceSummary summarize_convergence(const SimulationOutput& output, int n0, double n_star);

/// CSV `seed,n0,n_final,steps_to_band`; steps_to_band is empty if never reached.
void write_convergence_csv(std::ostream& out, std::span<const ConvergenceSummary> rows);

}  // namespace mabm
