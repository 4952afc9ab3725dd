#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mabm/density.hpp"
#include "mabm/random.hpp"

namespace mabm {

/// Which per-step probability must stay at or below one.
///
/// OneSwitch is the herding chain: one event per step with probability
/// p_up + p_down. PerAgent is the market, where every agent switches
/// independently with probability beta (1 +- delta) (K + fraction).
enum class RateBound { OneSwitch, PerAgent };

/// Parameters of the two-strategy herding chain.
///
/// `beta` is a per-agent rate: the per-step event probabilities multiply it by
/// the size of the source class, so the one-switch chain needs beta of order
/// 1/N. Construction checks the bound selected by `bound`.
class HerdingParams {
public:
    /// N = 500, beta * N = 0.02, eps = r = 0.5, delta = 0.003.
    HerdingParams();

    /// Throws std::invalid_argument naming the violated condition.
    HerdingParams(int n_agents, double beta, double k1, double k2, double delta,
                  std::optional<double> r = std::nullopt, RateBound bound = RateBound::OneSwitch);

    /// K1 = K2 = eps / N, delta = 0. Records r = eps when eps < 1.
    static HerdingParams symmetric(int n_agents, double beta, double eps,
                                   RateBound bound = RateBound::OneSwitch);

    /// K1 = K2 = r / N with 0 < r < 1.
    static HerdingParams with_ratio(int n_agents, double beta, double r, double delta,
                                    RateBound bound = RateBound::OneSwitch);

    int n_agents() const { return n_agents_; }
    double beta() const { return beta_; }
    double k1() const { return k1_; }
    double k2() const { return k2_; }
    double delta() const { return delta_; }
    std::optional<double> r() const { return r_; }
    RateBound bound() const { return bound_; }

    /// K1 * N. Only meaningful as a single control parameter when K1 == K2.
    double epsilon() const { return k1_ * n_agents_; }

    /// Largest p_up + p_down over all states.
    double max_total_rate() const;

    /// Largest single-agent switch probability, beta (1 + delta) (max K + 1).
    double max_agent_rate() const;

    /// Throws std::invalid_argument unless max_total_rate() <= 1.
    void require_one_switch() const;

    /// Same model at a different population: beta * N and K * N are held
    /// fixed, so the continuum drift and diffusion keep their shape.
    HerdingParams for_population(int n_agents) const;

private:
    int n_agents_;
    double beta_;
    double k1_;
    double k2_;
    double delta_;
    std::optional<double> r_;
    RateBound bound_;
};

struct HerdingState {
    int n_c = 0;
    std::int64_t t = 0;
};

struct Rates {
    double up = 0.0;
    double down = 0.0;
};

/// Event probabilities with delta required to be zero.
Rates symmetric_rates(const HerdingState& state, const HerdingParams& params);

/// p_up = beta (1 - delta) N_f (K1 + N_c / N), p_down = beta (1 + delta) N_c (K2 + N_f / N).
Rates asymmetric_rates(const HerdingState& state, const HerdingParams& params);

/// At most one switch; t always advances. Uses one uniform draw.
HerdingState step(const HerdingState& state, const HerdingParams& params, Random& rng);

/// Precomputed rate table for long runs. Produces exactly the same
/// trajectory as repeated calls to step() with the same random source.
/// Requires the one-switch bound.
class HerdingChain {
public:
    HerdingChain(const HerdingParams& params, HerdingState initial);

    const HerdingState& state() const { return state_; }
    const HerdingParams& params() const { return params_; }

    void advance(Random& rng) {
        const double u = rng.uniform();
        const auto n = static_cast<std::size_t>(state_.n_c);
        if (u < up_[n]) {
            ++state_.n_c;
        } else if (u < total_[n]) {
            --state_.n_c;
        }
        ++state_.t;
    }

    /// Advances `steps` times, calling observer(state) after each step.
    template <class Observer>
    void run(std::int64_t steps, Random& rng, Observer&& observer) {
        for (std::int64_t i = 0; i < steps; ++i) {
            advance(rng);
            observer(state_);
        }
    }

private:
    HerdingParams params_;
    HerdingState state_;
    std::vector<double> up_;
    std::vector<double> total_;
};

/// Beta(eps, eps) density on the midpoint grid.
DensityCurve stationary_symmetric(double eps, std::size_t cells = kDefaultCells);

/// Continuum drift A(x) including the 1/N^2 correction.
double drift(double x, const HerdingParams& params);

/// Continuum diffusion D(x) including the 1/N^2 correction.
double diffusion(double x, const HerdingParams& params);

/// (C / D(x)) exp(integral of 2A/D), with the inner integral accumulated by the
/// midpoint rule on the same grid. Throws std::domain_error if D <= 0 at a
/// grid point or the normalization diverges.
DensityCurve stationary_numeric(const HerdingParams& params, std::size_t cells = kDefaultCells);

/// Large-N form x^(r(1-delta)-1) (1-x)^(r(1+delta)-1) exp(-2 delta N x).
/// Requires params.r().
DensityCurve stationary_approx(const HerdingParams& params, std::size_t cells = kDefaultCells);

/// pi cot(pi eps) / (1 - 2 eps), continuous at eps = 1/2. Requires 0 < eps < 1.
double passage_time_factor(double eps);

/// Expected steps for a full passage between the two metastable states:
/// (N / beta) * passage_time_factor(eps). Requires delta = 0 and K1 = K2.
double mean_first_passage_time(const HerdingParams& params);

enum class Modality { Bimodal, Flat, Unimodal };

std::string_view to_string(Modality m);

/// Shape implied by eps: bimodal below 1, flat at 1, unimodal above.
Modality stationary_modality(double eps);

/// Shape of a curve read from the discrete second difference at mid-grid.
/// Flat if every value lies within `flat_tolerance` (relative) of the mean.
Modality classify_modality(const DensityCurve& curve, double flat_tolerance = 0.02);

struct PassageStats {
    std::optional<double> t0_analytic;
    std::optional<double> t0_empirical;
    std::optional<double> t0_stderr;
    std::optional<double> t1;  ///< mean residence below the lower band
    std::optional<double> t2;  ///< mean residence above the upper band
    std::size_t n_switches = 0;
    std::size_t completed_low = 0;
    std::size_t completed_high = 0;
};

/// Streaming switch counter with hysteresis bands.
///
/// The state is Low once x <= lower and High once x >= upper; a switch is a
/// change between the two. Residence times run from one switch to the next,
/// so the segments before the first and after the last switch are censored
/// and left out of the means.
class SwitchDetector {
public:
    SwitchDetector(double lower, double upper);

    void observe(double x);

    PassageStats stats() const;

private:
    enum class Band { Unknown, Low, High };

    double lower_;
    double upper_;
    Band band_ = Band::Unknown;
    std::int64_t t_ = 0;
    std::int64_t last_switch_ = -1;
    std::size_t switches_ = 0;
    double sum_low_ = 0.0;
    double sum_high_ = 0.0;
    double sum_sq_ = 0.0;
    std::size_t n_low_ = 0;
    std::size_t n_high_ = 0;
};

PassageStats measure_switching(std::span<const double> trajectory, double lower = 0.25,
                               double upper = 0.75);

/// Visit counts of each chartist count 0..N.
class OccupancyHistogram {
public:
    explicit OccupancyHistogram(int n_agents);

    void add(int n_c) { ++counts_.at(static_cast<std::size_t>(n_c)); }

    std::uint64_t total() const;
    std::span<const std::uint64_t> counts() const { return counts_; }

    /// Occupancy mass in `bins` equal bins of (0, 1). State n is spread
    /// uniformly over [n / (N + 1), (n + 1) / (N + 1)).
    std::vector<double> bin_masses(std::size_t bins) const;

    double mean_fraction() const;

private:
    std::vector<std::uint64_t> counts_;
};

/// Same equal-partition rule applied to an arbitrary probability vector over 0..N.
std::vector<double> bin_state_masses(std::span<const double> state_probability, std::size_t bins);

}  // namespace mabm
