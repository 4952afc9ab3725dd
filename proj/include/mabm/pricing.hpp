#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mabm/agent.hpp"
#include "mabm/random.hpp"

namespace mabm {

/// Fixed-capacity ring of the most recent prices.
class PriceHistory {
public:
    explicit PriceHistory(std::size_t capacity);

    void push(double price);

    /// Latest price. Throws std::out_of_range when empty.
    double current() const;

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return buffer_.size(); }

    /// The price `lag` steps before the latest one (lag 0 is current()).
    double at_lag(std::size_t lag) const;

    /// Mean of the last m prices, the latest included.
    /// Throws std::out_of_range when fewer than m prices are buffered.
    double moving_average(std::size_t m) const;

    /// out[k - 1] = mean of the last k prices for k = 1..out.size(), computed in
    /// one pass. Entries beyond size() are set to NaN.
    void trailing_means(std::span<double> out) const;

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;  // next write slot
    std::size_t size_ = 0;
};

struct PricingParams {
    double gamma = 0.01;
    double b = 1.0;
    int m = 30;
    double sigma = 1.0;
    double p_f = 1000.0;

    /// Throws std::invalid_argument naming the violated condition.
    void validate() const;
};

/// How a chartist term behaves before its window is filled.
enum class WarmUp { Strict, ZeroForce };

inline double chartist_force(double p, double p_m) { return p - p_m; }

/// -(b / (2 (m - 1))) d^2. Requires m >= 2.
double effective_potential(double d, double b, int m);

/// p + (b / (m - 1)) (p - p_M) + sigma xi. Requires m buffered prices.
double chartist_step(const PriceHistory& hist, const PricingParams& params, Random& rng);

/// p + gamma (p_f - p) + sigma xi.
double fundamentalist_step(double p, const PricingParams& params, Random& rng);

/// (N_f / N) gamma (p_f - p) + (1 / N) sum over active chartists of
/// (b_i / (m_i - 1)) (p - p_{M_i}), with N = n_c + n_f.
/// Throws std::invalid_argument if the roster's active chartists do not
/// number n_c, and std::out_of_range on a short window under WarmUp::Strict.
double excess_demand(const PriceHistory& hist, int n_c, int n_f, std::span<const Agent> agents,
                     const PricingParams& params, WarmUp warm_up = WarmUp::Strict);

/// Same sum with the trailing means already computed (means[k - 1] for window k).
double excess_demand(double p, std::span<const double> means, std::size_t buffered, int n_c,
                     int n_f, std::span<const Agent> agents, const PricingParams& params,
                     WarmUp warm_up);

/// Pushes p + ed + sigma xi onto the history and returns it.
double price_step(PriceHistory& hist, double ed, double sigma, Random& rng);

/// Pure chartist path p(0..steps) starting at p_f. The force is zero until
/// the window holds m prices.
std::vector<double> chartist_path(const PricingParams& params, std::size_t steps, Random& rng);

/// Pure fundamentalist path p(0..steps) starting at `p0`.
std::vector<double> fundamentalist_path(const PricingParams& params, double p0, std::size_t steps,
                                        Random& rng);

}  // namespace mabm
