#include "mabm/herding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mabm {

namespace {

Rates rates_at(int n_c, const HerdingParams& p) {
    const double n = p.n_agents();
    const double nc = n_c;
    const double nf = n - nc;
    return {p.beta() * (1.0 - p.delta()) * nf * (p.k1() + nc / n),
            p.beta() * (1.0 + p.delta()) * nc * (p.k2() + nf / n)};
}

void check_state(const HerdingState& s, const HerdingParams& p) {
    if (s.n_c < 0 || s.n_c > p.n_agents())
        throw std::out_of_range("herding: n_c=" + std::to_string(s.n_c) + " outside [0, " +
                                std::to_string(p.n_agents()) + "]");
}

}  // namespace

HerdingParams::HerdingParams() : HerdingParams(with_ratio(500, 0.02 / 500, 0.5, 0.003)) {}

HerdingParams::HerdingParams(int n_agents, double beta, double k1, double k2, double delta,
                             std::optional<double> r, RateBound bound)
    : n_agents_(n_agents), beta_(beta), k1_(k1), k2_(k2), delta_(delta), r_(r), bound_(bound) {
    if (n_agents < 1) throw std::invalid_argument("herding: n_agents >= 1 required");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("herding: beta >= 0 required");
    if (!(k1 >= 0.0) || !(k2 >= 0.0) || !std::isfinite(k1) || !std::isfinite(k2))
        throw std::invalid_argument("herding: k1, k2 >= 0 required");
    if (!(delta >= 0.0 && delta < 1.0))
        throw std::invalid_argument("herding: 0 <= delta < 1 required");
    if (r && !(*r > 0.0 && *r < 1.0))
        throw std::invalid_argument("herding: 0 < r < 1 required");
    if (bound == RateBound::OneSwitch) {
        require_one_switch();
    } else if (max_agent_rate() > 1.0) {
        throw std::invalid_argument("herding: per-agent switch probability <= 1 required (beta too large)");
    }
}

void HerdingParams::require_one_switch() const {
    if (max_total_rate() > 1.0)
        throw std::invalid_argument("herding: max(p_up + p_down) <= 1 required (beta too large)");
}

double HerdingParams::max_agent_rate() const {
    return beta_ * (1.0 + delta_) * (std::max(k1_, k2_) + 1.0);
}

HerdingParams HerdingParams::symmetric(int n_agents, double beta, double eps, RateBound bound) {
    if (!(eps > 0.0)) throw std::invalid_argument("herding: epsilon > 0 required");
    if (n_agents < 1) throw std::invalid_argument("herding: n_agents >= 1 required");
    const double k = eps / n_agents;
    std::optional<double> r;
    if (eps < 1.0) r = eps;
    return HerdingParams(n_agents, beta, k, k, 0.0, r, bound);
}

HerdingParams HerdingParams::with_ratio(int n_agents, double beta, double r, double delta,
                                        RateBound bound) {
    if (n_agents < 1) throw std::invalid_argument("herding: n_agents >= 1 required");
    const double k = r / n_agents;
    return HerdingParams(n_agents, beta, k, k, delta, r, bound);
}

double HerdingParams::max_total_rate() const {
    double best = 0.0;
    for (int n = 0; n <= n_agents_; ++n) {
        const Rates r = rates_at(n, *this);
        best = std::max(best, r.up + r.down);
    }
    return best;
}

HerdingParams HerdingParams::for_population(int n_agents) const {
    if (n_agents < 1) throw std::invalid_argument("herding: n_agents >= 1 required");
    const double scale = static_cast<double>(n_agents_) / n_agents;
    return HerdingParams(n_agents, beta_ * scale, k1_ * scale, k2_ * scale, delta_, r_, bound_);
}

Rates symmetric_rates(const HerdingState& state, const HerdingParams& params) {
    if (params.delta() != 0.0) throw std::invalid_argument("symmetric_rates: delta must be 0");
    check_state(state, params);
    return rates_at(state.n_c, params);
}

Rates asymmetric_rates(const HerdingState& state, const HerdingParams& params) {
    check_state(state, params);
    return rates_at(state.n_c, params);
}

HerdingState step(const HerdingState& state, const HerdingParams& params, Random& rng) {
    const Rates r = asymmetric_rates(state, params);
    if (r.up + r.down > 1.0) throw std::domain_error("step: p_up + p_down exceeds 1");
    const double u = rng.uniform();
    HerdingState next = state;
    if (u < r.up) {
        ++next.n_c;
    } else if (u < r.up + r.down) {
        --next.n_c;
    }
    ++next.t;
    return next;
}

HerdingChain::HerdingChain(const HerdingParams& params, HerdingState initial)
    : params_(params), state_(initial) {
    params.require_one_switch();
    check_state(initial, params);
    const auto size = static_cast<std::size_t>(params.n_agents()) + 1;
    up_.resize(size);
    total_.resize(size);
    for (std::size_t n = 0; n < size; ++n) {
        const Rates r = rates_at(static_cast<int>(n), params);
        up_[n] = r.up;
        total_[n] = r.up + r.down;
    }
}

DensityCurve stationary_symmetric(double eps, std::size_t cells) {
    if (!(eps > 0.0)) throw std::invalid_argument("stationary_symmetric: eps > 0 required");
    const auto grid = midpoint_grid(cells);
    std::vector<double> log_p(cells);
    for (std::size_t i = 0; i < cells; ++i)
        log_p[i] = (eps - 1.0) * (std::log(grid[i]) + std::log1p(-grid[i]));
    return DensityCurve::from_log_density(log_p);
}

double drift(double x, const HerdingParams& p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("drift: x outside [0, 1]");
    const double n = p.n_agents();
    const double d = p.delta();
    return p.beta() * (-2.0 * d * x * (1.0 - x) + (1.0 - d) * p.k1() * (1.0 - x) -
                       (1.0 + d) * p.k2() * x - d / (n * n));
}

double diffusion(double x, const HerdingParams& p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("diffusion: x outside [0, 1]");
    const double n = p.n_agents();
    const double d = p.delta();
    return p.beta() * ((2.0 / n) * x * (1.0 - x) + ((1.0 - d) / n) * p.k1() * (1.0 - x) +
                       ((1.0 + d) / n) * p.k2() * x - (2.0 * d / (n * n)) * (x - 0.5));
}

DensityCurve stationary_numeric(const HerdingParams& params, std::size_t cells) {
    if (!(params.beta() > 0.0)) throw std::domain_error("stationary_numeric: beta must be positive");
    const auto grid = midpoint_grid(cells);
    const double h = 1.0 / static_cast<double>(cells);
    std::vector<double> log_p(cells);
    double integral = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double dx = diffusion(grid[i], params);
        if (!(dx > 0.0))
            throw std::domain_error("stationary_numeric: D(x) <= 0 at x=" + std::to_string(grid[i]));
        const double g = 2.0 * drift(grid[i], params) / dx;
        log_p[i] = integral + 0.5 * g * h - std::log(dx);
        integral += g * h;
    }
    return DensityCurve::from_log_density(log_p);
}

DensityCurve stationary_approx(const HerdingParams& params, std::size_t cells) {
    if (!params.r()) throw std::invalid_argument("stationary_approx: requires the r parameterization");
    const double r = *params.r();
    const double d = params.delta();
    const double n = params.n_agents();
    const auto grid = midpoint_grid(cells);
    std::vector<double> log_p(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = grid[i];
        log_p[i] = (r * (1.0 - d) - 1.0) * std::log(x) + (r * (1.0 + d) - 1.0) * std::log1p(-x) -
                   2.0 * d * n * x;
    }
    return DensityCurve::from_log_density(log_p);
}

double passage_time_factor(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("passage_time_factor: 0 < eps < 1 required");
    constexpr double pi = std::numbers::pi;
    const double v = pi * (eps - 0.5);
    double tan_ratio;
    if (std::abs(v) < 1e-2) {
        const double v2 = v * v;
        tan_ratio = 1.0 + v2 / 3.0 + 2.0 * v2 * v2 / 15.0 + 17.0 * v2 * v2 * v2 / 315.0;
    } else {
        tan_ratio = std::tan(v) / v;
    }
    return 0.5 * pi * pi * tan_ratio;
}

double mean_first_passage_time(const HerdingParams& params) {
    if (params.delta() != 0.0) throw std::domain_error("mean_first_passage_time: delta must be 0");
    if (params.k1() != params.k2()) throw std::domain_error("mean_first_passage_time: K1 != K2");
    if (!(params.beta() > 0.0)) throw std::domain_error("mean_first_passage_time: beta must be positive");
    return params.n_agents() / params.beta() * passage_time_factor(params.epsilon());
}

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::Bimodal: return "bimodal";
        case Modality::Flat: return "flat";
        case Modality::Unimodal: return "unimodal";
    }
    return "unknown";
}

Modality stationary_modality(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("stationary_modality: eps > 0 required");
    if (eps < 1.0) return Modality::Bimodal;
    if (eps > 1.0) return Modality::Unimodal;
    return Modality::Flat;
}

Modality classify_modality(const DensityCurve& curve, double flat_tolerance) {
    const auto d = curve.density();
    if (d.size() < 3) throw std::invalid_argument("classify_modality: grid too small");
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double worst = 0.0;
    for (double v : d) worst = std::max(worst, std::abs(v - mean) / mean);
    if (worst <= flat_tolerance) return Modality::Flat;
    const std::size_t mid = d.size() / 2;
    const double second = d[mid + 1] - 2.0 * d[mid] + d[mid - 1];
    if (d.size() % 2 == 0) {
        const double alt = d[mid] - 2.0 * d[mid - 1] + d[mid - 2];
        return second + alt < 0.0 ? Modality::Unimodal : Modality::Bimodal;
    }
    return second < 0.0 ? Modality::Unimodal : Modality::Bimodal;
}

SwitchDetector::SwitchDetector(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower > 0.0 && lower < upper && upper < 1.0))
        throw std::invalid_argument("SwitchDetector: 0 < lower < upper < 1 required");
}

void SwitchDetector::observe(double x) {
    Band now = band_;
    if (x <= lower_) {
        now = Band::Low;
    } else if (x >= upper_) {
        now = Band::High;
    }
    if (now != band_) {
        if (band_ != Band::Unknown) {
            if (last_switch_ >= 0) {
                const double length = static_cast<double>(t_ - last_switch_);
                if (band_ == Band::Low) {
                    sum_low_ += length;
                    ++n_low_;
                } else {
                    sum_high_ += length;
                    ++n_high_;
                }
                sum_sq_ += length * length;
            }
            last_switch_ = t_;
            ++switches_;
        }
        band_ = now;
    }
    ++t_;
}

PassageStats SwitchDetector::stats() const {
    PassageStats s;
    s.n_switches = switches_;
    s.completed_low = n_low_;
    s.completed_high = n_high_;
    if (n_low_ > 0) s.t1 = sum_low_ / static_cast<double>(n_low_);
    if (n_high_ > 0) s.t2 = sum_high_ / static_cast<double>(n_high_);
    const std::size_t k = n_low_ + n_high_;
    if (k > 0) {
        const double mean = (sum_low_ + sum_high_) / static_cast<double>(k);
        s.t0_empirical = mean;
        if (k > 1) {
            const double var =
                (sum_sq_ - static_cast<double>(k) * mean * mean) / static_cast<double>(k - 1);
            s.t0_stderr = std::sqrt(std::max(var, 0.0) / static_cast<double>(k));
        }
    }
    return s;
}

PassageStats measure_switching(std::span<const double> trajectory, double lower, double upper) {
    SwitchDetector detector(lower, upper);
    for (double x : trajectory) detector.observe(x);
    return detector.stats();
}

OccupancyHistogram::OccupancyHistogram(int n_agents) {
    if (n_agents < 1) throw std::invalid_argument("OccupancyHistogram: n_agents >= 1 required");
    counts_.assign(static_cast<std::size_t>(n_agents) + 1, 0);
}

std::uint64_t OccupancyHistogram::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts_) sum += c;
    return sum;
}

std::vector<double> OccupancyHistogram::bin_masses(std::size_t bins) const {
    const double tot = static_cast<double>(total());
    if (tot == 0.0) throw std::domain_error("OccupancyHistogram: no observations");
    std::vector<double> prob(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) prob[i] = static_cast<double>(counts_[i]) / tot;
    return bin_state_masses(prob, bins);
}

double OccupancyHistogram::mean_fraction() const {
    const double tot = static_cast<double>(total());
    if (tot == 0.0) throw std::domain_error("OccupancyHistogram: no observations");
    const double n = static_cast<double>(counts_.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < counts_.size(); ++i) sum += static_cast<double>(counts_[i]) * (i / n);
    return sum / tot;
}

std::vector<double> bin_state_masses(std::span<const double> state_probability, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("bin_state_masses: bins must be positive");
    if (state_probability.empty()) throw std::invalid_argument("bin_state_masses: no states");
    const double states = static_cast<double>(state_probability.size());
    const double bw = 1.0 / static_cast<double>(bins);
    std::vector<double> masses(bins, 0.0);
    for (std::size_t n = 0; n < state_probability.size(); ++n) {
        const double lo = n / states;
        const double hi = (n + 1) / states;
        auto b = std::min(static_cast<std::size_t>(lo / bw), bins - 1);
        for (; b < bins; ++b) {
            const double blo = b * bw;
            const double bhi = (b + 1) * bw;
            if (blo >= hi) break;
            const double overlap = std::min(hi, bhi) - std::max(lo, blo);
            if (overlap > 0.0) masses[b] += state_probability[n] * overlap * states;
        }
    }
    return masses;
}

}  // namespace mabm
