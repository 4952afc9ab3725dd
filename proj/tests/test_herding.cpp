#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "mabm/herding.hpp"
#include "oracles.hpp"

using namespace mabm;

namespace {

HerdingParams sym(int n, double beta, double k) { return HerdingParams(n, beta, k, k, 0.0); }

}  // namespace

TEST_CASE("symmetric rates by direct substitution") {
    const auto p = sym(500, 0.00004, 0.001);
    const Rates r = symmetric_rates({250, 0}, p);
    CHECK(r.up == doctest::Approx(0.00501).epsilon(1e-12));
    CHECK(r.down == doctest::Approx(0.00501).epsilon(1e-12));
}

TEST_CASE("K = 0 makes the boundaries absorbing") {
    const auto p = sym(500, 0.00004, 0.0);
    const Rates r0 = symmetric_rates({0, 0}, p);
    CHECK(r0.up == 0.0);
    CHECK(r0.down == 0.0);
    const Rates rn = symmetric_rates({500, 0}, p);
    CHECK(rn.up == 0.0);
    CHECK(rn.down == 0.0);
}

TEST_CASE("K > 0 removes absorption at n_c = 0") {
    const auto p = sym(500, 0.00004, 0.001);
    CHECK(symmetric_rates({0, 0}, p).up == doctest::Approx(0.00004 * 500 * 0.001));
}

TEST_CASE("symmetric_rates requires delta = 0") {
    const HerdingParams p(500, 0.00004, 0.001, 0.001, 0.003);
    CHECK_THROWS_AS(symmetric_rates({10, 0}, p), std::invalid_argument);
}

TEST_CASE("rates reject states outside [0, N]") {
    const auto p = sym(50, 0.001, 0.01);
    CHECK_THROWS_AS(asymmetric_rates({-1, 0}, p), std::out_of_range);
    CHECK_THROWS_AS(asymmetric_rates({51, 0}, p), std::out_of_range);
}

TEST_CASE("asymmetric rates reduce to symmetric at delta = 0") {
    const auto p = sym(200, 0.002, 0.004);
    for (int c = 0; c <= 200; ++c) {
        const Rates a = asymmetric_rates({c, 0}, p);
        const Rates s = symmetric_rates({c, 0}, p);
        CHECK(a.up == s.up);
        CHECK(a.down == s.down);
    }
}

TEST_CASE("asymmetric rates at the symmetric point") {
    const HerdingParams p(500, 0.00004, 0.001, 0.001, 0.003);
    const Rates r = asymmetric_rates({250, 0}, p);
    CHECK(r.down / r.up == doctest::Approx(1.003 / 0.997).epsilon(1e-12));
    CHECK(r.up == doctest::Approx(0.0049950).epsilon(1e-7));
    CHECK(r.down == doctest::Approx(0.0050251).epsilon(1e-6));
}

TEST_CASE("construction validates every invariant") {
    CHECK_THROWS_AS(HerdingParams(0, 0.001, 0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams(50, -0.001, 0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams(50, 0.001, -0.1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams(50, 0.001, 0.0, 0.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams(50, 0.001, 0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams::with_ratio(50, 0.001, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(HerdingParams::with_ratio(50, 0.001, 0.0, 0.0), std::invalid_argument);
    // beta = 0.02 at N = 500 breaks the one-switch bound but not the per-agent one.
    CHECK_THROWS_AS(HerdingParams::symmetric(500, 0.02, 0.5), std::invalid_argument);
    CHECK_NOTHROW(HerdingParams::symmetric(500, 0.02, 0.5, RateBound::PerAgent));
    CHECK_THROWS_AS(HerdingParams::symmetric(500, 1.2, 0.5, RateBound::PerAgent), std::invalid_argument);
}

TEST_CASE("max_total_rate bounds every state") {
    const auto p = HerdingParams::with_ratio(100, 0.0195, 0.5, 0.003);
    CHECK(p.max_total_rate() <= 1.0);
    for (int c = 0; c <= 100; ++c) {
        const Rates r = asymmetric_rates({c, 0}, p);
        CHECK(r.up + r.down <= p.max_total_rate());
    }
}

TEST_CASE("for_population keeps beta*N and K*N") {
    const auto p = HerdingParams::with_ratio(500, 0.0039, 0.5, 0.003);
    const auto q = p.for_population(50);
    CHECK(q.beta() * 50 == doctest::Approx(p.beta() * 500));
    CHECK(q.epsilon() == doctest::Approx(p.epsilon()));
    CHECK(q.delta() == p.delta());
}

TEST_CASE("step with zero rates only advances time") {
    const auto p = sym(20, 0.01, 0.0);
    Random rng(3);
    HerdingState s{0, 0};
    for (int i = 0; i < 100; ++i) s = step(s, p, rng);
    CHECK(s.n_c == 0);
    CHECK(s.t == 100);
}

TEST_CASE("chain stays confined and matches step()") {
    const auto p = HerdingParams::with_ratio(40, 0.024, 0.3, 0.01);
    Random a(11);
    Random b(11);
    HerdingState s{20, 0};
    HerdingChain chain(p, s);
    bool confined = true;
    bool same = true;
    for (int i = 0; i < 1'000'000; ++i) {
        s = step(s, p, a);
        chain.advance(b);
        confined = confined && s.n_c >= 0 && s.n_c <= 40;
        same = same && s.n_c == chain.state().n_c;
    }
    CHECK(confined);
    CHECK(same);
    CHECK(chain.state().t == 1'000'000);
}

TEST_CASE("chain refuses parameters beyond the one-switch bound") {
    const auto p = HerdingParams::symmetric(500, 0.02, 0.5, RateBound::PerAgent);
    CHECK_THROWS_AS(HerdingChain(p, HerdingState{}), std::invalid_argument);
}

TEST_CASE("no absorption: leaving n_c = 0 within 3 / (beta N K1) steps") {
    const auto p = sym(100, 0.005, 0.002);
    const auto horizon = static_cast<int>(std::ceil(3.0 / (p.beta() * 100 * p.k1())));
    Random rng(5);
    int left = 0;
    const int trials = 400;
    for (int k = 0; k < trials; ++k) {
        HerdingState s{0, 0};
        for (int i = 0; i < horizon && s.n_c == 0; ++i) s = step(s, p, rng);
        left += s.n_c > 0;
    }
    CHECK(static_cast<double>(left) / trials > 0.9);
}

TEST_CASE("stationary_symmetric: uniform at eps = 1") {
    const auto c = stationary_symmetric(1.0);
    for (double d : c.density()) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary_symmetric: Beta(1/2,1/2) value at the centre") {
    // Odd cell count puts a midpoint exactly at 1/2; the fine grid keeps the
    // midpoint-rule normalization error at the edge singularities below 3e-4.
    const auto c = stationary_symmetric(0.5, 2'000'001);
    const double centre = c.density()[1'000'000];
    CHECK(c.grid()[1'000'000] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(centre == doctest::Approx(oracle::beta_density(0.5, 0.5, 0.5)).epsilon(5e-4));
    CHECK(oracle::beta_density(0.5, 0.5, 0.5) == doctest::Approx(2.0 / std::numbers::pi));
}

TEST_CASE("stationary_symmetric is symmetric, normalized, and rejects eps <= 0") {
    for (double eps : {0.3, 0.5, 2.0, 3.0}) {
        const auto c = stationary_symmetric(eps);
        CHECK(c.integral() == doctest::Approx(1.0).epsilon(1e-6));
        const auto d = c.density();
        for (std::size_t i = 0; i < d.size() / 2; ++i)
            CHECK(d[i] == doctest::Approx(d[d.size() - 1 - i]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(stationary_symmetric(0.0), std::invalid_argument);
    CHECK_THROWS_AS(stationary_symmetric(-1.0), std::invalid_argument);
}

TEST_CASE("mode structure flips at eps = 1") {
    CHECK(classify_modality(stationary_symmetric(3.0)) == Modality::Unimodal);
    CHECK(classify_modality(stationary_symmetric(1.5)) == Modality::Unimodal);
    CHECK(classify_modality(stationary_symmetric(1.0)) == Modality::Flat);
    CHECK(classify_modality(stationary_symmetric(0.9)) == Modality::Bimodal);
    CHECK(classify_modality(stationary_symmetric(0.5)) == Modality::Bimodal);
    CHECK(stationary_modality(3.0) == Modality::Unimodal);
    CHECK(stationary_modality(1.0) == Modality::Flat);
    CHECK(stationary_modality(0.5) == Modality::Bimodal);
    const auto c3 = stationary_symmetric(3.0).density();
    const std::size_t m = c3.size() / 2;
    CHECK(c3[m] - 2 * c3[m - 1] + c3[m - 2] < 0.0);
}

TEST_CASE("drift and diffusion signs") {
    const auto s = sym(500, 0.00004, 0.001);
    CHECK(std::abs(drift(0.5, s)) < 1e-18);
    const HerdingParams a(500, 0.00004, 0.001, 0.001, 0.003);
    CHECK(drift(0.5, a) < 0.0);
    for (double x : midpoint_grid(2000)) CHECK(diffusion(x, a) > 0.0);
    CHECK_THROWS_AS(drift(1.5, a), std::out_of_range);
    CHECK_THROWS_AS(diffusion(-0.1, a), std::out_of_range);
}

TEST_CASE("continuum drift and diffusion agree with the rates to O(1/N^2)") {
    for (int n : {50, 500, 5000}) {
        const auto p = HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003);
        double worst_a = 0.0;
        double worst_d = 0.0;
        for (int c = 0; c <= n; c += std::max(1, n / 100)) {
            const double x = static_cast<double>(c) / n;
            const Rates r = asymmetric_rates({c, 0}, p);
            worst_a = std::max(worst_a, std::abs(drift(x, p) - (r.up - r.down) / n));
            worst_d = std::max(worst_d, std::abs(diffusion(x, p) - (r.up + r.down) / (double(n) * n)));
        }
        const double n2 = double(n) * n;
        // The residuals are exactly the explicit 1/N^2 terms: beta*delta/N^2 and beta*delta/N^2 at the edges.
        CHECK(worst_a * n2 <= 1.0001 * p.beta() * p.delta());
        CHECK(worst_d * n2 <= 1.0001 * p.beta() * p.delta());
    }
}

TEST_CASE("stationary_numeric normalization and errors") {
    const auto p = HerdingParams::with_ratio(500, 0.0039, 0.5, 0.003);
    CHECK(stationary_numeric(p).integral() == doctest::Approx(1.0).epsilon(1e-6));
    const HerdingParams frozen(500, 0.0, 0.001, 0.001, 0.003);
    CHECK_THROWS_AS(stationary_numeric(frozen), std::domain_error);
}

TEST_CASE("stationary_numeric with delta = 0 matches the symmetric form") {
    // The symmetric density is the large-N limit; at N = 5000 the 1/N terms
    // of D(x) are small enough for both curves to agree everywhere.
    for (double eps : {0.5, 1.0, 3.0}) {
        const auto p = HerdingParams::symmetric(5000, 1.9 / 5000, eps);
        CHECK(l1_distance(stationary_numeric(p), stationary_symmetric(eps)) <= 0.01);
    }
}

TEST_CASE("asymmetry lowers the mean chartist fraction") {
    for (int n : {50, 500, 5000}) {
        const auto with = HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003);
        const auto without = HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.0);
        CHECK(stationary_numeric(with).mean() < stationary_numeric(without).mean());
    }
}

TEST_CASE("mass compresses toward x = 0 as N grows") {
    double previous = 1.0;
    for (int n : {50, 500, 5000}) {
        const double m = stationary_numeric(HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003)).mean();
        CHECK(m < previous);
        previous = m;
    }
}

TEST_CASE("stationary_approx reduces to symmetric at delta = 0") {
    const auto p = HerdingParams::with_ratio(500, 0.0039, 0.4, 0.0);
    const auto a = stationary_approx(p);
    const auto s = stationary_symmetric(0.4);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.density()[i] == doctest::Approx(s.density()[i]).epsilon(1e-10));
    CHECK_THROWS_AS(stationary_approx(HerdingParams(500, 0.0039, 0.001, 0.001, 0.0)), std::invalid_argument);
}

TEST_CASE("stationary_approx tail ratio shrinks with N") {
    double previous = 1e300;
    for (int n : {50, 500, 5000}) {
        const auto c = stationary_approx(HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003));
        // Cells 1800 and 200 of 2000 have midpoints 0.90025 and 0.10025.
        const double ratio = c.density()[1800] / c.density()[200];
        CHECK(ratio < previous);
        previous = ratio;
    }
}

TEST_CASE("stationary_approx tracks stationary_numeric at large N") {
    const auto p = HerdingParams::with_ratio(5000, 1.9 / 5000, 0.5, 0.003);
    CHECK(l1_distance(stationary_approx(p), stationary_numeric(p)) < 0.05);
}

TEST_CASE("mean first passage time closed form") {
    const auto p = HerdingParams::symmetric(500, 0.02, 0.25, RateBound::PerAgent);
    CHECK(mean_first_passage_time(p) == doctest::Approx(25000.0 * 2.0 * std::numbers::pi).epsilon(1e-12));
    CHECK(passage_time_factor(0.5) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2).epsilon(1e-14));
    // Continuity across the series boundary.
    const double v_edge = 1e-2 / std::numbers::pi;
    CHECK(passage_time_factor(0.5 + v_edge * 0.999999) ==
          doctest::Approx(passage_time_factor(0.5 + v_edge * 1.000001)).epsilon(1e-9));
    CHECK(passage_time_factor(0.5 + 1e-7) == doctest::Approx(passage_time_factor(0.5)).epsilon(1e-12));
    // Divergence as eps -> 0.
    CHECK(passage_time_factor(1e-4) > passage_time_factor(1e-3));
    CHECK(passage_time_factor(1e-3) > passage_time_factor(1e-2));
    CHECK(passage_time_factor(1e-4) > 3000.0);
    CHECK_THROWS_AS(passage_time_factor(0.0), std::domain_error);
    CHECK_THROWS_AS(passage_time_factor(1.0), std::domain_error);
    CHECK_THROWS_AS(mean_first_passage_time(HerdingParams::with_ratio(500, 0.0039, 0.5, 0.003)),
                    std::domain_error);
}

TEST_CASE("closed form agrees with the exact discrete passage time at large N") {
    // Continuum limit of the full 0 -> N passage; the discrete chain converges as N grows.
    for (double eps : {0.25, 0.5}) {
        const int n = 4000;
        const auto p = HerdingParams::symmetric(n, 1.9 / n, eps);
        const oracle::Chain ch{n, p.beta(), p.k1(), p.k2(), 0.0};
        CHECK(oracle::passage_up(ch, 0, n) == doctest::Approx(mean_first_passage_time(p)).epsilon(0.02));
    }
}

TEST_CASE("measure_switching on synthetic trajectories") {
    std::vector<double> flat(1000, 0.1);
    CHECK(measure_switching(flat).n_switches == 0);
    CHECK(measure_switching(std::vector<double>{}).n_switches == 0);

    // Square wave: 100 low, 50 high, repeated four times.
    std::vector<double> wave;
    for (int k = 0; k < 4; ++k) {
        wave.insert(wave.end(), 100, 0.1);
        wave.insert(wave.end(), 50, 0.9);
    }
    const auto s = measure_switching(wave);
    CHECK(s.n_switches == 7);
    REQUIRE(s.t1);
    REQUIRE(s.t2);
    CHECK(*s.t1 == doctest::Approx(100.0));
    CHECK(*s.t2 == doctest::Approx(50.0));
    CHECK(s.completed_low == 3);
    CHECK(s.completed_high == 3);
    CHECK_THROWS_AS(measure_switching(wave, 0.8, 0.2), std::invalid_argument);
}

TEST_CASE("hysteresis ignores excursions that stay between the bands") {
    std::vector<double> path{0.1, 0.5, 0.7, 0.5, 0.2, 0.6, 0.8, 0.6, 0.3, 0.1};
    const auto s = measure_switching(path);
    CHECK(s.n_switches == 2);
}

TEST_CASE("time to bubble grows with N under asymmetry") {
    // Exact discrete oracle for the passage from the lower to the upper band.
    double previous = 0.0;
    for (int n : {100, 500, 2000}) {
        const auto p = HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003);
        const oracle::Chain ch{n, p.beta(), p.k1(), p.k2(), p.delta()};
        const double t1 = oracle::passage_up(ch, n / 4, 3 * n / 4);
        CHECK(t1 > previous);
        previous = t1;
    }
}

TEST_CASE("simulated time to bubble grows with N") {
    double previous = 0.0;
    for (int n : {100, 500}) {
        const auto p = HerdingParams::with_ratio(n, 1.9 / n, 0.5, 0.003);
        HerdingChain chain(p, HerdingState{});
        SwitchDetector det(0.25, 0.75);
        Random rng(derive_seed(17, static_cast<std::uint64_t>(n)));
        chain.run(60'000'000, rng, [&](const HerdingState& s) { det.observe(s.n_c / double(n)); });
        const auto st = det.stats();
        REQUIRE(st.t1);
        CHECK(st.completed_low >= 10);
        CHECK(*st.t1 > previous);
        previous = *st.t1;
    }
}

TEST_CASE("occupancy binning spreads states by overlap") {
    OccupancyHistogram h(1);
    h.add(0);
    h.add(1);
    const auto m = h.bin_masses(4);
    for (double v : m) CHECK(v == doctest::Approx(0.25));
    CHECK(h.mean_fraction() == doctest::Approx(0.5));

    // The exact eps = 1 law is uniform over N + 1 states and bins flat.
    const oracle::Chain ch{50, 0.019, 1.0 / 50, 1.0 / 50, 0.0};
    const auto law = oracle::stationary_law(ch);
    for (double v : bin_state_masses(law, 50)) CHECK(v == doctest::Approx(0.02).epsilon(1e-9));
}
