#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "mabm/random.hpp"
#include "mabm/stats.hpp"

using namespace mabm;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
    Random rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

std::vector<double> laplace(std::size_t n, std::uint64_t seed) {
    Random rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = std::log1p(-rng.uniform()) - std::log1p(-rng.uniform());
    return v;
}

}  // namespace

TEST_CASE("white noise stays inside the 3/sqrt(T) band") {
    const auto v = gaussian(100'000, 1);
    const double band = 3.0 / std::sqrt(1e5);
    for (double r : acf(v, 50)) CHECK(std::abs(r) < band);
    for (double r : volatility_acf(v, 50)) CHECK(std::abs(r) < band);
}

TEST_CASE("AR(1) autocorrelation decays geometrically") {
    Random rng(2);
    std::vector<double> v(1'000'000);
    double x = 0.0;
    for (double& y : v) y = x = 0.9 * x + rng.normal();
    const auto r = acf(v, 20);
    for (std::size_t lag = 1; lag <= 20; ++lag)
        CHECK(std::abs(r[lag - 1] - std::pow(0.9, double(lag))) < 0.02);
}

TEST_CASE("alternating series is perfectly anticorrelated at lag 1") {
    std::vector<double> v;
    for (int i = 0; i < 10'000; ++i) v.push_back(i % 2 ? 1.0 : -1.0);
    const auto r = acf(v, 2);
    CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("acf preconditions") {
    std::vector<double> c(1000, 2.0);
    CHECK_THROWS_AS(acf(c, 10), std::domain_error);
    const auto v = gaussian(30, 3);
    CHECK_THROWS_AS(acf(v, 10), std::invalid_argument);
    CHECK_THROWS_AS(acf(v, 0), std::invalid_argument);
}

TEST_CASE("two-regime series clusters on the regime length") {
    // Blocks of 1000 steps with sigma 1 or 3 drawn independently per block.
    // Squared-return ACF is (Var v / Var r^2) (1 - L / 1000) with v = sigma^2.
    Random rng(4);
    std::vector<double> v;
    v.reserve(1'000'000);
    for (int b = 0; b < 1000; ++b) {
        const double s = rng.uniform() < 0.5 ? 1.0 : 3.0;
        for (int i = 0; i < 1000; ++i) v.push_back(s * rng.normal());
    }
    const auto r = volatility_acf(v, 1200);
    const double scale = 16.0 / 98.0;
    for (std::size_t lag : {1, 250, 500, 750})
        CHECK(std::abs(r[lag - 1] - scale * (1.0 - lag / 1000.0)) < 0.03);
    for (std::size_t lag = 1; lag <= 900; ++lag) REQUIRE(r[lag - 1] > 0.0);
    CHECK(std::abs(r[1099]) < 0.03);
}

TEST_CASE("excess kurtosis oracles") {
    CHECK(std::abs(excess_kurtosis(gaussian(1'000'000, 5))) < 0.05);
    CHECK(excess_kurtosis(laplace(1'000'000, 6)) == doctest::Approx(3.0).epsilon(0.2 / 3.0));
    std::vector<double> c(1000, 1.0);
    CHECK_THROWS_AS(excess_kurtosis(c), std::domain_error);
    CHECK_THROWS_AS(excess_kurtosis(std::vector<double>(999, 1.0)), std::invalid_argument);
}

TEST_CASE("Hill estimator on a symmetric Pareto sample") {
    Random rng(7);
    std::vector<double> v(1'000'000);
    for (double& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(1.0 - rng.uniform(), -1.0 / 3.0);
    const auto t = tail_exponent(v, 0.05);
    CHECK(t.alpha == doctest::Approx(3.0).epsilon(0.1 / 3.0));
    CHECK(t.k == 50'000);
    CHECK(t.std_error == doctest::Approx(t.alpha / std::sqrt(50'000.0)));
    std::vector<double> scaled = v;
    std::vector<double> shifted = v;
    for (double& x : scaled) x *= 7.5;
    for (double& x : shifted) x += 1e-3;
    CHECK(tail_exponent(scaled, 0.05).alpha == doctest::Approx(t.alpha).epsilon(1e-9));
    CHECK(tail_exponent(shifted, 0.05).alpha == doctest::Approx(t.alpha).epsilon(1e-6));
}

TEST_CASE("Hill estimate drifts upward on an exponential tail") {
    const auto v = laplace(1'000'000, 8);
    CHECK(tail_exponent(v, 0.01).alpha > tail_exponent(v, 0.05).alpha);
    CHECK(tail_exponent(v, 0.05).alpha > tail_exponent(v, 0.2).alpha);
}

TEST_CASE("Hill preconditions") {
    const auto v = gaussian(2000, 9);
    CHECK_THROWS_AS(tail_exponent(v, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(tail_exponent(v, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(tail_exponent(v, 0.0), std::invalid_argument);
}

TEST_CASE("aggregation restores Gaussianity as 3/h for Laplace") {
    const auto v = laplace(1'000'000, 10);
    const std::size_t h[] = {1, 10, 100};
    const auto k = aggregation_kurtosis(v, h);
    CHECK(k.at(1) == doctest::Approx(3.0).epsilon(0.07));
    CHECK(std::abs(k.at(10) - 0.3) < 0.08);
    CHECK(std::abs(k.at(100) - 0.03) < 0.15);
    const auto g = aggregation_kurtosis(gaussian(1'000'000, 11), h);
    for (const auto& [hz, val] : g) CHECK(std::abs(val) < 0.15);
    const std::size_t too_long[] = {2000};
    CHECK_THROWS_AS(aggregation_kurtosis(v, too_long), std::invalid_argument);
}

TEST_CASE("estimators are invariant under shifts and positive scaling") {
    const auto v = laplace(100'000, 12);
    std::vector<double> w = v;
    for (double& x : w) x = 3.0 * x + 10.0;
    const auto a = acf(v, 10);
    const auto b = acf(w, 10);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-8).scale(1.0));
    CHECK(excess_kurtosis(v) == doctest::Approx(excess_kurtosis(w)).epsilon(1e-8));
}

TEST_CASE("analyze is pure and reports in range") {
    const auto v = laplace(200'000, 13);
    const auto r1 = analyze(v);
    const auto r2 = analyze(v);
    CHECK(r1.acf_returns == r2.acf_returns);
    CHECK(r1.excess_kurtosis == r2.excess_kurtosis);
    CHECK(r1.n_samples == 200'000);
    CHECK(r1.acf_returns.size() == 50);
    CHECK(r1.aggregation_kurtosis.size() == 3);
    for (double x : r1.acf_squared) {
        CHECK(x >= -1.0);
        CHECK(x <= 1.0);
    }
    std::ostringstream os;
    write_report_csv(os, r1);
    CHECK(os.str().rfind("key,value\nn_samples,200000\n", 0) == 0);
    std::ostringstream acf_os;
    write_acf_csv(acf_os, std::vector<double>{0.5, -0.25});
    CHECK(acf_os.str() == "lag,acf\n1,0.5\n2,-0.25\n");
}

TEST_CASE("absolute-return proxy") {
    const auto v = gaussian(100'000, 14);
    const auto a = volatility_acf(v, 5, VolatilityProxy::Absolute);
    for (double r : a) CHECK(std::abs(r) < 3.0 / std::sqrt(1e5));
}
