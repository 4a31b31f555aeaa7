#include "support.hpp"

#include <seqind/distribution.hpp>
#include <seqind/errors.hpp>
#include <seqind/integrand.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace seqind;

namespace {

std::vector<double> uniform_sample(std::size_t n)
{
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return xs;
}

// Kolmogorov-style discrepancy of a sample with distinct values, by sorting.
double discrepancy_oracle(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        worst = std::max(worst, std::fabs(static_cast<double>(i) / n - xs[i]));
        worst = std::max(worst, std::fabs(static_cast<double>(i + 1) / n - xs[i]));
    }
    return worst;
}

std::vector<double> test_grid(std::size_t n = 1000)
{
    std::vector<double> g;
    for (std::size_t i = 0; i <= n; ++i)
        g.push_back(static_cast<double>(i) / static_cast<double>(n));
    return g;
}

} // namespace

TEST_CASE("empirical CDF of a constant is a unit jump")
{
    const auto c = constant(0.3);
    const auto F = empirical_cdf(c, naturals_index(100, 10), 7);
    REQUIRE(F.size() == 1);
    CHECK(F.points()[0] == 0.3);
    CHECK(F.masses()[0] == 1.0);
    CHECK(cdf_eval(F, 0.3) == 0.0);
    CHECK(cdf_eval(F, 0.30001) == 1.0);
    CHECK(cdf_eval(F, 0.0) == 0.0);
    CHECK(cdf_eval(F, 1.0) == 1.0);
}

TEST_CASE("empirical CDF of an alternating sequence")
{
    const auto F = empirical_cdf(materialize(periodic({0.0, 1.0}), 10));
    REQUIRE(F.size() == 2);
    CHECK(F.masses()[0] == 0.5);
    CHECK(F.masses()[1] == 0.5);
    CHECK(cdf_eval(F, 0.5) == 0.5);
    CHECK(cdf_eval(F, 0.0) == 0.0);
    CHECK(cdf_eval(F, 1.0) == 0.5);
}

TEST_CASE("empirical CDF of a Kronecker sequence is close to uniform")
{
    const auto p = materialize(kronecker(testsupport::kSqrt2m1), 10000);
    const auto F = empirical_cdf(p);
    const double oracle = discrepancy_oracle({p.values().begin(), p.values().end()});
    CHECK(sup_distance_to_uniform(F) == Catch::Approx(oracle).margin(1e-15));
    CHECK(oracle < 0.01);
}

TEST_CASE("F(x) counts the preimage of [a, x)")
{
    const auto v = kronecker(testsupport::kSqrt3m1);
    const auto p = materialize(v, 3000);
    const auto F = empirical_cdf(p);
    for (double x : {0.0, 0.1, 0.25, 0.5, 0.777, 1.0})
        CHECK(F(x) == density_ratio(prefix_count(preimage(v, 0.0, x), 3000), 3000));
}

TEST_CASE("explicit StepCDF validation")
{
    const Interval iv;
    CHECK_NOTHROW(StepCDF(iv, {0.0, 1.0}, {0.5, 0.5}));
    CHECK_THROWS_AS(StepCDF(iv, {0.0, 1.0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(StepCDF(iv, {1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(StepCDF(iv, {0.0, 2.0}, {0.5, 0.5}), std::invalid_argument);
    const StepCDF F(iv, {0.0, 1.0}, {0.5, 0.5});
    CHECK(F(0.5) == 0.5);
}

TEST_CASE("Stieltjes integrals")
{
    const StepCDF two(Interval{}, {0.0, 1.0}, {0.5, 0.5});
    CHECK(stieltjes([](double) { return 1.0; }, two) == 1.0);
    CHECK(stieltjes([](double x) { return x; }, two) == 0.5);

    const auto p = materialize(kronecker(testsupport::kSqrt2m1), 10000);
    const auto F = empirical_cdf(p);
    auto sq = [](double x) { return x * x; };
    long double direct = 0.0L;
    for (double x : p.values())
        direct += static_cast<long double>(x) * x;
    direct /= 10000;
    const double integral = stieltjes(sq, F);
    CHECK(integral == Catch::Approx(static_cast<double>(direct)).margin(1e-12));
    CHECK(std::fabs(integral - 1.0 / 3) < 0.01);
    CHECK(integral == sample_mean(sq, p.values()));

    CHECK_THROWS_AS(stieltjes([](double) { return std::nan(""); }, two), std::domain_error);
}

TEST_CASE("continuity grid without atoms is the decile grid")
{
    const auto F = empirical_cdf(uniform_sample(10000), Interval{});
    const std::vector<StepCDF> Fs{F};
    const auto grid = continuity_grid(Fs, 9, 1e-3);
    REQUIRE(grid.size() == 9);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(grid[i] == Catch::Approx((i + 1) / 10.0).margin(1e-12));
    const auto mid = continuity_grid(Fs, 1, 1e-3);
    REQUIRE(mid.size() == 1);
    CHECK(mid[0] == 0.5);
}

TEST_CASE("continuity grid keeps clear of atoms")
{
    const StepCDF jump(Interval{}, {0.3}, {1.0});
    const std::vector<StepCDF> Fs{jump};
    const auto grid = continuity_grid(Fs, 9, 0.05);
    REQUIRE(grid.size() == 9);
    for (double x : grid) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        CHECK_FALSE((x > 0.25 && x < 0.35));
    }
    CHECK(std::is_sorted(grid.begin(), grid.end()));

    // Mixed: atoms from a periodic sequence, clearance checked pointwise.
    const auto G = empirical_cdf(materialize(periodic({0.2, 0.5, 0.9}), 300));
    const std::vector<StepCDF> Gs{G, jump};
    const auto g2 = continuity_grid(Gs, 20, 0.01);
    for (double x : g2)
        for (double atom : {0.2, 0.5, 0.9, 0.3})
            CHECK(std::fabs(x - atom) >= 0.01);
}

TEST_CASE("continuity grid reports when atoms leave no room")
{
    const StepCDF dense(Interval{}, {0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.2, 0.2, 0.2, 0.2});
    const std::vector<StepCDF> Fs{dense};
    CHECK_THROWS_AS(continuity_grid(Fs, 3, 0.2), GridError);
}

TEST_CASE("ramp sandwich values")
{
    const auto s = sandwich_indicator(0.5, 0.1, Interval{});
    CHECK(s.lower(0.39) == 1.0);
    CHECK(s.lower(0.45) == Catch::Approx(0.5));
    CHECK(s.lower(0.5) == 0.0);
    CHECK(s.upper(0.5) == 1.0);
    CHECK(s.upper(0.55) == Catch::Approx(0.5));
    CHECK(s.upper(0.61) == 0.0);
    for (double t : test_grid()) {
        const double ind = t < 0.5 ? 1.0 : 0.0;
        CHECK(s.lower(t) <= ind);
        CHECK(ind <= s.upper(t));
    }
    CHECK_THROWS_AS(sandwich_indicator(0.05, 0.1, Interval{}), std::invalid_argument);
    CHECK_THROWS_AS(sandwich_indicator(1.0, 0.1, Interval{}), std::invalid_argument);
}

TEST_CASE("sandwich near the right end is clipped")
{
    const auto s = sandwich_indicator(0.95, 0.1, Interval{});
    CHECK(s.upper(1.0) == Catch::Approx(0.5));
    for (double t : test_grid())
        CHECK((t < 0.95 ? 1.0 : 0.0) <= s.upper(t));
}

TEST_CASE("sandwich gap against a CDF")
{
    const auto F = empirical_cdf(uniform_sample(1000), Interval{});
    const auto s = sandwich_indicator(0.5, 0.05, Interval{}, F);
    REQUIRE(s.gap_bound);
    REQUIRE(s.achieved_gap);
    // The mass within 0.05 of 0.5 is 0.1 for the uniform sample.
    CHECK(*s.gap_bound == Catch::Approx(0.1).margin(1e-3));
    CHECK(*s.achieved_gap <= *s.gap_bound);
    CHECK(*s.achieved_gap == Catch::Approx(0.05).margin(1e-3));

    const auto fit = fit_sandwich(0.5, 0.01, F);
    CHECK(*fit.gap_bound < 0.01);

    const auto atom = empirical_cdf(materialize(constant(0.5), 10));
    CHECK_THROWS_AS(fit_sandwich(0.5, 0.5, atom), DepthError);
}

TEST_CASE("step envelope of a constant is exact")
{
    const auto F = empirical_cdf(uniform_sample(100), Interval{});
    const std::vector<StepCDF> Fs{F};
    const auto env = step_envelope(Integrand::continuous("c", [](double) { return 0.7; }), Fs, 0.1);
    CHECK(env.gap_bound == 0.0);
    for (double t : test_grid(100)) {
        CHECK(env.lower(t) == 0.7);
        CHECK(env.upper(t) == 0.7);
    }
}

TEST_CASE("step envelope of the identity")
{
    const auto F = empirical_cdf(uniform_sample(10000), Interval{});
    const std::vector<StepCDF> Fs{F};
    const auto id = Integrand::continuous("x", [](double x) { return x; }, 1.0);
    const auto env = step_envelope(id, Fs, 0.1);
    CHECK(env.cells <= 20);
    CHECK(env.gap_bound < 0.1);
    // Oracle for the gap: Σ over sample points of (upper - lower), averaged.
    long double direct = 0.0L;
    for (double x : F.points())
        direct += env.upper(x) - env.lower(x);
    CHECK(env.gap_bound == Catch::Approx(static_cast<double>(direct / 10000)).margin(1e-12));
    for (double t : test_grid()) {
        CHECK(env.lower(t) <= t);
        CHECK(t <= env.upper(t));
    }
}

TEST_CASE("step envelope of sin 2 pi x dominates on a fine grid")
{
    const auto F = empirical_cdf(uniform_sample(10000), Interval{});
    const std::vector<StepCDF> Fs{F};
    auto f = [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
    for (double eps : {0.1, 0.01}) {
        const auto env = step_envelope(Integrand::continuous("sin", f, 2.0 * std::numbers::pi), Fs, eps);
        CHECK(env.gap_bound < eps);
        for (double t : test_grid()) {
            CHECK(env.lower(t) <= f(t));
            CHECK(f(t) <= env.upper(t));
        }
    }
}

TEST_CASE("step envelope breakpoints avoid atoms")
{
    const auto G = empirical_cdf(materialize(periodic({0.25, 0.5, 0.75}), 30));
    const std::vector<StepCDF> Fs{G};
    const auto env = step_envelope(Integrand::continuous("x", [](double x) { return x; }, 1.0), Fs, 0.05);
    for (double b : env.lower.breakpoints)
        for (double atom : {0.25, 0.5, 0.75})
            CHECK(std::fabs(b - atom) >= kDefaultAtomTol);
    CHECK(env.gap_bound < 0.05);
}

TEST_CASE("step envelope reports an exhausted budget")
{
    const auto F = empirical_cdf(uniform_sample(10000), Interval{});
    const std::vector<StepCDF> Fs{F};
    EnvelopeOptions opts;
    opts.max_breakpoints = 10;
    CHECK_THROWS_AS(step_envelope(Integrand::continuous("x", [](double x) { return x; }, 1.0), Fs, 1e-4, opts),
                    DepthError);
}
