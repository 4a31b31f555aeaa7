// Acceptance gate: runs each criterion once and prints one PASS/FAIL line per
// criterion. Exit status is 0 only when every criterion passes, including its
// runtime bound.

#include "properties.hpp"

#include <seqind/seqind.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace seqind;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> run;
};

const std::vector<std::uint64_t> kSchedule{100, 1000, 10000, 100000};
const std::vector<double> kDeciles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

std::string fmt(double x) { return format_real(x); }

BoundedSequence v_sqrt2() { return kronecker(testsupport::kSqrt2m1); }
BoundedSequence v_sqrt3() { return kronecker(testsupport::kSqrt3m1); }

Outcome exact_identities()
{
    std::mt19937_64 rng(1);
    std::size_t bad_count = 0, bad_product = 0, bad_mean = 0;
    double worst_product = 0.0, worst_mean = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t m = 1 + rng() % 3;
        const auto seqs = props::sequences(rng, m);
        const auto N = props::natural(rng, 1, 10000);
        std::vector<double> corner;
        std::vector<Integrand> indicators;
        for (std::size_t i = 0; i < m; ++i) {
            corner.push_back(props::uniform(rng, 0.01, 1.0));
            indicators.push_back(Integrand::indicator(0.0, corner.back()));
        }
        if (delta_sum(seqs, indicators, N) != static_cast<double>(rectangle_count(seqs, corner, N)))
            ++bad_count;

        const auto fs = props::functions(rng, m);
        double prod = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto prefix = materialize(seqs[i], N);
            const auto F = empirical_cdf(prefix);
            const double integral = stieltjes(fs[i], F);
            prod *= integral;
            const double diff = std::fabs(sample_mean(fs[i], prefix.values()) - integral);
            worst_mean = std::max(worst_mean, diff);
            bad_mean += diff > 1e-12 ? 1 : 0;
        }
        const double pdiff = std::fabs(product_form(seqs, fs, N) - prod);
        worst_product = std::max(worst_product, pdiff);
        bad_product += pdiff > 1e-12 ? 1 : 0;
    }
    return {bad_count == 0 && bad_product == 0 && bad_mean == 0,
            "100 instances; count mismatches " + std::to_string(bad_count) + ", max |product diff| " +
                fmt(worst_product) + ", max |mean - integral| " + fmt(worst_mean)};
}

Outcome dependent_gap()
{
    const std::vector<BoundedSequence> seqs{v_sqrt2(), v_sqrt2()};
    const auto id = Integrand::continuous("x", [](double x) { return x; }, 1.0);
    const std::vector<Integrand> fs{id, id};
    const double gap = form_gap(seqs, fs, 100000);
    const double err = std::fabs(gap - 1.0 / 12);
    return {err < 0.005, "gap " + fmt(gap) + ", |gap - 1/12| = " + fmt(err)};
}

Outcome independent_pair()
{
    const std::vector<BoundedSequence> seqs{v_sqrt2(), v_sqrt3()};
    const auto rep = statind_test(seqs, FunctionBattery::standard(), kSchedule);
    bool ok = rep.verdict == Verdict::independent && rep.max_terminal_gap < 0.01;
    double worst = 0.0;
    std::string worst_kappa;
    for (const auto& kappa : kappa_family_builder(10000)) {
        const auto kr = kappa_independence_test(seqs, kappa, kDeciles);
        if (kr.max_abs_residual >= worst) {
            worst = kr.max_abs_residual;
            worst_kappa = kappa.rule();
        }
        ok = ok && kr.max_abs_residual < 0.02;
    }
    return {ok, "statind " + std::string(to_string(rep.verdict)) + " (max |gap| " + fmt(rep.max_terminal_gap) +
                    "), max rectangle residual " + fmt(worst) + " along " + worst_kappa};
}

Outcome reflected_pair()
{
    const auto v = v_sqrt2();
    const std::vector<BoundedSequence> seqs{v, reflection(v)};
    EquivalenceOptions opts;
    opts.fixed_grid = kDeciles;
    const auto family = kappa_family_builder(10000);
    const auto rep = equivalence_harness(seqs, FunctionBattery::standard(), family, kSchedule, opts);
    bool ok = rep.statind.verdict == Verdict::dependent && rep.agreement == Agreement::agree &&
              rep.kappa_reports.size() == family.size();
    double centre_worst = 0.0;
    for (const auto& kr : rep.kappa_reports) {
        ok = ok && kr.verdict == Verdict::dependent;
        bool found = false;
        for (const auto& r : kr.residuals)
            if (r.corner == std::vector<double>{0.5, 0.5}) {
                found = true;
                centre_worst = std::max(centre_worst, std::fabs(r.residual + 0.25));
            }
        ok = ok && found;
    }
    ok = ok && centre_worst <= 0.02;
    const int exit_code = rep.agreement == Agreement::counterexample ? kExitCounterexample : kExitAgree;
    ok = ok && exit_code == 0;
    return {ok, "statind " + std::string(to_string(rep.statind.verdict)) + ", " +
                    std::to_string(rep.kappa_reports.size()) + " kappa tests dependent, max |residual(0.5,0.5) + 0.25| " +
                    fmt(centre_worst) + ", agreement " + std::string(to_string(rep.agreement)) + ", exit " +
                    std::to_string(exit_code)};
}

Outcome measurability()
{
    const auto blk = make_block(0.25, 0.75, 2);
    const std::vector<BoundedSequence> seqs{blk};
    const std::vector<double> half{0.5};
    const auto pool = block_ends(blk, (1u << 21) - 2); // block ends, j <= 20
    const auto full = detect_measurable(blk, pool, half, 0.01, 5);
    // The pool holds 20 checkpoints, so the minimum pool size is lowered to it.
    const HellyOptions opts{0.01, 5, pool.size()};
    const auto kappa = helly_extract(seqs, pool, half, opts);
    const auto along = detect_measurable(blk, kappa, half, 0.01, 5);
    const auto again = helly_extract(seqs, kappa, half, {0.01, 5, 5});
    const bool ok = !full.measurable && full.oscillation[0] > 0.2 && along.measurable &&
                    along.oscillation[0] <= 0.01 && again == kappa;
    return {ok, "oscillation along all block ends " + fmt(full.oscillation[0]) + "; extracted " +
                    std::to_string(kappa.size()) + " of " + std::to_string(pool.size()) +
                    " ends, trailing oscillation " + fmt(along.oscillation[0]) + ", idempotent " +
                    (again == kappa ? "yes" : "no")};
}

Outcome approximation()
{
    std::vector<double> sample(10000);
    for (std::size_t i = 0; i < sample.size(); ++i)
        sample[i] = (static_cast<double>(i) + 0.5) / 10000.0;
    const StepCDF F = empirical_cdf(sample, Interval{});
    const std::vector<StepCDF> Fs{F};
    std::mt19937_64 rng(6);
    std::size_t violations = 0, gap_misses = 0;
    double worst_ratio = 0.0;
    for (int target = 0; target < 20; ++target) {
        const double x = props::uniform(rng, 0.05, 0.95);
        const auto f = props::pwl(rng, "target" + std::to_string(target));
        const auto g = Integrand::continuous(
            "smooth" + std::to_string(target),
            [a = props::uniform(rng, 1.0, 6.0), p = props::uniform(rng, 0.0, 6.0)](double t) { return std::sin(a * t + p); },
            6.0);
        for (double eps : {0.1, 0.01}) {
            const auto s = fit_sandwich(x, eps, F);
            for (const Integrand* h : {&f, &g}) {
                const auto env = step_envelope(*h, Fs, eps);
                for (std::size_t i = 0; i <= 1000; ++i) {
                    const double t = i / 1000.0;
                    const double ind = t < x ? 1.0 : 0.0;
                    violations += (s.lower(t) <= ind && ind <= s.upper(t)) ? 0 : 1;
                    violations += (env.lower(t) <= (*h)(t) && (*h)(t) <= env.upper(t)) ? 0 : 1;
                }
                gap_misses += env.gap_bound < eps ? 0 : 1;
                worst_ratio = std::max(worst_ratio, env.gap_bound / eps);
            }
            gap_misses += *s.gap_bound < eps ? 0 : 1;
            worst_ratio = std::max(worst_ratio, *s.gap_bound / eps);
        }
    }
    return {violations == 0 && gap_misses == 0,
            "20 targets x eps {0.1, 0.01}: domination violations " + std::to_string(violations) +
                ", gap misses " + std::to_string(gap_misses) + ", max gap/eps " + fmt(worst_ratio)};
}

Outcome invariants()
{
    std::size_t total = 0, failed = 0;
    std::string first;
    for (const auto& r : props::invariant_suite(20261015)) {
        total += r.cases;
        if (!r.ok()) {
            ++failed;
            if (first.empty())
                first = "; first failure: " + r.name + " " + r.first_failure;
        }
    }
    return {failed == 0 && total >= 1000,
            std::to_string(total) + " cases, " + std::to_string(failed) + " failing properties" + first};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {"AC1", "exact identity suite", 30, exact_identities},
        {"AC2", "dependent-pair gap", 5, dependent_gap},
        {"AC3", "independent-pair verdict", 120, independent_pair},
        {"AC4", "reflected pair: both tests dependent, agreement", 120, reflected_pair},
        {"AC5", "measurability machinery", 120, measurability},
        {"AC6", "approximation machinery", 120, approximation},
        {"AC7", "invariant suite", 120, invariants},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        }
        catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget_seconds;
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.budget_seconds);
        std::printf("%s %s: %s [%s] %s%s\n", pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), timing,
                    out.detail.c_str(), in_time ? "" : " (over time budget)");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
