#pragma once

// The multilinear forms
//
//   Δ_N(h_1..h_m) = (1/N) Σ_{n<=N} h_1(v_1(n)) ··· h_m(v_m(n))
//   δ_N(h_1..h_m) = Π_i (1/N) Σ_{n<=N} h_i(v_i(n))
//
// and the two independence tests built on them: the averaging test
// (|Δ_N - δ_N| -> 0 over a battery of continuous functions) and the
// rectangle test along a checkpoint sequence kappa (d_kappa of the joint
// preimage equals the product of the marginal kappa-distribution functions).
// The equivalence harness runs both and checks that their verdicts agree.
//
// All sums are exact (see ExactSum), so results do not depend on how the
// index range is partitioned, and the gap Δ_N - δ_N is formed exactly before
// the single final rounding.

#include <seqind/density.hpp>
#include <seqind/distribution.hpp>
#include <seqind/errors.hpp>
#include <seqind/exact_sum.hpp>
#include <seqind/integrand.hpp>
#include <seqind/selection.hpp>
#include <seqind/seq_core.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqind {

/// A finite, named stand-in for "every continuous function".
class FunctionBattery {
public:
    explicit FunctionBattery(std::vector<Integrand> members) : members_(std::move(members))
    {
        if (members_.empty())
            throw std::invalid_argument("battery: empty");
        std::set<std::string> seen;
        for (const auto& f : members_)
            if (!seen.insert(f.name()).second)
                throw std::invalid_argument("battery: duplicate name '" + f.name() + "'");
    }

    /// {1, x, x², sin 2πt, cos 2πt, ramp} with t = (x-a)/(b-a); the ramp is
    /// 0 up to t = 1/4, 1 from t = 3/4, linear between.
    [[nodiscard]] static FunctionBattery standard(const Interval& iv = {})
    {
        return FunctionBattery(standard_members(iv));
    }

    [[nodiscard]] static std::vector<Integrand> standard_members(const Interval& iv = {})
    {
        const double a = iv.a;
        const double len = iv.length();
        const double two_pi = 2.0 * std::numbers::pi;
        return {
            Integrand::continuous("one", [](double) { return 1.0; }, 0.0),
            Integrand::continuous("x", [](double x) { return x; }, 1.0),
            Integrand::continuous("x2", [](double x) { return x * x; }, 2.0 * std::max(std::fabs(iv.a), std::fabs(iv.b))),
            Integrand::continuous("sin2pi", [=](double x) { return std::sin(two_pi * (x - a) / len); }, two_pi / len),
            Integrand::continuous("cos2pi", [=](double x) { return std::cos(two_pi * (x - a) / len); }, two_pi / len),
            Integrand::piecewise_linear("ramp",
                                        PiecewiseLinear({a, a + 0.25 * len, a + 0.75 * len, iv.b}, {0.0, 0.0, 1.0, 1.0})),
        };
    }

    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] const Integrand& operator[](std::size_t i) const { return members_[i]; }
    [[nodiscard]] std::span<const Integrand> members() const { return members_; }
    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (const auto& f : members_)
            out.push_back(f.name());
        return out;
    }

private:
    std::vector<Integrand> members_;
};

namespace detail {

inline void check_form_args(std::span<const BoundedSequence> seqs, std::size_t nfuncs)
{
    if (seqs.empty())
        throw std::invalid_argument("forms: need at least one sequence");
    if (seqs.size() != nfuncs)
        throw std::invalid_argument("forms: " + std::to_string(seqs.size()) + " sequences but " +
                                    std::to_string(nfuncs) + " functions");
    for (const auto& s : seqs)
        if (!(s.interval() == seqs.front().interval()))
            throw std::invalid_argument("forms: sequences " + seqs.front().label() + " and " + s.label() +
                                        " live on different intervals");
}

// acc += Π factors, exactly.
inline void add_exact_term(ExactSum& acc, std::span<const double> factors)
{
    switch (factors.size()) {
    case 1:
        acc.add(factors[0]);
        break;
    case 2:
        acc.add_product(factors[0], factors[1]);
        break;
    default:
        acc.add(exact_product(factors));
    }
}

// N^{m-1} T - Π S_i, exact, then divided by N^m.
inline double exact_gap(const ExactSum& joint, std::span<const ExactSum> marginals, std::uint64_t N)
{
    const std::size_t m = marginals.size();
    const double n = static_cast<double>(N);
    ExactSum lhs = joint;
    for (std::size_t i = 1; i < m; ++i)
        lhs = lhs.scaled(n);
    ExactSum rhs = marginals[0];
    for (std::size_t i = 1; i < m; ++i)
        rhs = ExactSum::product(rhs, marginals[i]);
    rhs.negate();
    lhs.add(rhs);
    double g = lhs.value();
    for (std::size_t i = 0; i < m; ++i)
        g /= n;
    return g;
}

inline double mean_product(std::span<const ExactSum> marginals, std::uint64_t N)
{
    const double n = static_cast<double>(N);
    double p = marginals[0].value() / n;
    for (std::size_t i = 1; i < marginals.size(); ++i)
        p *= marginals[i].value() / n;
    return p;
}

struct FormSums {
    ExactSum joint;
    std::vector<ExactSum> marginals;
};

inline FormSums form_sums(std::span<const BoundedSequence> seqs, std::span<const Integrand> funcs, std::uint64_t N,
                          unsigned threads)
{
    check_form_args(seqs, funcs.size());
    if (N < 1)
        throw std::invalid_argument("forms: N must be >= 1");
    const std::size_t m = seqs.size();
    const unsigned parts = std::max(1u, threads);
    std::vector<FormSums> partial(parts, FormSums{{}, std::vector<ExactSum>(m)});
    std::vector<std::uint64_t> bounds(parts + 1);
    for (unsigned p = 0; p <= parts; ++p)
        bounds[p] = 1 + N * p / parts;
    for_each_chunk(0, parts, parts, [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<double> h(m);
        for (std::uint64_t p = lo; p < hi; ++p)
            for (std::uint64_t n = bounds[p]; n < bounds[p + 1]; ++n) {
                for (std::size_t i = 0; i < m; ++i) {
                    h[i] = funcs[i](seqs[i](n));
                    partial[p].marginals[i].add(h[i]);
                }
                add_exact_term(partial[p].joint, h);
            }
    });
    FormSums total{{}, std::vector<ExactSum>(m)};
    for (const auto& p : partial) {
        total.joint.add(p.joint);
        for (std::size_t i = 0; i < m; ++i)
            total.marginals[i].add(p.marginals[i]);
    }
    return total;
}

} // namespace detail

/// N·Δ_N, i.e. Σ_{n<=N} Π_i h_i(v_i(n)), correctly rounded. For indicator
/// functions this is an exact integer count.
[[nodiscard]] inline double delta_sum(std::span<const BoundedSequence> seqs, std::span<const Integrand> funcs,
                                      std::uint64_t N, unsigned threads = 1)
{
    return detail::form_sums(seqs, funcs, N, threads).joint.value();
}

[[nodiscard]] inline double delta_form(std::span<const BoundedSequence> seqs, std::span<const Integrand> funcs,
                                       std::uint64_t N, unsigned threads = 1)
{
    return delta_sum(seqs, funcs, N, threads) / static_cast<double>(N);
}

/// δ_N: product of the per-sequence means, multiplied left to right.
[[nodiscard]] inline double product_form(std::span<const BoundedSequence> seqs, std::span<const Integrand> funcs,
                                         std::uint64_t N, unsigned threads = 1)
{
    return detail::mean_product(detail::form_sums(seqs, funcs, N, threads).marginals, N);
}

/// Δ_N - δ_N, formed exactly and rounded once.
[[nodiscard]] inline double form_gap(std::span<const BoundedSequence> seqs, std::span<const Integrand> funcs,
                                     std::uint64_t N, unsigned threads = 1)
{
    const auto sums = detail::form_sums(seqs, funcs, N, threads);
    return detail::exact_gap(sums.joint, sums.marginals, N);
}

namespace detail {

inline void check_corners(std::span<const BoundedSequence> seqs, std::span<const double> corners)
{
    if (seqs.empty() || seqs.size() != corners.size())
        throw std::invalid_argument("rectangle: need one corner per sequence");
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const Interval& iv = seqs[i].interval();
        const double x = corners[i];
        if (!(x > iv.a) || (x > iv.b && x != kClosedAtB))
            throw std::invalid_argument("rectangle: corner " + format_real(x) + " outside (" + format_real(iv.a) +
                                        ", " + format_real(iv.b) + "]");
    }
}

} // namespace detail

/// |{n <= N : v_i(n) < x_i for all i}|. A corner of kClosedAtB admits the
/// whole interval in that coordinate.
[[nodiscard]] inline std::uint64_t rectangle_count(std::span<const BoundedSequence> seqs,
                                                   std::span<const double> corners, std::uint64_t N)
{
    detail::check_corners(seqs, corners);
    std::uint64_t count = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        bool inside = true;
        for (std::size_t i = 0; i < seqs.size() && inside; ++i)
            inside = seqs[i](n) < corners[i];
        count += inside ? 1 : 0;
    }
    return count;
}

/// Rectangle counts for every corner in grid^m over the first N terms of the
/// given columns, via an m-dimensional histogram and prefix sums. Corner
/// (g_{c_1}, ..., g_{c_m}) is stored at mixed-radix index Σ c_i·|grid|^i.
[[nodiscard]] inline std::vector<std::uint64_t> rectangle_counts_on_grid(
    std::span<const std::span<const double>> columns, std::span<const double> grid, std::uint64_t N)
{
    const std::size_t m = columns.size();
    const std::size_t g = grid.size();
    if (m == 0 || g == 0)
        throw std::invalid_argument("rectangle grid: need columns and grid points");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("rectangle grid: grid must be ascending");
    // Histogram over bucket b_i = #{grid points <= v_i(n)} in 0..g.
    std::size_t cells = 1;
    for (std::size_t i = 0; i < m; ++i)
        cells *= g + 1;
    std::vector<std::uint64_t> hist(cells, 0);
    for (std::uint64_t n = 0; n < N; ++n) {
        std::size_t idx = 0;
        std::size_t stride = 1;
        for (std::size_t i = 0; i < m; ++i) {
            const auto b = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), columns[i][n]) -
                                                    grid.begin());
            idx += b * stride;
            stride *= g + 1;
        }
        ++hist[idx];
    }
    // v < g_c  <=>  bucket <= c, so prefix sums along every axis give counts.
    std::size_t stride = 1;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t idx = 0; idx < cells; ++idx)
            if ((idx / stride) % (g + 1) != 0)
                hist[idx] += hist[idx - stride];
        stride *= g + 1;
    }
    std::size_t corners = 1;
    for (std::size_t i = 0; i < m; ++i)
        corners *= g;
    std::vector<std::uint64_t> out(corners);
    for (std::size_t c = 0; c < corners; ++c) {
        std::size_t rest = c;
        std::size_t idx = 0;
        std::size_t s = 1;
        for (std::size_t i = 0; i < m; ++i) {
            idx += (rest % g) * s;
            rest /= g;
            s *= g + 1;
        }
        out[c] = hist[idx];
    }
    return out;
}

enum class Verdict { independent, dependent, inconclusive };

[[nodiscard]] constexpr std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::independent:
        return "independent";
    case Verdict::dependent:
        return "dependent";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

struct TupleTrace {
    std::string label; // member names joined by '|'
    std::vector<std::size_t> members;
    std::vector<double> delta;   // per schedule entry
    std::vector<double> product; // per schedule entry
    std::vector<double> gap;     // per schedule entry, exact Δ_N - δ_N
};

struct RectangleResidual {
    std::vector<double> corner;
    double density = 0.0; // |S(corner) ∩ [1,k]| / k
    double product = 0.0; // Π F_i(x_i)
    double residual = 0.0;
};

struct IndependenceReport {
    std::vector<std::string> sequences;
    std::vector<std::string> battery;
    std::vector<std::uint64_t> schedule;
    std::vector<TupleTrace> tuples; // sorted by label
    std::vector<double> grid;
    std::vector<RectangleResidual> rectangle_residuals; // at the last schedule entry
    double max_terminal_gap = 0.0;
    double max_rectangle_residual = 0.0;
    double tol = kDefaultTol;
    Verdict verdict = Verdict::inconclusive;
};

struct StatIndOptions {
    double tol = kDefaultTol;
    std::size_t grid_count = 9; // 0 disables the rectangle residuals
    double atom_tol = kDefaultAtomTol;
    std::vector<double> fixed_grid; // used instead of a continuity grid when nonempty
};

namespace detail {

inline std::vector<RectangleResidual> rectangle_residuals(std::span<const PrefixView> prefixes, std::uint64_t k,
                                                          std::span<const double> grid)
{
    const std::size_t m = prefixes.size();
    std::vector<std::span<const double>> columns;
    std::vector<StepCDF> cdfs;
    for (const auto& p : prefixes) {
        columns.push_back(p.values().first(k));
        cdfs.push_back(empirical_cdf(p.values().first(k), p.interval()));
    }
    const auto counts = rectangle_counts_on_grid(columns, grid, k);
    std::vector<RectangleResidual> out;
    out.reserve(counts.size());
    const std::size_t g = grid.size();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        RectangleResidual r;
        std::size_t rest = c;
        r.product = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            r.corner.push_back(grid[rest % g]);
            r.product *= cdfs[i](grid[rest % g]);
            rest /= g;
        }
        r.density = density_ratio(counts[c], k);
        r.residual = r.density - r.product;
        out.push_back(std::move(r));
    }
    return out;
}

inline double max_abs_residual(std::span<const RectangleResidual> rs)
{
    double worst = 0.0;
    for (const auto& r : rs)
        worst = std::max(worst, std::fabs(r.residual));
    return worst;
}

} // namespace detail

/// Averaging test over every m-tuple (with repetition) of battery members.
///
/// independent: max terminal |gap| <= tol and every terminal rectangle
///              residual is within tol;
/// dependent:   some terminal |gap| > 3·tol and it has not shrunk below half
///              its value at the middle of the schedule;
/// otherwise inconclusive.
[[nodiscard]] inline IndependenceReport statind_test(std::span<const BoundedSequence> seqs,
                                                     const FunctionBattery& battery,
                                                     std::span<const std::uint64_t> schedule,
                                                     const StatIndOptions& opts = {})
{
    if (schedule.empty())
        throw std::invalid_argument("statind: empty schedule");
    if (!(opts.tol > 0.0))
        throw std::invalid_argument("statind: tol must be positive");
    for (std::size_t i = 0; i < schedule.size(); ++i)
        if (schedule[i] < 1 || (i > 0 && schedule[i] <= schedule[i - 1]))
            throw std::invalid_argument("statind: schedule must be strictly increasing and positive");
    detail::check_form_args(seqs, seqs.size());
    const std::size_t m = seqs.size();
    const std::size_t B = battery.size();
    const std::uint64_t n_max = schedule.back();

    std::vector<PrefixView> prefixes;
    for (const auto& s : seqs)
        prefixes.push_back(materialize(s, n_max));

    std::size_t ntuples = 1;
    for (std::size_t i = 0; i < m; ++i)
        ntuples *= B;
    IndependenceReport rep;
    for (const auto& s : seqs)
        rep.sequences.push_back(s.label());
    rep.battery = battery.names();
    rep.schedule.assign(schedule.begin(), schedule.end());
    rep.tol = opts.tol;
    rep.tuples.resize(ntuples);
    for (std::size_t t = 0; t < ntuples; ++t) {
        std::size_t rest = t;
        auto& tr = rep.tuples[t];
        for (std::size_t i = 0; i < m; ++i) {
            tr.members.push_back(rest % B);
            tr.label += (i ? "|" : "") + battery[rest % B].name();
            rest /= B;
        }
    }

    std::vector<ExactSum> joint(ntuples);
    std::vector<ExactSum> marginal(m * B);
    std::vector<double> h(m * B);
    std::vector<double> factors(m);
    std::vector<ExactSum> picked(m);
    std::size_t next = 0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        for (std::size_t i = 0; i < m; ++i) {
            const double v = prefixes[i](n);
            for (std::size_t j = 0; j < B; ++j) {
                h[i * B + j] = battery[j](v);
                marginal[i * B + j].add(h[i * B + j]);
            }
        }
        for (std::size_t t = 0; t < ntuples; ++t) {
            for (std::size_t i = 0; i < m; ++i)
                factors[i] = h[i * B + rep.tuples[t].members[i]];
            detail::add_exact_term(joint[t], factors);
        }
        if (n == schedule[next]) {
            for (std::size_t t = 0; t < ntuples; ++t) {
                auto& tr = rep.tuples[t];
                for (std::size_t i = 0; i < m; ++i)
                    picked[i] = marginal[i * B + tr.members[i]];
                tr.delta.push_back(joint[t].value() / static_cast<double>(n));
                tr.product.push_back(detail::mean_product(picked, n));
                tr.gap.push_back(detail::exact_gap(joint[t], picked, n));
            }
            ++next;
        }
    }
    std::sort(rep.tuples.begin(), rep.tuples.end(), [](const auto& x, const auto& y) { return x.label < y.label; });

    if (!opts.fixed_grid.empty() || opts.grid_count > 0) {
        std::vector<StepCDF> cdfs;
        for (const auto& p : prefixes)
            cdfs.push_back(empirical_cdf(p));
        rep.grid = opts.fixed_grid.empty() ? continuity_grid(cdfs, opts.grid_count, opts.atom_tol) : opts.fixed_grid;
        std::sort(rep.grid.begin(), rep.grid.end());
        rep.rectangle_residuals = detail::rectangle_residuals(prefixes, n_max, rep.grid);
        rep.max_rectangle_residual = detail::max_abs_residual(rep.rectangle_residuals);
    }

    const std::size_t half = (schedule.size() - 1) / 2;
    bool persistent = false;
    for (const auto& tr : rep.tuples) {
        const double last = std::fabs(tr.gap.back());
        rep.max_terminal_gap = std::max(rep.max_terminal_gap, last);
        if (last > 3.0 * opts.tol && last >= 0.5 * std::fabs(tr.gap[half]))
            persistent = true;
    }
    if (rep.max_terminal_gap <= opts.tol && rep.max_rectangle_residual <= opts.tol)
        rep.verdict = Verdict::independent;
    else if (persistent)
        rep.verdict = Verdict::dependent;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

/// A sequence failed the finite-depth measurability check along kappa.
class MeasurabilityFailure : public std::runtime_error {
public:
    MeasurabilityFailure(const std::string& sequence, const std::string& kappa, double worst_oscillation)
        : std::runtime_error("sequence " + sequence + " is not measurable along kappa '" + kappa +
                             "' (oscillation " + format_real(worst_oscillation) + ")"),
          sequence_(sequence), kappa_(kappa)
    {
    }
    [[nodiscard]] const std::string& sequence() const noexcept { return sequence_; }
    [[nodiscard]] const std::string& kappa() const noexcept { return kappa_; }

private:
    std::string sequence_;
    std::string kappa_;
};

struct KappaTestOptions {
    double tol = kDefaultTol;
    double measurability_tol = kDefaultTol;
    std::size_t window = kDefaultWindow;
};

struct KappaIndependenceReport {
    std::string kappa;
    std::uint64_t depth = 0; // deepest checkpoint
    std::vector<double> grid;
    std::vector<RectangleResidual> residuals;
    std::vector<MeasurabilityReport> measurability;
    double max_abs_residual = 0.0;
    double tol = kDefaultTol;
    Verdict verdict = Verdict::inconclusive;
};

/// Rectangle test along kappa at its deepest checkpoint k: for every corner in
/// grid^m, residual = |S(corner) ∩ [1,k]|/k - Π F_i(x_i), where F_i is the
/// empirical kappa-distribution function of v_i. Every sequence must first
/// pass detect_measurable on the same grid.
[[nodiscard]] inline KappaIndependenceReport kappa_independence_test(std::span<const BoundedSequence> seqs,
                                                                     const SubsequenceIndex& kappa,
                                                                     std::span<const double> grid,
                                                                     const KappaTestOptions& opts = {})
{
    detail::check_form_args(seqs, seqs.size());
    if (grid.empty())
        throw std::invalid_argument("kappa test: empty grid");
    if (kappa.empty())
        throw DepthError("kappa test: kappa has no checkpoints");
    std::vector<double> sorted_grid(grid.begin(), grid.end());
    std::sort(sorted_grid.begin(), sorted_grid.end());

    KappaIndependenceReport rep;
    rep.kappa = kappa.rule();
    rep.depth = kappa.back();
    rep.grid = sorted_grid;
    rep.tol = opts.tol;

    std::vector<PrefixView> prefixes;
    for (const auto& s : seqs) {
        prefixes.push_back(materialize(s, kappa.back()));
        auto mr = detect_measurable(prefixes.back(), kappa, sorted_grid, opts.measurability_tol, opts.window);
        if (!mr.measurable)
            throw MeasurabilityFailure(s.label(), kappa.rule(),
                                       *std::max_element(mr.oscillation.begin(), mr.oscillation.end()));
        rep.measurability.push_back(std::move(mr));
    }
    rep.residuals = detail::rectangle_residuals(prefixes, kappa.back(), sorted_grid);
    rep.max_abs_residual = detail::max_abs_residual(rep.residuals);
    rep.verdict = rep.max_abs_residual <= opts.tol ? Verdict::independent : Verdict::dependent;
    return rep;
}

enum class Agreement { agree, counterexample, inconclusive };

[[nodiscard]] constexpr std::string_view to_string(Agreement a)
{
    switch (a) {
    case Agreement::agree:
        return "agree";
    case Agreement::counterexample:
        return "counterexample";
    case Agreement::inconclusive:
        return "inconclusive";
    }
    return "?";
}

struct SkippedKappa {
    std::string kappa;
    std::string reason;
};

struct Counterexample {
    Verdict statind = Verdict::inconclusive;
    std::string kappa;
    Verdict kappa_verdict = Verdict::inconclusive;
    double max_abs_residual = 0.0;
    std::vector<double> corner;
    std::string note;
};

struct EquivalenceReport {
    IndependenceReport statind;
    std::vector<KappaIndependenceReport> kappa_reports; // sorted by kappa name
    std::vector<SkippedKappa> skipped;
    Agreement agreement = Agreement::inconclusive;
    std::optional<Counterexample> counterexample;
};

struct EquivalenceOptions {
    double tol = kDefaultTol;       // averaging test
    double kappa_tol = kDefaultTol; // rectangle test
    std::size_t grid_count = 9;
    double atom_tol = kDefaultAtomTol;
    std::size_t window = kDefaultWindow;
    double measurability_tol = kDefaultTol;
    std::vector<double> fixed_grid; // rectangle corners for every test when nonempty
};

/// Runs the averaging test and, for each kappa along which every sequence is
/// measurable, the rectangle test on a continuity grid of that kappa's
/// distribution functions.
///
/// Agreement: averaging-independent with every tested kappa independent, or
/// averaging-dependent with at least one tested kappa dependent. The opposite
/// outcomes produce a counterexample record; an inconclusive averaging test or
/// no testable kappa yields "inconclusive".
[[nodiscard]] inline EquivalenceReport equivalence_harness(std::span<const BoundedSequence> seqs,
                                                           const FunctionBattery& battery,
                                                           std::span<const SubsequenceIndex> family,
                                                           std::span<const std::uint64_t> schedule,
                                                           const EquivalenceOptions& opts = {})
{
    if (family.empty())
        throw std::invalid_argument("equivalence: empty kappa family");
    EquivalenceReport rep;
    rep.statind = statind_test(seqs, battery, schedule, {opts.tol, opts.grid_count, opts.atom_tol, opts.fixed_grid});

    for (const auto& kappa : family) {
        try {
            std::vector<double> grid = opts.fixed_grid;
            if (grid.empty()) {
                std::vector<StepCDF> cdfs;
                for (const auto& s : seqs)
                    cdfs.push_back(empirical_cdf(s, kappa, kappa.size()));
                grid = continuity_grid(cdfs, opts.grid_count, opts.atom_tol);
            }
            rep.kappa_reports.push_back(kappa_independence_test(
                seqs, kappa, grid, {opts.kappa_tol, opts.measurability_tol, opts.window}));
        }
        catch (const MeasurabilityFailure& e) {
            rep.skipped.push_back({kappa.rule(), e.what()});
        }
        catch (const DepthError& e) {
            rep.skipped.push_back({kappa.rule(), e.what()});
        }
        catch (const GridError& e) {
            rep.skipped.push_back({kappa.rule(), e.what()});
        }
    }
    std::stable_sort(rep.kappa_reports.begin(), rep.kappa_reports.end(),
                     [](const auto& x, const auto& y) { return x.kappa < y.kappa; });

    const KappaIndependenceReport* worst = nullptr;
    bool any_dependent = false;
    for (const auto& kr : rep.kappa_reports) {
        if (!worst || kr.max_abs_residual > worst->max_abs_residual)
            worst = &kr;
        any_dependent = any_dependent || kr.verdict == Verdict::dependent;
    }
    const Verdict sv = rep.statind.verdict;
    if (sv == Verdict::inconclusive || rep.kappa_reports.empty()) {
        rep.agreement = Agreement::inconclusive;
        return rep;
    }
    const bool agree = (sv == Verdict::independent) ? !any_dependent : any_dependent;
    rep.agreement = agree ? Agreement::agree : Agreement::counterexample;
    if (!agree) {
        Counterexample ce;
        ce.statind = sv;
        ce.kappa = worst->kappa;
        ce.kappa_verdict = worst->verdict;
        ce.max_abs_residual = worst->max_abs_residual;
        for (const auto& r : worst->residuals)
            if (std::fabs(r.residual) == worst->max_abs_residual) {
                ce.corner = r.corner;
                break;
            }
        ce.note = sv == Verdict::independent
                      ? "averaging test independent but rectangle test fails along kappa '" + worst->kappa + "'"
                      : "averaging test dependent but every tested kappa passes the rectangle test";
        rep.counterexample = std::move(ce);
    }
    return rep;
}

} // namespace seqind
