#pragma once

// Empirical (kappa-)distribution functions, Riemann-Stieltjes integration
// against them, and the approximation machinery used to pass between
// indicators, continuous functions and step functions: continuity grids,
// ramp sandwiches of indicators, and step envelopes of continuous functions.
//
// Convention: F(x) is the mass strictly below x, so that for an empirical
// CDF built at checkpoint k, F(x) == |v^{-1}([a,x)) ∩ [1,k]| / k exactly.

#include <seqind/density.hpp>
#include <seqind/errors.hpp>
#include <seqind/exact_sum.hpp>
#include <seqind/integrand.hpp>
#include <seqind/seq_core.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqind {

inline constexpr double kDefaultAtomTol = 1e-3;

/// Right-continuous pure-jump distribution on [a,b] with unit total mass.
/// When built from data it also keeps the integer multiplicities, which makes
/// evaluation and integration exact rearrangements of prefix averages.
class StepCDF {
public:
    StepCDF(Interval interval, std::vector<double> points, std::vector<double> masses)
        : interval_(interval), points_(std::move(points)), masses_(std::move(masses))
    {
        validate_points();
        if (masses_.size() != points_.size())
            throw std::invalid_argument("step cdf: points and masses differ in length");
        ExactSum acc;
        cumulative_.reserve(masses_.size() + 1);
        cumulative_.push_back(0.0);
        for (double m : masses_) {
            if (!(m > 0.0))
                throw std::invalid_argument("step cdf: masses must be positive");
            acc.add(m);
            cumulative_.push_back(acc.value());
        }
        if (std::fabs(acc.value() - 1.0) > 1e-12)
            throw std::invalid_argument("step cdf: masses sum to " + format_real(acc.value()) + ", not 1");
    }

    [[nodiscard]] static StepCDF from_counts(Interval interval, std::vector<double> points,
                                             std::vector<std::uint64_t> counts)
    {
        if (counts.size() != points.size() || counts.empty())
            throw std::invalid_argument("step cdf: need one positive count per point");
        std::uint64_t total = 0;
        for (auto c : counts) {
            if (c == 0)
                throw std::invalid_argument("step cdf: counts must be positive");
            total += c;
        }
        std::vector<double> masses;
        masses.reserve(counts.size());
        for (auto c : counts)
            masses.push_back(density_ratio(c, total));
        StepCDF F(interval, std::move(points), std::move(masses), Unchecked{});
        F.counts_ = std::move(counts);
        F.total_ = total;
        F.cumulative_counts_.reserve(F.counts_.size() + 1);
        F.cumulative_counts_.push_back(0);
        for (auto c : F.counts_)
            F.cumulative_counts_.push_back(F.cumulative_counts_.back() + c);
        return F;
    }

    /// Mass strictly below x.
    [[nodiscard]] double operator()(double x) const
    {
        const auto j = static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), x) - points_.begin());
        if (total_ > 0)
            return density_ratio(cumulative_counts_[j], total_);
        if (x > interval_.b)
            return 1.0;
        return cumulative_[j];
    }

    [[nodiscard]] const Interval& interval() const { return interval_; }
    [[nodiscard]] std::span<const double> points() const { return points_; }
    [[nodiscard]] std::span<const double> masses() const { return masses_; }
    [[nodiscard]] std::span<const std::uint64_t> counts() const { return counts_; }
    /// Sample size for empirical CDFs, 0 otherwise.
    [[nodiscard]] std::uint64_t total() const { return total_; }
    [[nodiscard]] std::size_t size() const { return points_.size(); }

private:
    struct Unchecked {};

    StepCDF(Interval interval, std::vector<double> points, std::vector<double> masses, Unchecked)
        : interval_(interval), points_(std::move(points)), masses_(std::move(masses))
    {
        validate_points();
    }

    void validate_points() const
    {
        if (points_.empty())
            throw std::invalid_argument("step cdf: no jump points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!interval_.contains(points_[i]))
                throw std::invalid_argument("step cdf: jump point " + format_real(points_[i]) + " outside interval");
            if (i > 0 && !(points_[i] > points_[i - 1]))
                throw std::invalid_argument("step cdf: jump points must be strictly increasing");
        }
    }

    Interval interval_;
    std::vector<double> points_;
    std::vector<double> masses_;
    std::vector<double> cumulative_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> cumulative_counts_;
    std::uint64_t total_ = 0;
};

[[nodiscard]] inline double cdf_eval(const StepCDF& F, double x) { return F(x); }

/// Empirical CDF of a sample: one jump per distinct value, mass = multiplicity / size.
[[nodiscard]] inline StepCDF empirical_cdf(std::span<const double> sample, const Interval& interval)
{
    if (sample.empty())
        throw std::invalid_argument("empirical cdf: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> points;
    std::vector<std::uint64_t> counts;
    for (double v : sorted) {
        if (!points.empty() && points.back() == v)
            ++counts.back();
        else {
            points.push_back(v);
            counts.push_back(1);
        }
    }
    return StepCDF::from_counts(interval, std::move(points), std::move(counts));
}

[[nodiscard]] inline StepCDF empirical_cdf(const PrefixView& prefix)
{
    return empirical_cdf(prefix.values(), prefix.interval());
}

/// Empirical kappa-distribution function at checkpoint k_depth (1-based depth).
[[nodiscard]] inline StepCDF empirical_cdf(const BoundedSequence& seq, const SubsequenceIndex& kappa,
                                           std::size_t depth)
{
    return empirical_cdf(materialize(seq, kappa.at_depth(depth)));
}

/// sup_x |F(x) - (x-a)/(b-a)|, taking both one-sided limits at every jump.
[[nodiscard]] inline double sup_distance_to_uniform(const StepCDF& F)
{
    const Interval& iv = F.interval();
    double worst = 0.0;
    const auto points = F.points();
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double u = (points[j] - iv.a) / iv.length();
        const double below = F(points[j]);
        const double above = j + 1 < points.size() ? F(points[j + 1]) : 1.0;
        worst = std::max({worst, std::fabs(below - u), std::fabs(above - u)});
    }
    return worst;
}

// --- Riemann-Stieltjes integration -----------------------------------------

/// ∫ f dF = Σ_j f(x_j) · mass_j. For empirical F the sum is formed as
/// (Σ_j count_j · f(x_j)) / total with exact accumulation, so it equals the
/// sample mean of f bit for bit.
template <class F>
    requires std::invocable<const F&, double>
[[nodiscard]] double stieltjes(const F& f, const StepCDF& cdf)
{
    ExactSum acc;
    const auto points = cdf.points();
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double fx = f(points[j]);
        if (std::isnan(fx))
            throw std::domain_error("stieltjes: integrand is NaN at jump point " + format_real(points[j]));
        if (cdf.total() > 0)
            acc.add_product(fx, static_cast<double>(cdf.counts()[j]));
        else
            acc.add_product(fx, cdf.masses()[j]);
    }
    return cdf.total() > 0 ? acc.value() / static_cast<double>(cdf.total()) : acc.value();
}

/// (1/N) Σ_{n<=N} f(v(n)), accumulated exactly.
template <class F>
    requires std::invocable<const F&, double>
[[nodiscard]] double sample_mean(const F& f, std::span<const double> sample)
{
    ExactSum acc;
    for (double v : sample)
        acc.add(f(v));
    return acc.value() / static_cast<double>(sample.size());
}

// --- continuity grid ---------------------------------------------------------

/// `count` points could not be placed away from the atoms.
class GridError : public std::runtime_error {
public:
    GridError(const std::string& what, std::size_t achievable) : std::runtime_error(what), achievable_(achievable) {}
    [[nodiscard]] std::size_t achievable() const noexcept { return achievable_; }

private:
    std::size_t achievable_;
};

/// `count` points in (a,b), each at distance >= atom_tol from every jump of
/// mass >= atom_tol in any of the given CDFs. Points are spread uniformly over
/// the admissible set; with no atoms this is a + (b-a)·i/(count+1).
[[nodiscard]] inline std::vector<double> continuity_grid(const Interval& iv, std::span<const StepCDF> cdfs,
                                                         std::size_t count, double atom_tol = kDefaultAtomTol)
{
    if (count < 1)
        throw std::invalid_argument("continuity grid: count must be >= 1");
    if (!(atom_tol > 0.0))
        throw std::invalid_argument("continuity grid: atom_tol must be positive");

    std::vector<double> atoms;
    for (const auto& F : cdfs) {
        if (!(F.interval() == iv))
            throw std::invalid_argument("continuity grid: CDFs on different intervals");
        for (std::size_t j = 0; j < F.size(); ++j)
            if (F.masses()[j] >= atom_tol)
                atoms.push_back(F.points()[j]);
    }

    std::vector<double> grid;
    grid.reserve(count);
    const double denom = static_cast<double>(count + 1);
    if (atoms.empty()) {
        for (std::size_t i = 1; i <= count; ++i)
            grid.push_back(iv.a + iv.length() * static_cast<double>(i) / denom);
    }
    else {
        std::sort(atoms.begin(), atoms.end());
        // Admissible segments: [a,b] minus the open atom neighbourhoods. The
        // radius is padded slightly so rounding never lands a point inside.
        const double radius = atom_tol * (1.0 + 1e-12);
        struct Segment {
            double lo, hi;
        };
        std::vector<Segment> segments;
        double cursor = iv.a;
        for (double p : atoms) {
            const double lo = p - radius;
            if (lo > cursor)
                segments.push_back({cursor, std::min(lo, iv.b)});
            cursor = std::max(cursor, p + radius);
        }
        if (cursor < iv.b)
            segments.push_back({cursor, iv.b});
        double length = 0.0;
        for (const auto& s : segments)
            length += s.hi - s.lo;
        if (!(length > 0.0))
            throw GridError("continuity grid: atoms of mass >= " + format_real(atom_tol) + " cover the interval", 0);
        for (std::size_t i = 1; i <= count; ++i) {
            double s = length * static_cast<double>(i) / denom;
            std::size_t k = 0;
            while (k + 1 < segments.size() && s > segments[k].hi - segments[k].lo) {
                s -= segments[k].hi - segments[k].lo;
                ++k;
            }
            grid.push_back(std::min(segments[k].lo + s, segments[k].hi));
        }
    }

    std::size_t usable = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool inside = grid[i] > iv.a && grid[i] < iv.b;
        const bool distinct = i == 0 || grid[i] > grid[i - 1];
        if (inside && distinct)
            ++usable;
    }
    if (usable < count)
        throw GridError("continuity grid: only " + std::to_string(usable) + " of " + std::to_string(count) +
                            " points can be placed",
                        usable);
    return grid;
}

[[nodiscard]] inline std::vector<double> continuity_grid(std::span<const StepCDF> cdfs, std::size_t count,
                                                         double atom_tol = kDefaultAtomTol)
{
    if (cdfs.empty())
        throw std::invalid_argument("continuity grid: need at least one CDF");
    return continuity_grid(cdfs.front().interval(), cdfs, count, atom_tol);
}

// --- indicator sandwiches ----------------------------------------------------

/// Piecewise-linear ramps lower <= 1_[a,x) <= upper.
struct FunctionSandwich {
    PiecewiseLinear lower;
    PiecewiseLinear upper;
    double x = 0.0;
    double width = 0.0;
    /// F(x+width) - F(x-width) against the CDF supplied, if any. Bounds
    /// ∫(upper - lower) dF from above.
    std::optional<double> gap_bound;
    /// ∫(upper - lower) dF itself.
    std::optional<double> achieved_gap;
};

/// lower is 1 on [a, x-width] and falls linearly to 0 at x; upper is 1 on
/// [a, x] and falls to 0 at x+width (cut off at b).
[[nodiscard]] inline FunctionSandwich sandwich_indicator(double x, double width, const Interval& iv)
{
    if (!(x > iv.a && x < iv.b))
        throw std::invalid_argument("sandwich: x = " + format_real(x) + " must lie strictly inside the interval");
    if (!(width > 0.0))
        throw std::invalid_argument("sandwich: width must be positive");
    if (!(x - width > iv.a))
        throw std::invalid_argument("sandwich: width " + format_real(width) + " too large to place below x = " +
                                    format_real(x));
    FunctionSandwich s;
    s.x = x;
    s.width = width;
    s.lower = PiecewiseLinear({iv.a, x - width, x, iv.b}, {1.0, 1.0, 0.0, 0.0});
    const double top = x + width;
    if (top < iv.b)
        s.upper = PiecewiseLinear({iv.a, x, top, iv.b}, {1.0, 1.0, 0.0, 0.0});
    else
        s.upper = PiecewiseLinear({iv.a, x, iv.b}, {1.0, 1.0, top == iv.b ? 0.0 : 1.0 - (iv.b - x) / width});
    return s;
}

[[nodiscard]] inline FunctionSandwich sandwich_indicator(double x, double width, const Interval& iv, const StepCDF& F)
{
    FunctionSandwich s = sandwich_indicator(x, width, iv);
    s.gap_bound = F(x + width) - F(x - width);
    s.achieved_gap = stieltjes([&](double t) { return s.upper(t) - s.lower(t); }, F);
    return s;
}

/// Narrows the ramp width until the sandwich's gap bound against F drops
/// below eps. Fails when F carries an atom of mass >= eps at x.
[[nodiscard]] inline FunctionSandwich fit_sandwich(double x, double eps, const StepCDF& F)
{
    const Interval& iv = F.interval();
    if (!(eps > 0.0))
        throw std::invalid_argument("sandwich: eps must be positive");
    double width = std::min(x - iv.a, iv.b - x) / 2.0;
    while (width > iv.length() * 1e-15) {
        FunctionSandwich s = sandwich_indicator(x, width, iv, F);
        if (*s.gap_bound < eps)
            return s;
        width /= 2.0;
    }
    throw DepthError("sandwich: mass near x = " + format_real(x) + " is at least " + format_real(eps));
}

// --- step envelopes ----------------------------------------------------------

/// Step functions lower <= f <= upper with breakpoints on a continuity grid.
struct StepEnvelope {
    StepFunction lower;
    StepFunction upper;
    double gap_bound = 0.0; // max over the CDFs of ∫(upper - lower) dF
    std::size_t cells = 0;
};

struct EnvelopeOptions {
    double atom_tol = kDefaultAtomTol;
    std::size_t samples_per_cell = 16;
    std::size_t max_breakpoints = 1'000'000;
};

namespace detail {

struct CellBounds {
    double lo;
    double hi;
};

// Bounds of f over the closed cell [c0, c1].
inline CellBounds cell_bounds(const Integrand& f, double c0, double c1, std::size_t samples)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto take = [&](double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    double margin = 0.0;
    if (const auto* p = f.as_piecewise_linear()) {
        take(f(c0));
        take(f(c1));
        for (std::size_t i = 0; i < p->xs.size(); ++i)
            if (p->xs[i] > c0 && p->xs[i] < c1)
                take(p->ys[i]);
    }
    else if (const auto* s = f.as_step()) {
        take(f(c0));
        take(f(c1));
        for (double t : s->breakpoints)
            if (t > c0 && t <= c1) {
                take(f(t));
                take(f(std::nextafter(t, c0)));
            }
    }
    else {
        const double h = (c1 - c0) / static_cast<double>(samples);
        double prev = f(c0);
        take(prev);
        double steepest = 0.0;
        for (std::size_t i = 1; i <= samples; ++i) {
            const double v = f(i == samples ? c1 : c0 + h * static_cast<double>(i));
            take(v);
            steepest = std::max(steepest, std::fabs(v - prev));
            prev = v;
        }
        margin = f.lipschitz() ? *f.lipschitz() * h / 2.0 : steepest;
    }
    if (std::isnan(lo) || std::isnan(hi))
        throw std::domain_error("step envelope: integrand " + f.name() + " is NaN on the interval");
    // Interpolation and sampling round; keep a few ulps of headroom.
    // A flat cell is exact: no rounding happens when every value is equal.
    const double slack = (hi > lo || margin > 0.0) ? 1e-14 * (1.0 + std::max(std::fabs(lo), std::fabs(hi))) : 0.0;
    return {lo - margin - slack, hi + margin + slack};
}

} // namespace detail

/// Step functions s <= f <= S whose breakpoints avoid the atoms of every F
/// in `cdfs`, refined until ∫(S - s) dF < eps for each F.
[[nodiscard]] inline StepEnvelope step_envelope(const Integrand& f, std::span<const StepCDF> cdfs, double eps,
                                                const EnvelopeOptions& opts = {})
{
    if (!(eps > 0.0))
        throw std::invalid_argument("step envelope: eps must be positive");
    if (cdfs.empty())
        throw std::invalid_argument("step envelope: need at least one CDF");
    const Interval& iv = cdfs.front().interval();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t count = 1;; count = 2 * count + 1) {
        if (count > opts.max_breakpoints)
            throw DepthError("step envelope: breakpoint budget " + std::to_string(opts.max_breakpoints) +
                             " exhausted; best gap " + format_real(best) + " >= " + format_real(eps));
        std::vector<double> cuts = continuity_grid(iv, cdfs, count, opts.atom_tol);
        std::vector<double> lows, highs;
        lows.reserve(count + 1);
        highs.reserve(count + 1);
        for (std::size_t c = 0; c <= count; ++c) {
            const double c0 = c == 0 ? iv.a : cuts[c - 1];
            const double c1 = c == count ? iv.b : cuts[c];
            const auto bounds = detail::cell_bounds(f, c0, c1, opts.samples_per_cell);
            lows.push_back(bounds.lo);
            highs.push_back(bounds.hi);
        }
        StepEnvelope env{StepFunction(cuts, std::move(lows)), StepFunction(cuts, std::move(highs)), 0.0, count + 1};
        for (const auto& F : cdfs)
            env.gap_bound = std::max(
                env.gap_bound, stieltjes([&](double t) { return env.upper(t) - env.lower(t); }, F));
        best = std::min(best, env.gap_bound);
        if (env.gap_bound < eps)
            return env;
    }
}

} // namespace seqind
