#pragma once

// Counting functions, asymptotic density and kappa-density for subsets of the
// naturals given by membership predicates.
//
// Limits are replaced by a trailing-window Cauchy diagnostic: a density
// estimate is "converged" when the ratios at the last `window` checkpoints
// span at most `tol`.

#include <seqind/errors.hpp>
#include <seqind/seq_core.hpp>
#include <seqind/subsequence_index.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace seqind {

inline constexpr double kDefaultTol = 1e-2;
inline constexpr std::size_t kDefaultWindow = 5;

/// A subset S of the naturals, given by a deterministic predicate.
struct SetMembership {
    std::function<bool(std::uint64_t)> predicate;
    std::string description;

    [[nodiscard]] bool operator()(std::uint64_t n) const { return predicate(n); }
};

[[nodiscard]] inline SetMembership complement(const SetMembership& s)
{
    return {[p = s.predicate](std::uint64_t n) { return !p(n); }, "not(" + s.description + ")"};
}

/// |S ∩ [1,N]|. Partitioned counting sums exact integers, so the result does
/// not depend on `threads`.
[[nodiscard]] inline std::uint64_t prefix_count(const SetMembership& s, std::uint64_t N, unsigned threads = 1)
{
    std::atomic<std::uint64_t> total{0};
    for_each_chunk(1, N + 1, threads, [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t local = 0;
        for (std::uint64_t n = lo; n < hi; ++n)
            local += s(n) ? 1 : 0;
        total += local;
    });
    return total.load();
}

/// count/k as used everywhere a density ratio is reported.
[[nodiscard]] inline double density_ratio(std::uint64_t count, std::uint64_t k)
{
    return static_cast<double>(count) / static_cast<double>(k);
}

struct TracePoint {
    std::uint64_t k;
    double ratio;
};

/// Max minus min over the last `window` values.
[[nodiscard]] inline double trailing_oscillation(std::span<const double> values, std::size_t window)
{
    if (values.size() < window || window == 0)
        throw DepthError("trailing window of " + std::to_string(window) + " needs at least that many values, got " +
                         std::to_string(values.size()));
    const auto tail = values.subspan(values.size() - window);
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    return *hi - *lo;
}

struct DensityEstimate {
    double value = 0.0; // ratio at the deepest checkpoint
    std::vector<TracePoint> trace;
    double oscillation = 0.0;
    bool converged = false;
    double tol = kDefaultTol;
    std::size_t window = kDefaultWindow;
};

namespace detail {

inline void require_window(const SubsequenceIndex& kappa, std::size_t window, double tol)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("density: tol must be positive");
    if (window < 1)
        throw std::invalid_argument("density: window must be >= 1");
    if (kappa.size() < window)
        throw DepthError("kappa has " + std::to_string(kappa.size()) + " checkpoints but the window needs " +
                         std::to_string(window) + "; deepen kappa");
}

inline DensityEstimate finish_estimate(std::vector<TracePoint> trace, double tol, std::size_t window)
{
    std::vector<double> ratios;
    ratios.reserve(trace.size());
    for (const auto& t : trace)
        ratios.push_back(t.ratio);
    DensityEstimate est;
    est.value = trace.back().ratio;
    est.oscillation = trailing_oscillation(ratios, window);
    est.converged = est.oscillation <= tol;
    est.trace = std::move(trace);
    est.tol = tol;
    est.window = window;
    return est;
}

} // namespace detail

/// Ratio |S ∩ [1,k_N]| / k_N at every checkpoint of kappa.
[[nodiscard]] inline DensityEstimate kappa_density(const SetMembership& s, const SubsequenceIndex& kappa,
                                                   double tol = kDefaultTol, std::size_t window = kDefaultWindow)
{
    detail::require_window(kappa, window, tol);
    std::vector<TracePoint> trace;
    trace.reserve(kappa.size());
    std::uint64_t count = 0;
    std::uint64_t n = 0;
    for (std::uint64_t k : kappa.checkpoints()) {
        for (; n < k; ++n)
            count += s(n + 1) ? 1 : 0;
        trace.push_back({k, density_ratio(count, k)});
    }
    return detail::finish_estimate(std::move(trace), tol, window);
}

/// Sentinel upper endpoint meaning "through b inclusive".
inline constexpr double kClosedAtB = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_preimage_bounds(const Interval& iv, double lo, double hi)
{
    if (std::isnan(lo) || std::isnan(hi))
        throw std::invalid_argument("preimage: NaN bound");
    if (lo > hi)
        throw std::invalid_argument("preimage: inverted bounds [" + format_real(lo) + ", " + format_real(hi) + ")");
    if (lo < iv.a || (hi > iv.b && hi != kClosedAtB))
        throw std::invalid_argument("preimage: [" + format_real(lo) + ", " + format_real(hi) + ") not within [" +
                                    format_real(iv.a) + ", " + format_real(iv.b) + "]");
}

inline std::string range_label(double lo, double hi)
{
    return hi == kClosedAtB ? "[" + format_real(lo) + ", b]" : "[" + format_real(lo) + ", " + format_real(hi) + ")";
}

} // namespace detail

/// v^{-1}([lo, hi)) = {n : lo <= v(n) < hi}. Pass hi = kClosedAtB for [lo, b].
[[nodiscard]] inline SetMembership preimage(const BoundedSequence& seq, double lo, double hi)
{
    detail::check_preimage_bounds(seq.interval(), lo, hi);
    return {[seq, lo, hi](std::uint64_t n) {
                const double v = seq(n);
                return v >= lo && v < hi;
            },
            seq.label() + "^-1" + detail::range_label(lo, hi)};
}

/// Same set, read from a materialized prefix (n must not exceed its length).
[[nodiscard]] inline SetMembership preimage(const PrefixView& prefix, double lo, double hi)
{
    detail::check_preimage_bounds(prefix.interval(), lo, hi);
    return {[values = prefix.shared_values(), lo, hi](std::uint64_t n) {
                const double v = (*values)[n - 1];
                return v >= lo && v < hi;
            },
            prefix.source().label() + "^-1" + detail::range_label(lo, hi)};
}

/// Conjunction of the given sets.
[[nodiscard]] inline SetMembership intersect(std::vector<SetMembership> sets)
{
    if (sets.empty())
        throw std::invalid_argument("intersect: need at least one set");
    if (sets.size() == 1)
        return sets.front();
    std::string label;
    for (std::size_t i = 0; i < sets.size(); ++i)
        label += (i ? " & " : "") + sets[i].description;
    return {[sets = std::move(sets)](std::uint64_t n) {
                for (const auto& s : sets)
                    if (!s(n))
                        return false;
                return true;
            },
            label};
}

} // namespace seqind
