#pragma once

// Finite-depth kappa-measurability detection and a greedy diagonal
// (Helly-style) extraction of checkpoint subsequences along which given
// sequences have stable distribution functions.

#include <seqind/density.hpp>
#include <seqind/distribution.hpp>
#include <seqind/errors.hpp>
#include <seqind/seq_core.hpp>
#include <seqind/subsequence_index.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace seqind {

inline constexpr std::size_t kDefaultMeasurabilityGrid = 33;
inline constexpr std::size_t kDefaultMinPool = 64;
inline constexpr std::uint64_t kDefaultThinningSeed = 0x5eed'd15c'0ffe'e000ULL;

struct MeasurabilityReport {
    std::string sequence;
    std::string kappa;
    std::vector<double> grid;
    std::vector<DensityEstimate> traces; // one per grid point
    std::vector<double> oscillation;     // one per grid point
    bool measurable = false;
    std::optional<StepCDF> limit_cdf; // empirical CDF at the deepest checkpoint
    double tol = kDefaultTol;
    std::size_t window = kDefaultWindow;
};

/// Runs kappa_density on v^{-1}([a,x)) for each grid point x. `prefix` must
/// cover the deepest checkpoint.
[[nodiscard]] inline MeasurabilityReport detect_measurable(const PrefixView& prefix, const SubsequenceIndex& kappa,
                                                           std::span<const double> grid, double tol = kDefaultTol,
                                                           std::size_t window = kDefaultWindow)
{
    if (grid.empty())
        throw std::invalid_argument("detect_measurable: empty grid");
    detail::require_window(kappa, window, tol);
    if (prefix.size() < kappa.back())
        throw DepthError("detect_measurable: prefix of " + std::to_string(prefix.size()) +
                         " terms does not reach checkpoint " + std::to_string(kappa.back()));
    const Interval& iv = prefix.interval();
    MeasurabilityReport r;
    r.sequence = prefix.source().label();
    r.kappa = kappa.rule();
    r.grid.assign(grid.begin(), grid.end());
    r.tol = tol;
    r.window = window;
    r.measurable = true;
    for (double x : grid) {
        auto est = kappa_density(preimage(prefix, iv.a, x), kappa, tol, window);
        r.oscillation.push_back(est.oscillation);
        r.measurable = r.measurable && est.converged;
        r.traces.push_back(std::move(est));
    }
    r.limit_cdf = empirical_cdf(prefix.values().first(kappa.back()), iv);
    return r;
}

[[nodiscard]] inline MeasurabilityReport detect_measurable(const BoundedSequence& seq, const SubsequenceIndex& kappa,
                                                           std::span<const double> grid, double tol = kDefaultTol,
                                                           std::size_t window = kDefaultWindow)
{
    if (kappa.empty())
        throw DepthError("detect_measurable: kappa has no checkpoints");
    return detect_measurable(materialize(seq, kappa.back()), kappa, grid, tol, window);
}

/// Extraction ran out of checkpoints for one (sequence, grid point) pair.
class ExtractionError : public DepthError {
public:
    ExtractionError(const std::string& what, std::size_t sequence, double grid_point)
        : DepthError(what), sequence_(sequence), grid_point_(grid_point)
    {
    }
    [[nodiscard]] std::size_t sequence() const noexcept { return sequence_; }
    [[nodiscard]] double grid_point() const noexcept { return grid_point_; }

private:
    std::size_t sequence_;
    double grid_point_;
};

struct HellyOptions {
    double tol = kDefaultTol;
    std::size_t window = kDefaultWindow;
    std::size_t min_pool = kDefaultMinPool;
};

namespace detail {

// Indices (into `ratios`) inside the most populous band [c, c + tol], where c
// ranges over the ratios themselves; the leftmost band wins ties.
inline std::vector<std::size_t> densest_band(std::span<const double> ratios, double tol)
{
    std::vector<std::size_t> order(ratios.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return ratios[i] < ratios[j]; });
    std::size_t best_start = 0;
    std::size_t best_count = 0;
    std::size_t end = 0;
    for (std::size_t s = 0; s < order.size(); ++s) {
        end = std::max(end, s);
        while (end < order.size() && ratios[order[end]] - ratios[order[s]] <= tol)
            ++end;
        if (end - s > best_count) {
            best_count = end - s;
            best_start = s;
        }
    }
    const double c = ratios[order[best_start]];
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (ratios[i] >= c && ratios[i] - c <= tol)
            keep.push_back(i);
    return keep;
}

} // namespace detail

/// Greedy diagonal extraction. For each sequence (outer) and grid point
/// (inner, ascending), keeps only the checkpoints whose ratio
/// |v^{-1}([a,x)) ∩ [1,k]| / k lies in the densest tol-band. The survivors
/// form a kappa along which every pair's trace spans at most tol.
[[nodiscard]] inline SubsequenceIndex helly_extract(std::span<const BoundedSequence> seqs,
                                                    const SubsequenceIndex& pool, std::span<const double> grid,
                                                    const HellyOptions& opts = {})
{
    if (seqs.empty())
        throw std::invalid_argument("helly_extract: no sequences");
    if (grid.empty())
        throw std::invalid_argument("helly_extract: empty grid");
    if (!(opts.tol > 0.0) || opts.window < 1)
        throw std::invalid_argument("helly_extract: need tol > 0 and window >= 1");
    if (pool.size() < std::max(opts.min_pool, opts.window))
        throw std::invalid_argument("helly_extract: pool has " + std::to_string(pool.size()) +
                                    " checkpoints, need at least " +
                                    std::to_string(std::max(opts.min_pool, opts.window)));
    std::vector<double> points(grid.begin(), grid.end());
    std::sort(points.begin(), points.end());

    std::vector<std::uint64_t> current(pool.checkpoints().begin(), pool.checkpoints().end());
    for (std::size_t si = 0; si < seqs.size(); ++si) {
        const PrefixView prefix = materialize(seqs[si], pool.back());
        const auto values = prefix.values();
        const double a = seqs[si].interval().a;
        for (double x : points) {
            std::vector<double> ratios;
            ratios.reserve(current.size());
            std::uint64_t count = 0;
            std::uint64_t n = 0;
            for (std::uint64_t k : current) {
                for (; n < k; ++n)
                    count += (values[n] >= a && values[n] < x) ? 1 : 0;
                ratios.push_back(density_ratio(count, k));
            }
            const auto keep = detail::densest_band(ratios, opts.tol);
            if (keep.size() < opts.window)
                throw ExtractionError("helly_extract: sequence " + std::to_string(si) + " (" + seqs[si].label() +
                                          ") at grid point " + format_real(x) + " keeps only " +
                                          std::to_string(keep.size()) + " checkpoints (window " +
                                          std::to_string(opts.window) + "); use a deeper pool",
                                      si, x);
            std::vector<std::uint64_t> next;
            next.reserve(keep.size());
            for (auto i : keep)
                next.push_back(current[i]);
            current = std::move(next);
        }
    }
    return SubsequenceIndex(std::move(current), "helly(" + pool.rule() + ")");
}

/// The standard adversarial kappa family, each member truncated at base_depth:
/// naturals (k_N = N*stride), evens, odds, squares, powers of 2, and a seeded
/// random thinning of the naturals.
[[nodiscard]] inline std::vector<SubsequenceIndex> kappa_family_builder(std::uint64_t base_depth,
                                                                        std::uint64_t seed = kDefaultThinningSeed)
{
    if (base_depth < 1)
        throw std::invalid_argument("kappa family: base_depth must be >= 1");
    const std::uint64_t stride = std::max<std::uint64_t>(1, base_depth / 1000);
    std::vector<SubsequenceIndex> family;
    family.push_back(naturals_index(base_depth, stride));

    std::vector<std::uint64_t> evens, odds, squares, powers, thinned;
    for (std::uint64_t k = 2; k <= base_depth; k += 2)
        evens.push_back(k);
    for (std::uint64_t k = 1; k <= base_depth; k += 2)
        odds.push_back(k);
    for (std::uint64_t r = 1; r * r <= base_depth; ++r)
        squares.push_back(r * r);
    for (std::uint64_t p = 1; p <= base_depth; p *= 2) {
        powers.push_back(p);
        if (p > base_depth / 2)
            break;
    }
    std::mt19937_64 rng(seed);
    for (std::uint64_t k = stride; k <= base_depth; k += stride)
        if ((rng() >> 63) != 0)
            thinned.push_back(k);

    family.emplace_back(std::move(evens), "evens");
    family.emplace_back(std::move(odds), "odds");
    family.emplace_back(std::move(squares), "squares");
    family.emplace_back(std::move(powers), "powers_of_2");
    family.emplace_back(std::move(thinned), "thinned");
    return family;
}

} // namespace seqind
