#pragma once

// Bounded real sequences: the generator catalog, file-backed data, and
// materialized prefixes. Everything downstream reads sequences through
// BoundedSequence::operator() (or a PrefixView built from it).

#include <seqind/errors.hpp>
#include <seqind/format.hpp>
#include <seqind/subsequence_index.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

namespace seqind {

struct Interval {
    double a = 0.0;
    double b = 1.0;

    Interval() = default;
    Interval(double lower, double upper) : a(lower), b(upper)
    {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw std::invalid_argument("interval: need finite a < b, got [" + format_real(a) + ", " +
                                        format_real(b) + "]");
    }

    [[nodiscard]] bool contains(double x) const { return x >= a && x <= b; }
    [[nodiscard]] double length() const { return b - a; }

    /// Maps u in [0,1] affinely onto [a,b]. The result never exceeds b even
    /// when a + (b-a)*u rounds upward.
    [[nodiscard]] double from_unit(double u) const
    {
        if (a == 0.0 && b == 1.0)
            return u;
        return std::min(b, a + (b - a) * u);
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

class BoundedSequence;

namespace gen {

/// v(n) = frac(n * alpha), evaluated per term in extended precision.
struct Kronecker {
    long double alpha;
};

/// Radical inverse of n in the given base.
struct VanDerCorput {
    std::uint32_t base;
};

/// v(n) = values[(n-1) mod p].
struct Periodic {
    std::vector<double> values;
};

struct Constant {
    double value;
};

/// `low` on block 1, `high` on block 2, alternating; block j has length
/// growth^j.
struct Block {
    double low;
    double high;
    std::uint64_t growth;
};

/// v(n) = scale * source(n) + shift.
struct AffineImage {
    std::shared_ptr<const BoundedSequence> source;
    double scale;
    double shift;
};

struct FileBacked {
    std::shared_ptr<const std::vector<double>> values;
    std::string path;
};

} // namespace gen

/// A deterministic real sequence v(1), v(2), ... confined to an interval.
/// Copies are cheap; shared state is immutable.
class BoundedSequence {
public:
    using Generator = std::variant<gen::Kronecker, gen::VanDerCorput, gen::Periodic, gen::Constant, gen::Block,
                                   gen::AffineImage, gen::FileBacked>;

    BoundedSequence(Interval interval, Generator generator, std::string label = {})
        : interval_(interval), generator_(std::move(generator)), label_(std::move(label))
    {
        if (label_.empty())
            label_ = default_label();
    }

    [[nodiscard]] const Interval& interval() const { return interval_; }
    [[nodiscard]] const Generator& generator() const { return generator_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    [[nodiscard]] BoundedSequence with_label(std::string label) const
    {
        BoundedSequence copy = *this;
        copy.label_ = std::move(label);
        return copy;
    }

    [[nodiscard]] std::string_view kind() const
    {
        constexpr std::string_view names[] = {"kronecker", "van_der_corput", "periodic", "constant",
                                              "block",     "affine_image",   "file"};
        return names[generator_.index()];
    }

    /// Number of available terms for finite (file-backed) sequences.
    [[nodiscard]] std::optional<std::uint64_t> length() const
    {
        if (const auto* f = std::get_if<gen::FileBacked>(&generator_))
            return f->values->size();
        if (const auto* g = std::get_if<gen::AffineImage>(&generator_))
            return g->source->length();
        return std::nullopt;
    }

    /// v(n) for n >= 1. Throws RangeError if the generator leaves the interval
    /// or a finite sequence is indexed past its end.
    [[nodiscard]] double operator()(std::uint64_t n) const
    {
        if (n < 1)
            throw std::invalid_argument("sequence " + label_ + ": index must be >= 1");
        const double v = raw(n);
        if (!(v >= interval_.a && v <= interval_.b))
            throw RangeError("sequence " + label_ + ": v(" + std::to_string(n) + ") = " + format_real(v) +
                             " outside [" + format_real(interval_.a) + ", " + format_real(interval_.b) + "]");
        return v;
    }

private:
    [[nodiscard]] double raw(std::uint64_t n) const
    {
        return std::visit([&](const auto& g) { return raw_term(g, n); }, generator_);
    }

    double raw_term(const gen::Kronecker& g, std::uint64_t n) const
    {
        const long double x = static_cast<long double>(n) * g.alpha;
        const long double frac = x - std::floor(x);
        return interval_.from_unit(static_cast<double>(frac));
    }

    double raw_term(const gen::VanDerCorput& g, std::uint64_t n) const
    {
        __extension__ typedef unsigned __int128 wide;
        wide rev = 0;
        wide denom = 1;
        for (std::uint64_t m = n; m > 0; m /= g.base) {
            rev = rev * g.base + m % g.base;
            denom *= g.base;
        }
        const long double u = static_cast<long double>(rev) / static_cast<long double>(denom);
        return interval_.from_unit(static_cast<double>(u));
    }

    double raw_term(const gen::Periodic& g, std::uint64_t n) const { return g.values[(n - 1) % g.values.size()]; }

    double raw_term(const gen::Constant& g, std::uint64_t) const { return g.value; }

    double raw_term(const gen::Block& g, std::uint64_t n) const
    {
        constexpr auto max = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t start = 0; // last index of the previous block
        std::uint64_t len = g.growth;
        bool low = true;
        while (n - start > len) {
            start += len;
            len = len > max / g.growth ? max : len * g.growth;
            low = !low;
        }
        return low ? g.low : g.high;
    }

    double raw_term(const gen::AffineImage& g, std::uint64_t n) const
    {
        return g.scale * (*g.source)(n) + g.shift;
    }

    double raw_term(const gen::FileBacked& g, std::uint64_t n) const
    {
        if (n > g.values->size())
            throw RangeError("sequence " + label_ + ": index " + std::to_string(n) + " beyond file length " +
                             std::to_string(g.values->size()));
        return (*g.values)[n - 1];
    }

    std::string default_label() const
    {
        return std::visit(
            [](const auto& g) -> std::string {
                using G = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<G, gen::Kronecker>)
                    return "kronecker(" + format_real(static_cast<double>(g.alpha)) + ")";
                else if constexpr (std::is_same_v<G, gen::VanDerCorput>)
                    return "van_der_corput(" + std::to_string(g.base) + ")";
                else if constexpr (std::is_same_v<G, gen::Periodic>) {
                    std::string s = "periodic(";
                    for (std::size_t i = 0; i < g.values.size(); ++i)
                        s += (i ? "," : "") + format_real(g.values[i]);
                    return s + ")";
                }
                else if constexpr (std::is_same_v<G, gen::Constant>)
                    return "constant(" + format_real(g.value) + ")";
                else if constexpr (std::is_same_v<G, gen::Block>)
                    return "block(" + format_real(g.low) + "," + format_real(g.high) + "," +
                           std::to_string(g.growth) + ")";
                else if constexpr (std::is_same_v<G, gen::AffineImage>)
                    return format_real(g.scale) + "*" + g.source->label() + "+" + format_real(g.shift);
                else
                    return "file(" + g.path + ")";
            },
            generator_);
    }

    Interval interval_;
    Generator generator_;
    std::string label_;
};

[[nodiscard]] inline double eval(const BoundedSequence& seq, std::uint64_t n) { return seq(n); }

namespace detail {

inline void require_in(const Interval& iv, double x, const char* what)
{
    if (!iv.contains(x))
        throw RangeError(std::string(what) + " " + format_real(x) + " outside [" + format_real(iv.a) + ", " +
                         format_real(iv.b) + "]");
}

} // namespace detail

[[nodiscard]] inline BoundedSequence kronecker(long double alpha, Interval interval = {})
{
    if (!std::isfinite(alpha))
        throw std::invalid_argument("kronecker: alpha must be finite");
    return {interval, gen::Kronecker{alpha}};
}

[[nodiscard]] inline BoundedSequence van_der_corput(std::uint32_t base, Interval interval = {})
{
    if (base < 2)
        throw std::invalid_argument("van_der_corput: base must be >= 2");
    return {interval, gen::VanDerCorput{base}};
}

[[nodiscard]] inline BoundedSequence periodic(std::vector<double> values, Interval interval = {})
{
    if (values.empty())
        throw std::invalid_argument("periodic: need at least one value");
    for (double v : values)
        detail::require_in(interval, v, "periodic: value");
    return {interval, gen::Periodic{std::move(values)}};
}

[[nodiscard]] inline BoundedSequence constant(double c, Interval interval = {})
{
    detail::require_in(interval, c, "constant: value");
    return {interval, gen::Constant{c}};
}

[[nodiscard]] inline BoundedSequence make_block(double low, double high, std::uint64_t growth, Interval interval = {})
{
    if (!(low < high))
        throw std::invalid_argument("block: need low < high");
    if (growth < 2)
        throw std::invalid_argument("block: growth must be >= 2");
    detail::require_in(interval, low, "block: low");
    detail::require_in(interval, high, "block: high");
    return {interval, gen::Block{low, high, growth}};
}

[[nodiscard]] inline BoundedSequence affine_image(const BoundedSequence& source, double scale, double shift,
                                                  Interval interval = {})
{
    if (!std::isfinite(scale) || !std::isfinite(shift))
        throw std::invalid_argument("affine_image: scale and shift must be finite");
    return {interval, gen::AffineImage{std::make_shared<const BoundedSequence>(source), scale, shift}};
}

/// 1 - v on [0,1], the usual dependent partner of v.
[[nodiscard]] inline BoundedSequence reflection(const BoundedSequence& source)
{
    const Interval& iv = source.interval();
    return affine_image(source, -1.0, iv.a + iv.b, iv);
}

enum class BlockParity { all, low, high };

/// Last index of each block of a block sequence, up to `limit`. Block j ends
/// at growth + growth^2 + ... + growth^j.
[[nodiscard]] inline SubsequenceIndex block_ends(const BoundedSequence& seq, std::uint64_t limit,
                                                 BlockParity parity = BlockParity::all)
{
    const auto* g = std::get_if<gen::Block>(&seq.generator());
    if (!g)
        throw std::invalid_argument("block_ends: " + seq.label() + " is not a block sequence");
    std::vector<std::uint64_t> ends;
    std::uint64_t end = 0;
    std::uint64_t len = g->growth;
    for (std::size_t j = 1;; ++j) {
        if (len > limit || end > limit - len)
            break;
        end += len;
        const bool low = (j % 2) == 1;
        if (parity == BlockParity::all || (parity == BlockParity::low) == low)
            ends.push_back(end);
        if (len > limit / g->growth)
            break;
        len *= g->growth;
    }
    const char* rule = parity == BlockParity::all ? "block_ends" : parity == BlockParity::low ? "low_block_ends"
                                                                                               : "high_block_ends";
    return SubsequenceIndex(std::move(ends), rule);
}

/// Reads one finite real per line. Every value must lie in `interval`.
[[nodiscard]] inline BoundedSequence load_sequence(const std::string& path, Interval interval = {})
{
    std::ifstream in(path);
    if (!in)
        throw LoadError(path, 0, "cannot open file");
    auto values = std::make_shared<std::vector<double>>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        const auto last = line.find_last_not_of(" \t");
        if (first == std::string::npos)
            throw LoadError(path, lineno, "empty line");
        const char* b = line.data() + first;
        const char* e = line.data() + last + 1;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || ptr != e || !std::isfinite(v))
            throw LoadError(path, lineno, "not a finite real: '" + std::string(b, e) + "'");
        if (!interval.contains(v))
            throw LoadError(path, lineno,
                            "value " + format_real(v) + " outside [" + format_real(interval.a) + ", " +
                                format_real(interval.b) + "]");
        values->push_back(v);
    }
    if (values->empty())
        throw LoadError(path, 0, "empty file");
    return {interval, gen::FileBacked{std::move(values), path}};
}

/// The first N terms of a sequence, materialized for repeated scans.
/// values()[n-1] == source()(n).
class PrefixView {
public:
    PrefixView(BoundedSequence source, std::vector<double> values)
        : source_(std::move(source)), values_(std::make_shared<const std::vector<double>>(std::move(values)))
    {
    }

    [[nodiscard]] std::span<const double> values() const { return *values_; }
    [[nodiscard]] std::uint64_t size() const { return values_->size(); }
    [[nodiscard]] double operator()(std::uint64_t n) const { return (*values_)[n - 1]; }
    [[nodiscard]] const BoundedSequence& source() const { return source_; }
    [[nodiscard]] const Interval& interval() const { return source_.interval(); }
    [[nodiscard]] std::shared_ptr<const std::vector<double>> shared_values() const { return values_; }

private:
    BoundedSequence source_;
    std::shared_ptr<const std::vector<double>> values_;
};

/// Splits [begin, end) into `parts` contiguous chunks and runs fn(lo, hi) on
/// each, one thread per chunk.
template <class Fn>
void for_each_chunk(std::uint64_t begin, std::uint64_t end, unsigned parts, Fn&& fn)
{
    parts = std::max(1u, parts);
    const std::uint64_t total = end - begin;
    if (parts == 1 || total < parts) {
        fn(begin, end);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(parts);
    std::exception_ptr failure;
    std::mutex failure_lock;
    for (unsigned p = 0; p < parts; ++p) {
        const std::uint64_t lo = begin + total * p / parts;
        const std::uint64_t hi = begin + total * (p + 1) / parts;
        workers.emplace_back([&, lo, hi] {
            try {
                fn(lo, hi);
            }
            catch (...) {
                std::lock_guard guard(failure_lock);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    workers.clear();
    if (failure)
        std::rethrow_exception(failure);
}

[[nodiscard]] inline PrefixView materialize(const BoundedSequence& seq, std::uint64_t N, unsigned threads = 1)
{
    std::vector<double> values(N);
    for_each_chunk(0, N, threads, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i)
            values[i] = seq(i + 1);
    });
    return PrefixView(seq, std::move(values));
}

} // namespace seqind
