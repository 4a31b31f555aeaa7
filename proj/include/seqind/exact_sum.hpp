#pragma once

// Exact floating-point accumulation.
//
// ExactSum holds a list of non-overlapping partials (Shewchuk's expansion
// representation) whose real sum equals the exact sum of everything added so
// far. value() returns that real number correctly rounded to double, so two
// accumulators that received the same multiset of reals (in any order, over
// any partition) report bit-identical results.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace seqind {

class ExactSum {
public:
    ExactSum() = default;
    explicit ExactSum(double x) { add(x); }

    void add(double x)
    {
        std::size_t kept = 0;
        for (double y : partials_) {
            if (std::fabs(x) < std::fabs(y))
                std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0)
                partials_[kept++] = lo;
            x = hi;
        }
        partials_.resize(kept);
        if (x != 0.0 || partials_.empty())
            partials_.push_back(x);
    }

    void add(const ExactSum& other)
    {
        for (double p : other.partials_)
            add(p);
    }

    /// Adds a*b without rounding the product.
    void add_product(double a, double b)
    {
        const double hi = a * b;
        const double lo = std::fma(a, b, -hi);
        add(hi);
        if (lo != 0.0)
            add(lo);
    }

    ExactSum& operator+=(double x)
    {
        add(x);
        return *this;
    }
    ExactSum& operator+=(const ExactSum& other)
    {
        add(other);
        return *this;
    }

    void negate()
    {
        for (double& p : partials_)
            p = -p;
    }

    /// Exact product of this expansion with a double.
    [[nodiscard]] ExactSum scaled(double s) const
    {
        ExactSum out;
        for (double p : partials_)
            out.add_product(p, s);
        return out;
    }

    /// Exact product of two expansions.
    [[nodiscard]] static ExactSum product(const ExactSum& x, const ExactSum& y)
    {
        ExactSum out;
        for (double p : x.partials_)
            for (double q : y.partials_)
                out.add_product(p, q);
        return out;
    }

    /// Correctly rounded value of the exact sum (round-half-even).
    [[nodiscard]] double value() const
    {
        std::size_t n = partials_.size();
        if (n == 0)
            return 0.0;
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0)
                break;
        }
        // Half-way case: the remaining partials decide the rounding direction.
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                      (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            const double yr = x - hi;
            if (y == yr)
                hi = x;
        }
        return hi;
    }

    [[nodiscard]] std::span<const double> partials() const { return partials_; }

private:
    std::vector<double> partials_;
};

/// Correctly rounded sum of a range of doubles.
[[nodiscard]] inline double exact_sum(std::span<const double> xs)
{
    ExactSum acc;
    for (double x : xs)
        acc.add(x);
    return acc.value();
}

/// Exact product of several doubles, as an expansion.
[[nodiscard]] inline ExactSum exact_product(std::span<const double> factors)
{
    if (factors.empty())
        return ExactSum{1.0};
    ExactSum out{factors[0]};
    for (std::size_t i = 1; i < factors.size(); ++i)
        out = out.scaled(factors[i]);
    return out;
}

} // namespace seqind
