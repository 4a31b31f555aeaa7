#pragma once

// Integrands: continuous callables, piecewise-linear functions and
// right-continuous step functions on the real line.

#include <seqind/format.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqind {

/// Linear interpolation through (xs[i], ys[i]); constant beyond the ends.
struct PiecewiseLinear {
    std::vector<double> xs;
    std::vector<double> ys;

    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values) : xs(std::move(knots)), ys(std::move(values))
    {
        if (xs.empty() || xs.size() != ys.size())
            throw std::invalid_argument("piecewise-linear: need matching, nonempty knot and value lists");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("piecewise-linear: knots must be strictly increasing");
    }

    [[nodiscard]] double operator()(double x) const
    {
        if (x <= xs.front())
            return ys.front();
        if (x >= xs.back())
            return ys.back();
        const auto j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return ys[j - 1] + t * (ys[j] - ys[j - 1]);
    }

    friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;
};

/// s(x) = levels[j] where j = #{breakpoints <= x}. Cells are half-open
/// [t_{j-1}, t_j), so s is right-continuous.
struct StepFunction {
    std::vector<double> breakpoints;
    std::vector<double> levels; // breakpoints.size() + 1 entries

    StepFunction() = default;
    StepFunction(std::vector<double> cuts, std::vector<double> values)
        : breakpoints(std::move(cuts)), levels(std::move(values))
    {
        if (levels.size() != breakpoints.size() + 1)
            throw std::invalid_argument("step function: need one more level than breakpoints");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw std::invalid_argument("step function: breakpoints must be strictly increasing");
    }

    [[nodiscard]] double operator()(double x) const
    {
        const auto j = std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin();
        return levels[static_cast<std::size_t>(j)];
    }

    friend bool operator==(const StepFunction&, const StepFunction&) = default;
};

class Integrand {
public:
    enum class Kind { continuous, piecewise_linear, step };

    /// A continuous function. `lipschitz`, when known, lets envelopes bound
    /// the function rigorously between samples.
    [[nodiscard]] static Integrand continuous(std::string name, std::function<double(double)> f,
                                              std::optional<double> lipschitz = std::nullopt)
    {
        Integrand g(Kind::continuous, std::move(name));
        g.fn_ = std::move(f);
        g.lipschitz_ = lipschitz;
        return g;
    }

    [[nodiscard]] static Integrand piecewise_linear(std::string name, PiecewiseLinear p)
    {
        Integrand g(Kind::piecewise_linear, std::move(name));
        double lip = 0.0;
        for (std::size_t i = 1; i < p.xs.size(); ++i)
            lip = std::max(lip, std::fabs((p.ys[i] - p.ys[i - 1]) / (p.xs[i] - p.xs[i - 1])));
        g.lipschitz_ = lip;
        g.pwl_ = std::move(p);
        return g;
    }

    [[nodiscard]] static Integrand step(std::string name, StepFunction s)
    {
        Integrand g(Kind::step, std::move(name));
        g.step_ = std::move(s);
        return g;
    }

    /// Indicator of [lo, hi); hi = +inf gives [lo, inf).
    [[nodiscard]] static Integrand indicator(double lo, double hi)
    {
        if (!(lo < hi))
            throw std::invalid_argument("indicator: need lo < hi");
        const std::string name = "1[" + format_real(lo) + "," + format_real(hi) + ")";
        if (std::isinf(hi))
            return step(name, StepFunction({lo}, {0.0, 1.0}));
        return step(name, StepFunction({lo, hi}, {0.0, 1.0, 0.0}));
    }

    [[nodiscard]] double operator()(double x) const
    {
        switch (kind_) {
        case Kind::continuous:
            return fn_(x);
        case Kind::piecewise_linear:
            return pwl_(x);
        case Kind::step:
            return step_(x);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] std::optional<double> lipschitz() const { return lipschitz_; }
    [[nodiscard]] const PiecewiseLinear* as_piecewise_linear() const
    {
        return kind_ == Kind::piecewise_linear ? &pwl_ : nullptr;
    }
    [[nodiscard]] const StepFunction* as_step() const { return kind_ == Kind::step ? &step_ : nullptr; }

private:
    Integrand(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
    std::function<double(double)> fn_;
    PiecewiseLinear pwl_;
    StepFunction step_;
    std::optional<double> lipschitz_;
};

} // namespace seqind
