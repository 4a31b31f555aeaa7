#pragma once

// JSON and CSV emission for reports. Reals are written in shortest
// round-trip form with '.' as decimal separator and '\n' line endings, so
// identical inputs give byte-identical files.

#include <seqind/density.hpp>
#include <seqind/distribution.hpp>
#include <seqind/format.hpp>
#include <seqind/independence.hpp>
#include <seqind/selection.hpp>
#include <seqind/subsequence_index.hpp>

#include <json.hpp>

#include <ostream>
#include <span>
#include <string>

namespace seqind {

using json = nlohmann::json;

[[nodiscard]] inline json to_json(const StepCDF& F)
{
    return json{{"points", F.points()}, {"masses", F.masses()}};
}

[[nodiscard]] inline json to_json(const SubsequenceIndex& kappa)
{
    return json{{"rule", kappa.rule()}, {"checkpoints", kappa.checkpoints()}};
}

[[nodiscard]] inline json to_json(const DensityEstimate& d)
{
    json trace = json::array();
    for (const auto& t : d.trace)
        trace.push_back({t.k, t.ratio});
    return json{{"value", d.value},   {"oscillation", d.oscillation}, {"converged", d.converged},
                {"tol", d.tol},       {"window", d.window},           {"trace", std::move(trace)}};
}

[[nodiscard]] inline json to_json(const MeasurabilityReport& r)
{
    json points = json::array();
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        json p = to_json(r.traces[i]);
        p["x"] = r.grid[i];
        points.push_back(std::move(p));
    }
    json out{{"sequence", r.sequence}, {"kappa", r.kappa},   {"grid", r.grid}, {"measurable", r.measurable},
             {"tol", r.tol},           {"window", r.window}, {"points", std::move(points)}};
    if (r.limit_cdf)
        out["limit_cdf"] = to_json(*r.limit_cdf);
    return out;
}

[[nodiscard]] inline json to_json(const RectangleResidual& r)
{
    return json{{"corner", r.corner}, {"density", r.density}, {"product", r.product}, {"residual", r.residual}};
}

[[nodiscard]] inline json to_json(const IndependenceReport& r)
{
    json tuples = json::array();
    for (const auto& t : r.tuples)
        tuples.push_back({{"tuple", t.label}, {"delta", t.delta}, {"product", t.product}, {"gap", t.gap}});
    json residuals = json::array();
    for (const auto& x : r.rectangle_residuals)
        residuals.push_back(to_json(x));
    return json{{"sequences", r.sequences},
                {"battery", r.battery},
                {"schedule", r.schedule},
                {"tol", r.tol},
                {"verdict", std::string(to_string(r.verdict))},
                {"max_terminal_gap", r.max_terminal_gap},
                {"max_rectangle_residual", r.max_rectangle_residual},
                {"grid", r.grid},
                {"tuples", std::move(tuples)},
                {"rectangle_residuals", std::move(residuals)}};
}

[[nodiscard]] inline json to_json(const KappaIndependenceReport& r)
{
    json residuals = json::array();
    for (const auto& x : r.residuals)
        residuals.push_back(to_json(x));
    json measurability = json::array();
    for (const auto& m : r.measurability)
        measurability.push_back({{"sequence", m.sequence}, {"measurable", m.measurable}, {"oscillation", m.oscillation}});
    return json{{"kappa", r.kappa},
                {"depth", r.depth},
                {"tol", r.tol},
                {"verdict", std::string(to_string(r.verdict))},
                {"max_abs_residual", r.max_abs_residual},
                {"grid", r.grid},
                {"measurability", std::move(measurability)},
                {"residuals", std::move(residuals)}};
}

[[nodiscard]] inline json to_json(const EquivalenceReport& r)
{
    json kappas = json::array();
    for (const auto& k : r.kappa_reports)
        kappas.push_back(to_json(k));
    json skipped = json::array();
    for (const auto& s : r.skipped)
        skipped.push_back({{"kappa", s.kappa}, {"reason", s.reason}});
    json out{{"agreement", std::string(to_string(r.agreement))},
             {"statind", to_json(r.statind)},
             {"kappa", std::move(kappas)},
             {"skipped", std::move(skipped)},
             {"counterexample", nullptr}};
    if (r.counterexample) {
        const auto& c = *r.counterexample;
        out["counterexample"] = {{"statind_verdict", std::string(to_string(c.statind))},
                                 {"kappa", c.kappa},
                                 {"kappa_verdict", std::string(to_string(c.kappa_verdict))},
                                 {"max_abs_residual", c.max_abs_residual},
                                 {"corner", c.corner},
                                 {"note", c.note}};
    }
    return out;
}

/// Pretty-printed JSON followed by a newline.
inline void write_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

/// Columns: N, tuple, delta, product, gap. Rows by tuple label, then N.
inline void write_gap_csv(std::ostream& out, const IndependenceReport& r)
{
    out << "N,tuple,delta,product,gap\n";
    for (const auto& t : r.tuples)
        for (std::size_t i = 0; i < r.schedule.size(); ++i)
            out << r.schedule[i] << ',' << t.label << ',' << format_real(t.delta[i]) << ','
                << format_real(t.product[i]) << ',' << format_real(t.gap[i]) << '\n';
}

[[nodiscard]] inline std::string corner_label(std::span<const double> corner)
{
    std::string s;
    for (std::size_t i = 0; i < corner.size(); ++i)
        s += (i ? ";" : "") + format_real(corner[i]);
    return s;
}

/// Columns: kappa, depth, corner (coordinates joined by ';'), density,
/// product, residual. Rows in the order given (callers pass kappa-sorted
/// reports), corners in grid order.
inline void write_residual_csv(std::ostream& out, std::span<const KappaIndependenceReport> reports)
{
    out << "kappa,depth,corner,density,product,residual\n";
    for (const auto& r : reports)
        for (const auto& x : r.residuals)
            out << r.kappa << ',' << r.depth << ',' << corner_label(x.corner) << ',' << format_real(x.density) << ','
                << format_real(x.product) << ',' << format_real(x.residual) << '\n';
}

} // namespace seqind
