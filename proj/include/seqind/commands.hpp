#pragma once

// The batch commands behind the seqind executable. Each returns the process
// exit status; operational problems are thrown and mapped to kExitError by
// the caller.

#include <seqind/experiment.hpp>
#include <seqind/independence.hpp>
#include <seqind/report.hpp>
#include <seqind/selection.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqind {

inline constexpr int kExitAgree = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCounterexample = 2;

/// Command-line overrides of spec fields.
struct RunOptions {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> depth;
    std::filesystem::path base_dir; // relative sequence files resolve here
};

[[nodiscard]] inline nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw SpecError("", path.string() + ": " + e.what());
    }
}

namespace cmd_detail {

inline std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_output(path);
    out << text;
    finish(out, path);
}

inline bool wants(const ExperimentSpec& spec, const char* format)
{
    return std::find(spec.outputs.formats.begin(), spec.outputs.formats.end(), format) != spec.outputs.formats.end();
}

inline std::filesystem::path out_dir(const ExperimentSpec& spec, const RunOptions& opts)
{
    return opts.out ? *opts.out : std::filesystem::path(spec.outputs.dir);
}

inline ExperimentSpec apply(ExperimentSpec spec, const RunOptions& opts)
{
    if (opts.seed)
        spec.seed = *opts.seed;
    if (opts.depth) {
        if (*opts.depth < 1)
            throw SpecError("/depth", "must be >= 1");
        spec.depth = *opts.depth;
    }
    return spec;
}

inline std::vector<BoundedSequence> build_all(const ExperimentSpec& spec, const RunOptions& opts)
{
    std::vector<BoundedSequence> seqs;
    for (std::size_t i = 0; i < spec.sequences.size(); ++i)
        seqs.push_back(build_sequence(spec.sequences[i], opts.base_dir, "/sequences/" + std::to_string(i)));
    return seqs;
}

inline SubsequenceIndex family_member(const ExperimentSpec& spec, const std::string& name)
{
    for (auto& k : kappa_family_builder(spec.depth, spec.seed))
        if (k.rule() == name)
            return k;
    throw SpecError("/kappa", "unknown family member '" + name + "'");
}

inline SubsequenceIndex build_pool(const ExperimentSpec& spec, std::span<const BoundedSequence> seqs)
{
    switch (spec.pool.kind) {
    case PoolSpec::Kind::unset:
        return family_member(spec, "naturals");
    case PoolSpec::Kind::family:
        return family_member(spec, spec.pool.family);
    case PoolSpec::Kind::checkpoints:
        return SubsequenceIndex(spec.pool.checkpoints, "explicit");
    case PoolSpec::Kind::block_ends:
        try {
            return block_ends(seqs.front(), spec.depth);
        }
        catch (const std::invalid_argument& e) {
            throw SpecError("/pool", e.what());
        }
    }
    throw SpecError("/pool", "unsupported pool");
}

inline std::vector<double> extraction_grid(const ExperimentSpec& spec, std::span<const BoundedSequence> seqs,
                                           std::uint64_t depth)
{
    auto grid = fixed_grid(spec.grid, seqs.front().interval());
    if (!grid.empty())
        return grid;
    const std::size_t count = spec.grid.kind == GridSpec::Kind::count ? spec.grid.count : kDefaultMeasurabilityGrid;
    std::vector<StepCDF> cdfs;
    for (const auto& s : seqs)
        cdfs.push_back(empirical_cdf(materialize(s, depth)));
    return continuity_grid(cdfs, count, spec.tolerances.atom_tol);
}

inline SubsequenceIndex extract_kappa(const ExperimentSpec& spec, std::span<const BoundedSequence> seqs,
                                      std::vector<double>* grid_out = nullptr)
{
    const SubsequenceIndex pool = build_pool(spec, seqs);
    const auto& t = spec.tolerances;
    if (pool.size() < std::max(t.min_pool, t.window))
        throw SpecError("/pool", "pool '" + pool.rule() + "' has " + std::to_string(pool.size()) +
                                     " checkpoints, need at least " + std::to_string(std::max(t.min_pool, t.window)));
    auto grid = extraction_grid(spec, seqs, pool.back());
    auto kappa = helly_extract(seqs, pool, grid, {t.measurability_tol, t.window, t.min_pool});
    if (grid_out)
        *grid_out = std::move(grid);
    return kappa;
}

} // namespace cmd_detail

/// Writes v(1), ..., v(N), one shortest round-trip value per line.
inline void cmd_generate(const SequenceSpec& spec, std::uint64_t N, const std::filesystem::path& out_path,
                         const std::filesystem::path& base_dir = {})
{
    const auto seq = build_sequence(spec, base_dir);
    std::string text;
    text.reserve(N * 20);
    for (std::uint64_t n = 1; n <= N; ++n) {
        text += format_real(seq(n));
        text += '\n';
    }
    cmd_detail::write_file(out_path, text);
}

/// Empirical CDF at the spec depth plus indicator sandwiches on the grid
/// (cdf.json), F_N on the grid for each schedule entry up to the depth
/// (cdf_table.csv), and the Weyl-sum identity check mean f(v) against ∫f dF_N
/// for each battery member (weyl_check.csv).
inline int cmd_distribution(const ExperimentSpec& raw, const RunOptions& opts = {})
{
    const ExperimentSpec spec = cmd_detail::apply(raw, opts);
    if (spec.sequences.size() != 1)
        throw SpecError("/sequences", "distribution takes exactly one sequence, got " +
                                          std::to_string(spec.sequences.size()));
    const auto seq = build_sequence(spec.sequences.front(), opts.base_dir, "/sequences/0");
    const Interval& iv = seq.interval();
    const PrefixView prefix = materialize(seq, spec.depth);
    const auto battery = build_battery(spec, iv);

    std::vector<std::uint64_t> depths;
    for (auto N : spec.schedule)
        if (N < spec.depth)
            depths.push_back(N);
    depths.push_back(spec.depth);

    auto grid = fixed_grid(spec.grid, iv);
    if (grid.empty()) {
        const std::size_t count = spec.grid.kind == GridSpec::Kind::count ? spec.grid.count : 9;
        for (std::size_t i = 1; i <= count; ++i)
            grid.push_back(iv.a + iv.length() * static_cast<double>(i) / static_cast<double>(count + 1));
    }

    const auto dir = cmd_detail::out_dir(spec, opts);
    std::ostringstream table, weyl;
    table << "N,x,F_N(x),abs_dev_uniform\n";
    weyl << "N,function,mean,integral,abs_diff\n";
    nlohmann::json sup = nlohmann::json::array();
    for (auto N : depths) {
        const auto sample = prefix.values().first(N);
        const StepCDF F = empirical_cdf(sample, iv);
        for (double x : grid) {
            const double fx = F(x);
            table << N << ',' << format_real(x) << ',' << format_real(fx) << ','
                  << format_real(std::fabs(fx - (x - iv.a) / iv.length())) << '\n';
        }
        for (const auto& f : battery.members()) {
            const double mean = sample_mean(f, sample);
            const double integral = stieltjes(f, F);
            weyl << N << ',' << f.name() << ',' << format_real(mean) << ',' << format_real(integral) << ','
                 << format_real(std::fabs(mean - integral)) << '\n';
        }
        sup.push_back({{"N", N}, {"sup_distance_to_uniform", sup_distance_to_uniform(F)}});
    }

    // Ramp sandwiches of 1_[a,x) of width epsilon_width (narrowed to fit) at
    // each grid point, with their gaps against the deepest F_N.
    const StepCDF deepest = empirical_cdf(prefix);
    nlohmann::json sandwiches = nlohmann::json::array();
    for (double x : grid) {
        if (!(x > iv.a && x < iv.b))
            continue;
        const double width = std::min(spec.tolerances.epsilon_width, (x - iv.a) / 2.0);
        const auto s = sandwich_indicator(x, width, iv, deepest);
        sandwiches.push_back(
            {{"x", x}, {"width", width}, {"gap_bound", *s.gap_bound}, {"achieved_gap", *s.achieved_gap}});
    }

    if (cmd_detail::wants(spec, "json")) {
        nlohmann::json doc{{"sequence", seq.label()},
                           {"interval", {iv.a, iv.b}},
                           {"depth", spec.depth},
                           {"cdf", to_json(deepest)},
                           {"uniform_distance", std::move(sup)},
                           {"sandwiches", std::move(sandwiches)}};
        std::ostringstream s;
        write_json(s, doc);
        cmd_detail::write_file(dir / "cdf.json", s.str());
    }
    if (cmd_detail::wants(spec, "csv")) {
        cmd_detail::write_file(dir / "cdf_table.csv", table.str());
        cmd_detail::write_file(dir / "weyl_check.csv", weyl.str());
    }
    return kExitAgree;
}

/// Averaging test, rectangle tests along the spec's kappa(s), and the
/// agreement verdict. Writes report.json, gap_trace.csv and
/// rectangle_residuals.csv.
inline int cmd_independence(const ExperimentSpec& raw, const RunOptions& opts = {})
{
    const ExperimentSpec spec = cmd_detail::apply(raw, opts);
    if (spec.sequences.size() < 2)
        throw SpecError("/sequences", "independence needs at least two sequences, got " +
                                          std::to_string(spec.sequences.size()));
    const auto seqs = cmd_detail::build_all(spec, opts);
    const Interval& iv = seqs.front().interval();
    for (std::size_t i = 1; i < seqs.size(); ++i)
        if (!(seqs[i].interval() == iv))
            throw SpecError("/sequences/" + std::to_string(i) + "/interval", "all sequences must share one interval");
    const auto battery = build_battery(spec, iv);

    std::vector<SubsequenceIndex> family;
    switch (spec.kappa.kind) {
    case KappaSpec::Kind::family:
        if (spec.kappa.family == "default")
            family = kappa_family_builder(spec.depth, spec.seed);
        else
            family.push_back(cmd_detail::family_member(spec, spec.kappa.family));
        break;
    case KappaSpec::Kind::checkpoints:
        family.emplace_back(spec.kappa.checkpoints, "explicit");
        break;
    case KappaSpec::Kind::extract:
        family.push_back(cmd_detail::extract_kappa(spec, seqs));
        break;
    }

    EquivalenceOptions eo;
    const auto& t = spec.tolerances;
    eo.tol = t.tol;
    eo.kappa_tol = t.kappa_tol;
    eo.atom_tol = t.atom_tol;
    eo.window = t.window;
    eo.measurability_tol = t.measurability_tol;
    eo.fixed_grid = fixed_grid(spec.grid, iv);
    if (spec.grid.kind == GridSpec::Kind::count)
        eo.grid_count = spec.grid.count;
    const auto rep = equivalence_harness(seqs, battery, family, spec.schedule, eo);

    const auto dir = cmd_detail::out_dir(spec, opts);
    if (cmd_detail::wants(spec, "json")) {
        std::ostringstream s;
        write_json(s, to_json(rep));
        cmd_detail::write_file(dir / "report.json", s.str());
    }
    if (cmd_detail::wants(spec, "csv")) {
        std::ostringstream gaps, residuals;
        write_gap_csv(gaps, rep.statind);
        write_residual_csv(residuals, rep.kappa_reports);
        cmd_detail::write_file(dir / "gap_trace.csv", gaps.str());
        cmd_detail::write_file(dir / "rectangle_residuals.csv", residuals.str());
    }
    return rep.agreement == Agreement::counterexample ? kExitCounterexample : kExitAgree;
}

/// Helly extraction over the spec's pool. Writes kappa.txt (one checkpoint
/// per line), kappa.json and measurability.json (one report per sequence
/// along the extracted kappa).
inline int cmd_extract(const ExperimentSpec& raw, const RunOptions& opts = {})
{
    const ExperimentSpec spec = cmd_detail::apply(raw, opts);
    if (spec.kappa.kind != KappaSpec::Kind::extract)
        throw SpecError("/kappa", "extract requires \"kappa\": \"extract\"");
    const auto seqs = cmd_detail::build_all(spec, opts);
    std::vector<double> grid;
    const auto kappa = cmd_detail::extract_kappa(spec, seqs, &grid);

    nlohmann::json reports = nlohmann::json::array();
    for (const auto& s : seqs)
        reports.push_back(
            to_json(detect_measurable(s, kappa, grid, spec.tolerances.measurability_tol, spec.tolerances.window)));

    const auto dir = cmd_detail::out_dir(spec, opts);
    std::string list;
    for (auto k : kappa.checkpoints())
        list += std::to_string(k) + '\n';
    cmd_detail::write_file(dir / "kappa.txt", list);
    std::ostringstream kj, mj;
    write_json(kj, to_json(kappa));
    write_json(mj, reports);
    cmd_detail::write_file(dir / "kappa.json", kj.str());
    cmd_detail::write_file(dir / "measurability.json", mj.str());
    return kExitAgree;
}

} // namespace seqind
