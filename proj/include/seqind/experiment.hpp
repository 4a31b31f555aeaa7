#pragma once

// Experiment specifications: the JSON documents consumed by the batch CLI.
//
//   {
//     "sequences": [{"kind": "kronecker", "interval": [0, 1], "params": {"alpha": "0.4142135623730950488"}}, ...],
//     "battery":   ["one", "x", {"name": "tent", "points": [[0, 0], [0.5, 1], [1, 0]]}],
//     "schedule":  [100, 1000, 10000, 100000],
//     "kappa":     "default" | "<family member>" | [k1, k2, ...] | "extract",
//     "pool":      "block_ends" | "<family member>" | [k1, k2, ...],
//     "depth":     10000,
//     "grid":      {"deciles": true} | 9 | [0.25, 0.5, 0.75],
//     "tolerances": {"tol": 0.01, "kappa_tol": 0.01, "measurability_tol": 0.01, "window": 5,
//                    "atom_tol": 0.001, "epsilon_width": 0.05, "min_pool": 64},
//     "seed":      6839285612931768320,
//     "outputs":   {"dir": "out", "formats": ["json", "csv"]}
//   }
//
// Every key except "sequences" is optional. Errors carry the JSON pointer of
// the offending field.

#include <seqind/independence.hpp>
#include <seqind/integrand.hpp>
#include <seqind/selection.hpp>
#include <seqind/seq_core.hpp>

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqind {

/// A malformed specification. path() is a JSON pointer such as
/// "/sequences/0/params/alpha".
class SpecError : public std::invalid_argument {
public:
    SpecError(std::string path, const std::string& what)
        : std::invalid_argument((path.empty() ? std::string("/") : path) + ": " + what), path_(std::move(path))
    {
    }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace spec_detail {

using json = nlohmann::json;

inline const json& field(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object())
        throw SpecError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw SpecError(path + "/" + key, "missing required field");
    return *it;
}

inline double real(const json& v, const std::string& path)
{
    if (!v.is_number())
        throw SpecError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw SpecError(path, "expected a finite number");
    return x;
}

inline std::uint64_t natural(const json& v, const std::string& path)
{
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw SpecError(path, "expected a non-negative integer");
}

inline std::string text(const json& v, const std::string& path)
{
    if (!v.is_string())
        throw SpecError(path, "expected a string");
    return v.get<std::string>();
}

inline long double long_real(const json& v, const std::string& path)
{
    if (v.is_number())
        return static_cast<long double>(real(v, path));
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        errno = 0;
        const long double x = std::strtold(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || errno != 0 || !std::isfinite(x))
            throw SpecError(path, "not a decimal real: '" + s + "'");
        return x;
    }
    throw SpecError(path, "expected a number or a decimal string");
}

inline void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& path)
{
    if (!obj.is_object())
        throw SpecError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            known = known || it.key() == k;
        if (!known)
            throw SpecError(path + "/" + it.key(), "unknown field");
    }
}

inline Interval interval(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2)
        throw SpecError(path, "expected [a, b]");
    const double a = real(v[0], path + "/0");
    const double b = real(v[1], path + "/1");
    if (!(a < b))
        throw SpecError(path, "need a < b");
    return {a, b};
}

} // namespace spec_detail

struct SequenceSpec {
    std::string kind;
    Interval interval;
    nlohmann::json params = nlohmann::json::object();

    friend bool operator==(const SequenceSpec&, const SequenceSpec&) = default;
};

inline const std::set<std::string>& kappa_family_names()
{
    static const std::set<std::string> names{"default", "naturals", "evens", "odds", "squares", "powers_of_2",
                                             "thinned"};
    return names;
}

/// Structural check of a sequence spec; parameters are validated per kind.
[[nodiscard]] inline SequenceSpec parse_sequence_spec(const nlohmann::json& doc, const std::string& path = "")
{
    using namespace spec_detail;
    only_keys(doc, {"kind", "interval", "params"}, path);
    SequenceSpec s;
    s.kind = text(field(doc, "kind", path), path + "/kind");
    if (doc.contains("interval"))
        s.interval = interval(doc["interval"], path + "/interval");
    if (doc.contains("params")) {
        if (!doc["params"].is_object())
            throw SpecError(path + "/params", "expected an object");
        s.params = doc["params"];
    }
    const std::string pp = path + "/params";
    const auto& p = s.params;
    if (s.kind == "kronecker") {
        only_keys(p, {"alpha"}, pp);
        (void)long_real(field(p, "alpha", pp), pp + "/alpha");
    }
    else if (s.kind == "van_der_corput") {
        only_keys(p, {"base"}, pp);
        if (natural(field(p, "base", pp), pp + "/base") < 2)
            throw SpecError(pp + "/base", "base must be >= 2");
    }
    else if (s.kind == "periodic") {
        only_keys(p, {"values"}, pp);
        const auto& vals = field(p, "values", pp);
        if (!vals.is_array() || vals.empty())
            throw SpecError(pp + "/values", "expected a nonempty array");
        for (std::size_t i = 0; i < vals.size(); ++i)
            (void)real(vals[i], pp + "/values/" + std::to_string(i));
    }
    else if (s.kind == "constant") {
        only_keys(p, {"value"}, pp);
        (void)real(field(p, "value", pp), pp + "/value");
    }
    else if (s.kind == "block") {
        only_keys(p, {"low", "high", "growth"}, pp);
        const double lo = real(field(p, "low", pp), pp + "/low");
        const double hi = real(field(p, "high", pp), pp + "/high");
        if (!(lo < hi))
            throw SpecError(pp, "need low < high");
        if (natural(field(p, "growth", pp), pp + "/growth") < 2)
            throw SpecError(pp + "/growth", "growth must be >= 2");
    }
    else if (s.kind == "affine_image") {
        only_keys(p, {"source", "scale", "shift"}, pp);
        (void)parse_sequence_spec(field(p, "source", pp), pp + "/source");
        (void)real(field(p, "scale", pp), pp + "/scale");
        (void)real(field(p, "shift", pp), pp + "/shift");
    }
    else if (s.kind == "file") {
        only_keys(p, {"path"}, pp);
        (void)text(field(p, "path", pp), pp + "/path");
    }
    else
        throw SpecError(path + "/kind", "unknown sequence kind '" + s.kind + "'");
    return s;
}

[[nodiscard]] inline nlohmann::json to_json(const SequenceSpec& s)
{
    return {{"kind", s.kind}, {"interval", {s.interval.a, s.interval.b}}, {"params", s.params}};
}

/// Instantiates a sequence; relative file paths resolve against base_dir.
[[nodiscard]] inline BoundedSequence build_sequence(const SequenceSpec& s, const std::filesystem::path& base_dir = {},
                                                    const std::string& path = "")
{
    using namespace spec_detail;
    const auto& p = s.params;
    const std::string pp = path + "/params";
    try {
        if (s.kind == "kronecker")
            return kronecker(long_real(p["alpha"], pp + "/alpha"), s.interval);
        if (s.kind == "van_der_corput")
            return van_der_corput(static_cast<std::uint32_t>(natural(p["base"], pp + "/base")), s.interval);
        if (s.kind == "periodic")
            return periodic(p["values"].get<std::vector<double>>(), s.interval);
        if (s.kind == "constant")
            return constant(p["value"].get<double>(), s.interval);
        if (s.kind == "block")
            return make_block(p["low"].get<double>(), p["high"].get<double>(), natural(p["growth"], pp + "/growth"),
                              s.interval);
        if (s.kind == "affine_image") {
            const auto source = build_sequence(parse_sequence_spec(p["source"], pp + "/source"), base_dir,
                                               pp + "/source");
            return affine_image(source, p["scale"].get<double>(), p["shift"].get<double>(), s.interval);
        }
        if (s.kind == "file") {
            std::filesystem::path file = p["path"].get<std::string>();
            if (file.is_relative() && !base_dir.empty())
                file = base_dir / file;
            return load_sequence(file.string(), s.interval);
        }
    }
    catch (const SpecError&) {
        throw;
    }
    catch (const LoadError&) {
        throw;
    }
    catch (const std::exception& e) {
        throw SpecError(path, e.what());
    }
    throw SpecError(path + "/kind", "unknown sequence kind '" + s.kind + "'");
}

struct BatteryEntry {
    std::string name;
    std::optional<PiecewiseLinear> points; // built-in member when empty

    friend bool operator==(const BatteryEntry&, const BatteryEntry&) = default;
};

struct GridSpec {
    enum class Kind { unset, deciles, count, points };
    Kind kind = Kind::unset;
    std::size_t count = 0;
    std::vector<double> points;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct KappaSpec {
    enum class Kind { family, checkpoints, extract };
    Kind kind = Kind::family;
    std::string family = "default";
    std::vector<std::uint64_t> checkpoints;

    friend bool operator==(const KappaSpec&, const KappaSpec&) = default;
};

struct PoolSpec {
    enum class Kind { unset, block_ends, family, checkpoints };
    Kind kind = Kind::unset;
    std::string family;
    std::vector<std::uint64_t> checkpoints;

    friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

struct Tolerances {
    double tol = kDefaultTol;
    double kappa_tol = kDefaultTol;
    double measurability_tol = kDefaultTol;
    std::size_t window = kDefaultWindow;
    double atom_tol = kDefaultAtomTol;
    double epsilon_width = 0.05;
    std::size_t min_pool = kDefaultMinPool;

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct Outputs {
    std::string dir = "out";
    std::vector<std::string> formats{"json", "csv"};

    friend bool operator==(const Outputs&, const Outputs&) = default;
};

struct ExperimentSpec {
    std::vector<SequenceSpec> sequences;
    std::vector<BatteryEntry> battery; // empty: the standard battery
    std::vector<std::uint64_t> schedule{100, 1000, 10000, 100000};
    KappaSpec kappa;
    PoolSpec pool;
    std::uint64_t depth = 10000;
    GridSpec grid;
    Tolerances tolerances;
    std::uint64_t seed = kDefaultThinningSeed;
    Outputs outputs;

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

namespace spec_detail {

inline std::vector<std::uint64_t> checkpoint_list(const json& v, const std::string& path)
{
    std::vector<std::uint64_t> ks;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto k = natural(v[i], path + "/" + std::to_string(i));
        if (k < 1 || (!ks.empty() && k <= ks.back()))
            throw SpecError(path + "/" + std::to_string(i), "checkpoints must be strictly increasing and >= 1");
        ks.push_back(k);
    }
    if (ks.empty())
        throw SpecError(path, "expected at least one checkpoint");
    return ks;
}

inline double positive(const json& v, const std::string& path)
{
    const double x = real(v, path);
    if (!(x > 0.0))
        throw SpecError(path, "must be positive");
    return x;
}

} // namespace spec_detail

[[nodiscard]] inline ExperimentSpec parse_experiment(const nlohmann::json& doc)
{
    using namespace spec_detail;
    only_keys(doc, {"sequences", "battery", "schedule", "kappa", "pool", "depth", "grid", "tolerances", "seed", "outputs"},
              "");
    ExperimentSpec spec;

    const auto& seqs = field(doc, "sequences", "");
    if (!seqs.is_array() || seqs.empty())
        throw SpecError("/sequences", "expected a nonempty array");
    for (std::size_t i = 0; i < seqs.size(); ++i)
        spec.sequences.push_back(parse_sequence_spec(seqs[i], "/sequences/" + std::to_string(i)));

    if (doc.contains("battery")) {
        const auto& b = doc["battery"];
        if (!b.is_array() || b.empty())
            throw SpecError("/battery", "expected a nonempty array");
        static const std::set<std::string> builtin{"one", "x", "x2", "sin2pi", "cos2pi", "ramp"};
        std::set<std::string> seen;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const std::string p = "/battery/" + std::to_string(i);
            BatteryEntry e;
            if (b[i].is_string()) {
                e.name = b[i].get<std::string>();
                if (!builtin.count(e.name))
                    throw SpecError(p, "unknown built-in function '" + e.name + "'");
            }
            else {
                only_keys(b[i], {"name", "points"}, p);
                e.name = text(field(b[i], "name", p), p + "/name");
                const auto& pts = field(b[i], "points", p);
                if (!pts.is_array() || pts.size() < 2)
                    throw SpecError(p + "/points", "expected at least two [x, y] pairs");
                std::vector<double> xs, ys;
                for (std::size_t j = 0; j < pts.size(); ++j) {
                    const std::string q = p + "/points/" + std::to_string(j);
                    if (!pts[j].is_array() || pts[j].size() != 2)
                        throw SpecError(q, "expected [x, y]");
                    xs.push_back(real(pts[j][0], q + "/0"));
                    ys.push_back(real(pts[j][1], q + "/1"));
                    if (j > 0 && !(xs[j] > xs[j - 1]))
                        throw SpecError(q + "/0", "breakpoints must be strictly increasing");
                }
                e.points = PiecewiseLinear(std::move(xs), std::move(ys));
            }
            if (!seen.insert(e.name).second)
                throw SpecError(p, "duplicate function name '" + e.name + "'");
            spec.battery.push_back(std::move(e));
        }
    }

    if (doc.contains("schedule")) {
        const auto& s = doc["schedule"];
        if (!s.is_array())
            throw SpecError("/schedule", "expected an array");
        spec.schedule = checkpoint_list(s, "/schedule");
    }

    if (doc.contains("kappa")) {
        const auto& k = doc["kappa"];
        if (k.is_array()) {
            spec.kappa.kind = KappaSpec::Kind::checkpoints;
            spec.kappa.family.clear();
            spec.kappa.checkpoints = checkpoint_list(k, "/kappa");
        }
        else {
            const std::string name = text(k, "/kappa");
            if (name == "extract") {
                spec.kappa.kind = KappaSpec::Kind::extract;
                spec.kappa.family.clear();
            }
            else if (kappa_family_names().count(name))
                spec.kappa.family = name;
            else
                throw SpecError("/kappa", "unknown kappa '" + name + "'");
        }
    }

    if (doc.contains("pool")) {
        const auto& p = doc["pool"];
        if (p.is_array()) {
            spec.pool.kind = PoolSpec::Kind::checkpoints;
            spec.pool.checkpoints = checkpoint_list(p, "/pool");
        }
        else {
            const std::string name = text(p, "/pool");
            if (name == "block_ends")
                spec.pool.kind = PoolSpec::Kind::block_ends;
            else if (kappa_family_names().count(name) && name != "default") {
                spec.pool.kind = PoolSpec::Kind::family;
                spec.pool.family = name;
            }
            else
                throw SpecError("/pool", "unknown pool '" + name + "'");
        }
    }

    if (doc.contains("depth")) {
        spec.depth = natural(doc["depth"], "/depth");
        if (spec.depth < 1)
            throw SpecError("/depth", "must be >= 1");
    }

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (g.is_object()) {
            only_keys(g, {"deciles"}, "/grid");
            if (!field(g, "deciles", "/grid").is_boolean() || !g["deciles"].get<bool>())
                throw SpecError("/grid/deciles", "expected true");
            spec.grid.kind = GridSpec::Kind::deciles;
            spec.grid.count = 9;
        }
        else if (g.is_array()) {
            if (g.empty())
                throw SpecError("/grid", "expected at least one point");
            spec.grid.kind = GridSpec::Kind::points;
            for (std::size_t i = 0; i < g.size(); ++i)
                spec.grid.points.push_back(real(g[i], "/grid/" + std::to_string(i)));
        }
        else {
            spec.grid.kind = GridSpec::Kind::count;
            spec.grid.count = natural(g, "/grid");
            if (spec.grid.count < 1)
                throw SpecError("/grid", "count must be >= 1");
        }
    }

    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        only_keys(t, {"tol", "kappa_tol", "measurability_tol", "window", "atom_tol", "epsilon_width", "min_pool"},
                  "/tolerances");
        auto& tol = spec.tolerances;
        if (t.contains("tol"))
            tol.tol = positive(t["tol"], "/tolerances/tol");
        if (t.contains("kappa_tol"))
            tol.kappa_tol = positive(t["kappa_tol"], "/tolerances/kappa_tol");
        if (t.contains("measurability_tol"))
            tol.measurability_tol = positive(t["measurability_tol"], "/tolerances/measurability_tol");
        if (t.contains("atom_tol"))
            tol.atom_tol = positive(t["atom_tol"], "/tolerances/atom_tol");
        if (t.contains("epsilon_width"))
            tol.epsilon_width = positive(t["epsilon_width"], "/tolerances/epsilon_width");
        if (t.contains("window")) {
            tol.window = natural(t["window"], "/tolerances/window");
            if (tol.window < 1)
                throw SpecError("/tolerances/window", "must be positive");
        }
        if (t.contains("min_pool")) {
            tol.min_pool = natural(t["min_pool"], "/tolerances/min_pool");
            if (tol.min_pool < 1)
                throw SpecError("/tolerances/min_pool", "must be positive");
        }
    }

    if (doc.contains("seed"))
        spec.seed = natural(doc["seed"], "/seed");

    if (doc.contains("outputs")) {
        const auto& o = doc["outputs"];
        only_keys(o, {"dir", "formats"}, "/outputs");
        if (o.contains("dir"))
            spec.outputs.dir = text(o["dir"], "/outputs/dir");
        if (o.contains("formats")) {
            const auto& f = o["formats"];
            if (!f.is_array())
                throw SpecError("/outputs/formats", "expected an array");
            spec.outputs.formats.clear();
            for (std::size_t i = 0; i < f.size(); ++i) {
                const auto name = text(f[i], "/outputs/formats/" + std::to_string(i));
                if (name != "json" && name != "csv")
                    throw SpecError("/outputs/formats/" + std::to_string(i), "expected \"json\" or \"csv\"");
                spec.outputs.formats.push_back(name);
            }
        }
    }
    return spec;
}

[[nodiscard]] inline nlohmann::json to_json(const ExperimentSpec& spec)
{
    nlohmann::json doc;
    doc["sequences"] = nlohmann::json::array();
    for (const auto& s : spec.sequences)
        doc["sequences"].push_back(to_json(s));
    if (!spec.battery.empty()) {
        doc["battery"] = nlohmann::json::array();
        for (const auto& e : spec.battery) {
            if (!e.points) {
                doc["battery"].push_back(e.name);
                continue;
            }
            nlohmann::json pts = nlohmann::json::array();
            for (std::size_t i = 0; i < e.points->xs.size(); ++i)
                pts.push_back({e.points->xs[i], e.points->ys[i]});
            doc["battery"].push_back({{"name", e.name}, {"points", pts}});
        }
    }
    doc["schedule"] = spec.schedule;
    switch (spec.kappa.kind) {
    case KappaSpec::Kind::family:
        doc["kappa"] = spec.kappa.family;
        break;
    case KappaSpec::Kind::checkpoints:
        doc["kappa"] = spec.kappa.checkpoints;
        break;
    case KappaSpec::Kind::extract:
        doc["kappa"] = "extract";
        break;
    }
    switch (spec.pool.kind) {
    case PoolSpec::Kind::unset:
        break;
    case PoolSpec::Kind::block_ends:
        doc["pool"] = "block_ends";
        break;
    case PoolSpec::Kind::family:
        doc["pool"] = spec.pool.family;
        break;
    case PoolSpec::Kind::checkpoints:
        doc["pool"] = spec.pool.checkpoints;
        break;
    }
    doc["depth"] = spec.depth;
    switch (spec.grid.kind) {
    case GridSpec::Kind::unset:
        break;
    case GridSpec::Kind::deciles:
        doc["grid"] = {{"deciles", true}};
        break;
    case GridSpec::Kind::count:
        doc["grid"] = spec.grid.count;
        break;
    case GridSpec::Kind::points:
        doc["grid"] = spec.grid.points;
        break;
    }
    const auto& t = spec.tolerances;
    doc["tolerances"] = {{"tol", t.tol},
                         {"kappa_tol", t.kappa_tol},
                         {"measurability_tol", t.measurability_tol},
                         {"window", t.window},
                         {"atom_tol", t.atom_tol},
                         {"epsilon_width", t.epsilon_width},
                         {"min_pool", t.min_pool}};
    doc["seed"] = spec.seed;
    doc["outputs"] = {{"dir", spec.outputs.dir}, {"formats", spec.outputs.formats}};
    return doc;
}

/// The battery named by the spec, or the standard one.
[[nodiscard]] inline FunctionBattery build_battery(const ExperimentSpec& spec, const Interval& iv)
{
    auto standard = FunctionBattery::standard_members(iv);
    if (spec.battery.empty())
        return FunctionBattery(std::move(standard));
    std::vector<Integrand> members;
    for (const auto& e : spec.battery) {
        if (e.points) {
            members.push_back(Integrand::piecewise_linear(e.name, *e.points));
            continue;
        }
        for (const auto& f : standard)
            if (f.name() == e.name)
                members.push_back(f);
    }
    return FunctionBattery(std::move(members));
}

/// Fixed grid points implied by the spec on iv; empty when a continuity grid
/// should be derived instead.
[[nodiscard]] inline std::vector<double> fixed_grid(const GridSpec& g, const Interval& iv)
{
    std::vector<double> out;
    if (g.kind == GridSpec::Kind::deciles)
        for (int i = 1; i <= 9; ++i)
            out.push_back(iv.a + iv.length() * i / 10.0);
    else if (g.kind == GridSpec::Kind::points)
        out = g.points;
    return out;
}

} // namespace seqind
