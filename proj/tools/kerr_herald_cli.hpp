// Copyright 2026 The kerr-herald Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Config parsing and the run pipeline behind the kerr-herald executable. Kept
// in a header so the tests can drive it without spawning processes.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kerr_herald/io.hpp"
#include "kerr_herald/spectral.hpp"
#include "kerr_herald/steady.hpp"
#include "kerr_herald/sweeps.hpp"
#include "kerr_herald/trajectory.hpp"
#include "kerr_herald/wigner.hpp"

namespace kerr_herald::cli {

using io::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kSchema = 2, kNumerical = 3, kIo = 4 };

inline const std::vector<std::string>& modes() {
    static const std::vector<std::string> m{"steady", "spectrum", "pseudo", "trajectory", "wigner", "sweep",
                                            "optimize-xi"};
    return m;
}

/// Config problem; `field` is the dotted key path, empty for parse errors.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct TrajectoryBlock {
    double t_final = 100.0;
    int n_traj = 1;
    std::uint64_t seed = 1;
    int sample_count = 2001;
    double herald_k = 5.0;
    std::string initial = "vacuum";  // vacuum | pseudo | steady (steady needs the density-matrix path)
};

struct WignerBlock {
    std::optional<cplx> center;  // nullopt: <a> of the state
    double half_width = 3.0;
    int resolution = 101;
    std::string state = "pseudo";  // pseudo | steady
};

struct SweepBlock {
    std::string axis = "kerr";  // kerr | alpha2
    std::string spacing = "logspace";  // logspace | linspace | values
    std::vector<double> grid_spec{-0.5, 1.5, 10};
    std::vector<double> values() const {
        if (spacing == "values") return grid_spec;
        const int n = static_cast<int>(grid_spec[2]);
        return spacing == "logspace" ? logspace(grid_spec[0], grid_spec[1], n) : linspace(grid_spec[0], grid_spec[1], n);
    }
};

struct XiBlock {
    int resolution = 41;
    double radius = 0.0;  // 0: twice the steady-state |<a>|
};

struct RunConfig {
    std::string mode;
    SystemParams params;
    bool fock_dim_auto = true;
    std::optional<double> drive_power;
    TrajectoryBlock trajectory;
    WignerBlock wigner;
    SweepBlock sweep;
    XiBlock xi_grid;
    std::string output_dir = "out";

    /// Resolved config in the input schema; feeding it back reproduces the run.
    json echo() const;

    /// How defaults and derived values were filled in.
    json defaults() const {
        json d{{"fock_dim_auto", fock_dim_auto}};
        d["drive_power"] = drive_power ? json(*drive_power) : json(nullptr);
        return d;
    }
};

// ------------------------------------------------------------------ parsing

namespace detail {

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw SchemaError(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!ok.count(k)) throw SchemaError(where.empty() ? k : where + "." + k, "unknown key");
    }
}

inline std::string path(const std::string& where, const char* key) {
    return where.empty() ? std::string(key) : where + "." + key;
}

inline double get_real(const json& v, const std::string& field) {
    if (!v.is_number()) throw SchemaError(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(field, "must be finite");
    return x;
}

inline cplx get_complex(const json& v, const std::string& field) {
    if (v.is_number()) return {get_real(v, field), 0.0};
    if (v.is_array() && v.size() == 2) return {get_real(v[0], field + "[0]"), get_real(v[1], field + "[1]")};
    throw SchemaError(field, "expected a number or [re, im]");
}

inline int get_int(const json& v, const std::string& field, int lo) {
    if (!v.is_number_integer()) throw SchemaError(field, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > 100000000) throw SchemaError(field, "must be >= " + std::to_string(lo));
    return static_cast<int>(x);
}

inline double get_positive(const json& v, const std::string& field) {
    const double x = get_real(v, field);
    if (!(x > 0.0)) throw SchemaError(field, "must be > 0");
    return x;
}

inline std::string get_choice(const json& v, const std::string& field, std::initializer_list<const char*> choices) {
    if (!v.is_string()) throw SchemaError(field, "expected a string");
    const auto s = v.get<std::string>();
    for (const char* c : choices)
        if (s == c) return s;
    std::string list;
    for (const char* c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
    throw SchemaError(field, "must be one of " + list);
}

inline void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

inline void parse_params(const json& j, RunConfig& c) {
    only_keys(j, "params", {"delta", "kerr", "alpha1", "alpha2", "kappa", "n_th", "eta", "xi", "fock_dim",
                            "drive_power"});
    SystemParams& p = c.params;
    if (j.contains("delta")) p.delta = get_real(j["delta"], "params.delta");
    if (j.contains("kerr")) {
        p.kerr = get_real(j["kerr"], "params.kerr");
        if (p.kerr < 0.0) throw SchemaError("params.kerr", "must be >= 0");
    }
    if (j.contains("alpha1")) p.alpha1 = get_complex(j["alpha1"], "params.alpha1");
    if (j.contains("alpha2")) p.alpha2 = get_complex(j["alpha2"], "params.alpha2");
    if (j.contains("kappa") && get_real(j["kappa"], "params.kappa") != 1.0)
        throw SchemaError("params.kappa", "rates are in units of kappa; kappa must be 1");
    if (j.contains("n_th")) {
        p.n_th = get_real(j["n_th"], "params.n_th");
        if (p.n_th < 0.0) throw SchemaError("params.n_th", "must be >= 0");
    }
    if (j.contains("eta")) {
        p.eta = get_real(j["eta"], "params.eta");
        if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw SchemaError("params.eta", "must lie in [0, 1]");
    }
    if (j.contains("xi")) p.xi = get_complex(j["xi"], "params.xi");
    if (j.contains("drive_power")) {
        if (j.contains("alpha1")) throw SchemaError("params.drive_power", "conflicts with params.alpha1");
        const double power = get_real(j["drive_power"], "params.drive_power");
        if (power < 0.0) throw SchemaError("params.drive_power", "must be >= 0");
        if (!(p.kerr > 0.0)) throw SchemaError("params.drive_power", "needs params.kerr > 0");
        c.drive_power = power;
        p = with_drive_power(p, power);
    }
    c.fock_dim_auto = true;
    if (j.contains("fock_dim")) {
        const json& d = j["fock_dim"];
        if (d.is_string()) {
            if (d.get<std::string>() != "auto") throw SchemaError("params.fock_dim", "expected an integer or \"auto\"");
        } else {
            p.fock_dim = get_int(d, "params.fock_dim", 2);
            c.fock_dim_auto = false;
        }
    }
    if (c.fock_dim_auto) p.fock_dim = auto_fock_dim(p);
}

inline void parse_trajectory(const json& j, TrajectoryBlock& t) {
    only_keys(j, "trajectory", {"t_final", "n_traj", "seed", "sample_count", "herald_k", "initial"});
    if (j.contains("t_final")) t.t_final = get_positive(j["t_final"], "trajectory.t_final");
    if (j.contains("n_traj")) t.n_traj = get_int(j["n_traj"], "trajectory.n_traj", 1);
    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (s.is_number_unsigned())
            t.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<std::int64_t>() >= 0)
            t.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
        else
            throw SchemaError("trajectory.seed", "expected a non-negative integer");
    }
    if (j.contains("sample_count")) t.sample_count = get_int(j["sample_count"], "trajectory.sample_count", 2);
    if (j.contains("herald_k")) t.herald_k = get_positive(j["herald_k"], "trajectory.herald_k");
    if (j.contains("initial")) t.initial = get_choice(j["initial"], "trajectory.initial", {"vacuum", "pseudo", "steady"});
}

inline void parse_wigner(const json& j, WignerBlock& w) {
    only_keys(j, "wigner", {"center", "half_width", "resolution", "state"});
    if (j.contains("center")) {
        const json& c = j["center"];
        if (c.is_string()) {
            if (c.get<std::string>() != "auto") throw SchemaError("wigner.center", "expected \"auto\" or [re, im]");
            w.center.reset();
        } else {
            w.center = get_complex(c, "wigner.center");
        }
    }
    if (j.contains("half_width")) w.half_width = get_positive(j["half_width"], "wigner.half_width");
    if (j.contains("resolution")) w.resolution = get_int(j["resolution"], "wigner.resolution", 2);
    if (j.contains("state")) w.state = get_choice(j["state"], "wigner.state", {"pseudo", "steady"});
}

inline void parse_sweep(const json& j, SweepBlock& s) {
    only_keys(j, "sweep", {"axis", "logspace", "linspace", "values"});
    if (j.contains("axis")) s.axis = get_choice(j["axis"], "sweep.axis", {"kerr", "alpha2"});
    int given = 0;
    for (const char* kind : {"logspace", "linspace", "values"}) {
        if (!j.contains(kind)) continue;
        ++given;
        const std::string field = std::string("sweep.") + kind;
        const json& g = j[kind];
        if (!g.is_array() || g.empty()) throw SchemaError(field, "expected a non-empty array");
        s.spacing = kind;
        s.grid_spec.clear();
        if (s.spacing == "values") {
            for (std::size_t i = 0; i < g.size(); ++i)
                s.grid_spec.push_back(get_real(g[i], field + "[" + std::to_string(i) + "]"));
        } else {
            if (g.size() != 3) throw SchemaError(field, "expected [lo, hi, count]");
            s.grid_spec = {get_real(g[0], field + "[0]"), get_real(g[1], field + "[1]"),
                           static_cast<double>(get_int(g[2], field + "[2]", 1))};
        }
    }
    if (given > 1) throw SchemaError("sweep", "give exactly one of logspace, linspace, values");
    if (s.axis == "kerr")
        for (double k : s.values())
            if (!(k > 0.0)) throw SchemaError("sweep", "kerr grid values must be > 0");
}

inline void parse_xi_grid(const json& j, XiBlock& x) {
    only_keys(j, "xi_grid", {"resolution", "radius"});
    if (j.contains("resolution")) x.resolution = get_int(j["resolution"], "xi_grid.resolution", 1);
    if (j.contains("radius")) {
        x.radius = get_real(j["radius"], "xi_grid.radius");
        if (x.radius < 0.0) throw SchemaError("xi_grid.radius", "must be >= 0");
    }
}

} // namespace detail

/// Parses and range-checks a config. `mode` is the mode given on the command
/// line; a "mode" key in the file must agree with it. Pass an empty mode to
/// take it from the file.
inline RunConfig parse_config(const std::string& text, const std::string& mode = {}) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 0, col = 0;
        detail::line_column(text, e.byte, line, col);
        throw SchemaError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                  e.what());
    }
    detail::only_keys(j, "", {"mode", "params", "trajectory", "wigner", "sweep", "xi_grid", "output_dir"});
    RunConfig c;
    if (j.contains("mode")) {
        std::string m;
        if (!j["mode"].is_string()) throw SchemaError("mode", "expected a string");
        m = j["mode"].get<std::string>();
        if (std::find(modes().begin(), modes().end(), m) == modes().end()) throw SchemaError("mode", "unknown mode " + m);
        if (!mode.empty() && m != mode)
            throw SchemaError("mode", "config says " + m + " but the command line says " + mode);
        c.mode = m;
    }
    if (!mode.empty()) {
        if (std::find(modes().begin(), modes().end(), mode) == modes().end()) throw SchemaError("mode", "unknown mode " + mode);
        c.mode = mode;
    }
    if (c.mode.empty()) throw SchemaError("mode", "no mode given");
    detail::parse_params(j.contains("params") ? j["params"] : json::object(), c);
    if (j.contains("trajectory")) detail::parse_trajectory(j["trajectory"], c.trajectory);
    if (j.contains("wigner")) detail::parse_wigner(j["wigner"], c.wigner);
    if (j.contains("sweep")) detail::parse_sweep(j["sweep"], c.sweep);
    if (j.contains("xi_grid")) detail::parse_xi_grid(j["xi_grid"], c.xi_grid);
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw SchemaError("output_dir", "expected a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    try {
        c.params.validate();
    } catch (const Error& e) {
        throw SchemaError("params", e.what());
    }
    return c;
}

inline json RunConfig::echo() const {
    json j;
    j["mode"] = mode;
    json p;
    p["delta"] = params.delta;
    p["kerr"] = params.kerr;
    p["alpha1"] = io::to_json(params.alpha1);
    p["alpha2"] = io::to_json(params.alpha2);
    p["kappa"] = params.kappa;
    p["n_th"] = params.n_th;
    p["eta"] = params.eta;
    p["xi"] = io::to_json(params.xi);
    p["fock_dim"] = params.fock_dim;
    j["params"] = std::move(p);
    j["trajectory"] = {{"t_final", trajectory.t_final},   {"n_traj", trajectory.n_traj},
                       {"seed", trajectory.seed},         {"sample_count", trajectory.sample_count},
                       {"herald_k", trajectory.herald_k}, {"initial", trajectory.initial}};
    j["wigner"] = {{"center", wigner.center ? io::to_json(*wigner.center) : json("auto")},
                   {"half_width", wigner.half_width},
                   {"resolution", wigner.resolution},
                   {"state", wigner.state}};
    json s{{"axis", sweep.axis}};
    s[sweep.spacing] = sweep.grid_spec;
    if (sweep.spacing != "values") s[sweep.spacing][2] = static_cast<int>(sweep.grid_spec[2]);
    j["sweep"] = std::move(s);
    j["xi_grid"] = {{"resolution", xi_grid.resolution}, {"radius", xi_grid.radius}};
    j["output_dir"] = output_dir;
    return j;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw io::IoError("cannot read " + p.string());
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

/// Schema report without running anything: {"ok": bool, "error"?, "field"?,
/// "resolved"?, "defaults"?}.
inline json validate(const std::string& text, const std::string& mode = {}) {
    json r;
    try {
        const RunConfig c = parse_config(text, mode);
        r["ok"] = true;
        r["resolved"] = c.echo();
        r["defaults"] = c.defaults();
    } catch (const SchemaError& e) {
        r["ok"] = false;
        r["error"] = e.what();
        r["field"] = e.field();
    }
    return r;
}

// ------------------------------------------------------------------ running

struct RunOptions {
    int threads = 0;  // 0: KERR_HERALD_THREADS, else hardware
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

struct RunResult {
    int exit_code = kOk;
    json manifest;
    std::filesystem::path output_dir;
};

namespace detail {

inline std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Collects artifacts so the manifest can index them.
struct Writer {
    std::filesystem::path dir;
    json index = json::array();

    void csv(const std::string& name, const io::CsvTable& t) {
        io::write_csv(dir / name, t);
        index.push_back({{"file", name}, {"rows", t.rows.size()}});
    }
    void write(const std::string& name, const json& j) {
        io::write_json(dir / name, j);
        index.push_back({{"file", name}});
    }
};

struct Pseudo {
    bool mixed = false;
    PseudoState pure;
    MixedPseudoState mix;
    std::optional<PureSpectrum> spectrum;
    std::optional<MixedSpectrum> mixed_spectrum;
    std::vector<Eigen::MatrixXcd> references;  // sector tops in the parity case

    DensityMatrix rho() const { return mixed ? mix.rho : fock::projector(pure.state); }
    const RateReport& rates() const { return mixed ? mix.rates : pure.rates; }
};

inline Pseudo compute_pseudo(const SystemParams& p, double gamma_jump) {
    Pseudo ps;
    if (p.pure_unraveling()) {
        ps.spectrum = pure_spectrum(effective_nonhermitian(p));
        const PureSpectrum& s = *ps.spectrum;
        if (s.parity_resolved && s.stable_even >= 0 && s.stable_odd >= 0) {
            ps.pure = parity_rates(s, gamma_jump);
            ps.references = {s.state(s.stable_even), s.state(s.stable_odd)};
        } else {
            ps.pure = stable_pseudo_state(s);
            ps.references = {ps.pure.state};
        }
        ps.pure.rates.gamma_jump = gamma_jump;
    } else {
        ps.mixed = true;
        ps.mixed_spectrum = mixed_spectrum(p);
        ps.mix = mixed_pseudo_state(*ps.mixed_spectrum);
        ps.mix.rates.gamma_jump = gamma_jump;
        ps.references = {ps.mix.rho};
    }
    return ps;
}

inline json rates_json(const Pseudo& ps) {
    json j = io::to_json(ps.rates());
    const double herald = ps.rates().gamma_asy ? *ps.rates().gamma_asy : ps.rates().gamma_rel;
    j["heralding_rate"] = herald;
    j["admissible"] = ps.rates().gamma_jump ? herald >= *ps.rates().gamma_jump : false;
    return j;
}

inline json spectrum_json(const Pseudo& ps) {
    json j;
    if (ps.mixed) {
        j = io::to_json(*ps.mixed_spectrum);
        j["kind"] = "mixed";
        j["pseudo_index"] = ps.mix.index;
    } else {
        j = io::to_json(*ps.spectrum);
        j["kind"] = "pure";
        j["pseudo_index"] = ps.pure.index;
    }
    j["rates"] = rates_json(ps);
    return j;
}

inline void run_steady(const RunConfig& c, const SteadyStateResult& ss, Writer& w) {
    const int d = c.params.fock_dim;
    json j;
    j["fock_dim"] = d;
    j["mean_n"] = ss.mean_n;
    j["mean_a"] = io::to_json(ss.mean_a);
    j["gamma_jump"] = ss.gamma_jump;
    j["purity"] = (ss.rho_ss * ss.rho_ss).trace().real();
    j["parity"] = fock::expectation(fock::parity(d), ss.rho_ss).real();
    j["rho"] = io::to_json(ss.rho_ss);
    json fps = json::array();
    if (c.params.alpha2 == cplx{} && c.params.kerr > 0.0) {
        for (const auto& fp : semiclassical_fixed_points(c.params))
            fps.push_back({{"alpha", io::to_json(fp.alpha)}, {"photons", fp.photons}, {"stable", fp.stable}});
    }
    j["mean_field_fixed_points"] = std::move(fps);
    w.write("steady.json", j);
}

inline void run_pseudo(const RunConfig& c, const SteadyStateResult& ss, bool with_state, Writer& w) {
    const Pseudo ps = compute_pseudo(c.params, ss.gamma_jump);
    w.write("spectrum.json", spectrum_json(ps));
    if (!with_state) return;
    const DensityMatrix rho = ps.rho();
    json st;
    st["kind"] = ps.mixed ? "density_matrix" : "state_vector";
    st["index"] = ps.mixed ? ps.mix.index : ps.pure.index;
    st["eigenvalue"] = io::to_json(ps.mixed ? ps.mix.eigenvalue : ps.pure.eigenvalue);
    st["state"] = ps.mixed ? io::to_json(ps.mix.rho) : io::to_json(ps.pure.state);
    st["mean_n"] = fock::expectation(fock::number(c.params.fock_dim), rho).real();
    st["mean_a"] = io::to_json(fock::expectation(fock::annihilation(c.params.fock_dim), rho));
    st["parity"] = fock::expectation(fock::parity(c.params.fock_dim), rho).real();
    w.write("pseudo_state.json", st);
    json r = rates_json(ps);
    r["negativity"] = negativity(rho).negativity;
    w.write("rates.json", r);
}

inline json run_trajectories(const RunConfig& c, const SteadyStateResult& ss, std::uint64_t master, unsigned threads,
                             Writer& w) {
    const SystemParams& p = c.params;
    const TrajectoryBlock& tb = c.trajectory;
    const Pseudo ps = compute_pseudo(p, ss.gamma_jump);
    TrajectoryOptions opt;
    opt.samples = tb.sample_count;
    opt.references = ps.references;

    std::vector<Trajectory> trajs;
    if (p.pure_unraveling()) {
        if (tb.initial == "steady")
            throw Error(ErrorKind::InvalidParameter, "initial = steady needs the density-matrix unraveling");
        const StateVector init = tb.initial == "pseudo" ? ps.pure.state : fock::basis_state(p.fock_dim, 0);
        trajs = simulate_ensemble(p, init, tb.t_final, master, tb.n_traj, opt, threads);
    } else {
        DensityMatrix init = fock::projector(fock::basis_state(p.fock_dim, 0));
        if (tb.initial == "pseudo") init = ps.mix.rho;
        if (tb.initial == "steady") init = ss.rho_ss;
        trajs = simulate_ensemble(p, init, tb.t_final, master, tb.n_traj, opt, threads);
    }

    char name[64];
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        std::snprintf(name, sizeof name, "trajectory_%04zu.csv", i);
        w.csv(name, io::trajectory_table(trajs[i]));
    }
    w.csv("jumps.csv", io::jump_table(trajs));
    w.csv("ensemble.csv", io::ensemble_table(ensemble_average(trajs)));

    json summary;
    summary["mixed"] = !p.pure_unraveling();
    summary["rates"] = rates_json(ps);
    summary["steady_mean_n"] = ss.mean_n;
    summary["herald_k"] = tb.herald_k;
    json per = json::array();
    json seeds = json::array();
    for (const auto& tr : trajs) {
        seeds.push_back(tr.seed);
        const HeraldReport hr = detect_heralds(tr, ps.rates().gamma_rel, tb.herald_k, ps.references);
        json iv = json::array();
        for (const auto& h : hr.intervals)
            iv.push_back({{"start", h.start},
                          {"end", h.end},
                          {"fidelity_at_end", io::real_or_null(h.fidelity_at_end)},
                          {"distance_at_end", io::real_or_null(h.distance_at_end)},
                          {"reference", h.reference}});
        per.push_back({{"seed", tr.seed},
                       {"jumps", tr.jump_times.size()},
                       {"click_rate", tr.t_final() > 0 ? tr.jump_times.size() / tr.t_final() : 0.0},
                       {"herald_min_length", hr.min_length},
                       {"herald_intervals", std::move(iv)}});
    }
    summary["seeds"] = seeds;
    summary["trajectories"] = std::move(per);
    w.write("trajectory.json", summary);
    return seeds;
}

inline void run_wigner(const RunConfig& c, const SteadyStateResult& ss, unsigned threads, Writer& w) {
    DensityMatrix rho = ss.rho_ss;
    if (c.wigner.state == "pseudo") rho = compute_pseudo(c.params, ss.gamma_jump).rho();
    const cplx center = c.wigner.center ? *c.wigner.center
                                        : fock::expectation(fock::annihilation(c.params.fock_dim), rho);
    const WignerGrid g = wigner(rho, {center, c.wigner.half_width, c.wigner.resolution}, threads);
    w.csv("wigner.csv", io::wigner_table(g));
    json meta = io::wigner_metadata(g);
    meta["state"] = c.wigner.state;
    NegativityOptions nopt;
    nopt.threads = threads;
    const NegativityReport nr = negativity(rho, nopt);
    meta["negativity"] = nr.negativity;
    meta["negativity_argmin"] = io::to_json(nr.argmin);
    w.write("wigner.json", meta);
}

inline void run_sweep(const RunConfig& c, unsigned threads, Writer& w) {
    const std::vector<double> grid = c.sweep.values();
    SweepResult r;
    if (c.sweep.axis == "kerr") {
        if (c.drive_power) {
            r = n_max_sweep(c.params, *c.drive_power, grid, {}, threads);
        } else {
            std::vector<SystemParams> pts;
            for (double k : grid) {
                SystemParams q = c.params;
                q.kerr = k;
                pts.push_back(q);
            }
            r = kerr_herald::detail::run_points(pts, {}, threads);
        }
    } else {
        r = parametric_sweep(c.params, grid, {}, threads);
    }
    w.csv("sweep.csv", io::sweep_table(r));
    json j;
    j["axis"] = c.sweep.axis;
    j["grid"] = grid;
    j["n_max"] = r.n_max;
    j["best_index"] = r.best >= 0 ? json(r.best) : json(nullptr);
    w.write("sweep.json", j);
}

inline void run_optimize_xi(const RunConfig& c, unsigned threads, Writer& w) {
    const XiOptimization xo = optimize_xi(c.params, {c.xi_grid.resolution, c.xi_grid.radius}, {}, threads);
    w.csv("xi_map.csv", io::xi_table(xo));
    json j;
    j["radius"] = xo.radius;
    j["best_xi"] = xo.sweep.best >= 0 ? io::to_json(xo.best_xi) : json(nullptr);
    j["n_max"] = xo.sweep.n_max;
    j["baseline"] = {{"negativity", io::real_or_null(xo.baseline.negativity)},
                     {"gamma_rel", xo.baseline.gamma_rel},
                     {"gamma_jump", xo.baseline.gamma_jump},
                     {"admissible", xo.baseline.admissible}};
    w.write("xi.json", j);
}

} // namespace detail

/// Runs one mode and writes its artifacts, then manifest.json. Numerical
/// failures still produce a manifest with status "error".
inline RunResult run(const RunConfig& c, const RunOptions& opt = {}) {
    namespace fs = std::filesystem;
    RunResult res;
    res.output_dir = opt.output_dir ? fs::path(*opt.output_dir) : fs::path(c.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const unsigned threads = resolve_threads(opt.threads);
    const std::uint64_t master = opt.seed ? *opt.seed : c.trajectory.seed;

    RunConfig resolved = c;
    resolved.trajectory.seed = master;
    resolved.output_dir = res.output_dir.string();

    json& m = res.manifest;
    m["software"] = {{"name", "kerr-herald"}, {"version", kVersion}};
    m["started_at"] = detail::utc_now();
    m["config"] = resolved.echo();
    m["defaults"] = resolved.defaults();
    m["master_seed"] = master;
    m["threads"] = threads;

    detail::Writer w;
    w.dir = res.output_dir;
    try {
        std::error_code ec;
        fs::create_directories(res.output_dir, ec);
        if (ec || !fs::is_directory(res.output_dir))
            throw io::IoError("cannot create output directory " + res.output_dir.string());

        SteadyStateOptions sopt;
        sopt.check_convergence = true;
        const SteadyStateResult ss = steady_state(c.params, sopt);
        m["cutoff_convergence"] = {{"fock_dim", c.params.fock_dim},
                                   {"wider_fock_dim", c.params.fock_dim + sopt.cutoff_step},
                                   {"mean_n_drift", ss.cutoff_drift},
                                   {"converged", ss.converged}};
        json seeds = json::array();
        if (c.mode == "steady") detail::run_steady(c, ss, w);
        else if (c.mode == "spectrum") detail::run_pseudo(c, ss, false, w);
        else if (c.mode == "pseudo") detail::run_pseudo(c, ss, true, w);
        else if (c.mode == "trajectory") seeds = detail::run_trajectories(c, ss, master, threads, w);
        else if (c.mode == "wigner") detail::run_wigner(c, ss, threads, w);
        else if (c.mode == "sweep") detail::run_sweep(c, threads, w);
        else if (c.mode == "optimize-xi") detail::run_optimize_xi(c, threads, w);
        m["derived_seeds"] = std::move(seeds);
        m["status"] = "ok";
    } catch (const io::IoError& e) {
        res.exit_code = kIo;
        m["status"] = "error";
        m["error"] = {{"kind", "io"}, {"message", e.what()}};
    } catch (const fs::filesystem_error& e) {
        res.exit_code = kIo;
        m["status"] = "error";
        m["error"] = {{"kind", "io"}, {"message", e.what()}};
    } catch (const Error& e) {
        res.exit_code = kNumerical;
        m["status"] = "error";
        m["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
    }
    m["outputs"] = w.index;
    m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.exit_code != kIo) {
        try {
            io::write_json(res.output_dir / "manifest.json", m);
        } catch (const io::IoError&) {
            res.exit_code = kIo;
        }
    }
    return res;
}

} // namespace kerr_herald::cli
