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


// Artifact formats. CSV: comma separated, header row, LF line endings, reals
// in %.16e (17 significant digits), integers and flags as plain integers.
// JSON: complex numbers as [re, im].

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"
#include "kerr_herald/spectral.hpp"
#include "kerr_herald/sweeps.hpp"
#include "kerr_herald/trajectory.hpp"
#include "kerr_herald/wigner.hpp"

namespace kerr_herald::io {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

using Cell = std::variant<double, std::int64_t>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != header.size()) throw std::invalid_argument("csv row width differs from header");
        rows.push_back(std::move(row));
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
        out += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                if (const double* d = std::get_if<double>(&r[i]))
                    out += format_real(*d);
                else
                    out += std::to_string(std::get<std::int64_t>(r[i]));
            }
            out += '\n';
        }
        return out;
    }
};

/// Writes via a temporary sibling and a rename, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_file_atomic(path, t.str()); }

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

// ------------------------------------------------------------ json helpers

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json real_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const StateVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

inline json to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(to_json(m(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json to_json(const RateReport& r) {
    json j;
    j["gamma_rel"] = r.gamma_rel;
    j["gamma_asy"] = r.gamma_asy ? json(*r.gamma_asy) : json(nullptr);
    j["gamma_jump"] = r.gamma_jump ? json(*r.gamma_jump) : json(nullptr);
    j["e_psi"] = r.e_psi ? json(*r.e_psi) : json(nullptr);
    return j;
}

inline json to_json(const PureSpectrum& s) {
    json j;
    j["size"] = s.size();
    j["parity_resolved"] = s.parity_resolved;
    j["stable_index"] = s.stable_index;
    j["stable_even"] = s.stable_even;
    j["stable_odd"] = s.stable_odd;
    j["condition_number"] = s.condition_number;
    json ev = json::array();
    for (int mu = 0; mu < s.size(); ++mu) {
        json e;
        e["index"] = mu;
        e["eigenvalue"] = to_json(s.eigenvalues(mu));
        e["parity"] = to_string(s.parity_labels[static_cast<std::size_t>(mu)]);
        const bool stable = mu == s.stable_index || (s.parity_resolved && (mu == s.stable_even || mu == s.stable_odd));
        e["stable"] = stable;
        ev.push_back(std::move(e));
    }
    j["eigenvalues"] = std::move(ev);
    return j;
}

inline json to_json(const MixedSpectrum& s) {
    json j;
    j["size"] = s.size();
    j["biorthonormal"] = s.biorthonormal;
    j["condition_number"] = s.condition_number;
    json ev = json::array();
    for (int mu = 0; mu < s.size(); ++mu) ev.push_back(to_json(s.eigenvalues(mu)));
    j["eigenvalues"] = std::move(ev);
    return j;
}

// ------------------------------------------------------------- csv tables

/// Columns t, n_expect, re_a, im_a, jumped_flag, trace_dist_ref.
inline CsvTable trajectory_table(const Trajectory& tr) {
    CsvTable t{{"t", "n_expect", "re_a", "im_a", "jumped_flag", "trace_dist_ref"}, {}};
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        t.add({tr.times[k], tr.n_expect[k], tr.mean_a[k].real(), tr.mean_a[k].imag(),
               static_cast<std::int64_t>(tr.jumped[k]), tr.trace_dist_ref[k]});
    return t;
}

/// Columns trajectory, jump_index, t.
inline CsvTable jump_table(const std::vector<Trajectory>& trajs) {
    CsvTable t{{"trajectory", "jump_index", "t"}, {}};
    for (std::size_t i = 0; i < trajs.size(); ++i)
        for (std::size_t j = 0; j < trajs[i].jump_times.size(); ++j)
            t.add({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), trajs[i].jump_times[j]});
    return t;
}

/// Columns t, mean_n, se_n, re_a, im_a, se_re_a, se_im_a.
inline CsvTable ensemble_table(const EnsembleAverage& avg) {
    CsvTable t{{"t", "mean_n", "se_n", "re_a", "im_a", "se_re_a", "se_im_a"}, {}};
    for (std::size_t k = 0; k < avg.times.size(); ++k)
        t.add({avg.times[k], avg.mean_n[k], avg.se_n[k], avg.mean_a[k].real(), avg.mean_a[k].imag(), avg.se_re_a[k],
               avg.se_im_a[k]});
    return t;
}

/// Columns re_alpha, im_alpha, w; real axis outer, imaginary axis inner.
inline CsvTable wigner_table(const WignerGrid& g) {
    CsvTable t{{"re_alpha", "im_alpha", "w"}, {}};
    for (std::size_t i = 0; i < g.re_axis.size(); ++i)
        for (std::size_t j = 0; j < g.im_axis.size(); ++j)
            t.add({g.re_axis[i], g.im_axis[j], g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    return t;
}

inline json wigner_metadata(const WignerGrid& g) {
    json j;
    j["center"] = to_json(g.center);
    j["half_width"] = g.half_width;
    j["resolution"] = g.resolution;
    j["re_extent"] = json::array({g.re_axis.front(), g.re_axis.back()});
    j["im_extent"] = json::array({g.im_axis.front(), g.im_axis.back()});
    j["min"] = g.min_value;
    j["argmin"] = to_json(g.argmin);
    return j;
}

/// Columns K_over_kappa, gamma_rel, gamma_jump, negativity, followed by
/// gamma_asy, alpha1_re, alpha2_re and admissible.
inline CsvTable sweep_table(const SweepResult& r) {
    CsvTable t{{"K_over_kappa", "gamma_rel", "gamma_jump", "negativity", "gamma_asy", "alpha1_re", "alpha2_re",
                "admissible"},
               {}};
    for (const auto& ev : r.points)
        t.add({ev.kerr, ev.gamma_rel, ev.gamma_jump, ev.negativity,
               ev.gamma_asy ? *ev.gamma_asy : std::numeric_limits<double>::quiet_NaN(), ev.alpha1.real(),
               ev.alpha2.real(), static_cast<std::int64_t>(ev.admissible)});
    return t;
}

/// Columns re_xi, im_xi, gamma_rel, gamma_jump, ratio, negativity, admissible.
inline CsvTable xi_table(const XiOptimization& xo) {
    CsvTable t{{"re_xi", "im_xi", "gamma_rel", "gamma_jump", "ratio", "negativity", "admissible"}, {}};
    for (const auto& ev : xo.sweep.points)
        t.add({ev.xi.real(), ev.xi.imag(), ev.gamma_rel, ev.gamma_jump, ev.gamma_rel / ev.gamma_jump, ev.negativity,
               static_cast<std::int64_t>(ev.admissible)});
    return t;
}

} // namespace kerr_herald::io
