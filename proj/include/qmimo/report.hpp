// SPDX-License-Identifier: Apache-2.0
//
// qmimo: link-level simulation of fronthaul-constrained all-digital
// massive MIMO with low-resolution data converters
// Copyright (C) 2026 the qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QMIMO_REPORT_HPP
#define QMIMO_REPORT_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "qmimo/config.hpp"
#include "qmimo/version.hpp"

namespace qmimo {

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double v) {
    char buf[40];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    if (parsed == v) {
        // try shorter representations
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &parsed);
            if (parsed == v) return shorter;
        }
    }
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string manifest_path(const std::string& out_path) {
    return out_path + ".manifest.json";
}

namespace detail {

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Sidecar manifest recording what produced an output file.
inline void write_manifest(const SystemConfig& cfg, const std::string& out_path,
                           const std::string& started_at, const std::string& finished_at) {
    const nlohmann::json snapshot = config_to_json(cfg);
    nlohmann::json m;
    m["tool"] = kToolName;
    m["tool_version"] = kToolVersion;
    m["seed"] = cfg.seed;
    m["config"] = snapshot;
    m["config_hash"] = fnv1a64(snapshot.dump());
    m["started_at"] = started_at;
    m["finished_at"] = finished_at;
    m["outputs"] = {out_path};

    std::ofstream out(manifest_path(out_path), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + manifest_path(out_path));
    out << m.dump(2) << "\n";
    if (!out) throw std::runtime_error("manifest write failed: " + manifest_path(out_path));
}

template <typename WriteBody>
void write_csv_with_manifest(const SystemConfig& cfg, const std::string& out_path,
                             WriteBody&& write_body) {
    const std::string started_at = iso8601_now();
    std::ostringstream body;
    write_body(body);

    std::ofstream out(out_path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot write output: " + out_path);
    out << body.str();
    out.close();
    if (!out) throw std::runtime_error("output write failed: " + out_path);

    try {
        write_manifest(cfg, out_path, started_at, iso8601_now());
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(out_path, ec);  // outputs must not exist without a manifest
        throw;
    }
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "q,b,csi_mode,rho_ul_db,rho_dl_db,ul_rate,dl_rate,bidir_rate,trials,seed\n";
    for (const auto& r : rows) {
        out << r.q << ',' << r.b << ',' << to_string(r.csi) << ',' << format_double(r.rho_ul_db)
            << ',' << format_double(r.rho_dl_db) << ',' << format_double(r.ul_rate) << ','
            << format_double(r.dl_rate) << ',' << format_double(r.bidir_rate) << ',' << r.trials
            << ',' << r.seed << '\n';
    }
}

/// Run the fronthaul sweep and write it as CSV, plus the sidecar manifest.
inline std::vector<SweepRow> cmd_sweep(const SystemConfig& cfg, const std::string& out_path) {
    const std::vector<SweepRow> rows = fronthaul_sweep(cfg);
    detail::write_csv_with_manifest(cfg, out_path,
                                    [&](std::ostream& out) { write_sweep_csv(out, rows); });
    return rows;
}

struct MseCurveRow {
    bool infinite = false;
    int q = 0;  // meaningful when not infinite
    int pilot_len = 0;
    double rho_db = 0.0;
    std::optional<double> mse_analytic;
    std::optional<double> mse_empirical;
};

/// Estimation-error curves: the closed-form single-user 1-bit MSE where it
/// exists, and the Monte Carlo estimator MSE for every configured converter
/// mode on the (pilot length, SNR) grid.
inline std::vector<MseCurveRow> mse_curve_rows(const SystemConfig& cfg) {
    const MseCurveConfig& mc = cfg.mse_curve;
    std::vector<MseCurveRow> rows;

    std::vector<std::optional<int>> modes;
    for (int q : mc.resolutions) modes.emplace_back(q);
    if (mc.include_infinite) modes.emplace_back(std::nullopt);

    for (const auto& bits : modes) {
        for (int n_p : mc.pilot_lengths) {
            for (double rho_db : mc.rho_db) {
                MseCurveRow row;
                row.infinite = !bits.has_value();
                row.q = bits.value_or(0);
                row.pilot_len = n_p;
                row.rho_db = rho_db;
                const double rho = db_to_linear(rho_db);
                if (bits && *bits == 1 && mc.num_users == 1)
                    row.mse_analytic = mse_1bit_closed_form(static_cast<double>(n_p), rho);
                if (mc.trials > 0) {
                    MseExperiment exp;
                    exp.num_antennas = mc.num_antennas;
                    exp.num_users = mc.num_users;
                    exp.pilot_len = n_p;
                    exp.rho_ul = rho;
                    exp.bits = bits;
                    exp.clip_prob = cfg.clip_prob;
                    exp.trials = mc.trials;
                    exp.seed = cfg.seed;
                    row.mse_empirical = empirical_mse(exp);
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

inline void write_mse_csv(std::ostream& out, const std::vector<MseCurveRow>& rows) {
    out << "mode,q,n_p,rho_db,mse_analytic,mse_empirical\n";
    for (const auto& r : rows) {
        out << (r.infinite ? "infinite" : "quantized") << ',';
        if (!r.infinite) out << r.q;
        out << ',' << r.pilot_len << ',' << format_double(r.rho_db) << ',';
        if (r.mse_analytic) out << format_double(*r.mse_analytic);
        out << ',';
        if (r.mse_empirical) out << format_double(*r.mse_empirical);
        out << '\n';
    }
}

/// Generate the estimation-error curves and write them as CSV, plus the
/// sidecar manifest.
inline std::vector<MseCurveRow> cmd_mse_curve(const SystemConfig& cfg,
                                              const std::string& out_path) {
    const std::vector<MseCurveRow> rows = mse_curve_rows(cfg);
    detail::write_csv_with_manifest(cfg, out_path,
                                    [&](std::ostream& out) { write_mse_csv(out, rows); });
    return rows;
}

}  // namespace qmimo

#endif  // QMIMO_REPORT_HPP
