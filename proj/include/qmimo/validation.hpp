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
//
// Built-in validation suite. Every check pins its sample sizes, seeds and
// tolerances here; `qmimo validate` and the acceptance tests both run these.

#ifndef QMIMO_VALIDATION_HPP
#define QMIMO_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qmimo/engine.hpp"
#include "qmimo/report.hpp"

namespace qmimo {

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20260808;
    int threads = 1;  // thread count for the sweep-based checks
};

namespace valdetail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline void note(CheckResult& r, bool ok, const std::string& msg) {
    if (!ok) r.pass = false;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += msg + (ok ? "" : " [FAIL]");
}

/// arcsin by bisection on std::sin, independent of std::asin.
inline double arcsin_bisect(double x) {
    double lo = -kPi / 2.0, hi = kPi / 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::sin(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline SystemConfig sweep_config(double rho_ul_db, double rho_dl_db,
                                 const std::vector<CsiMode>& modes, int trials,
                                 const AcceptanceOptions& opt) {
    SystemConfig cfg;
    cfg.rho_ul_db = rho_ul_db;
    cfg.rho_dl_db = rho_dl_db;
    cfg.csi_modes = modes;
    cfg.trials = trials;
    cfg.seed = opt.seed;
    cfg.threads = opt.threads;
    cfg.validate();
    return cfg;
}

inline const SweepRow& find_row(const std::vector<SweepRow>& rows, int q, CsiMode mode) {
    for (const auto& r : rows)
        if (r.q == q && r.csi == mode) return r;
    throw std::logic_error("validation: sweep row not found");
}

inline int argmax_q(const std::vector<SweepRow>& rows, CsiMode mode, bool bidirectional) {
    int best_q = -1;
    double best = -1.0;
    for (const auto& r : rows) {
        if (r.csi != mode) continue;
        const double v = bidirectional ? r.bidir_rate : r.ul_rate;
        if (v > best) {
            best = v;
            best_q = r.q;
        }
    }
    return best_q;
}

}  // namespace valdetail

/// Check 1: empirical Bussgang MMSE error matches the closed-form 1-bit
/// single-user MSE within 2% on a (pilot length, SNR) grid.
inline CheckResult check_mse_closed_form_oracle(const AcceptanceOptions& opt = {}) {
    CheckResult r{"mse-1bit-closed-form-oracle", true, ""};
    const int pilot_lens[] = {1, 4, 10, 100};
    const double rhos[] = {0.1, 1.0, 10.0};
    for (int n_p : pilot_lens) {
        for (double rho : rhos) {
            MseExperiment exp;
            exp.num_antennas = 1;
            exp.num_users = 1;
            exp.pilot_len = n_p;
            exp.rho_ul = rho;
            exp.bits = 1;
            exp.trials = 100000;
            exp.seed = Rng::derive(opt.seed, 101, static_cast<std::uint64_t>(n_p),
                                   static_cast<std::uint64_t>(rho * 10));
            const double empirical = empirical_mse(exp);
            const double analytic = mse_1bit_closed_form(n_p, rho);
            const double rel = std::abs(empirical - analytic) / analytic;
            valdetail::note(r, rel <= 0.02,
                            "n_p=" + std::to_string(n_p) + " rho=" + valdetail::num(rho) +
                                " analytic=" + valdetail::num(analytic) + " empirical=" +
                                valdetail::num(empirical) + " rel=" + valdetail::num(rel));
        }
    }
    return r;
}

/// Check 2: the analytic 1-bit MSE floor at rho = 10 against an
/// independent arcsin evaluation, and convergence of the finite-pilot MSE to
/// the floor.
inline CheckResult check_mse_floor(const AcceptanceOptions& = {}) {
    CheckResult r{"mse-1bit-floor", true, ""};
    const double ratio = 10.0 / 11.0;
    const double indep = 1.0 - ratio / valdetail::arcsin_bisect(ratio);
    const double impl = mse_1bit_floor(10.0);
    valdetail::note(r, std::abs(impl - indep) < 1e-9,
                    "floor(10) impl=" + valdetail::num(impl) + " indep=" + valdetail::num(indep));
    valdetail::note(r, std::abs(indep - 0.2034) <= 1e-3,
                    "floor(10)=" + valdetail::num(indep) + " vs 0.2034 +- 1e-3");
    for (double rho : {0.1, 1.0, 10.0}) {
        const double gap = std::abs(mse_1bit_closed_form(1e6, rho) - mse_1bit_floor(rho));
        valdetail::note(r, gap < 1e-4,
                        "rho=" + valdetail::num(rho) + " |mse(1e6)-floor|=" + valdetail::num(gap));
    }
    return r;
}

/// Check 3: 1-bit estimation error saturates in the pilot length while
/// the infinite-precision error keeps falling. Shared trial substreams give
/// common random numbers across pilot lengths.
inline CheckResult check_mse_saturation(const AcceptanceOptions& opt = {}) {
    CheckResult r{"mse-saturation", true, ""};
    const std::uint64_t seed = Rng::derive(opt.seed, 103);
    auto run = [&](std::optional<int> bits, int n_p) {
        MseExperiment exp;
        exp.num_antennas = 20;  // the saturation property does not depend on the array size
        exp.num_users = 10;
        exp.pilot_len = n_p;
        exp.rho_ul = 10.0;
        exp.bits = bits;
        exp.trials = 400;
        exp.seed = seed;
        return empirical_mse(exp);
    };
    const double one_bit_1k = run(1, 1000);
    const double one_bit_10k = run(1, 10000);
    const double inf_1k = run(std::nullopt, 1000);
    const double inf_10k = run(std::nullopt, 10000);
    const double change = std::abs(one_bit_10k / one_bit_1k - 1.0);
    valdetail::note(r, change < 0.01,
                    "1-bit mse(1e3)=" + valdetail::num(one_bit_1k) + " mse(1e4)=" +
                        valdetail::num(one_bit_10k) + " rel-change=" + valdetail::num(change));
    valdetail::note(r, inf_10k < 0.5 * inf_1k,
                    "infinite mse(1e3)=" + valdetail::num(inf_1k) + " mse(1e4)=" +
                        valdetail::num(inf_10k));
    return r;
}

/// Check 4: with a perfect channel estimate the mismatched-decoding rate
/// degenerates to log2(1 + SINDR), across resolutions and system sizes.
inline CheckResult check_gmi_degeneration(const AcceptanceOptions& opt = {}) {
    CheckResult r{"gmi-degeneration", true, ""};
    const int qs[] = {1, 2, 3, 0};  // 0 = infinite precision
    const int bs[] = {8, 32};
    const int us[] = {1, 4};
    double worst = 0.0;
    Rng rng(Rng::derive(opt.seed, 104));
    for (int i = 0; i < 200; ++i) {
        const int q = qs[i % 4];
        const int b = bs[(i / 4) % 2];
        const int u_count = us[(i / 8) % 2];
        const double rho = db_to_linear(rng.uniform(-10.0, 15.0));
        const Eigen::MatrixXcd channel = rayleigh_channel(rng, b, u_count).matrix;
        const Converter conv = q == 0 ? infinite_precision()
                                      : Converter(QuantizerSpec::calibrated(q, 1.0 / b, 1e-4));
        LinearizedUplink lin = linearize_uplink(channel, rho, conv);
        lin.combiner = mr_combiner(channel, lin.agc, lin.distortion.gain);
        const Eigen::VectorXd rho_vec = Eigen::VectorXd::Constant(u_count, rho);
        const Eigen::VectorXd sindr =
            uplink_sindr(channel, lin.combiner, lin.agc, lin.distortion.gain,
                         lin.distortion.error_cov, rho_vec);
        for (int u = 0; u < u_count; ++u) {
            const double gmi =
                uplink_gmi(effective_gains(channel, channel, lin.combiner, lin.agc,
                                           lin.distortion.gain, lin.distortion.error_cov, rho_vec,
                                           u));
            const double rate = uplink_rate(sindr[u]);
            worst = std::max(worst, std::abs(gmi - rate) / std::max(rate, 1e-12));
        }
    }
    valdetail::note(r, worst <= 1e-9,
                    "200 instances, worst relative gap=" + valdetail::num(worst) + " (tol 1e-9)");
    return r;
}

/// Check 5: the closed-form decoder scale attains the maximum of the
/// scale-parameterized rate, checked against a dense grid search.
inline CheckResult check_s_optimality(const AcceptanceOptions& opt = {}) {
    CheckResult r{"gmi-s-optimality", true, ""};
    Rng rng(Rng::derive(opt.seed, 105));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int q = 1 + (i % 2);
        const int b = 16, u_count = 2;
        const double rho = db_to_linear(rng.uniform(-5.0, 15.0));
        const Eigen::MatrixXcd channel = rayleigh_channel(rng, b, u_count).matrix;
        Eigen::MatrixXcd noisy = channel;
        for (int col = 0; col < u_count; ++col)
            for (int row = 0; row < b; ++row) noisy(row, col) += 0.5 * rng.cnormal();
        const Converter conv = QuantizerSpec::calibrated(q, 1.0 / b, 1e-4);
        LinearizedUplink lin = linearize_uplink(channel, rho, conv);
        lin.combiner = mr_combiner(noisy, lin.agc, lin.distortion.gain);
        const Eigen::VectorXd rho_vec = Eigen::VectorXd::Constant(u_count, rho);
        const GmiTerms terms =
            effective_gains(channel, noisy, lin.combiner, lin.agc, lin.distortion.gain,
                            lin.distortion.error_cov, rho_vec, 0);
        if (!terms.decoder_scale) {
            valdetail::note(r, false, "instance " + std::to_string(i) + ": no decoder scale");
            continue;
        }
        const double s_star = *terms.decoder_scale;
        const double at_star = uplink_gmi_at_scale(terms, s_star);
        double grid_best = 0.0;
        const double lo = std::log(s_star * 1e-3), hi = std::log(s_star * 1e3);
        for (int k = 0; k < 4000; ++k) {
            const double s = std::exp(lo + (hi - lo) * k / 3999.0);
            grid_best = std::max(grid_best, uplink_gmi_at_scale(terms, s));
        }
        worst = std::max(worst, grid_best - at_star);
    }
    valdetail::note(r, worst <= 1e-6,
                    "100 instances, worst grid excess=" + valdetail::num(worst) + " (tol 1e-6)");
    return r;
}

/// Check 6: analytic Bussgang gain against the empirical LMMSE
/// coefficient E[Q(y) y*] / E[|y|^2], and the high-resolution limit.
inline CheckResult check_bussgang_gain_oracle(const AcceptanceOptions& opt = {}) {
    CheckResult r{"bussgang-gain-oracle", true, ""};
    for (int q : {1, 2, 3, 4}) {
        const QuantizerSpec spec = QuantizerSpec::calibrated(q, 1.0, 1e-4);
        const double analytic = bussgang_gain(1.0, spec);
        Rng rng(Rng::derive(opt.seed, 106, static_cast<std::uint64_t>(q)));
        cplx cross(0.0, 0.0);
        double power = 0.0;
        for (int i = 0; i < 1000000; ++i) {
            const cplx y = rng.cnormal();
            cross += quantize(y, spec) * std::conj(y);
            power += std::norm(y);
        }
        const double empirical = cross.real() / power;
        const double rel = std::abs(empirical - analytic) / analytic;
        valdetail::note(r, rel <= 0.01,
                        "Q=" + std::to_string(q) + " analytic=" + valdetail::num(analytic) +
                            " empirical=" + valdetail::num(empirical) + " rel=" +
                            valdetail::num(rel));
    }
    const double g12 = bussgang_gain(1.0, QuantizerSpec::calibrated(12, 1.0, 1e-4));
    valdetail::note(r, std::abs(g12 - 1.0) <= 1e-3, "Q=12 gain=" + valdetail::num(g12));
    return r;
}

/// Check 7: arcsine-law output covariance of the 1-bit quantizer against
/// the empirical covariance of correlated Gaussian pairs, per entry.
inline CheckResult check_arcsine_oracle(const AcceptanceOptions& opt = {}) {
    CheckResult r{"arcsine-law-oracle", true, ""};
    const QuantizerSpec spec(1, 1.3);
    const cplx corr12(0.3, 0.4);
    Eigen::MatrixXcd corr(2, 2);
    corr << cplx(1, 0), corr12, std::conj(corr12), cplx(1, 0);
    const Eigen::MatrixXcd analytic = arcsine_output_cov(corr, spec);

    Rng rng(Rng::derive(opt.seed, 107));
    const cplx mix = std::conj(corr12);  // E[z1 z2*] = conj(mix-coefficient)
    const double tail = std::sqrt(1.0 - std::norm(corr12));
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const cplx z1 = rng.cnormal();
        const cplx z2 = mix * z1 + tail * rng.cnormal();
        const cplx q1 = quantize(z1, spec);
        const cplx q2 = quantize(z2, spec);
        acc(0, 0) += q1 * std::conj(q1);
        acc(0, 1) += q1 * std::conj(q2);
        acc(1, 0) += q2 * std::conj(q1);
        acc(1, 1) += q2 * std::conj(q2);
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const cplx emp = acc(a, b) / static_cast<double>(n);
            const double rel = std::abs(emp - analytic(a, b)) / std::abs(analytic(a, b));
            valdetail::note(r, rel <= 0.02,
                            "entry(" + std::to_string(a) + "," + std::to_string(b) + ") analytic=" +
                                valdetail::num(analytic(a, b).real()) + "+" +
                                valdetail::num(analytic(a, b).imag()) + "j rel=" +
                                valdetail::num(rel));
        }
    return r;
}

/// Check 8: resolution-versus-antennas sweep behavior at low and high
/// SNR, and the vanishing CSI penalty at high resolution.
inline CheckResult check_sweep_low_high_snr(const AcceptanceOptions& opt = {}) {
    CheckResult r{"sweep-resolution-tradeoff", true, ""};
    const std::vector<CsiMode> both = {CsiMode::kPerfect, CsiMode::kEstimated};

    const SystemConfig low = valdetail::sweep_config(-10.0, -10.0, both, 500, opt);
    const auto low_rows = fronthaul_sweep(low);
    for (CsiMode mode : both) {
        const double q1 = valdetail::find_row(low_rows, 1, mode).ul_rate;
        const double q4 = valdetail::find_row(low_rows, 4, mode).ul_rate;
        valdetail::note(r, q1 > q4,
                        std::string("-10dB ") + to_string(mode) + " ul(Q=1)=" + valdetail::num(q1) +
                            " > ul(Q=4)=" + valdetail::num(q4));
    }

    const SystemConfig high = valdetail::sweep_config(10.0, 10.0, both, 500, opt);
    const auto high_rows = fronthaul_sweep(high);
    for (CsiMode mode : both) {
        const int best = valdetail::argmax_q(high_rows, mode, false);
        valdetail::note(r, best >= 1 && best <= 3,
                        std::string("+10dB ") + to_string(mode) + " argmax-Q=" +
                            std::to_string(best) + " in {1,2,3}");
    }
    const double perfect8 = valdetail::find_row(high_rows, 8, CsiMode::kPerfect).ul_rate;
    const double estimated8 = valdetail::find_row(high_rows, 8, CsiMode::kEstimated).ul_rate;
    const double gap = std::abs(perfect8 - estimated8) / perfect8;
    valdetail::note(r, gap < 0.05,
                    "+10dB Q=8 perfect=" + valdetail::num(perfect8) + " estimated=" +
                        valdetail::num(estimated8) + " gap=" + valdetail::num(gap));
    return r;
}

/// Check 9: with a stronger downlink the bidirectional outage rate tracks
/// the uplink, and the best resolution stays low.
inline CheckResult check_bidirectional_bottleneck(const AcceptanceOptions& opt = {}) {
    CheckResult r{"bidirectional-bottleneck", true, ""};
    const SystemConfig cfg =
        valdetail::sweep_config(5.0, 15.0, {CsiMode::kPerfect}, 500, opt);
    const auto rows = fronthaul_sweep(cfg);
    for (const auto& row : rows) {
        const double gap = (row.ul_rate - row.bidir_rate) / row.ul_rate;
        valdetail::note(r, row.bidir_rate <= row.ul_rate + 1e-12 && gap <= 0.02,
                        "Q=" + std::to_string(row.q) + " ul=" + valdetail::num(row.ul_rate) +
                            " bidir=" + valdetail::num(row.bidir_rate) + " gap=" +
                            valdetail::num(gap));
    }
    const int best = valdetail::argmax_q(rows, CsiMode::kPerfect, true);
    valdetail::note(r, best >= 1 && best <= 3,
                    "argmax-Q of bidirectional rate=" + std::to_string(best) + " in {1,2,3}");
    return r;
}

/// Check 10: the sweep CSV is byte-identical across runs and thread
/// counts at a fixed seed.
inline CheckResult check_determinism(const AcceptanceOptions& opt = {}) {
    CheckResult r{"sweep-determinism", true, ""};
    auto render = [&](int threads) {
        AcceptanceOptions local = opt;
        local.threads = threads;
        SystemConfig cfg = valdetail::sweep_config(5.0, 15.0,
                                                   {CsiMode::kPerfect, CsiMode::kEstimated}, 40,
                                                   local);
        cfg.resolutions = {1, 3};
        cfg.validate();
        std::ostringstream out;
        write_sweep_csv(out, fronthaul_sweep(cfg));
        return out.str();
    };
    const std::string serial = render(1);
    const std::string serial_again = render(1);
    const std::string threaded = render(3);
    valdetail::note(r, serial == serial_again, "repeated run byte-identical");
    valdetail::note(r, serial == threaded, "1-thread vs 3-thread byte-identical");
    return r;
}

/// Check 11: exhaustive scalar quantizer properties on a dense grid:
/// alphabet closure, monotonicity, odd symmetry off the lattice, granular
/// error bound.
inline CheckResult check_quantizer_grid(const AcceptanceOptions& = {}) {
    CheckResult r{"quantizer-grid", true, ""};
    for (int q = 1; q <= 8; ++q) {
        const QuantizerSpec spec = QuantizerSpec::calibrated(q, 1.0, 1e-4);
        const std::vector<double> alphabet = spec.alphabet();
        const double edge = spec.granular_edge();
        const int points = 10000;
        bool closure = true, monotone = true, odd = true, granular = true;
        double prev = -1e300;
        for (int i = 0; i < points; ++i) {
            const double r_in = -1.5 * edge + 3.0 * edge * i / (points - 1.0);
            const double out = quantize(r_in, spec);
            closure &= std::find(alphabet.begin(), alphabet.end(), out) != alphabet.end();
            monotone &= out >= prev;
            prev = out;
            const double cell = r_in / spec.step;
            if (r_in != 0.0 && std::abs(cell - std::round(cell)) > 1e-9)
                odd &= quantize(-r_in, spec) == -out;
            if (r_in >= -edge && r_in < edge)
                granular &= std::abs(out - r_in) <= 0.5 * spec.step + 1e-12;
        }
        valdetail::note(r, closure && monotone && odd && granular,
                        "Q=" + std::to_string(q) + " closure=" + (closure ? "ok" : "bad") +
                            " monotone=" + (monotone ? "ok" : "bad") + " odd=" +
                            (odd ? "ok" : "bad") + " granular=" + (granular ? "ok" : "bad"));
    }
    return r;
}

/// Run the full suite in criterion order; the callback fires as each check
/// completes.
inline std::vector<CheckResult> run_acceptance_checks(
    const AcceptanceOptions& opt, const std::function<void(const CheckResult&)>& on_result) {
    using CheckFn = CheckResult (*)(const AcceptanceOptions&);
    static constexpr CheckFn checks[] = {
        &check_mse_closed_form_oracle, &check_mse_floor,
        &check_mse_saturation,         &check_gmi_degeneration,
        &check_s_optimality,           &check_bussgang_gain_oracle,
        &check_arcsine_oracle,         &check_sweep_low_high_snr,
        &check_bidirectional_bottleneck, &check_determinism,
        &check_quantizer_grid};
    std::vector<CheckResult> results;
    for (CheckFn fn : checks) {
        results.push_back(fn(opt));
        if (on_result) on_result(results.back());
    }
    return results;
}

inline std::vector<CheckResult> run_acceptance_checks(const AcceptanceOptions& opt = {}) {
    return run_acceptance_checks(opt, nullptr);
}

inline void print_check(std::ostream& out, const CheckResult& r) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << "\n";
}

}  // namespace qmimo

#endif  // QMIMO_VALIDATION_HPP
