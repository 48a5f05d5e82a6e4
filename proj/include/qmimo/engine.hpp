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

#ifndef QMIMO_ENGINE_HPP
#define QMIMO_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qmimo/channel.hpp"
#include "qmimo/downlink.hpp"
#include "qmimo/estimation.hpp"
#include "qmimo/uplink.hpp"

namespace qmimo {

enum class CsiMode { kPerfect, kEstimated };

enum class PrecoderKind { kMr };

enum class OutagePooling { kPerUserPooled, kWorstUser };

inline const char* to_string(CsiMode mode) {
    return mode == CsiMode::kPerfect ? "perfect" : "estimated";
}

/// Configuration error with the offending key path in the message.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MseCurveConfig {
    int num_antennas = 100;
    int num_users = 10;
    std::vector<int> pilot_lengths = {10, 32, 100, 316, 1000, 3162, 10000};
    std::vector<double> rho_db = {10.0};
    std::vector<int> resolutions = {1, 2, 3};
    bool include_infinite = true;
    int trials = 200;
};

/// Full scenario description. Angles in degrees, SNRs in dB (converted to
/// linear scale once, at validation), rates in bit/s/Hz.
struct SystemConfig {
    double fronthaul_rate = 512.0;
    std::vector<int> resolutions = {1, 2, 3, 4, 5, 6, 7, 8};
    int num_users = 8;
    double rho_ul_db = 5.0;
    double rho_dl_db = 15.0;
    double wavelength_m = 0.01;
    double array_length_m = 1.28;
    double d_min_m = 50.0;
    double d_max_m = 150.0;
    double phi_min_deg = 30.0;
    double phi_max_deg = 150.0;
    double clip_prob = 1e-4;
    int pilot_len = 100;
    double outage_level = 0.1;
    int trials = 500;
    std::uint64_t seed = 1;
    std::vector<CsiMode> csi_modes = {CsiMode::kPerfect};
    CombinerKind combiner = CombinerKind::kMr;
    PrecoderKind precoder = PrecoderKind::kMr;
    OutagePooling pooling = OutagePooling::kPerUserPooled;
    int threads = 1;  // 0 selects the hardware concurrency
    MseCurveConfig mse_curve;

    // linear-scale powers, filled by validate()
    double rho_ul = 0.0;
    double rho_dl = 0.0;

    void validate();
};

/// Antenna count affordable at resolution q under the fronthaul budget,
/// floor(fronthaul_rate / (2 q)).
inline int antennas_for_resolution(double fronthaul_rate, int q) {
    if (q < 1) throw ConfigError("resolutions: entries must be >= 1");
    if (!(fronthaul_rate >= 2.0 * q))
        throw ConfigError("fronthaul_rate: too small for resolution " + std::to_string(q));
    return static_cast<int>(std::floor(fronthaul_rate / (2.0 * q)));
}

inline void SystemConfig::validate() {
    if (!(fronthaul_rate > 0.0)) throw ConfigError("fronthaul_rate: must be positive");
    if (resolutions.empty()) throw ConfigError("resolutions: must be nonempty");
    if (num_users < 1) throw ConfigError("num_users: must be >= 1");
    for (int q : resolutions) {
        const int b = antennas_for_resolution(fronthaul_rate, q);
        if (b < num_users)
            throw ConfigError("resolutions: B(" + std::to_string(q) + ") = " + std::to_string(b) +
                              " antennas cannot serve " + std::to_string(num_users) + " users");
    }
    if (!(wavelength_m > 0.0)) throw ConfigError("wavelength_m: must be positive");
    if (!(array_length_m > 0.0)) throw ConfigError("array_length_m: must be positive");
    if (!(d_min_m > 0.0) || d_max_m < d_min_m)
        throw ConfigError("d_min_m/d_max_m: need 0 < d_min_m <= d_max_m");
    if (!(phi_min_deg < phi_max_deg)) throw ConfigError("phi_min_deg: must be below phi_max_deg");
    if (!(clip_prob > 0.0 && clip_prob < 1.0)) throw ConfigError("clip_prob: must lie in (0,1)");
    if (pilot_len < num_users)
        throw ConfigError("pilot_len: must be at least num_users for orthogonal pilots");
    if (!(outage_level > 0.0 && outage_level < 1.0))
        throw ConfigError("outage_level: must lie in (0,1)");
    if (trials < 1) throw ConfigError("trials: must be >= 1");
    if (csi_modes.empty()) throw ConfigError("csi_mode: must name at least one mode");
    if (threads < 0) throw ConfigError("threads: must be >= 0");
    if (mse_curve.num_antennas < 1) throw ConfigError("mse_curve.num_antennas: must be >= 1");
    if (mse_curve.num_users < 1) throw ConfigError("mse_curve.num_users: must be >= 1");
    for (int n_p : mse_curve.pilot_lengths)
        if (n_p < mse_curve.num_users)
            throw ConfigError("mse_curve.pilot_lengths: entries must be >= mse_curve.num_users");
    for (int q : mse_curve.resolutions)
        if (q < 1) throw ConfigError("mse_curve.resolutions: entries must be >= 1");
    if (mse_curve.trials < 0) throw ConfigError("mse_curve.trials: must be >= 0");
    rho_ul = db_to_linear(rho_ul_db);
    rho_dl = db_to_linear(rho_dl_db);
}

/// Per-drop rate samples, one entry per user.
struct TrialRecord {
    std::uint64_t drop_id = 0;
    Eigen::VectorXd ul_rate;
    Eigen::VectorXd dl_rate;
    Eigen::VectorXd min_rate;
};

struct SweepRow {
    int q = 0;
    int b = 0;
    CsiMode csi = CsiMode::kPerfect;
    double rho_ul_db = 0.0;
    double rho_dl_db = 0.0;
    double ul_rate = 0.0;
    double dl_rate = 0.0;
    double bidir_rate = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {
inline constexpr std::uint64_t kStreamTrial = 0x7261696C;
inline constexpr std::uint64_t kStreamPilot = 0x70696C74;
inline constexpr std::uint64_t kStreamMse = 0x6D736531;

/// Deterministic parallel loop: item i is fully determined by i, so any
/// scheduling produces the same results.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}
}  // namespace detail

/// One Monte Carlo drop at the given converter resolution with b antennas:
/// sample user positions, build the LOS channel referenced to the
/// average-distance SNR, acquire CSI, and record per-user uplink, downlink
/// and bidirectional rates. The drop substream depends only on (seed, trial),
/// so every resolution and CSI mode sees the same user placements.
inline TrialRecord run_trial(const SystemConfig& config, std::optional<int> bits, int b,
                             CsiMode mode, const PilotBook& pilots, std::uint64_t trial_index) {
    Rng rng(Rng::derive(config.seed, detail::kStreamTrial, trial_index));
    const UserDrop drop = sample_drop(rng, config.num_users, config.d_min_m, config.d_max_m,
                                      config.phi_min_deg, config.phi_max_deg, config.wavelength_m);
    const ArrayGeometry geometry(b, config.array_length_m, config.wavelength_m);
    const Eigen::MatrixXcd channel = los_channel_normalized(geometry, drop).matrix;

    const Converter conv =
        bits ? Converter(QuantizerSpec::calibrated(*bits, 1.0 / static_cast<double>(b),
                                                   config.clip_prob))
             : infinite_precision();

    Eigen::MatrixXcd channel_estimate;
    if (mode == CsiMode::kEstimated) {
        Rng pilot_rng(Rng::derive(config.seed, detail::kStreamPilot, trial_index,
                                  static_cast<std::uint64_t>(bits.value_or(0))));
        const BussgangMmseEstimator estimator(pilots, drop.snr_scale, config.rho_ul, b, conv);
        channel_estimate = estimator.estimate(estimator.simulate_received(channel, pilot_rng));
    } else {
        channel_estimate = channel;
    }

    TrialRecord record;
    record.drop_id = trial_index;
    record.ul_rate =
        uplink_trial(channel, channel_estimate, config.rho_ul, conv, config.combiner);

    const Eigen::MatrixXcd precoder = mr_precoder(channel_estimate);
    const DownlinkModel dl_model = downlink_linearize(precoder, bits, config.clip_prob);
    const Eigen::VectorXd dl_sindr = downlink_sindr(
        channel, dl_model, Eigen::VectorXd::Constant(config.num_users, config.rho_dl));
    record.dl_rate.resize(config.num_users);
    for (int u = 0; u < config.num_users; ++u) record.dl_rate[u] = downlink_rate(dl_sindr[u]);

    record.min_rate = record.ul_rate.cwiseMin(record.dl_rate);
    if (!record.ul_rate.allFinite() || !record.dl_rate.allFinite())
        throw std::runtime_error("run_trial: non-finite rate sample");
    return record;
}

/// Largest rate whose empirical outage probability does not exceed level:
/// the floor(level * N)-th order statistic of the samples (0-based,
/// ascending). Deterministic given the samples.
inline double outage_rate(std::vector<double> samples, double level) {
    if (samples.empty()) throw std::domain_error("outage_rate: samples must be nonempty");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("outage_rate: level not in (0,1)");
    std::sort(samples.begin(), samples.end());
    std::size_t idx =
        static_cast<std::size_t>(std::floor(level * static_cast<double>(samples.size())));
    if (idx >= samples.size()) idx = samples.size() - 1;
    return samples[idx];
}

namespace detail {
enum class LinkSelect { kUplink, kDownlink, kBidirectional };

inline std::vector<double> pool_samples(const std::vector<TrialRecord>& records,
                                        LinkSelect link, OutagePooling pooling) {
    std::vector<double> samples;
    const auto pick = [&](const TrialRecord& r) -> const Eigen::VectorXd& {
        switch (link) {
            case LinkSelect::kUplink: return r.ul_rate;
            case LinkSelect::kDownlink: return r.dl_rate;
            default: return r.min_rate;
        }
    };
    if (pooling == OutagePooling::kPerUserPooled) {
        for (const auto& r : records)
            for (Eigen::Index u = 0; u < pick(r).size(); ++u) samples.push_back(pick(r)[u]);
    } else {
        for (const auto& r : records) samples.push_back(pick(r).minCoeff());
    }
    return samples;
}
}  // namespace detail

/// Outage rate of the bidirectional link: the per-user min(uplink, downlink)
/// samples pooled across drops.
inline double bidirectional_outage_rate(const std::vector<TrialRecord>& records, double level,
                                        OutagePooling pooling = OutagePooling::kPerUserPooled) {
    if (records.empty())
        throw std::domain_error("bidirectional_outage_rate: records must be nonempty");
    return outage_rate(detail::pool_samples(records, detail::LinkSelect::kBidirectional, pooling),
                       level);
}

/// Sweep converter resolution against antenna count at a fixed fronthaul
/// rate. Each (resolution, CSI mode) pair aggregates `trials` independent
/// drops into uplink, downlink and bidirectional outage rates. Output is
/// deterministic in (config, seed) and independent of the thread count.
inline std::vector<SweepRow> fronthaul_sweep(const SystemConfig& config) {
    const bool needs_pilots =
        std::find(config.csi_modes.begin(), config.csi_modes.end(), CsiMode::kEstimated) !=
        config.csi_modes.end();
    PilotBook pilots;
    if (needs_pilots) pilots = dft_pilots(config.pilot_len, config.num_users);

    std::vector<SweepRow> rows;
    for (int q : config.resolutions) {
        const int b = antennas_for_resolution(config.fronthaul_rate, q);
        for (CsiMode mode : config.csi_modes) {
            std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
            detail::parallel_for(config.trials, config.threads, [&](int t) {
                records[static_cast<std::size_t>(t)] =
                    run_trial(config, q, b, mode, pilots, static_cast<std::uint64_t>(t));
            });

            const auto ul =
                detail::pool_samples(records, detail::LinkSelect::kUplink, config.pooling);
            const auto dl =
                detail::pool_samples(records, detail::LinkSelect::kDownlink, config.pooling);
            const std::size_t expected =
                config.pooling == OutagePooling::kPerUserPooled
                    ? static_cast<std::size_t>(config.trials) *
                          static_cast<std::size_t>(config.num_users)
                    : static_cast<std::size_t>(config.trials);
            if (ul.size() != expected || dl.size() != expected)
                throw std::logic_error("fronthaul_sweep: outage sample bookkeeping mismatch");

            SweepRow row;
            row.q = q;
            row.b = b;
            row.csi = mode;
            row.rho_ul_db = config.rho_ul_db;
            row.rho_dl_db = config.rho_dl_db;
            row.ul_rate = outage_rate(ul, config.outage_level);
            row.dl_rate = outage_rate(dl, config.outage_level);
            row.bidir_rate = bidirectional_outage_rate(records, config.outage_level, config.pooling);
            row.trials = config.trials;
            row.seed = config.seed;
            rows.push_back(row);
        }
    }
    return rows;
}

/// Monte Carlo estimation-error experiment on an i.i.d. Rayleigh channel.
struct MseExperiment {
    int num_antennas = 1;
    int num_users = 1;
    int pilot_len = 1;
    double rho_ul = 1.0;           // linear
    std::optional<int> bits = 1;   // disengaged = infinite precision
    double clip_prob = 1e-4;
    int trials = 100000;
    std::uint64_t seed = 1;
};

/// Empirical per-coefficient MSE of the Bussgang MMSE estimator. Trial
/// substreams depend only on (seed, trial), and the channel is drawn before
/// the pilot noise, so runs with different pilot lengths at the same seed
/// share channels and noise prefixes (common random numbers).
inline double empirical_mse(const MseExperiment& experiment) {
    if (experiment.trials < 1) throw std::domain_error("empirical_mse: trials must be >= 1");
    const PilotBook pilots = dft_pilots(experiment.pilot_len, experiment.num_users);
    const Converter conv =
        experiment.bits
            ? Converter(QuantizerSpec::calibrated(
                  *experiment.bits, 1.0 / static_cast<double>(experiment.num_antennas),
                  experiment.clip_prob))
            : infinite_precision();
    const BussgangMmseEstimator estimator(pilots,
                                          Eigen::VectorXd::Ones(experiment.num_users),
                                          experiment.rho_ul, experiment.num_antennas, conv);
    double acc = 0.0;
    for (int t = 0; t < experiment.trials; ++t) {
        Rng rng(Rng::derive(experiment.seed, detail::kStreamMse, static_cast<std::uint64_t>(t)));
        const Eigen::MatrixXcd channel =
            rayleigh_channel(rng, experiment.num_antennas, experiment.num_users).matrix;
        const Eigen::MatrixXcd received = estimator.simulate_received(channel, rng);
        acc += (estimator.estimate(received) - channel).squaredNorm();
    }
    return acc / (static_cast<double>(experiment.trials) *
                  static_cast<double>(experiment.num_antennas) *
                  static_cast<double>(experiment.num_users));
}

}  // namespace qmimo

#endif  // QMIMO_ENGINE_HPP
