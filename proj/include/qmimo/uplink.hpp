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

#ifndef QMIMO_UPLINK_HPP
#define QMIMO_UPLINK_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qmimo/quantizer.hpp"

namespace qmimo {

/// Diagonal of the automatic gain control matrix. Scales the received signal
/// so that the quantizer input power at every antenna equals 1/num_antennas.
inline Eigen::VectorXd agc_matrix(const Eigen::MatrixXcd& received_cov, int num_antennas) {
    const Eigen::VectorXd d = received_cov.diagonal().real();
    Eigen::VectorXd agc(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0))
            throw std::domain_error("agc_matrix: received covariance needs a positive diagonal");
        agc[i] = 1.0 / std::sqrt(static_cast<double>(num_antennas) * d[i]);
    }
    return agc;
}

/// The Bussgang-linearized uplink receive chain for one channel realization:
/// quantizer output r = diag(gain) diag(agc) y + e, where y is the received
/// signal with covariance received_cov and cov(e) = distortion.error_cov.
struct LinearizedUplink {
    Eigen::MatrixXcd received_cov;  // rho * H H^H + I
    Eigen::VectorXd agc;
    DistortionModel distortion;
    Eigen::MatrixXcd combiner;  // filled by the caller once a combiner is chosen
};

inline LinearizedUplink linearize_uplink(const Eigen::MatrixXcd& channel, double rho_ul,
                                         const Converter& conv) {
    const Eigen::Index num_antennas = channel.rows();
    LinearizedUplink lin;
    lin.received_cov = rho_ul * (channel * channel.adjoint());
    lin.received_cov += Eigen::MatrixXcd::Identity(num_antennas, num_antennas);
    lin.agc = agc_matrix(lin.received_cov, static_cast<int>(num_antennas));
    const Eigen::MatrixXcd quantizer_input_cov =
        lin.agc.asDiagonal() * lin.received_cov * lin.agc.asDiagonal();
    lin.distortion = distortion_cov(quantizer_input_cov, conv);
    return lin;
}

/// Maximum-ratio combiner, W = diag(gain) diag(agc) H_hat.
inline Eigen::MatrixXcd mr_combiner(const Eigen::MatrixXcd& channel_estimate,
                                    const Eigen::VectorXd& agc, const Eigen::VectorXd& gain) {
    return (gain.cwiseProduct(agc)).asDiagonal() * channel_estimate;
}

struct DaMmseResult {
    Eigen::MatrixXcd combiner;
    bool regularized = false;
};

/// Distortion-aware MMSE combiner. Column u maximizes the SINDR built from
/// the channel estimate:
///   w_u proportional to (rho sum_{v!=u} v_v v_v^H + C_e + diag(gain*agc)^2)^{-1} v_u
/// with v_v = diag(gain) diag(agc) h_hat_v. Computed through the full matrix
/// M = rho V V^H + C_e + diag(gain*agc)^2, whose rank-one downdate leaves the
/// solve direction unchanged.
inline DaMmseResult da_mmse_combiner(const Eigen::MatrixXcd& channel_estimate,
                                     const Eigen::VectorXd& agc, const Eigen::VectorXd& gain,
                                     const Eigen::MatrixXcd& error_cov, double rho_ul) {
    const Eigen::Index num_antennas = channel_estimate.rows();
    const Eigen::MatrixXcd v = (gain.cwiseProduct(agc)).asDiagonal() * channel_estimate;
    Eigen::MatrixXcd m = rho_ul * (v * v.adjoint()) + error_cov;
    const Eigen::VectorXd noise_diag = gain.cwiseProduct(agc).cwiseAbs2();
    for (Eigen::Index i = 0; i < num_antennas; ++i) m(i, i) += noise_diag[i];

    DaMmseResult result;
    Eigen::LLT<Eigen::MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-12 * m.trace().real() / static_cast<double>(num_antennas);
        m += jitter * Eigen::MatrixXcd::Identity(num_antennas, num_antennas);
        llt.compute(m);
        result.regularized = true;
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("da_mmse_combiner: covariance not positive definite");
    }
    result.combiner = llt.solve(v);
    return result;
}

/// Per-user SINDR of the linear combiner on the true channel:
///   rho_u |w_u^H G A h_u|^2 over
///   sum_{v!=u} rho_v |w_u^H G A h_v|^2 + w_u^H C_e w_u + ||A G w_u||^2.
inline Eigen::VectorXd uplink_sindr(const Eigen::MatrixXcd& channel,
                                    const Eigen::MatrixXcd& combiner, const Eigen::VectorXd& agc,
                                    const Eigen::VectorXd& gain, const Eigen::MatrixXcd& error_cov,
                                    const Eigen::VectorXd& rho) {
    const Eigen::Index num_users = channel.cols();
    if (combiner.cols() != num_users || rho.size() != num_users)
        throw std::domain_error("uplink_sindr: inconsistent user dimensions");

    const Eigen::VectorXd chain = gain.cwiseProduct(agc);
    const Eigen::MatrixXcd effective = chain.asDiagonal() * channel;
    const Eigen::MatrixXcd cross = combiner.adjoint() * effective;  // (u,v) = w_u^H G A h_v
    const Eigen::VectorXd dist =
        (combiner.adjoint() * error_cov * combiner).diagonal().real().cwiseMax(0.0);

    Eigen::VectorXd sindr(num_users);
    for (Eigen::Index u = 0; u < num_users; ++u) {
        const double sig = rho[u] * std::norm(cross(u, u));
        double interference = 0.0;
        for (Eigen::Index v = 0; v < num_users; ++v)
            if (v != u) interference += rho[v] * std::norm(cross(u, v));
        const double noise = (chain.asDiagonal() * combiner.col(u)).squaredNorm();
        const double denom = interference + dist[u] + noise;
        if (!(denom > 0.0)) throw std::domain_error("uplink_sindr: degenerate denominator");
        sindr[u] = sig / denom;
    }
    return sindr;
}

/// Rate of the Gaussian-codebook lower bound, log2(1 + sindr).
inline double uplink_rate(double sindr) {
    if (sindr < 0.0) throw std::domain_error("uplink_rate: sindr must be nonnegative");
    return std::log2(1.0 + sindr);
}

/// Quantities entering the mismatched nearest-neighbor decoding rate for one
/// user: the decoder scales codewords by presumed_gain while the combiner
/// output actually contains true_gain times the symbol plus a residual of
/// power residual_power (interference + distortion + noise).
struct GmiTerms {
    cplx true_gain;                       // w_u^H G A h_u
    cplx presumed_gain;                   // w_u^H G A h_hat_u
    double residual_power = 0.0;          // sigma^2
    double output_power = 0.0;            // |g|^2 rho + sigma^2
    double presumed_signal_power = 0.0;   // |g_hat|^2 rho
    double metric_power = 0.0;            // |g - g_hat|^2 rho + sigma^2
    std::optional<double> decoder_scale;  // optimal s; absent when presumed signal vanishes
};

/// Effective gains and residual power of user u for combiner column w_u.
inline GmiTerms effective_gains(const Eigen::MatrixXcd& channel,
                                const Eigen::MatrixXcd& channel_estimate,
                                const Eigen::MatrixXcd& combiner, const Eigen::VectorXd& agc,
                                const Eigen::VectorXd& gain, const Eigen::MatrixXcd& error_cov,
                                const Eigen::VectorXd& rho, int user) {
    const Eigen::Index num_users = channel.cols();
    if (user < 0 || user >= num_users) throw std::domain_error("effective_gains: bad user index");

    const Eigen::VectorXd chain = gain.cwiseProduct(agc);
    const Eigen::VectorXcd w = combiner.col(user);
    const Eigen::VectorXcd wc = chain.asDiagonal() * w;  // diagonal chain is real

    GmiTerms t;
    t.true_gain = wc.dot(channel.col(user));  // = w^H G A h_u
    t.presumed_gain = wc.dot(channel_estimate.col(user));

    double interference = 0.0;
    for (Eigen::Index v = 0; v < num_users; ++v) {
        if (v == static_cast<Eigen::Index>(user)) continue;
        interference += rho[v] * std::norm(wc.dot(channel.col(v)));
    }
    const double noise = wc.squaredNorm();
    const double dist = std::max(0.0, (w.adjoint() * error_cov * w)(0).real());
    t.residual_power = interference + noise + dist;

    const double rho_u = rho[user];
    t.output_power = std::norm(t.true_gain) * rho_u + t.residual_power;
    t.presumed_signal_power = std::norm(t.presumed_gain) * rho_u;
    t.metric_power = std::norm(t.true_gain - t.presumed_gain) * rho_u + t.residual_power;

    const double a = t.output_power;
    const double b = t.presumed_signal_power;
    const double c = t.metric_power;
    if (b > 0.0 && c > 0.0)
        t.decoder_scale = (-2.0 * c + b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * b * c);
    return t;
}

/// Generalized mutual information of the scaled nearest-neighbor decoder at
/// an arbitrary decoder scale s, in bits per channel use.
inline double uplink_gmi_at_scale(const GmiTerms& t, double s) {
    const double a = t.output_power;
    const double b = t.presumed_signal_power;
    const double c = t.metric_power;
    const double nats = -s * c + s * a / (1.0 + s * b) + std::log1p(s * b);
    return std::max(0.0, nats / std::log(2.0));
}

/// Generalized mutual information at the optimal decoder scale, in bits per
/// channel use. Returns 0 when the presumed signal vanishes (the decoder can
/// always be ignored).
inline double uplink_gmi(const GmiTerms& t) {
    if (!t.decoder_scale) return 0.0;
    return uplink_gmi_at_scale(t, *t.decoder_scale);
}

enum class CombinerKind { kMr, kDaMmse };

/// Per-user uplink rates for one channel realization: Bussgang linearization
/// on the true receive statistics, combiner built from the channel estimate,
/// mismatched-decoding rate per user. With channel_estimate == channel this
/// equals log2(1 + SINDR).
inline Eigen::VectorXd uplink_trial(const Eigen::MatrixXcd& channel,
                                    const Eigen::MatrixXcd& channel_estimate, double rho_ul,
                                    const Converter& conv,
                                    CombinerKind combiner_kind = CombinerKind::kMr) {
    const Eigen::Index num_users = channel.cols();
    LinearizedUplink lin = linearize_uplink(channel, rho_ul, conv);
    if (combiner_kind == CombinerKind::kMr)
        lin.combiner = mr_combiner(channel_estimate, lin.agc, lin.distortion.gain);
    else
        lin.combiner = da_mmse_combiner(channel_estimate, lin.agc, lin.distortion.gain,
                                        lin.distortion.error_cov, rho_ul)
                           .combiner;

    const Eigen::VectorXd rho = Eigen::VectorXd::Constant(num_users, rho_ul);
    Eigen::VectorXd rates(num_users);
    for (Eigen::Index u = 0; u < num_users; ++u)
        rates[u] = uplink_gmi(effective_gains(channel, channel_estimate, lin.combiner, lin.agc,
                                              lin.distortion.gain, lin.distortion.error_cov, rho,
                                              static_cast<int>(u)));
    return rates;
}

}  // namespace qmimo

#endif  // QMIMO_UPLINK_HPP
