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

#ifndef QMIMO_DOWNLINK_HPP
#define QMIMO_DOWNLINK_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qmimo/quantizer.hpp"

namespace qmimo {

/// Bussgang-linearized downlink transmit chain. The DAC input is the
/// precoded signal P s with unit-power symbols; after quantization the chain
/// is rescaled so the total radiated power (useful signal plus distortion)
/// equals one, which makes the downlink SNR the total transmit SNR at the
/// reference distance. gain and error_cov already carry that rescaling.
struct DownlinkModel {
    Eigen::MatrixXcd precoder;   // unit Frobenius norm
    Eigen::VectorXd gain;        // power-normalized Bussgang gain diagonal
    Eigen::MatrixXcd error_cov;  // power-normalized distortion covariance
    double power_norm = 1.0;     // amplitude rescaling applied to the chain
    DistortionExactness exactness = DistortionExactness::kInfinitePrecision;
};

/// Maximum-ratio precoder: conjugate channel estimate with sum-power
/// normalization, P = conj(H_hat) / ||H_hat||_F.
inline Eigen::MatrixXcd mr_precoder(const Eigen::MatrixXcd& channel_estimate) {
    const double norm = channel_estimate.norm();
    if (!(norm > 0.0)) throw std::domain_error("mr_precoder: channel estimate must be nonzero");
    return channel_estimate.conjugate() / norm;
}

/// Linearize the DAC bank around the precoded transmit signal. The quantizer
/// step is calibrated to the mean per-antenna DAC input power with the given
/// clipping probability.
inline DownlinkModel downlink_linearize(const Eigen::MatrixXcd& precoder,
                                        std::optional<int> bits, double clip_prob) {
    const Eigen::Index num_antennas = precoder.rows();
    DownlinkModel model;
    model.precoder = precoder;

    if (!bits) {
        model.gain = Eigen::VectorXd::Ones(num_antennas);
        model.error_cov = Eigen::MatrixXcd::Zero(num_antennas, num_antennas);
        model.power_norm = 1.0 / precoder.norm();
        model.gain *= model.power_norm;
        model.exactness = DistortionExactness::kInfinitePrecision;
        return model;
    }

    const Eigen::MatrixXcd input_cov = precoder * precoder.adjoint();
    const double mean_power = input_cov.trace().real() / static_cast<double>(num_antennas);
    const QuantizerSpec spec = QuantizerSpec::calibrated(*bits, mean_power, clip_prob);
    const DistortionModel dm = distortion_cov(input_cov, spec);

    const double signal_power =
        (dm.gain.asDiagonal() * input_cov * dm.gain.asDiagonal()).trace().real();
    const double radiated = signal_power + dm.error_cov.trace().real();
    model.power_norm = 1.0 / std::sqrt(radiated);
    model.gain = model.power_norm * dm.gain;
    model.error_cov = model.power_norm * model.power_norm * dm.error_cov;
    model.exactness = dm.exactness;
    return model;
}

/// Per-user downlink SINDR on the true channel:
///   rho_u |h_u^T G p_u|^2 over
///   sum_{v!=u} rho_u |h_u^T G p_v|^2 + h_u^T C_e conj(h_u) + 1.
inline Eigen::VectorXd downlink_sindr(const Eigen::MatrixXcd& channel, const DownlinkModel& model,
                                      const Eigen::VectorXd& rho) {
    const Eigen::Index num_users = channel.cols();
    if (model.precoder.cols() != num_users || rho.size() != num_users)
        throw std::domain_error("downlink_sindr: inconsistent user dimensions");

    // (u,v) = h_u^T G p_v
    const Eigen::MatrixXcd cross =
        channel.transpose() * model.gain.asDiagonal() * model.precoder;
    const Eigen::VectorXd dist =
        (channel.transpose() * model.error_cov * channel.conjugate()).diagonal().real().cwiseMax(
            0.0);

    Eigen::VectorXd sindr(num_users);
    for (Eigen::Index u = 0; u < num_users; ++u) {
        const double sig = rho[u] * std::norm(cross(u, u));
        double interference = 0.0;
        for (Eigen::Index v = 0; v < num_users; ++v)
            if (v != u) interference += rho[u] * std::norm(cross(u, v));
        sindr[u] = sig / (interference + dist[u] + 1.0);
    }
    return sindr;
}

/// Rate of the Gaussian-codebook lower bound, log2(1 + sindr).
inline double downlink_rate(double sindr) {
    if (sindr < 0.0) throw std::domain_error("downlink_rate: sindr must be nonnegative");
    return std::log2(1.0 + sindr);
}

}  // namespace qmimo

#endif  // QMIMO_DOWNLINK_HPP
