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

#ifndef QMIMO_ESTIMATION_HPP
#define QMIMO_ESTIMATION_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmimo/quantizer.hpp"
#include "qmimo/random.hpp"

namespace qmimo {

/// Orthogonal pilot sequences: one column per user, squared column norm equal
/// to the pilot length.
struct PilotBook {
    Eigen::MatrixXcd matrix;  // pilot_len x num_users, unit-modulus entries
    std::vector<int> tones;   // DFT column indices when dft_subset is true
    bool dft_subset = false;

    int length() const { return static_cast<int>(matrix.rows()); }
    int num_users() const { return static_cast<int>(matrix.cols()); }
};

/// Pilot book made of the first num_users columns of the pilot_len-point DFT
/// matrix.
inline PilotBook dft_pilots(int pilot_len, int num_users) {
    if (num_users < 1) throw std::domain_error("dft_pilots: need at least one user");
    if (pilot_len < num_users)
        throw std::domain_error("dft_pilots: pilot length must be at least the user count");
    PilotBook book;
    book.matrix.resize(pilot_len, num_users);
    book.tones.resize(static_cast<std::size_t>(num_users));
    for (int u = 0; u < num_users; ++u) {
        book.tones[static_cast<std::size_t>(u)] = u;
        for (int t = 0; t < pilot_len; ++t)
            book.matrix(t, u) =
                std::polar(1.0, -2.0 * kPi * static_cast<double>(t) * static_cast<double>(u) /
                                    static_cast<double>(pilot_len));
    }
    book.dft_subset = true;
    return book;
}

enum class EstimatorMethod { kBussgangMmse, kGenie };

struct EstimateReport {
    Eigen::MatrixXcd channel_estimate;  // antennas x users
    std::optional<double> mse_per_coeff;
    EstimatorMethod method = EstimatorMethod::kBussgangMmse;
};

/// Linear MMSE channel estimator on the Bussgang-linearized quantized pilot
/// observation.
///
/// Pilot model, per receive antenna b: the stacked quantizer outputs over the
/// pilot phase obey r_b = g * a * (S h_b + n_b) + e_b, where S = sqrt(rho) *
/// pilots, a is the pilot-phase AGC gain that sets the ensemble quantizer
/// input power to 1/num_antennas, g the Bussgang gain at that power, and e_b
/// the distortion with covariance from distortion_cov on the stacked input.
/// The channel rows h_b are i.i.d. across antennas with per-user prior
/// variances prior_var, so one filter serves every antenna.
///
/// For DFT pilot books the model covariance is circulant and the pilot
/// columns are its eigenvectors, which reduces the filter to one scaled
/// matched filter per user; general pilot books take the dense solve. The two
/// paths agree to rounding.
class BussgangMmseEstimator {
  public:
    BussgangMmseEstimator(const PilotBook& pilots, const Eigen::VectorXd& prior_var, double rho_ul,
                          int num_antennas, const Converter& conv)
        : conv_(conv), num_antennas_(num_antennas) {
        const int n = pilots.length();
        const int num_users = pilots.num_users();
        if (prior_var.size() != num_users)
            throw std::domain_error("BussgangMmseEstimator: prior size mismatch");
        for (int u = 0; u < num_users; ++u)
            if (!(prior_var[u] > 0.0))
                throw std::domain_error("BussgangMmseEstimator: prior variances must be positive");
        if (!(rho_ul >= 0.0)) throw std::domain_error("BussgangMmseEstimator: rho must be >= 0");
        if (num_antennas < 1)
            throw std::domain_error("BussgangMmseEstimator: need at least one antenna");

        scaled_pilots_ = std::sqrt(rho_ul) * pilots.matrix;

        // ensemble received power per symbol and the AGC that maps it to 1/B
        const double symbol_power =
            1.0 + (scaled_pilots_.cwiseAbs2() * prior_var).sum() / static_cast<double>(n);
        agc_ = 1.0 / std::sqrt(static_cast<double>(num_antennas) * symbol_power);

        if (pilots.dft_subset)
            build_circulant(pilots, prior_var, rho_ul, n, num_users);
        else
            build_dense(prior_var, n, num_users);
    }

    /// Pilot-phase AGC gain.
    double agc_gain() const { return agc_; }

    /// True when the observation covariance needed a trace-scaled jitter to
    /// factor.
    bool regularized() const { return regularized_; }

    /// The U x pilot_len LMMSE filter applied to each antenna's observation.
    const Eigen::MatrixXcd& filter() const { return filter_; }

    /// Analytic per-coefficient MSE of the estimator under its own model.
    double model_mse_per_coeff() const { return model_mse_; }

    /// Channel estimate from the quantized pilot observation (pilot_len x
    /// antennas, one column per antenna).
    Eigen::MatrixXcd estimate(const Eigen::MatrixXcd& received) const {
        if (received.rows() != scaled_pilots_.rows())
            throw std::domain_error("estimate: observation length mismatch");
        return (filter_ * received).transpose();
    }

    /// Quantized pilot observation for a given true channel; noise is drawn
    /// symbol-major so shorter pilot phases are prefixes of longer ones under
    /// the same stream.
    Eigen::MatrixXcd simulate_received(const Eigen::MatrixXcd& channel, Rng& rng) const {
        const Eigen::Index n = scaled_pilots_.rows();
        const Eigen::Index num_antennas = channel.rows();
        Eigen::MatrixXcd received(n, num_antennas);
        Eigen::MatrixXcd clean = scaled_pilots_ * channel.transpose();  // n x antennas
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index b = 0; b < num_antennas; ++b) {
                const cplx y = agc_ * (clean(t, b) + rng.cnormal());
                received(t, b) = conv_ ? quantize(y, *conv_) : y;
            }
        }
        return received;
    }

  private:
    void build_circulant(const PilotBook& pilots, const Eigen::VectorXd& prior_var, double rho_ul,
                         int n, int num_users) {
        // first-column generator of the stacked-input covariance a^2 (S C_h S^H + I)
        Eigen::VectorXcd c_in(n);
        for (int m = 0; m < n; ++m) {
            cplx acc(m == 0 ? 1.0 : 0.0, 0.0);
            for (int u = 0; u < num_users; ++u)
                acc += rho_ul * prior_var[u] *
                       std::polar(1.0, -2.0 * kPi *
                                           static_cast<double>(pilots.tones[static_cast<std::size_t>(u)]) *
                                           static_cast<double>(m) / static_cast<double>(n));
            c_in[m] = agc_ * agc_ * acc;
        }
        const double input_power = c_in[0].real();
        const double g = conv_ ? bussgang_gain(input_power, *conv_) : 1.0;

        // quantizer-output covariance generator
        Eigen::VectorXcd c_out(n);
        if (!conv_) {
            c_out = c_in;
        } else if (conv_->bits == 1) {
            const double scale = conv_->step * conv_->step / kPi;
            for (int m = 0; m < n; ++m) {
                const cplx corr = c_in[m] / input_power;
                c_out[m] = scale * cplx(std::asin(std::clamp(corr.real(), -1.0, 1.0)),
                                        std::asin(std::clamp(corr.imag(), -1.0, 1.0)));
            }
        } else {
            const double ce =
                std::max(0.0, quantizer_output_power(input_power, *conv_) - g * g * input_power);
            c_out = g * g * c_in;
            c_out[0] += ce;
        }

        // pilot columns are eigenvectors of the circulant output covariance
        filter_.resize(num_users, n);
        model_mse_ = 0.0;
        for (int u = 0; u < num_users; ++u) {
            const int tone = pilots.tones[static_cast<std::size_t>(u)];
            cplx lambda(0.0, 0.0);
            for (int m = 0; m < n; ++m)
                lambda += c_out[m] * std::polar(1.0, 2.0 * kPi * static_cast<double>(tone) *
                                                         static_cast<double>(m) /
                                                         static_cast<double>(n));
            const double eig = lambda.real();
            if (!(eig > 0.0))
                throw std::runtime_error("BussgangMmseEstimator: degenerate observation covariance");
            const double coeff = g * agc_ * std::sqrt(rho_ul) * prior_var[u] / eig;
            filter_.row(u) = coeff * pilots.matrix.col(u).adjoint();
            const double reduction =
                g * agc_ * g * agc_ * rho_ul * prior_var[u] * prior_var[u] *
                static_cast<double>(n) / eig;
            model_mse_ += prior_var[u] - reduction;
        }
        model_mse_ /= static_cast<double>(num_users);
    }

    void build_dense(const Eigen::VectorXd& prior_var, int n, int num_users) {
        const Eigen::MatrixXcd input_cov =
            agc_ * agc_ *
            (scaled_pilots_ * prior_var.asDiagonal() * scaled_pilots_.adjoint() +
             Eigen::MatrixXcd::Identity(n, n));
        const Eigen::VectorXd g = conv_ ? bussgang_gain(input_cov.diagonal().real(), *conv_)
                                        : Eigen::VectorXd::Ones(n);
        const DistortionModel dm = distortion_cov(input_cov, conv_);
        const Eigen::MatrixXcd output_cov =
            g.asDiagonal() * input_cov * g.asDiagonal() + dm.error_cov;

        // E[h r^H] = a C_h S^H diag(g)
        const Eigen::MatrixXcd cross = agc_ * prior_var.asDiagonal() * scaled_pilots_.adjoint() *
                                       g.asDiagonal();
        Eigen::LLT<Eigen::MatrixXcd> llt(output_cov);
        if (llt.info() != Eigen::Success) {
            const double jitter = 1e-12 * output_cov.trace().real() / static_cast<double>(n);
            llt.compute(output_cov + jitter * Eigen::MatrixXcd::Identity(n, n));
            regularized_ = true;
            if (llt.info() != Eigen::Success)
                throw std::runtime_error(
                    "BussgangMmseEstimator: degenerate observation covariance");
        }
        filter_ = llt.solve(cross.adjoint()).adjoint();
        model_mse_ =
            (prior_var.sum() - (filter_ * cross.adjoint()).trace().real()) /
            static_cast<double>(num_users);
    }

    Converter conv_;
    int num_antennas_;
    Eigen::MatrixXcd scaled_pilots_;  // sqrt(rho) * pilot matrix
    double agc_ = 1.0;
    Eigen::MatrixXcd filter_;  // U x pilot_len
    double model_mse_ = 0.0;
    bool regularized_ = false;
};

/// One-call Bussgang MMSE estimate; reports the empirical per-coefficient MSE
/// when the true channel is supplied.
inline EstimateReport bussgang_mmse_estimate(const Eigen::MatrixXcd& received_pilots,
                                             const PilotBook& pilots,
                                             const Eigen::VectorXd& prior_var, double rho_ul,
                                             const Converter& conv,
                                             const Eigen::MatrixXcd* true_channel = nullptr) {
    const int num_antennas = static_cast<int>(received_pilots.cols());
    BussgangMmseEstimator estimator(pilots, prior_var, rho_ul, num_antennas, conv);
    EstimateReport report;
    report.channel_estimate = estimator.estimate(received_pilots);
    report.method = EstimatorMethod::kBussgangMmse;
    if (true_channel) {
        const double err = (report.channel_estimate - *true_channel).squaredNorm();
        report.mse_per_coeff =
            err / static_cast<double>(true_channel->rows() * true_channel->cols());
    }
    return report;
}

/// Closed-form MSE of the 1-bit Bussgang MMSE estimator, single user:
///   1 - rho/(1+rho) * n_p / (pi/2 + (n_p - 1) asin(rho/(1+rho))).
inline double mse_1bit_closed_form(double pilot_len, double rho_ul) {
    if (!(pilot_len >= 1.0)) throw std::domain_error("mse_1bit_closed_form: need pilot_len >= 1");
    if (!(rho_ul > 0.0)) throw std::domain_error("mse_1bit_closed_form: need rho > 0");
    const double r = rho_ul / (1.0 + rho_ul);
    return 1.0 - r * pilot_len / (0.5 * kPi + (pilot_len - 1.0) * std::asin(r));
}

/// Large-pilot-count limit of the 1-bit MSE, 1 - (rho/(1+rho)) / asin(rho/(1+rho)).
/// Strictly positive: more pilots cannot drive the 1-bit error to zero.
inline double mse_1bit_floor(double rho_ul) {
    if (!(rho_ul > 0.0)) throw std::domain_error("mse_1bit_floor: need rho > 0");
    const double r = rho_ul / (1.0 + rho_ul);
    return 1.0 - r / std::asin(r);
}

struct MseSnrTable {
    double pilot_len;
    std::vector<double> rho_grid;
    std::vector<double> mse;
    int argmin_index;
};

/// Closed-form 1-bit MSE over an SNR grid for several pilot lengths, with the
/// grid argmin per pilot length.
inline std::vector<MseSnrTable> mse_vs_snr_curve(const std::vector<double>& pilot_lens,
                                                 const std::vector<double>& rho_grid) {
    if (pilot_lens.empty() || rho_grid.empty())
        throw std::domain_error("mse_vs_snr_curve: grids must be nonempty");
    std::vector<MseSnrTable> tables;
    tables.reserve(pilot_lens.size());
    for (double n_p : pilot_lens) {
        MseSnrTable table;
        table.pilot_len = n_p;
        table.rho_grid = rho_grid;
        table.mse.reserve(rho_grid.size());
        table.argmin_index = 0;
        for (std::size_t i = 0; i < rho_grid.size(); ++i) {
            table.mse.push_back(mse_1bit_closed_form(n_p, rho_grid[i]));
            if (table.mse.back() < table.mse[static_cast<std::size_t>(table.argmin_index)])
                table.argmin_index = static_cast<int>(i);
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

}  // namespace qmimo

#endif  // QMIMO_ESTIMATION_HPP
