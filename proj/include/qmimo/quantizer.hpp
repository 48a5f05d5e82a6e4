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

#ifndef QMIMO_QUANTIZER_HPP
#define QMIMO_QUANTIZER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qmimo/math.hpp"

namespace qmimo {

/// Uniform, symmetric, mid-rise scalar quantizer applied independently to the
/// in-phase and quadrature rails of each data converter.
///
/// The output alphabet per real dimension is
///   { step*(1-levels)/2, ..., -step/2, step/2, ..., step*(levels-1)/2 },
/// exactly `levels` values and no zero level. Inputs outside the granular
/// region [-step*levels/2, step*levels/2) saturate to the outermost levels.
struct QuantizerSpec {
    int bits;     // resolution per real dimension
    double step;  // level spacing
    int levels;   // 2^bits

    QuantizerSpec(int bits_, double step_) : bits(bits_), step(step_), levels(0) {
        if (bits_ < 1 || bits_ > 30)
            throw std::domain_error("QuantizerSpec: bits must lie in [1,30]");
        if (!(step_ > 0.0) || !std::isfinite(step_))
            throw std::domain_error("QuantizerSpec: step must be positive");
        levels = 1 << bits_;
    }

    /// Step size matched to a circularly-symmetric complex Gaussian input of
    /// the given power so that each real rail clips with probability
    /// clip_prob (two-sided).
    static QuantizerSpec calibrated(int bits, double input_power_complex, double clip_prob);

    /// Output level for cell index i in [0, levels): step * (i - (levels-1)/2).
    /// A single product of the step with an exactly-representable half-integer,
    /// so the alphabet is odd-symmetric to the last bit.
    double level(int i) const {
        return step * (static_cast<double>(i) - 0.5 * (static_cast<double>(levels) - 1.0));
    }

    /// Edge of the granular region, step*levels/2.
    double granular_edge() const { return 0.5 * step * levels; }

    std::vector<double> alphabet() const {
        std::vector<double> a(static_cast<std::size_t>(levels));
        for (int i = 0; i < levels; ++i) a[static_cast<std::size_t>(i)] = level(i);
        return a;
    }
};

/// A converter chain; disengaged means infinite precision (identity map).
using Converter = std::optional<QuantizerSpec>;

inline Converter infinite_precision() { return std::nullopt; }

/// Step size such that one real rail of variance input_power_complex/2
/// leaves the granular region with probability clip_prob.
inline double calibrate_step(int bits, double input_power_complex, double clip_prob) {
    if (!(clip_prob > 0.0 && clip_prob < 1.0))
        throw std::domain_error("calibrate_step: clip_prob must lie in (0,1)");
    if (!(input_power_complex > 0.0))
        throw std::domain_error("calibrate_step: input power must be positive");
    if (bits < 1) throw std::domain_error("calibrate_step: bits must be >= 1");
    const double sigma_real = std::sqrt(0.5 * input_power_complex);
    const double levels = static_cast<double>(1 << bits);
    return 2.0 * sigma_real / levels * normal_quantile(1.0 - 0.5 * clip_prob);
}

inline QuantizerSpec QuantizerSpec::calibrated(int bits, double input_power_complex,
                                               double clip_prob) {
    return {bits, calibrate_step(bits, input_power_complex, clip_prob)};
}

/// Mid-rise quantization of one real sample.
inline double quantize(double r, const QuantizerSpec& spec) {
    if (!std::isfinite(r)) throw std::domain_error("quantize: input must be finite");
    const double cell = std::floor(r / spec.step);
    const double half = 0.5 * spec.levels;
    int idx;
    if (cell < -half)
        idx = 0;
    else if (cell >= half)
        idx = spec.levels - 1;
    else
        idx = static_cast<int>(cell) + spec.levels / 2;
    return spec.level(idx);
}

/// Entrywise quantization of the real and imaginary parts.
inline cplx quantize(cplx z, const QuantizerSpec& spec) {
    return {quantize(z.real(), spec), quantize(z.imag(), spec)};
}

inline Eigen::VectorXcd quantize(const Eigen::VectorXcd& z, const Converter& conv) {
    if (!conv) return z;
    Eigen::VectorXcd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = quantize(z[i], *conv);
    return out;
}

/// Bussgang (LMMSE) gain of the quantizer for a circularly-symmetric complex
/// Gaussian input of the given power:
///   g = step/sqrt(pi*power) * sum_{i=1}^{levels-1} exp(-step^2 (i-levels/2)^2 / power).
inline double bussgang_gain(double input_power_complex, const QuantizerSpec& spec) {
    if (!(input_power_complex > 0.0))
        throw std::domain_error("bussgang_gain: input power must be positive");
    double acc = 0.0;
    for (int i = 1; i < spec.levels; ++i) {
        const double t = spec.step * (static_cast<double>(i) - 0.5 * spec.levels);
        acc += std::exp(-t * t / input_power_complex);
    }
    return spec.step / std::sqrt(kPi * input_power_complex) * acc;
}

/// Per-entry Bussgang gains for a vector of input powers (the diagonal of the
/// quantizer-input covariance).
inline Eigen::VectorXd bussgang_gain(const Eigen::VectorXd& input_power_complex,
                                     const QuantizerSpec& spec) {
    Eigen::VectorXd g(input_power_complex.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = bussgang_gain(input_power_complex[i], spec);
    return g;
}

/// Complex output power of the 1-bit quantizer, step^2/2 for any input power.
inline double output_power_1bit(const QuantizerSpec& spec) {
    if (spec.bits != 1) throw std::invalid_argument("output_power_1bit: requires 1-bit resolution");
    return 0.5 * spec.step * spec.step;
}

/// Exact complex output power of the quantizer for a circularly-symmetric
/// complex Gaussian input of the given power. Per real rail the power is the
/// level-probability sum over the decision cells, including the clipping
/// cells at both ends.
inline double quantizer_output_power(double input_power_complex, const QuantizerSpec& spec) {
    if (!(input_power_complex > 0.0))
        throw std::domain_error("quantizer_output_power: input power must be positive");
    const double sigma_real = std::sqrt(0.5 * input_power_complex);
    double p = 0.0;
    double cdf_lo = 0.0;
    for (int i = 0; i < spec.levels; ++i) {
        const double cdf_hi =
            (i == spec.levels - 1)
                ? 1.0
                : normal_cdf(spec.step * (static_cast<double>(i + 1) - 0.5 * spec.levels) /
                             sigma_real);
        const double lvl = spec.level(i);
        p += lvl * lvl * (cdf_hi - cdf_lo);
        cdf_lo = cdf_hi;
    }
    return 2.0 * p;
}

/// Output covariance of the 1-bit quantizer under jointly Gaussian inputs
/// with unit-diagonal correlation matrix `corr` (arcsine law):
///   C_r = step^2/pi * (asin(Re corr) + j asin(Im corr)), entrywise.
inline Eigen::MatrixXcd arcsine_output_cov(const Eigen::MatrixXcd& corr,
                                           const QuantizerSpec& spec) {
    if (spec.bits != 1) throw std::invalid_argument("arcsine_output_cov: requires 1-bit resolution");
    if (corr.rows() != corr.cols())
        throw std::domain_error("arcsine_output_cov: matrix must be square");
    const double scale = spec.step * spec.step / kPi;
    Eigen::MatrixXcd out(corr.rows(), corr.cols());
    for (Eigen::Index j = 0; j < corr.cols(); ++j) {
        for (Eigen::Index i = 0; i < corr.rows(); ++i) {
            const cplx s = corr(i, j);
            if (i == j) {
                if (std::abs(s.real() - 1.0) > 1e-9)
                    throw std::domain_error("arcsine_output_cov: correlation diagonal must be 1");
                // scale * asin(1) simplified, keeps the diagonal at step^2/2 exactly
                out(i, j) = cplx(0.5 * spec.step * spec.step, 0.0);
                continue;
            }
            const double re = std::clamp(s.real(), -1.0, 1.0);
            const double im = std::clamp(s.imag(), -1.0, 1.0);
            out(i, j) = scale * cplx(std::asin(re), std::asin(im));
        }
    }
    return out;
}

enum class DistortionExactness { kExact1Bit, kDiagonalApprox, kInfinitePrecision };

/// Bussgang linearization of a bank of converters: the elementwise quantizer
/// output equals diag(gain) * input + e with e uncorrelated with the input
/// and cov(e) = error_cov.
struct DistortionModel {
    Eigen::VectorXd gain;        // diagonal linear gain, real and positive
    Eigen::MatrixXcd error_cov;  // Hermitian PSD distortion covariance
    DistortionExactness exactness = DistortionExactness::kInfinitePrecision;
};

/// Distortion statistics of the converter bank for a Gaussian input with the
/// given covariance.
///
/// 1-bit: exact via the arcsine law, error_cov = C_r - G * input_cov * G.
/// Multi-bit: diagonal approximation from exact per-entry output powers,
///            [error_cov]_bb = P_out(sigma_b^2) - gain_b^2 sigma_b^2.
/// Infinite precision: identity gain, zero distortion.
inline DistortionModel distortion_cov(const Eigen::MatrixXcd& input_cov, const Converter& conv) {
    const Eigen::Index n = input_cov.rows();
    if (input_cov.cols() != n) throw std::domain_error("distortion_cov: matrix must be square");

    DistortionModel model;
    if (!conv) {
        model.gain = Eigen::VectorXd::Ones(n);
        model.error_cov = Eigen::MatrixXcd::Zero(n, n);
        model.exactness = DistortionExactness::kInfinitePrecision;
        return model;
    }

    const Eigen::VectorXd d = input_cov.diagonal().real();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(d[i] > 0.0))
            throw std::domain_error("distortion_cov: input covariance needs a positive diagonal");

    const QuantizerSpec& spec = *conv;
    model.gain = bussgang_gain(d, spec);

    if (spec.bits == 1) {
        const Eigen::VectorXd inv_sqrt_d = d.cwiseSqrt().cwiseInverse();
        Eigen::MatrixXcd corr = inv_sqrt_d.asDiagonal() * input_cov * inv_sqrt_d.asDiagonal();
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (std::abs(corr(i, j).real()) > 1.0 + 1e-9 ||
                    std::abs(corr(i, j).imag()) > 1.0 + 1e-9)
                    throw std::domain_error("distortion_cov: input covariance is not PSD");
            }
            corr(j, j) = cplx(1.0, 0.0);
        }
        model.error_cov = arcsine_output_cov(corr, spec);
        model.error_cov -=
            model.gain.asDiagonal() * input_cov * model.gain.asDiagonal();
        model.exactness = DistortionExactness::kExact1Bit;
    } else {
        model.error_cov = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p_out = quantizer_output_power(d[i], spec);
            model.error_cov(i, i) = std::max(0.0, p_out - model.gain[i] * model.gain[i] * d[i]);
        }
        model.exactness = DistortionExactness::kDiagonalApprox;
    }

    // exact arithmetic gives a PSD error_cov; clear fp cancellation residue
    for (Eigen::Index i = 0; i < n; ++i)
        model.error_cov(i, i) = cplx(std::max(0.0, model.error_cov(i, i).real()), 0.0);
    return model;
}

}  // namespace qmimo

#endif  // QMIMO_QUANTIZER_HPP
