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

#ifndef QMIMO_CHANNEL_HPP
#define QMIMO_CHANNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmimo/math.hpp"
#include "qmimo/random.hpp"

namespace qmimo {

/// Uniform linear array with a fixed physical aperture. The element spacing
/// in wavelengths follows from the aperture, so adding antennas packs them
/// closer together.
struct ArrayGeometry {
    int num_antennas;
    double aperture_m;
    double wavelength_m;

    ArrayGeometry(int num_antennas_, double aperture_m_, double wavelength_m_)
        : num_antennas(num_antennas_), aperture_m(aperture_m_), wavelength_m(wavelength_m_) {
        if (num_antennas_ < 1) throw std::domain_error("ArrayGeometry: need at least one antenna");
        if (!(aperture_m_ > 0.0) || !(wavelength_m_ > 0.0))
            throw std::domain_error("ArrayGeometry: aperture and wavelength must be positive");
    }

    double spacing_wavelengths() const { return aperture_m / (num_antennas * wavelength_m); }
};

struct UserPosition {
    double distance_m;
    double azimuth_deg;
};

/// One random placement of all users, with the free-space path loss and the
/// SNR scaling relative to a user at the average distance.
struct UserDrop {
    std::vector<UserPosition> positions;
    Eigen::VectorXd pathloss;   // (wavelength / (4 pi d))^2, linear
    Eigen::VectorXd snr_scale;  // (d_avg / d)^2

    int num_users() const { return static_cast<int>(positions.size()); }
};

enum class ChannelModel { kLosUla, kIidRayleigh };

struct ChannelRealization {
    Eigen::MatrixXcd matrix;  // antennas x users
    UserDrop drop;
    ChannelModel model = ChannelModel::kIidRayleigh;
};

/// Free-space path loss at the given distance, (wavelength/(4 pi d))^2.
inline double free_space_pathloss(double distance_m, double wavelength_m) {
    if (!(distance_m > 0.0)) throw std::domain_error("free_space_pathloss: distance must be > 0");
    const double a = wavelength_m / (4.0 * kPi * distance_m);
    return a * a;
}

/// Mean distance of a user placed uniformly (in area) on the annulus
/// [d_min, d_max]: 2/3 * (d_max^3 - d_min^3) / (d_max^2 - d_min^2).
inline double average_distance(double d_min, double d_max) {
    if (!(d_min > 0.0) || d_max < d_min)
        throw std::domain_error("average_distance: need 0 < d_min <= d_max");
    if (d_max - d_min <= 1e-12 * d_max) return 0.5 * (d_min + d_max);
    return 2.0 / 3.0 * (d_max * d_max * d_max - d_min * d_min * d_min) /
           (d_max * d_max - d_min * d_min);
}

/// Drop users uniformly in area over an annular sector. Distances follow
/// d = sqrt(d_min^2 + u (d_max^2 - d_min^2)) with u uniform, azimuths are
/// uniform over the sector.
inline UserDrop sample_drop(Rng& rng, int num_users, double d_min, double d_max,
                            double phi_min_deg, double phi_max_deg, double wavelength_m) {
    if (num_users < 1) throw std::domain_error("sample_drop: need at least one user");
    if (!(d_min > 0.0) || d_max < d_min)
        throw std::domain_error("sample_drop: need 0 < d_min <= d_max");
    if (!(phi_min_deg < phi_max_deg))
        throw std::domain_error("sample_drop: need phi_min < phi_max");

    const double d_avg = average_distance(d_min, d_max);
    UserDrop drop;
    drop.positions.resize(static_cast<std::size_t>(num_users));
    drop.pathloss.resize(num_users);
    drop.snr_scale.resize(num_users);
    for (int u = 0; u < num_users; ++u) {
        const double t = rng.uniform();
        const double d = std::sqrt(d_min * d_min + t * (d_max * d_max - d_min * d_min));
        const double phi = rng.uniform(phi_min_deg, phi_max_deg);
        drop.positions[static_cast<std::size_t>(u)] = {d, phi};
        drop.pathloss[u] = free_space_pathloss(d, wavelength_m);
        drop.snr_scale[u] = (d_avg / d) * (d_avg / d);
    }
    return drop;
}

namespace detail {
inline void fill_pathloss(UserDrop& drop, double wavelength_m) {
    for (int u = 0; u < drop.num_users(); ++u)
        drop.pathloss[u] =
            free_space_pathloss(drop.positions[static_cast<std::size_t>(u)].distance_m,
                                wavelength_m);
}

inline Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geometry, const UserDrop& drop) {
    const int num_antennas = geometry.num_antennas;
    const int num_users = drop.num_users();
    const double spacing = geometry.spacing_wavelengths();
    Eigen::MatrixXcd m(num_antennas, num_users);
    for (int u = 0; u < num_users; ++u) {
        const double phase_step = 2.0 * kPi * spacing *
                                  std::cos(drop.positions[static_cast<std::size_t>(u)].azimuth_deg *
                                           kPi / 180.0);
        for (int b = 0; b < num_antennas; ++b)
            m(b, u) = std::polar(1.0, phase_step * static_cast<double>(b));
    }
    return m;
}
}  // namespace detail

/// Line-of-sight channel: far-field ULA steering vectors scaled by the
/// square-root free-space path loss, phase referenced at element 0.
inline ChannelRealization los_channel(const ArrayGeometry& geometry, const UserDrop& drop) {
    ChannelRealization real;
    real.drop = drop;
    detail::fill_pathloss(real.drop, geometry.wavelength_m);
    real.matrix = detail::steering_matrix(geometry, drop);
    for (int u = 0; u < drop.num_users(); ++u)
        real.matrix.col(u) *= std::sqrt(real.drop.pathloss[u]);
    real.model = ChannelModel::kLosUla;
    return real;
}

/// Line-of-sight channel referenced to the average-distance SNR: columns are
/// steering vectors scaled by sqrt(snr_scale), so a nominal transmit SNR
/// applies to a user at d_avg and relative path loss is folded into the
/// matrix.
inline ChannelRealization los_channel_normalized(const ArrayGeometry& geometry,
                                                 const UserDrop& drop) {
    ChannelRealization real;
    real.drop = drop;
    detail::fill_pathloss(real.drop, geometry.wavelength_m);
    real.matrix = detail::steering_matrix(geometry, drop);
    for (int u = 0; u < drop.num_users(); ++u)
        real.matrix.col(u) *= std::sqrt(real.drop.snr_scale[u]);
    real.model = ChannelModel::kLosUla;
    return real;
}

/// i.i.d. Rayleigh channel with unit-variance complex Gaussian entries.
inline ChannelRealization rayleigh_channel(Rng& rng, int num_antennas, int num_users) {
    if (num_antennas < 1 || num_users < 1)
        throw std::domain_error("rayleigh_channel: dimensions must be >= 1");
    ChannelRealization real;
    real.matrix.resize(num_antennas, num_users);
    for (int u = 0; u < num_users; ++u)
        for (int b = 0; b < num_antennas; ++b) real.matrix(b, u) = rng.cnormal();
    real.model = ChannelModel::kIidRayleigh;
    return real;
}

}  // namespace qmimo

#endif  // QMIMO_CHANNEL_HPP
