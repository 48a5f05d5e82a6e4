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

#ifndef QMIMO_RANDOM_HPP
#define QMIMO_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "qmimo/math.hpp"

namespace qmimo {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic random stream.
///
/// Every distribution is generated from explicit integer-to-double mappings on
/// top of std::mt19937_64, so a given seed produces the same sequence on every
/// platform and compiler. Substreams are derived by hashing the master seed
/// with a stream path, which makes Monte Carlo trials reproducible regardless
/// of execution order or thread count.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Hash a (seed, path...) tuple into an independent substream seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t p0, std::uint64_t p1 = 0,
                                std::uint64_t p2 = 0) {
        std::uint64_t h = detail::splitmix64(seed);
        h = detail::splitmix64(h ^ (p0 + 0x165667B19E3779F9ull));
        h = detail::splitmix64(h ^ (p1 + 0x27D4EB2F165667C5ull));
        h = detail::splitmix64(h ^ (p2 + 0x9E3779B97F4A7C15ull));
        return h;
    }

    /// Uniform draw on [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform draw on [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal draw (Box-Muller, one cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * kPi * u2;
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

    /// Circularly-symmetric complex normal draw with unit power.
    cplx cnormal() {
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        double re = normal() * inv_sqrt2;
        double im = normal() * inv_sqrt2;
        return {re, im};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qmimo

#endif  // QMIMO_RANDOM_HPP
