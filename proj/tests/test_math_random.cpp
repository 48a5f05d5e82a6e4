#include <doctest.h>

#include <cmath>

#include "qmimo/math.hpp"
#include "qmimo/random.hpp"

using namespace qmimo;

namespace {

// Simpson-rule standard normal CDF, independent of std::erfc.
double normal_cdf_quadrature(double x) {
    const double lo = 0.0, hi = std::abs(x);
    const int n = 4000;  // even
    const double h = (hi - lo) / n;
    auto density = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.141592653589793238462643);
    };
    double acc = density(lo) + density(hi);
    for (int i = 1; i < n; ++i) acc += density(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    const double half_mass = acc * h / 3.0;
    return x >= 0.0 ? 0.5 + half_mass : 0.5 - half_mass;
}

double normal_quantile_bisect(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf_quadrature(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("normal cdf matches quadrature oracle") {
    for (double x : {-3.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.5, 3.890592}) {
        CHECK(normal_cdf(x) == doctest::Approx(normal_cdf_quadrature(x)).epsilon(1e-10));
    }
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-6, 5e-5, 0.02, 0.1, 0.5, 0.8413, 0.975, 1.0 - 5e-5}) {
        const double x = normal_quantile(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("quantile of the clipping tail matches the bisection oracle") {
    const double oracle = normal_quantile_bisect(1.0 - 5e-5);
    CHECK(normal_quantile(1.0 - 5e-5) == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(oracle == doctest::Approx(3.890592).epsilon(1e-5));
}

TEST_CASE("db conversion") {
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(db_to_linear(-10.0) == doctest::Approx(0.1));
}

TEST_CASE("rng streams are deterministic and substreams differ") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const double va = a.uniform();
        all_equal &= (va == b.uniform());
        any_diff |= (va != c.uniform());
    }
    CHECK(all_equal);
    CHECK(any_diff);
    CHECK(Rng::derive(1, 2, 3) != Rng::derive(1, 2, 4));
    CHECK(Rng::derive(1, 2, 3) != Rng::derive(2, 2, 3));
    CHECK(Rng::derive(1, 2, 3) == Rng::derive(1, 2, 3));
}

TEST_CASE("gaussian moments") {
    Rng rng(7);
    const int n = 1000000;
    double mean = 0.0, var = 0.0, cpow = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        mean += x;
        var += x * x;
        cpow += std::norm(rng.cnormal());
    }
    mean /= n;
    var = var / n - mean * mean;
    cpow /= n;
    CHECK(std::abs(mean) < 0.005);
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    CHECK(cpow == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform stays in range") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(30.0, 150.0);
        CHECK(u >= 30.0);
        CHECK(u < 150.0);
    }
}
