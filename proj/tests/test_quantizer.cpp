#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qmimo/quantizer.hpp"
#include "qmimo/random.hpp"

using namespace qmimo;

TEST_CASE("spec holds resolution, step and level count together") {
    const QuantizerSpec spec(3, 0.5);
    CHECK(spec.levels == 8);
    CHECK(spec.alphabet().size() == 8);
    CHECK(spec.alphabet().front() == doctest::Approx(0.5 * (1 - 8) / 2.0));
    CHECK(spec.alphabet().back() == doctest::Approx(0.5 * (8 - 1) / 2.0));
    CHECK_THROWS_AS(QuantizerSpec(0, 1.0), std::domain_error);
    CHECK_THROWS_AS(QuantizerSpec(2, -1.0), std::domain_error);
}

TEST_CASE("scalar quantizer branch values") {
    const QuantizerSpec one_bit(1, 2.0);
    CHECK(quantize(0.7, one_bit) == 1.0);
    CHECK(quantize(-3.0, one_bit) == -1.0);  // clipped to step*(1-levels)/2
    const QuantizerSpec two_bit(2, 1.0);
    CHECK(quantize(5.0, two_bit) == 1.5);  // clipped to step*(levels-1)/2
    CHECK_THROWS_AS(quantize(std::nan(""), one_bit), std::domain_error);
    CHECK_THROWS_AS(quantize(INFINITY, one_bit), std::domain_error);
}

TEST_CASE("complex quantization is per-rail, with no zero level") {
    const QuantizerSpec spec(1, 2.0);
    const cplx q = quantize(cplx(0.7, -3.0), spec);
    CHECK(q == cplx(1.0, -1.0));
    CHECK(quantize(cplx(0.0, 0.0), spec) == cplx(1.0, 1.0));
}

TEST_CASE("vector quantization respects infinite precision") {
    Eigen::VectorXcd z(3);
    z << cplx(0.2, -0.4), cplx(1.0, 2.0), cplx(-5.0, 0.1);
    CHECK(quantize(z, infinite_precision()) == z);
    const Eigen::VectorXcd q = quantize(z, Converter(QuantizerSpec(2, 0.5)));
    for (int i = 0; i < 3; ++i) {
        CHECK(q[i].real() == quantize(z[i].real(), QuantizerSpec(2, 0.5)));
        CHECK(q[i].imag() == quantize(z[i].imag(), QuantizerSpec(2, 0.5)));
    }
}

TEST_CASE("high resolution error stays below half a step per rail") {
    const QuantizerSpec spec = QuantizerSpec::calibrated(8, 1.0, 1e-4);
    Rng rng(5);
    int granular = 0;
    for (int i = 0; i < 100000; ++i) {
        const cplx z = rng.cnormal();
        if (std::abs(z.real()) >= spec.granular_edge() ||
            std::abs(z.imag()) >= spec.granular_edge())
            continue;
        ++granular;
        const cplx q = quantize(z, spec);
        CHECK(std::abs(q - z) <= spec.step / std::sqrt(2.0) + 1e-12);
    }
    CHECK(granular > 99000);  // clipping is a 1e-4-probability event per rail
}

TEST_CASE("step calibration follows the two-sided clipping rule") {
    // granular edge at one sigma <=> clip probability 2*(1 - Phi(1)) = 0.31731
    const double clip_at_one_sigma = 2.0 * (1.0 - normal_cdf(1.0));
    CHECK(clip_at_one_sigma == doctest::Approx(0.3173).epsilon(1e-3));
    const double sigma_real = std::sqrt(0.5);
    CHECK(calibrate_step(1, 1.0, clip_at_one_sigma) == doctest::Approx(sigma_real).epsilon(1e-12));

    CHECK(calibrate_step(1, 1.0, 1e-4) == doctest::Approx(2.7511).epsilon(1e-4));
    // step scales as 1/levels at fixed input power and clip probability
    CHECK(calibrate_step(4, 1.0, 1e-4) ==
          doctest::Approx(calibrate_step(1, 1.0, 1e-4) / 8.0).epsilon(1e-14));

    CHECK_THROWS_AS(calibrate_step(1, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(calibrate_step(1, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(calibrate_step(1, -1.0, 0.5), std::domain_error);
}

TEST_CASE("one-bit bussgang gain closed form") {
    const QuantizerSpec spec(1, 2.0);
    CHECK(bussgang_gain(1.0, spec) == doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-12));
    CHECK_THROWS_AS(bussgang_gain(0.0, spec), std::domain_error);
    CHECK_THROWS_AS(bussgang_gain(-1.0, spec), std::domain_error);
}

TEST_CASE("bussgang gain approaches one at high calibrated resolution") {
    const double g12 = bussgang_gain(1.0, QuantizerSpec::calibrated(12, 1.0, 1e-4));
    CHECK(g12 > 0.999);
    CHECK(g12 < 1.0001);
}

TEST_CASE("bussgang gain against monte carlo lmmse coefficient") {
    const QuantizerSpec spec = QuantizerSpec::calibrated(3, 1.0, 1e-4);
    const double analytic = bussgang_gain(1.0, spec);
    Rng rng(99);
    cplx cross(0, 0);
    double power = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const cplx y = rng.cnormal();
        cross += quantize(y, spec) * std::conj(y);
        power += std::norm(y);
    }
    CHECK(cross.real() / power == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("one-bit output power is input independent") {
    CHECK(output_power_1bit(QuantizerSpec(1, 2.0)) == 2.0);
    CHECK(output_power_1bit(QuantizerSpec(1, 1.0)) == 0.5);
    CHECK_THROWS_AS(output_power_1bit(QuantizerSpec(2, 1.0)), std::invalid_argument);

    const QuantizerSpec spec(1, 2.0);
    Rng rng(3);
    double power = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const cplx y = std::sqrt(5.0) * rng.cnormal();  // CN(0,5) input
        power += std::norm(quantize(y, spec));
    }
    CHECK(power / n == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("exact scalar output power reduces to the one-bit constant") {
    const QuantizerSpec spec(1, 1.7);
    for (double p : {0.1, 1.0, 42.0})
        CHECK(quantizer_output_power(p, spec) ==
              doctest::Approx(output_power_1bit(spec)).epsilon(1e-12));
}

TEST_CASE("arcsine output covariance closed forms") {
    const QuantizerSpec spec(1, 2.0);
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(3, 3);
    const Eigen::MatrixXcd out = arcsine_output_cov(eye, spec);
    for (int i = 0; i < 3; ++i) {
        CHECK(out(i, i).real() == output_power_1bit(spec));  // exact by construction
        CHECK(out(i, i).imag() == 0.0);
    }
    Eigen::MatrixXcd corr(2, 2);
    corr << cplx(1, 0), cplx(0.5, 0), cplx(0.5, 0), cplx(1, 0);
    CHECK(arcsine_output_cov(corr, spec)(0, 1).real() ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    Eigen::MatrixXcd bad = corr;
    bad(0, 0) = cplx(1.5, 0);
    CHECK_THROWS_AS(arcsine_output_cov(bad, spec), std::domain_error);
    CHECK_THROWS_AS(arcsine_output_cov(corr, QuantizerSpec(2, 1.0)), std::invalid_argument);
}

TEST_CASE("one-bit distortion covariance of a white input") {
    const QuantizerSpec spec(1, 2.0);
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(4, 4);
    const DistortionModel model = distortion_cov(eye, spec);
    CHECK(model.exactness == DistortionExactness::kExact1Bit);
    const double expected = 2.0 - 4.0 / kPi;  // output power minus coherent part
    for (int i = 0; i < 4; ++i) {
        CHECK(model.error_cov(i, i).real() == doctest::Approx(expected).epsilon(1e-12));
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(model.error_cov(i, j)) < 1e-12);
    }
}

TEST_CASE("infinite precision has identity gain and no distortion") {
    const Eigen::MatrixXcd any = 3.0 * Eigen::MatrixXcd::Identity(5, 5);
    const DistortionModel model = distortion_cov(any, infinite_precision());
    CHECK(model.exactness == DistortionExactness::kInfinitePrecision);
    CHECK(model.gain.isOnes());
    CHECK(model.error_cov.isZero());
}

TEST_CASE("multi-bit diagonal distortion matches monte carlo") {
    const QuantizerSpec spec = QuantizerSpec::calibrated(3, 1.0, 1e-4);
    const DistortionModel model =
        distortion_cov(Eigen::MatrixXcd::Identity(2, 2), Converter(spec));
    CHECK(model.exactness == DistortionExactness::kDiagonalApprox);
    const double g = model.gain[0];
    Rng rng(17);
    double err = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const cplx y = rng.cnormal();
        err += std::norm(quantize(y, spec) - g * y);
    }
    CHECK(err / n == doctest::Approx(model.error_cov(0, 0).real()).epsilon(0.03));
}

TEST_CASE("one-bit distortion covariance is hermitian psd") {
    Rng rng(23);
    const int n = 6;
    Eigen::MatrixXcd a(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a(i, j) = rng.cnormal();
    const Eigen::MatrixXcd input = a * a.adjoint() + Eigen::MatrixXcd::Identity(n, n);
    const DistortionModel model = distortion_cov(input, Converter(QuantizerSpec(1, 0.4)));
    CHECK((model.error_cov - model.error_cov.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(model.error_cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("distortion covariance rejects bad inputs") {
    const Converter conv(QuantizerSpec(1, 1.0));
    CHECK_THROWS_AS(distortion_cov(Eigen::MatrixXcd::Zero(2, 2), conv), std::domain_error);
    Eigen::MatrixXcd not_psd(2, 2);
    not_psd << cplx(1, 0), cplx(2, 0), cplx(2, 0), cplx(1, 0);  // correlation above one
    CHECK_THROWS_AS(distortion_cov(not_psd, conv), std::domain_error);
}

TEST_CASE("bussgang residual is uncorrelated with the input") {
    const QuantizerSpec spec = QuantizerSpec::calibrated(2, 1.0, 1e-4);
    const double g = bussgang_gain(1.0, spec);
    Rng rng(31);
    const int n = 1000000;
    cplx corr_acc(0, 0);
    double dist_power = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx y = rng.cnormal();
        const cplx e = quantize(y, spec) - g * y;
        corr_acc += e * std::conj(y);
        dist_power += std::norm(e);
    }
    // 3-sigma bound of the correlation estimator, E|e|^2 E|y|^2 / n per part
    const double sigma = std::sqrt(dist_power / n / n);
    CHECK(std::abs(corr_acc.real() / n) < 3.0 * sigma);
    CHECK(std::abs(corr_acc.imag() / n) < 3.0 * sigma);
}
