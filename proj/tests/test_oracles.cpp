#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wbv/oracles.hpp"

using namespace wbv;
using wbv::test::C;

TEST(ExactMap, IdentityAtBetaZero) {
    const ExactZeroGravityWave w(0.0);
    const C z(0.3, 0.8);
    EXPECT_EQ(exact_map(w, z), z);
    EXPECT_EQ(exact_map(w, z, 1), C(1.0));
}

TEST(ExactMap, CrestHeightAtHalf) {
    const ExactZeroGravityWave w(0.5);
    EXPECT_LT(std::abs(exact_map(w, C(0.0, 1.0)) - C(0.0, 1.0 + 8.0 * std::sqrt(2.0) / pi)), 1e-13);
}

TEST(ExactMap, DerivativesMatchFiniteDifferences) {
    for (double beta : {0.25, 0.6, 0.9, -0.4}) {
        const ExactZeroGravityWave w(beta);
        for (C z : {C(0.3, 0.5), C(1.2, 1.0), C(-0.4, 0.2)}) {
            const C h(1e-5, 0.0);
            for (int k = 1; k <= 3; ++k) {
                const C fd = (w(z + h, k - 1) - w(z - h, k - 1)) / (2.0 * h);
                const C an = w(z, k);
                EXPECT_LT(std::abs(fd - an), 1e-8 * std::max(1.0, std::abs(an))) << beta << " " << z << " " << k;
            }
        }
    }
}

TEST(ExactParams, Examples) {
    const auto p0 = exact_params(ExactZeroGravityWave(0.0));
    EXPECT_EQ(p0.kappa, 0.0);
    EXPECT_EQ(p0.gamma, 0.0);
    EXPECT_EQ(p0.b, 0.0);
    const auto p = exact_params(ExactZeroGravityWave(0.5));
    EXPECT_NEAR(p.kappa, -0.25, 1e-15);
    EXPECT_NEAR(p.gamma, -16.0, 1e-13);
    EXPECT_NEAR(p.b, 0.5 + 4.0 / pi, 1e-14);
}

TEST(ExactParams, CirculationMatchesSolitaryRelation) {
    for (int i = 0; i < 20; ++i) {
        const double beta = test::uniform(-0.95, 0.95);
        const auto p = exact_params(ExactZeroGravityWave(beta));
        EXPECT_NEAR(gamma_solitary(p.kappa, beta), p.gamma, 1e-12 * std::max(1.0, std::abs(p.gamma)));
    }
}

TEST(ExactParams, AltitudeIsImageOfVortex) {
    for (double beta : {0.2, 0.5, 0.8}) {
        const ExactZeroGravityWave w(beta);
        EXPECT_NEAR(w(C(0.0, beta)).imag(), exact_params(w).b, 1e-12);
    }
}

TEST(Overturn, ClosedFormValue) {
    EXPECT_NEAR(exact_overturn_beta(), 0.6359, 5e-5);
    EXPECT_NEAR(exact_overturn_beta(), 0.6359433362261233, 1e-15);
}

TEST(Overturn, HorizontalSpeedVanishesAtThreshold) {
    EXPECT_NEAR(exact_min_horizontal_speed(exact_overturn_beta()).first, 0.0, 1e-6);
    EXPECT_GT(exact_min_horizontal_speed(0.5).first, 0.0);
    EXPECT_LT(exact_min_horizontal_speed(0.7).first, 0.0);
}

TEST(Overturn, RootFindingReproducesClosedForm) {
    EXPECT_NEAR(exact_overturn_beta_numeric(), exact_overturn_beta(), 1e-8);
}

TEST(ExactEquilibrium, ResidualsVanishAcrossFamily) {
    for (double beta : {0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9}) {
        const auto r = exact_equilibrium_residuals(ExactZeroGravityWave(beta));
        EXPECT_LT(r.advection_err, 1e-10) << beta;
        EXPECT_LT(r.bernoulli_err, 1e-10) << beta;
    }
    EXPECT_THROW(exact_equilibrium_residuals(ExactZeroGravityWave(0.0)), DomainError);
}

TEST(CircleLimit, BulbHeight) {
    for (double beta : {0.3, 0.8, 0.99}) {
        const ExactZeroGravityWave w(beta);
        const double h = (w(C(0.0, 1.0)).imag() - 1.0) / 2.0;
        EXPECT_NEAR(exact_bulb_height(beta) / h, 1.0, 1e-12);
    }
}

TEST(CircleLimit, DistanceDecreasesTowardOne) {
    const double d8 = circle_limit_distance(0.8), d9 = circle_limit_distance(0.9), d99 = circle_limit_distance(0.99);
    EXPECT_LT(d99, d9);
    EXPECT_LT(d9, d8);
    EXPECT_LT(d99, 0.05);
}

TEST(DdotwIntegral, VanishesOnBed) { EXPECT_EQ(ddotw_integral(C(0.7, 0.0), 2.0), 0.0); }

TEST(DdotwIntegral, OddInEta) {
    EXPECT_NEAR(ddotw_integral(C(0.7, -0.4), 2.0), -ddotw_integral(C(0.7, 0.4), 2.0), 1e-14);
}

TEST(DdotwIntegral, SurfaceCondition) {
    for (double F2 : {2.0, 4.0}) {
        for (double xi : {0.0, 1.0, 2.0}) {
            const double h = 1e-3;
            auto f = [&](int i) { return ddotw_integral(C(xi, 1.0 - i * h), F2); };
            const double d_eta = (25 * f(0) - 48 * f(1) + 36 * f(2) - 16 * f(3) + 3 * f(4)) / (12 * h);
            const double rhs = pi * pi / std::pow(std::cosh(pi * xi / 2), 2);
            EXPECT_NEAR(d_eta - f(0) / F2, rhs, 1e-6) << F2 << " " << xi;
        }
    }
    EXPECT_THROW(ddotw_integral(C(0.0, 0.5), 1.0), DomainError);
}

TEST(Dispersion, InfiniteFroudeLimit) {
    EXPECT_NEAR(dispersion_roots(1e6, 0).t[0], pi / 2, 1e-3);
}

TEST(Dispersion, RootsAndBrackets) {
    for (double F2 : {1.5, 2.0, 4.0}) {
        const auto r = dispersion_roots(F2, 30);
        for (int k = 0; k <= 30; ++k) {
            const double t = r.t[k];
            // residual conditioning grows like F^2 t^2
            EXPECT_LT(std::abs(F2 * t * std::cos(t) / std::sin(t) - 1.0), 1e-13 * F2 * std::max(1.0, t * t)) << k;
            EXPECT_GT(t - k * pi, 0.0);
            EXPECT_LT(t - k * pi, pi / 2);
            // offsets increase toward pi/2
            if (k > 0) EXPECT_GT(t - k * pi, r.t[k - 1] - (k - 1) * pi);
        }
    }
    const auto r = dispersion_roots(2.0, 0);
    EXPECT_LT(std::abs(2.0 * r.t[0] / std::tan(r.t[0]) - 1.0), 1e-12);
}

TEST(DdotwSeries, MatchesIntegral) {
    EXPECT_NEAR(ddotw_series(C(1.0, 0.5), 2.0), ddotw_integral(C(1.0, 0.5), 2.0), 1e-8);
    // independent high-precision evaluation of the integral
    EXPECT_NEAR(ddotw_integral(C(1.0, 0.5), 2.0), 2.678551251175683, 1e-12);
    for (double F2 : {1.5, 2.0, 4.0})
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const C z(0.5 + 3.5 * i / 4, 0.1 + 0.8 * j / 4);
                EXPECT_NEAR(ddotw_series(z, F2), ddotw_integral(z, F2), 1e-8) << F2 << " " << z;
            }
}

TEST(DdotwSeries, OddAndDomain) {
    EXPECT_NEAR(ddotw_series(C(1.3, -0.6), 2.0), -ddotw_series(C(1.3, 0.6), 2.0), 1e-14);
    EXPECT_THROW(ddotw_series(C(0.0, 0.5), 2.0), DomainError);
}

TEST(DdotwSeries, DecayRateIsFirstDispersionRoot) {
    const double F2 = 2.0;
    const double t0 = dispersion_roots(F2, 0).t[0];
    const double slope = (std::log(std::abs(ddotw_series(C(8.0, 1.0), F2))) - std::log(std::abs(ddotw_series(C(5.0, 1.0), F2)))) / 3.0;
    EXPECT_NEAR(-slope / t0, 1.0, 0.01);
}

TEST(SmallAmplitude, TrivialAtZero) {
    const auto p = small_amplitude_prediction(0.0, 4.0);
    EXPECT_EQ(p.kappa, 0.0);
    EXPECT_EQ(p.gamma, 0.0);
    EXPECT_EQ(p.b, 0.0);
    EXPECT_EQ(p.w_surface(0.3), 0.0);
}

TEST(SmallAmplitude, MomentsMatchFiniteDifferences) {
    for (double F2 : {2.0, 4.0}) {
        const double h = 0.02;
        auto f = [&](double eta) { return ddotw_integral(C(0.0, eta), F2); };
        const double d1 = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
        const double d3 = (-f(3 * h) + 8 * f(2 * h) - 13 * f(h) + 13 * f(-h) - 8 * f(-2 * h) + f(-3 * h)) / (8 * h * h * h);
        EXPECT_NEAR(ddotw_eta_moment(0, F2), d1, 1e-5);
        EXPECT_NEAR(ddotw_eta_moment(1, F2), d3, 1e-5 * std::max(1.0, std::abs(d3)) * 10);
    }
}

TEST(SmallAmplitude, LeadingOrders) {
    const auto p = small_amplitude_prediction(0.05, 4.0);
    EXPECT_NEAR(p.gamma, -4.0 * std::tan(pi * 0.05), 1e-15);
    EXPECT_NEAR(p.kappa, -p.ddotw_eta3 / pi * 0.05 * 0.05 * 0.05, 1e-18);
    EXPECT_NEAR(p.w_surface(1.0), 0.0025 * ddotw_integral(C(1.0, 1.0), 4.0), 1e-12);
}

TEST(ProjectExact, InterpolatesAndNormalizes) {
    const ExactZeroGravityWave w(0.25);
    const auto s = project_exact(w, 20.0, 256);
    EXPECT_LT(std::abs(s.normalization_defect()), 1e-10);
    for (double xi : {0.0, 1.3, 7.7}) EXPECT_NEAR(eval_w(s, {xi, 1.0}), w(C(xi, 1.0)).imag() - 1.0, 1e-8);
    // mean mode carries the horizontal stretch: (1 + w0) lambda ~ lambda + amplitude
    EXPECT_NEAR(s.coeffs[0] * 20.0, w.amplitude(), 1e-8);
}
