#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wbv/oracles.hpp"
#include "wbv/solver.hpp"

using namespace wbv;

namespace {

SolutionPoint exact_projection(double beta, double lambda, int M) {
    const ExactZeroGravityWave w(beta);
    return SolutionPoint{project_exact(w, lambda, M), 0.0, exact_params(w).kappa, beta};
}

double bernoulli_norm(const Eigen::VectorXd& R, int M) { return R.head(M + 1).lpNorm<Eigen::Infinity>(); }

// solve with beta pinned, starting from the trivial point
SolutionPoint solve_at_beta(ResidualSystem& sys, double beta) {
    const int n = sys.size();
    Eigen::VectorXd x0 = SolutionPoint::trivial(sys.params()).pack();
    Eigen::VectorXd anchor = x0;
    anchor[n - 1] = beta;
    return SolutionPoint::unpack(newton_correct(sys, x0, Hyperplane{anchor, unit_vector(n, n - 1)}).theta,
                                 sys.params().lambda);
}

}  // namespace

TEST(Residual, TrivialPointIsExactSolution) {
    for (double delta : {0.0, 0.25, 0.9}) {
        const WaveParams p{delta, 3.0, 32};
        const auto R = residual(SolutionPoint::trivial(p), p);
        EXPECT_EQ(R.size(), 35);
        EXPECT_EQ(R.lpNorm<Eigen::Infinity>(), 0.0);
    }
}

TEST(Residual, KappaPerturbationOnlyMovesAdvectionRow) {
    const WaveParams p{0.25, 5.0, 16};
    SolutionPoint s = SolutionPoint::trivial(p);
    s.kappa = 1e-3;
    const auto R = residual(s, p);
    for (int i = 0; i < R.size(); ++i) {
        if (i == p.M + 1)
            EXPECT_NEAR(R[i], -pi * 1e-3, 1e-18);
        else
            EXPECT_EQ(R[i], 0.0) << i;
    }
}

TEST(Residual, ExactProjectionAtLargeHalfPeriod) {
    const auto s = exact_projection(0.25, 20.0, 1024);
    EXPECT_LT(residual(s, {0.0, 20.0, 1024}).lpNorm<Eigen::Infinity>(), 1e-4);
}

TEST(Residual, ExactProjectionConvergesInModes) {
    // below the roundoff floor reached near M = 256
    double prev = INFINITY;
    for (int M : {32, 64, 128, 256}) {
        const double r = bernoulli_norm(residual(exact_projection(0.25, 20.0, M), {0.0, 20.0, M}), M);
        EXPECT_LT(r, prev) << M;
        prev = r;
    }
}

TEST(Residual, ExactProjectionConvergesInHalfPeriod) {
    double prev = INFINITY;
    for (double lam : {4.0, 8.0, 12.0, 20.0}) {
        const double r = residual(exact_projection(0.25, lam, 1024), {0.0, lam, 1024}).lpNorm<Eigen::Infinity>();
        EXPECT_LT(r, prev) << lam;
        prev = r;
    }
}

TEST(Residual, Errors) {
    const WaveParams p{0.0, 2.0, 8};
    SolutionPoint s = SolutionPoint::trivial(p);
    s.beta = 0.4;
    s.kappa = 5.0;  // kappa - 4 S > 0
    EXPECT_THROW(residual(s, p), AdmissibilityError);
    s.kappa = 0.0;
    s.Q = NAN;
    EXPECT_THROW(residual(s, p), NumericalError);
    s.Q = 0.0;
    s.beta = 1.0;
    EXPECT_THROW(residual(s, p), DomainError);
    EXPECT_THROW(residual(SolutionPoint::trivial({0.0, 2.0, 16}), p), DomainError);
    EXPECT_THROW((WaveParams{-0.1, 2.0, 8}.validate()), DomainError);
}

TEST(Jacobian, LinearColumnsAndRows) {
    const WaveParams p{0.25, 4.0, 24};
    const auto s = exact_projection(0.3, 4.0, 24);
    const auto J = jacobian(s, p);
    ASSERT_EQ(J.rows(), 27);
    ASSERT_EQ(J.cols(), 28);
    for (int i = 0; i < J.rows(); ++i) EXPECT_EQ(J(i, p.M + 1), i <= p.M ? -1.0 : 0.0);
    for (int m = 0; m < J.cols(); ++m) EXPECT_EQ(J(p.M + 2, m), m <= p.M ? (m % 2 == 0 ? 1.0 : -1.0) : 0.0);
}

TEST(Jacobian, MatchesRichardsonDifferences) {
    const WaveParams p{0.25, 4.0, 24};
    const auto s = exact_projection(0.3, 4.0, 24);
    const Eigen::VectorXd x = s.pack();
    const auto J = jacobian(s, p);
    ResidualSystem sys(p);
    for (int col : {0, 1, 5, 24, p.M + 2, p.M + 3}) {
        auto central = [&](double h) {
            Eigen::VectorXd a = x, b = x;
            a[col] += h;
            b[col] -= h;
            return Eigen::VectorXd((sys.residual(a) - sys.residual(b)) / (2 * h));
        };
        const double h = 1e-3;
        const Eigen::VectorXd ref = (4.0 * central(h / 2) - central(h)) / 3.0;
        const double err = (J.col(col) - ref).lpNorm<Eigen::Infinity>();
        EXPECT_LT(err, 1e-5 * std::max(1.0, ref.lpNorm<Eigen::Infinity>())) << col;
    }
}

TEST(Jacobian, AdvectionRowAtTrivialPoint) {
    const WaveParams p{0.25, 5.0, 16};
    const auto J = jacobian(SolutionPoint::trivial(p), p);
    // w_xixi and w_eta vanish at eta = 0 for every mode but the mean
    for (int m = 1; m <= p.M; ++m) EXPECT_NEAR(J(p.M + 1, m), 0.0, 1e-7) << m;
    EXPECT_NEAR(J(p.M + 1, p.M + 2), -pi, 1e-8);
}

TEST(Newton, FromExactProjectionIsImmediate) {
    const WaveParams p{0.0, 20.0, 1024};
    ResidualSystem sys(p);
    const Eigen::VectorXd x = exact_projection(0.25, 20.0, 1024).pack();
    const auto r = newton_correct(sys, x, Hyperplane{x, unit_vector(sys.size(), sys.size() - 1)});
    EXPECT_LE(r.iterations, 2);
    EXPECT_LT(r.residual_norm, default_tolerance(r.theta));
}

TEST(Newton, OffTrivialMatchesSmallAmplitude) {
    const WaveParams p{0.25, 5.0, 128};
    ResidualSystem sys(p);
    const auto s = solve_at_beta(sys, 0.05);
    EXPECT_DOUBLE_EQ(s.beta, 0.05);
    EXPECT_LT(s.gamma(), 0.0);
    const auto pr = small_amplitude_prediction(0.05, 4.0);
    EXPECT_NEAR(s.gamma() / pr.gamma, 1.0, 1e-3);
    EXPECT_NEAR(s.kappa / pr.kappa, 1.0, 0.01);
    double err = 0.0, size = 0.0;
    for (int j = 0; j <= 50; ++j) {
        const double xi = 5.0 * j / 50;
        err = std::max(err, std::abs(eval_w(s.spec, {xi, 1.0}) - pr.w_surface(xi)));
        size = std::max(size, std::abs(pr.w_surface(xi)));
    }
    // O(beta^4) remainder plus the finite-period correction
    EXPECT_LT(err, 0.02 * size);
}

TEST(Newton, UnreachableToleranceThrows) {
    const WaveParams p{0.0, 20.0, 4};
    ResidualSystem sys(p);
    const Eigen::VectorXd x = exact_projection(0.6, 20.0, 4).pack();
    NewtonSettings ns;
    ns.max_iter = 8;
    EXPECT_THROW(newton_correct(sys, x, Hyperplane{x, unit_vector(8, 7)}, ns), NonconvergenceError);
}

TEST(Newton, RejectsNonUnitNormal) {
    const WaveParams p{0.0, 2.0, 8};
    ResidualSystem sys(p);
    const Eigen::VectorXd x = SolutionPoint::trivial(p).pack();
    EXPECT_THROW(newton_correct(sys, x, Hyperplane{x, 2.0 * unit_vector(12, 11)}), DomainError);
}

TEST(Tangent, TrivialPointIsPureBeta) {
    for (double delta : {0.0, 0.25}) {
        const WaveParams p{delta, 5.0, 64};
        const auto t = tangent(SolutionPoint::trivial(p), p);
        EXPECT_GT(t[p.M + 3], 0.0);
        for (int i = 0; i < p.M + 3; ++i) EXPECT_LT(std::abs(t[i]), 1e-8) << i;
    }
}

TEST(Tangent, OrientationFollowsPrevious) {
    const WaveParams p{0.25, 5.0, 64};
    ResidualSystem sys(p);
    const auto s = solve_at_beta(sys, 0.2);
    const auto t = tangent(s, p);
    EXPECT_NEAR(t.norm(), 1.0, 1e-14);
    EXPECT_LT((sys.jacobian(s.pack()) * t).lpNorm<Eigen::Infinity>(), 1e-6);
    const auto tp = tangent(s, p, t);
    const auto tm = tangent(s, p, Eigen::VectorXd(-t));
    EXPECT_GT(tp.dot(t), 0.0);
    EXPECT_GT(tm.dot(-t), 0.0);
    EXPECT_NEAR(tp.dot(t), 1.0, 1e-8);
}

TEST(Continuation, SmallCurveInvariants) {
    const WaveParams p{0.25, 5.0, 128};
    ContinuationSettings st;
    st.beta_target = 0.2;
    const auto rec = continue_curve(SolutionPoint::trivial(p), p, st);
    EXPECT_EQ(rec.stop_reason, "beta_target");
    EXPECT_DOUBLE_EQ(rec.points.back().beta, 0.2);
    ASSERT_GE(rec.points.size(), 3u);
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        const auto& d = rec.diagnostics[i];
        EXPECT_LT(d.residual_norm, default_tolerance(rec.points[i].pack()));
        EXPECT_LE(d.gamma * std::sin(pi * rec.points[i].beta), 0.0);
        EXPECT_GE(d.a_min, 1.0 - 1e-12);
        EXPECT_TRUE(d.monotone) << i;
        EXPECT_LT(std::abs(d.normalization), 1e-12);
        if (i > 0) {
            EXPECT_GT(rec.tangents[i].dot(rec.tangents[i - 1]), 0.0);
            EXPECT_GT(rec.arclength[i], rec.arclength[i - 1]);
        }
    }
}

TEST(Continuation, UnderResolutionStop) {
    // M = 8 cannot represent the wave for long
    const WaveParams p{0.0, 5.0, 8};
    ContinuationSettings st;
    st.max_steps = 50;
    const auto rec = continue_curve(SolutionPoint::trivial(p), p, st);
    EXPECT_EQ(rec.stop_reason, "under_resolved");
    EXPECT_GT(rec.points.back().spec.decay_ratio(), st.decay_max);
}

TEST(Continuation, InjectedSpectrumTriggersUnderResolution) {
    const WaveParams p{0.0, 5.0, 16};
    ResidualSystem sys(p);
    SolutionPoint s = SolutionPoint::trivial(p);
    s.spec.coeffs[1] = 1e-3;
    s.spec.coeffs[16] = 1e-6;
    ContinuationSettings st;
    EXPECT_GT(diagnose(sys, s).decay_ratio, st.decay_max);
}

TEST(Continuation, RejectsNonSolutionStart) {
    const WaveParams p{0.0, 5.0, 16};
    SolutionPoint s = SolutionPoint::trivial(p);
    s.Q = 1e-3;
    EXPECT_THROW(continue_curve(s, p, ContinuationSettings{}), DomainError);
}

TEST(Continuation, StallCarriesPartialRecord) {
    const WaveParams p{0.0, 5.0, 16};
    ContinuationSettings st;
    st.ds_min = 1e-3;
    st.newton.max_iter = 0;  // every corrector fails unless the predictor is exact
    try {
        continue_curve(SolutionPoint::trivial(p), p, st);
        FAIL() << "expected a stall";
    } catch (const CurveStalledError& e) {
        EXPECT_EQ(e.partial().points.size(), 1u);
        EXPECT_EQ(e.partial().stop_reason, "stalled");
    }
}

TEST(MeshRefinement, PaddedResolveChangesLittle) {
    const WaveParams p{0.25, 5.0, 64};
    ResidualSystem sys(p);
    const auto s = solve_at_beta(sys, 0.25);
    const WaveParams p2{0.25, 5.0, 128};
    ResidualSystem sys2(p2);
    const Eigen::VectorXd x = s.resized(128).pack();
    const auto r = SolutionPoint::unpack(
        newton_correct(sys2, x, Hyperplane{x, unit_vector(sys2.size(), sys2.size() - 1)}).theta, 5.0);
    double diff = 0.0;
    for (int j = 0; j <= 200; ++j) {
        const double xi = 5.0 * j / 200;
        diff = std::max(diff, std::abs(eval_w(r.spec, {xi, 1.0}) - eval_w(s.spec, {xi, 1.0})));
    }
    EXPECT_LT(diff, 10.0 * std::abs(s.spec.coeffs.back()) + 1e-12);
}

TEST(LargePeriod, BernoulliConstantShrinks) {
    double prev = INFINITY;
    for (double lam : {5.0, 10.0, 20.0}) {
        const WaveParams p{0.0, lam, static_cast<int>(32 * lam)};
        ResidualSystem sys(p);
        const double q = std::abs(solve_at_beta(sys, 0.4).Q);
        EXPECT_LT(q, prev) << lam;
        prev = q;
    }
}

TEST(SolutionPoint, PackRoundTrip) {
    SolutionPoint s = exact_projection(0.3, 3.0, 8);
    s.Q = 0.125;
    const auto t = SolutionPoint::unpack(s.pack(), 3.0);
    EXPECT_EQ(t.spec.coeffs, s.spec.coeffs);
    EXPECT_EQ(t.Q, s.Q);
    EXPECT_EQ(t.kappa, s.kappa);
    EXPECT_EQ(t.beta, s.beta);
    EXPECT_EQ(s.resized(16).spec.coeffs.size(), 17u);
}
