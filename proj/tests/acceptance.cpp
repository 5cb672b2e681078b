// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "wbv/analysis.hpp"
#include "wbv/hollow.hpp"
#include "wbv/oracles.hpp"
#include "wbv/solver.hpp"

using namespace wbv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double fit_rate(double e1, double e2) { return std::log2(e1 / e2); }

struct Sweep {
    std::string label;
    CurveRecord rec;
    bool stalled = false;
};

// Sweeps collected for the invariant suite
std::vector<Sweep> sweeps;

const Sweep& run_sweep(const std::string& label, double delta, double lambda, int M, ContinuationSettings st) {
    const WaveParams p{delta, lambda, M};
    ResidualSystem sys(p);
    Sweep s{label, {}, false};
    try {
        s.rec = continue_curve(sys, SolutionPoint::trivial(p), st);
    } catch (const CurveStalledError& e) {
        s.rec = e.partial();
        s.stalled = true;
    }
    sweeps.push_back(std::move(s));
    return sweeps.back();
}

// ---- A1

Outcome a1() {
    double worst = 0.0;
    for (double beta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto r = exact_equilibrium_residuals(ExactZeroGravityWave(beta));
        worst = std::max({worst, r.advection_err, r.bernoulli_err});
    }
    return {worst < 1e-10, "max residual " + fmt("%.2e", worst) + " (tol 1e-10)"};
}

// ---- A2

// Max over surface samples with |x| <= 5 of the distance to the nearest point of the exact profile.
double nearest_point_deviation(const SolutionPoint& s, double beta) {
    const ExactZeroGravityWave ex(beta);
    auto exact = [&](double x, int k = 0) { return ex(Complex(x, 1.0), k); };
    std::vector<double> xs;
    std::vector<Complex> ys;
    for (int i = -4000; i <= 4000; ++i) {
        xs.push_back(8.0 * i / 4000);
        ys.push_back(exact(xs.back()));
    }
    double worst = 0.0;
    for (int j = -2000; j <= 2000; ++j) {
        const Complex P = conformal_map(s.spec, Complex(8.0 * j / 2000, 1.0));
        if (std::abs(P.real()) > 5.0) continue;
        std::size_t ib = 0;
        double bd = 1e300;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (const double d = std::abs(ys[i] - P); d < bd) bd = d, ib = i;
        const double lo = xs[std::max<std::size_t>(ib, 1) - 1], hi = xs[std::min(ib + 1, xs.size() - 1)];
        double x = boost::math::tools::brent_find_minima([&](double t) { return std::norm(exact(t) - P); }, lo, hi, 52).first;
        // brent stalls at sqrt(eps) in x; polish the stationarity condition Re(conj(F) F') = 0
        for (int it = 0; it < 4; ++it) {
            const Complex F = exact(x) - P, F1 = exact(x, 1), F2 = exact(x, 2);
            x -= (std::conj(F) * F1).real() / (std::norm(F1) + (std::conj(F) * F2).real());
        }
        worst = std::max(worst, std::abs(exact(x) - P));
    }
    return worst;
}

Outcome a2() {
    std::vector<double> dev;
    std::string d;
    bool reached = true;
    for (int M : {256, 512, 1024, 2048}) {
        ContinuationSettings st;
        st.beta_target = 0.75;
        st.decay_max = 1.0;
        st.newton.tol = 1e-12;
        const auto& s = run_sweep("A2 M=" + std::to_string(M), 0.0, 20.0, M, st);
        const auto& end = s.rec.points.back();
        reached = reached && s.rec.stop_reason == "beta_target" && std::abs(end.beta - 0.75) < 1e-12;
        dev.push_back(nearest_point_deviation(end, 0.75));
        d += "M=" + std::to_string(M) + " " + fmt("%.2e", dev.back()) + "; ";
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < dev.size(); ++i) decreasing = decreasing && dev[i] < dev[i - 1];
    const bool pass = reached && decreasing && dev.back() < 1e-2;
    return {pass, d + (reached ? "" : "beta=0.75 not reached; ") + (decreasing ? "decreasing" : "not monotone in M") +
                      " (tol 1e-2 at M=2048)"};
}

// ---- A3

Outcome a3() {
    const int M = 512;
    const double lambda = 10.0, F_sq = 4.0;
    const WaveParams p{1.0 / F_sq, lambda, M};
    ResidualSystem sys(p);
    const Eigen::VectorXd x0 = SolutionPoint::trivial(p).pack();
    std::vector<double> ratio;
    double kappa_err = 0.0;
    std::string d;
    for (double beta : {0.025, 0.05, 0.1}) {
        Eigen::VectorXd anchor = x0;
        anchor[M + 3] = beta;
        const auto s = SolutionPoint::unpack(newton_correct(sys, x0, Hyperplane{anchor, unit_vector(M + 4, M + 3)}).theta, lambda);
        const auto pr = small_amplitude_prediction(beta, F_sq);
        double err = 0.0;
        for (int j = 0; j <= M; ++j) {
            const double xi = lambda * j / M;
            err = std::max(err, std::abs(eval_w(s.spec, {xi, 1.0}) - pr.w_surface(xi)));
        }
        ratio.push_back(err / std::pow(beta, 4));
        if (beta == 0.025) kappa_err = std::abs(s.kappa / std::pow(beta, 3) / (-pr.ddotw_eta3 / pi) - 1.0);
        d += "err/beta^4=" + fmt("%.4f", ratio.back()) + " ";
    }
    const double spread = *std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end());
    return {spread < 2.0 && kappa_err < 0.05,
            d + "spread " + fmt("%.3f", spread) + " (tol 2), kappa rel err " + fmt("%.2e", kappa_err) + " (tol 0.05)"};
}

// ---- A4

Outcome a4() {
    const auto& s = run_sweep("A4", 0.25, 5.0, 1024, {});
    const auto n = std::count_if(s.rec.events.begin(), s.rec.events.end(), [](const CurveEvent& e) { return e.kind == "beta_fold"; });
    return {n >= 1, std::to_string(n) + " beta folds in " + std::to_string(s.rec.points.size()) + " points, stop " +
                        s.rec.stop_reason};
}

// ---- A5

std::optional<double> first_overhang_beta(const Sweep& s) {
    for (const auto& pt : s.rec.points)
        if (!pt.is_trivial() && overhang_flag(pt, s.rec.params)) return pt.beta;
    return std::nullopt;
}

Outcome a5() {
    const auto& f8 = run_sweep("A5 F=8", 1.0 / 64.0, 10.0, 2048, {});
    const auto b8 = first_overhang_beta(f8);
    const auto& f5 = run_sweep("A5 F=5", 1.0 / 25.0, 8.0, 2048, {});
    const auto b5 = first_overhang_beta(f5);
    const bool p8 = b8 && *b8 <= 0.9;
    const bool p5 = b5 && std::abs(*b5 - 0.66) <= 0.05;
    return {p8 && p5, "F=8 first overhang beta=" + (b8 ? fmt("%.4f", *b8) : std::string("none")) + " (<= 0.9); F=5 beta=" +
                          (b5 ? fmt("%.4f", *b5) : std::string("none")) + " (0.66 +- 0.05)"};
}

// ---- A6

Outcome a6() {
    const double e = std::abs(exact_overturn_beta_numeric() - std::acos(1.0 - std::sqrt(2.0)) / pi);
    return {e < 1e-8, "root error " + fmt("%.2e", e) + " (tol 1e-8)"};
}

// ---- A7

Outcome a7() {
    const double d8 = circle_limit_distance(0.8), d9 = circle_limit_distance(0.9), d99 = circle_limit_distance(0.99);
    return {d9 < d8 && d99 < d9 && d99 < 0.05,
            "d(0.8)=" + fmt("%.4f", d8) + " d(0.9)=" + fmt("%.4f", d9) + " d(0.99)=" + fmt("%.4f", d99) + " (tol 0.05)"};
}

// ---- A8

Outcome a8() {
    double grid = 0.0;
    for (double F_sq : {1.5, 2.0, 4.0})
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const Complex z(0.5 + 3.5 * i / 4, 0.1 + 0.8 * j / 4);
                grid = std::max(grid, std::abs(ddotw_series(z, F_sq) - ddotw_integral(z, F_sq)));
            }
    // d_eta w - w/F^2 = pi^2 sech^2(pi xi/2) on eta = 1, one-sided fourth-order difference
    double bc = 0.0;
    for (double F_sq : {1.5, 2.0, 4.0})
        for (double xi : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const double h = 1e-3;
            auto f = [&](int k) { return ddotw_integral(Complex(xi, 1.0 - k * h), F_sq); };
            const double d_eta = (25 * f(0) - 48 * f(1) + 36 * f(2) - 16 * f(3) + 3 * f(4)) / (12 * h);
            bc = std::max(bc, std::abs(d_eta - f(0) / F_sq - pi * pi / std::pow(std::cosh(pi * xi / 2), 2)));
        }
    return {grid < 1e-8 && bc < 1e-6, "series vs integral " + fmt("%.2e", grid) + " (tol 1e-8), surface condition " +
                                          fmt("%.2e", bc) + " (tol 1e-6)"};
}

// ---- A9

Outcome a9() {
    const double beta = 0.5;
    const ExactZeroGravityWave w(beta);
    const auto ep = exact_params(w);
    const PointVortexBase base([w](Complex z, int k) { return w(z, k); }, ep.kappa, beta, ep.gamma);
    const double fz = base.fz();
    const double lead = base.gamma0 * base.gamma0 / (4.0 * pi * pi * fz * fz);
    std::vector<double> ec, eq;
    for (double rho : {0.04, 0.02, 0.01}) {
        const Complex brute = boundary_contour_mean(boundary_approx(base, rho, 512), rho);
        ec.push_back(std::abs(centroid(base, rho) - brute));
        eq.push_back(std::abs(rho * rho * leading_params(base, rho).q_rho - lead));
    }
    const double rc = fit_rate(ec[0], ec[2]) / 2.0, rq = fit_rate(eq[0], eq[2]) / 2.0;
    const bool pc = std::abs(rc - 4.0) <= 0.5, pq = std::abs(rq - 2.0) <= 0.5;
    return {pc && pq, "centroid rate " + fmt("%.3f", rc) + " (4 +- 0.5" + (pc ? ")" : ", FAIL)") + ", q rate " +
                          fmt("%.3f", rq) + " (2 +- 0.5" + (pq ? ")" : ", FAIL)")};
}

// ---- A10

// Monotonicity is only meaningful on resolved points: A2 relaxes decay_max so that low-M curves reach
// beta = 0.75, and past the default threshold the w_xi sign is truncation-dominated.
Outcome a10() {
    const double resolved = ContinuationSettings{}.decay_max;
    std::size_t n = 0, unresolved = 0, unresolved_flagged = 0;
    std::string bad;
    for (const auto& s : sweeps) {
        ResidualSystem sys(s.rec.params);
        const double tol = s.rec.settings.newton.tol;
        int n_res = 0, n_sign = 0, n_a = 0, n_mono = 0, n_norm = 0;
        for (const auto& pt : s.rec.points) {
            const auto d = diagnose(sys, pt);
            const double rtol = tol > 0.0 ? tol : default_tolerance(pt.pack());
            n_res += !(d.residual_norm <= rtol);
            n_sign += d.gamma * std::sin(pi * pt.beta) > 0.0;
            n_a += d.a_min < 1.0 - 1e-12;
            n_norm += std::abs(d.normalization) > 1e-12;
            if (d.decay_ratio > resolved) {
                ++unresolved;
                unresolved_flagged += !d.monotone;
            } else {
                n_mono += !d.monotone;
            }
            ++n;
        }
        if (n_res + n_sign + n_a + n_mono + n_norm > 0)
            bad += s.label + ": residual " + std::to_string(n_res) + ", gamma sign " + std::to_string(n_sign) + ", a<1 " +
                   std::to_string(n_a) + ", non-monotone " + std::to_string(n_mono) + ", normalization " +
                   std::to_string(n_norm) + "; ";
    }
    return {bad.empty(), std::to_string(n) + " points; monotonicity waived on " + std::to_string(unresolved) +
                             " points past decay " + fmt("%.0e", resolved) + " (" + std::to_string(unresolved_flagged) +
                             " flagged)" + (bad.empty() ? "" : "; " + bad)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"A1 exact-family equilibrium", a1},       {"A2 zero-gravity solitary profile", a2},
        {"A3 small-amplitude order", a3},          {"A4 fold at F=2", a4},
        {"A5 overturning at F=5 and F=8", a5},     {"A6 zero-gravity overturn threshold", a6},
        {"A7 circle limit", a7},                   {"A8 ddotw cross-oracle", a8},
        {"A9 hollow-vortex orders", a9},           {"A10 invariants over sweeps", a10},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), sec);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
