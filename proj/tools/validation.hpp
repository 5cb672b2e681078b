#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <string>
#include <vector>

#include "wbv/analysis.hpp"
#include "wbv/hollow.hpp"
#include "wbv/oracles.hpp"
#include "wbv/potentials.hpp"
#include "wbv/solver.hpp"

namespace wbv::validation {

struct CheckResult {
    std::string group;
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string error;  // set when the check threw
};

struct Check {
    std::string group;
    std::string name;
    double tolerance;
    std::function<double()> measure;  // passes iff measure() <= tolerance
};

namespace detail {

inline double exact_projection_residual(double beta, double lambda, int M) {
    const ExactZeroGravityWave w(beta);
    const WaveParams p{0.0, lambda, M};
    const SolutionPoint s{project_exact(w, lambda, M), 0.0, exact_params(w).kappa, beta};
    return residual(s, p).head(M + 1).lpNorm<Eigen::Infinity>();
}

inline PointVortexBase exact_base(double beta) {
    const ExactZeroGravityWave w(beta);
    const auto p = exact_params(w);
    return PointVortexBase([w](Complex z, int k) { return w(z, k); }, p.kappa, beta, p.gamma);
}

inline SolutionPoint solve_small(double delta, double lambda, int M, double beta) {
    const WaveParams p{delta, lambda, M};
    ResidualSystem sys(p);
    const int n = sys.size();
    Eigen::VectorXd x0 = SolutionPoint::trivial(p).pack(), anchor = x0;
    anchor[n - 1] = beta;
    return SolutionPoint::unpack(newton_correct(sys, x0, Hyperplane{anchor, unit_vector(n, n - 1)}).theta, lambda);
}

}  // namespace detail

inline std::vector<Check> all_checks() {
    std::vector<Check> c;

    // closed-form zero-gravity family
    for (double beta : {0.1, 0.25, 0.5, 0.75, 0.9})
        c.push_back({"exact-family", "equilibrium residual beta=" + std::to_string(beta).substr(0, 4), 1e-10, [beta] {
                         const auto r = exact_equilibrium_residuals(ExactZeroGravityWave(beta));
                         return std::max(r.advection_err, r.bernoulli_err);
                     }});
    c.push_back({"exact-family", "overturn threshold root vs closed form", 1e-8,
                 [] { return std::abs(exact_overturn_beta_numeric() - exact_overturn_beta()); }});
    c.push_back({"exact-family", "circle limit distance at beta=0.99", 0.05, [] { return circle_limit_distance(0.99); }});
    c.push_back({"exact-family", "circle limit distance decreasing (max increment)", 0.0, [] {
                     const double d8 = circle_limit_distance(0.8), d9 = circle_limit_distance(0.9), d99 = circle_limit_distance(0.99);
                     return std::max(d9 - d8, d99 - d9);
                 }});
    c.push_back({"exact-family", "altitude is image of vortex", 1e-12, [] {
                     const ExactZeroGravityWave w(0.5);
                     return std::abs(w(Complex(0.0, 0.5)).imag() - exact_params(w).b);
                 }});

    // small-amplitude kernel
    c.push_back({"ddotw", "integral vs series on grid", 1e-8, [] {
                     double e = 0.0;
                     for (double F2 : {1.5, 2.0, 4.0})
                         for (int i = 0; i < 5; ++i)
                             for (int j = 0; j < 5; ++j) {
                                 const Complex z(0.5 + 3.5 * i / 4, 0.1 + 0.8 * j / 4);
                                 e = std::max(e, std::abs(ddotw_series(z, F2) - ddotw_integral(z, F2)));
                             }
                     return e;
                 }});
    c.push_back({"ddotw", "surface condition residual", 1e-6, [] {
                     double e = 0.0;
                     for (double F2 : {2.0, 4.0})
                         for (double xi : {0.0, 1.0, 2.0}) {
                             const double h = 1e-3;
                             auto f = [&](int i) { return ddotw_integral(Complex(xi, 1.0 - i * h), F2); };
                             const double d_eta = (25 * f(0) - 48 * f(1) + 36 * f(2) - 16 * f(3) + 3 * f(4)) / (12 * h);
                             const double rhs = pi * pi / std::pow(std::cosh(pi * xi / 2), 2);
                             e = std::max(e, std::abs(d_eta - f(0) / F2 - rhs));
                         }
                     return e;
                 }});
    c.push_back({"ddotw", "far-field decay rate vs first dispersion root", 0.01, [] {
                     const double t0 = dispersion_roots(2.0, 0).t[0];
                     const double slope = (std::log(std::abs(ddotw_series(Complex(8.0, 1.0), 2.0))) -
                                           std::log(std::abs(ddotw_series(Complex(5.0, 1.0), 2.0)))) / 3.0;
                     return std::abs(-slope / t0 - 1.0);
                 }});

    // complex potential and the surface speed a
    c.push_back({"potentials", "periodic a equals |W_z| on the surface", 1e-10, [] {
                     const double beta = 0.4, lambda = 3.0, kappa = 0.0;
                     const ComplexPotential W(periodic_config(kappa, beta, lambda));
                     double e = 0.0;
                     for (int i = 0; i <= 20; ++i) {
                         const double xi = lambda * i / 20.0;
                         e = std::max(e, std::abs(std::abs(W(Complex(xi, 1.0)).W_z) - a_periodic(xi, kappa, beta, lambda)));
                     }
                     return e;
                 }});
    c.push_back({"potentials", "periodic a tends to solitary a at large period", 1e-10, [] {
                     double e = 0.0;
                     for (double xi : {0.0, 0.5, 2.0})
                         e = std::max(e, std::abs(a_periodic(xi, -0.2, 0.3, 30.0) - a_solitary(xi, -0.2, 0.3)));
                     return e;
                 }});
    c.push_back({"potentials", "vortex residue carries the circulation", 1e-10, [] {
                     const ComplexPotential W(solitary_config(-0.2, 0.3));
                     Complex s = 0.0;
                     const int n = 256;
                     for (int j = 0; j < n; ++j) {
                         const Complex e = std::polar(1.0, 2.0 * pi * j / n);
                         s += W(Complex(0.0, 0.3) + 0.1 * e).W_z * Complex(0.0, 0.1) * e;
                     }
                     s *= 2.0 * pi / n;
                     return std::abs(s - W.config().gamma);
                 }});

    // collocation system
    c.push_back({"solver", "exact projection satisfies the Bernoulli rows", 1e-6,
                 [] { return detail::exact_projection_residual(0.25, 20.0, 256); }});
    c.push_back({"solver", "small-amplitude kappa (relative)", 0.01, [] {
                     const double beta = 0.05;
                     const auto s = detail::solve_small(0.25, 5.0, 64, beta);
                     const double pred = small_amplitude_prediction(beta, 4.0).kappa;
                     return std::abs(s.kappa / pred - 1.0);
                 }});

    // physical-domain diagnostics
    c.push_back({"analysis", "overhang flag brackets the threshold", 0.0, [] {
                     auto flag = [](double beta) {
                         const ExactZeroGravityWave w(beta);
                         return overhang(project_exact(w, 20.0, 1024)).overhanging;
                     };
                     return (!flag(0.6) && flag(0.7)) ? 0.0 : 1.0;
                 }});
    c.push_back({"analysis", "vortex altitude from spectral map", 1e-10, [] {
                     const ExactZeroGravityWave w(0.5);
                     return std::abs(conformal_map(project_exact(w, 20.0, 1024), Complex(0.0, 0.5)).imag() - exact_params(w).b);
                 }});

    // hollow-vortex leading order
    c.push_back({"hollow", "Cauchy operator vs quadrature", 1e-12, [] {
                     const auto mu = FourierDensity::cos1(1.0);
                     const Complex tau = std::polar(1.0, 0.377);
                     Complex s = 0.0;
                     const int n = 4096;
                     for (int j = 0; j < n; ++j) {
                         const Complex sg = std::polar(1.0, 2.0 * pi * j / n);
                         s += (mu(sg) - mu(tau)) / (sg - tau) * sg;
                     }
                     return std::abs(cauchy_op(mu, tau) - s / double(n));
                 }});
    c.push_back({"hollow", "boundary contour quadrature vs rho * centroid (relative)", 1e-9, [] {
                     const auto base = detail::exact_base(0.25);
                     const double rho = 0.02;
                     const Complex brute = boundary_contour_mean(boundary_approx(base, rho, 512), rho);
                     return std::abs(brute - rho * centroid(base, rho)) / std::abs(rho * centroid(base, rho));
                 }});
    c.push_back({"hollow", "q^rho vs core speed of the point-vortex flow (relative)", 1e-5, [] {
                     const double beta = 0.25, rho = 0.01;
                     const auto base = detail::exact_base(beta);
                     const ExactZeroGravityWave w(beta);
                     const ComplexPotential W(solitary_config(base.kappa0, beta));
                     double mean = 0.0;
                     const int n = 512;
                     for (int j = 0; j < n; ++j) {
                         const Complex z = Complex(0.0, beta) + rho * std::polar(1.0, 2.0 * pi * j / n);
                         mean += std::norm(W(z).W_z / w(z, 1)) / n;
                     }
                     const double q = leading_params(base, rho).q_rho;
                     return std::abs(mean - q) / q;
                 }});
    return c;
}

inline std::vector<std::string> groups() {
    std::vector<std::string> g;
    for (const auto& c : all_checks())
        if (g.empty() || g.back() != c.group) g.push_back(c.group);
    return g;
}

inline std::vector<CheckResult> run(const std::vector<std::string>& only) {
    std::vector<CheckResult> out;
    for (const auto& c : all_checks()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.group) == only.end()) continue;
        CheckResult r{c.group, c.name, 0.0, c.tolerance, false, {}};
        try {
            r.measured = c.measure();
            r.pass = std::isfinite(r.measured) && r.measured <= c.tolerance;
        } catch (const std::exception& e) {
            r.measured = std::numeric_limits<double>::quiet_NaN();
            r.error = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace wbv::validation
