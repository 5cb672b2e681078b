#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "wbv/errors.hpp"
#include "wbv/geometry.hpp"
#include "wbv/potentials.hpp"
#include "wbv/spectral.hpp"

namespace wbv {

// Closed-form zero-gravity solitary family
//   f(zeta) = zeta + (8/pi) tan^2(pi beta/2) sinh(pi zeta/2) / (cos(pi beta/2) + cosh(pi zeta/2)).
class ExactZeroGravityWave {
public:
    explicit ExactZeroGravityWave(double beta) : beta_(beta) {
        detail::require_beta(beta);
        c_ = detail::cospi(0.5 * beta);
        s_ = detail::sinpi(0.5 * beta);
        A_ = 8.0 / pi * (s_ / c_) * (s_ / c_);
    }

    double beta() const { return beta_; }
    double amplitude() const { return A_; }

    Complex operator()(Complex zeta, int order = 0) const {
        if (order < 0 || order > 3) throw DomainError("map derivative order must be 0..3");
        const Complex u = 0.5 * pi * zeta;
        const double hp = 0.5 * pi;
        if (A_ == 0.0) return order == 0 ? zeta : (order == 1 ? Complex(1.0) : Complex(0.0));
        if (std::abs(u.real()) > 300.0) {
            // g -> +-1 with exponentially small corrections
            const double sg = u.real() > 0 ? 1.0 : -1.0;
            if (order == 0) return zeta + A_ * sg;
            return order == 1 ? Complex(1.0) : Complex(0.0);
        }
        const Complex sh = std::sinh(u), ch = std::cosh(u);
        const Complex D = c_ + ch;
        switch (order) {
            case 0: return zeta + A_ * sh / D;
            case 1: return 1.0 + A_ * hp * (1.0 + c_ * ch) / (D * D);
            case 2: return A_ * hp * hp * sh * (c_ * c_ - 2.0 - c_ * ch) / (D * D * D);
            default: {
                const Complex N = (c_ * c_ - 2.0) * sh - 0.5 * c_ * std::sinh(2.0 * u);
                const Complex Np = (c_ * c_ - 2.0) * ch - c_ * std::cosh(2.0 * u);
                return A_ * hp * hp * hp * (Np * D - 3.0 * N * sh) / (D * D * D * D);
            }
        }
    }

private:
    double beta_, c_, s_, A_;
};

inline Complex exact_map(const ExactZeroGravityWave& wave, Complex zeta, int order = 0) { return wave(zeta, order); }

struct ExactParams {
    double kappa, gamma, b;
};

inline ExactParams exact_params(const ExactZeroGravityWave& wave) {
    const double s = detail::sinpi(0.5 * wave.beta()), c = detail::cospi(0.5 * wave.beta());
    return {-0.5 * s * s * s / c, -8.0 * s / (c * c * c), wave.beta() + 4.0 / pi * std::pow(s / c, 3)};
}

inline double exact_overturn_beta() { return std::acos(1.0 - std::sqrt(2.0)) / pi; }

// Height scale h(beta) with f(i)/i = 1 + 2h.
inline double exact_bulb_height(double beta) {
    const double s = detail::sinpi(0.5 * beta), c = detail::cospi(0.5 * beta);
    return 4.0 / pi * (s / c) * (s / c) / c;
}

// min over xi >= 0 of Re f_z(xi + i); returns (value, argmin).
inline std::pair<double, double> exact_min_horizontal_speed(double beta) {
    const ExactZeroGravityWave wave(beta);
    auto g = [&](double xi) { return wave(Complex(xi, 1.0), 1).real(); };
    // The surface feature sits at xi ~ cos(pi beta/2); scan then polish.
    const double scale = std::max(detail::cospi(0.5 * beta), 1e-6);
    double best = g(0.0), arg = 0.0;
    const int n = 400;
    std::vector<double> xs;
    for (int i = 0; i <= n; ++i) xs.push_back(scale * 20.0 * i / n);
    for (int i = 1; i <= 40; ++i) xs.push_back(scale * 20.0 + 0.5 * i);
    std::size_t ib = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = g(xs[i]);
        if (v < best) best = v, arg = xs[i], ib = i;
    }
    const double lo = ib == 0 ? 0.0 : xs[ib - 1];
    const double hi = ib + 1 < xs.size() ? xs[ib + 1] : xs[ib];
    if (hi > lo) {
        std::uintmax_t it = 200;
        auto r = boost::math::tools::brent_find_minima(g, lo, hi, std::numeric_limits<double>::digits / 2, it);
        if (r.second < best) best = r.second, arg = r.first;
    }
    return {best, arg};
}

// Overturn threshold found by root-finding on the minimal horizontal surface speed.
inline double exact_overturn_beta_numeric(double tol = 1e-13) {
    auto phi = [](double b) { return exact_min_horizontal_speed(b).first; };
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(
        phi, 0.5, 0.7, [tol](double a, double b) { return std::abs(b - a) < tol; }, it);
    return 0.5 * (r.first + r.second);
}

struct EquilibriumResiduals {
    double advection_err;
    double bernoulli_err;
};

inline EquilibriumResiduals exact_equilibrium_residuals(const ExactZeroGravityWave& wave, int n_nodes = 512,
                                                       double xi_max = 12.0) {
    if (wave.beta() == 0.0) throw DomainError("equilibrium residuals need beta != 0");
    const ExactParams p = exact_params(wave);
    const Complex ib(0.0, wave.beta());
    const double adv = std::abs(wave(ib, 2) / wave(ib, 1) - Complex(0.0, pi * p.kappa));
    const ComplexPotential W(VortexConfig{p.gamma, wave.beta(), std::nullopt});
    double bern = 0.0;
    for (int j = 0; j < n_nodes; ++j) {
        const Complex z(xi_max * j / (n_nodes - 1), 1.0);
        bern = std::max(bern, std::abs(std::abs(W.velocity(z)) / std::abs(wave(z, 1)) - 1.0));
    }
    return {adv, bern};
}

// Sample points (f(xi+i) - i)/h(beta), clustered where the bulb is traced.
inline std::vector<Complex> exact_normalized_surface(double beta, int n_samples, double xi_max = 60.0) {
    const ExactZeroGravityWave wave(beta);
    const double h = exact_bulb_height(beta);
    const double c = std::max(detail::cospi(0.5 * beta), 1e-12);
    const double S = std::asinh(0.5 * pi * xi_max / c);
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
        const double s = -S + 2.0 * S * j / (n_samples - 1);
        const double xi = 2.0 / pi * c * std::sinh(s);
        pts.push_back((wave(Complex(xi, 1.0)) - Complex(0.0, 1.0)) / h);
    }
    return pts;
}

// Hausdorff-type distance between the normalized surface and (unit circle about i) u (real axis).
inline double circle_limit_distance(double beta, int n_samples = 20000) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("circle limit needs beta in (0, 1)");
    // reach |x| >= 3 after normalization so the flat part covers the sampled stretch of the line
    const auto pts = exact_normalized_surface(beta, n_samples, 60.0 + 3.0 * exact_bulb_height(beta));
    const Complex I(0.0, 1.0);
    double d = 0.0;
    for (const Complex& p : pts) d = std::max(d, std::min(std::abs(std::abs(p - I) - 1.0), std::abs(p.imag())));
    // reverse direction on the circle and the visible part of the line
    for (int k = 0; k < 256; ++k) {
        const double th = 2.0 * pi * k / 256;
        d = std::max(d, geometry::point_polyline_distance(I + std::polar(1.0, th), pts));
    }
    for (int k = -40; k <= 40; ++k) d = std::max(d, geometry::point_polyline_distance(Complex(0.05 * k, 0.0), pts));
    return d;
}

namespace detail {

inline void require_froude(double F_sq) {
    if (!(F_sq > 1.0)) throw DomainError("supercritical flow needs F^2 > 1");
}

// F^2 t/(F^2 t - tanh t), finite at t = 0 and for F^2 = inf
inline double dispersion_factor(double t, double F_sq) {
    if (t < 1e-8) return 1.0 / (1.0 - 1.0 / F_sq);
    return 1.0 / (1.0 - std::tanh(t) / (F_sq * t));
}

// sinh(a t)/sinh(2 t) for |a| <= 2, t > 0
inline double sinh_over_sinh2(double a, double t) {
    if (t < 1e-8) return 0.5 * a;
    const double aa = std::abs(a);
    const double r = std::exp(t * (aa - 2.0)) * (-std::expm1(-2.0 * aa * t)) / (-std::expm1(-4.0 * t));
    return a < 0 ? -r : r;
}

template <class F>
double integrate_half_line(F f, double decay, double oscillation, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    const double T = 40.0 / decay;
    const double piece = std::max(0.5, std::min(4.0, 2.0 * pi / std::max(oscillation, 1e-3)));
    double sum = 0.0;
    for (double a = 0.0; a < T; a += piece) sum += gauss_kronrod<double, 31>::integrate(f, a, std::min(T, a + piece), 8, tol);
    return sum;
}

}  // namespace detail

// 8 int_0^inf F^2 t/(F^2 t - tanh t) sinh(eta t)/sinh(2t) cos(xi t) dt
inline double ddotw_integral(Complex zeta, double F_sq, double tol = 1e-14) {
    detail::require_froude(F_sq);
    const double xi = zeta.real(), eta = zeta.imag();
    detail::require_strip(eta);
    if (eta == 0.0) return 0.0;
    auto f = [&](double t) { return detail::dispersion_factor(t, F_sq) * detail::sinh_over_sinh2(eta, t) * std::cos(xi * t); };
    return 8.0 * detail::integrate_half_line(f, 2.0 - std::abs(eta), std::abs(xi), tol);
}

// d^(2m+1)/deta^(2m+1) of ddotw at zeta = 0
inline double ddotw_eta_moment(int m, double F_sq, double tol = 1e-14) {
    detail::require_froude(F_sq);
    if (m < 0) throw DomainError("moment index must be non-negative");
    auto f = [&](double t) {
        if (t < 1e-8) return m == 0 ? 0.5 * detail::dispersion_factor(t, F_sq) : 0.0;
        return detail::dispersion_factor(t, F_sq) * std::pow(t, 2 * m + 1) * (2.0 * std::exp(-2.0 * t) / (-std::expm1(-4.0 * t)));
    };
    return 8.0 * detail::integrate_half_line(f, 2.0, 0.0, tol);
}

struct DispersionRoots {
    std::vector<double> t;
    std::vector<double> T;
};

// Roots of F^2 t cot t = 1 with t_k - k pi in (0, pi/2), k = 0..k_max.
inline DispersionRoots dispersion_roots(double F_sq, int k_max) {
    detail::require_froude(F_sq);
    if (k_max < 0) throw DomainError("k_max must be non-negative");
    DispersionRoots r;
    for (int k = 0; k <= k_max; ++k) {
        const double a = k * pi;
        // (-1)^k (F^2 t cos t - sin t): positive at k pi (k >= 1), -1 at k pi + pi/2
        auto g = [&](double t) {
            if (k == 0) return t < 1e-300 ? F_sq - 1.0 : F_sq * t * std::cos(t) / std::sin(t) - 1.0;
            const double v = F_sq * t * std::cos(t) - std::sin(t);
            return (k % 2 == 0) ? v : -v;
        };
        double lo = k == 0 ? 1e-8 : a, hi = a + 0.5 * pi;
        while (hi - lo > 1e-14 * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        const double tk = 0.5 * (lo + hi);
        r.t.push_back(tk);
        r.T.push_back(1.0 / (1.0 - (1.0 / (tk * tk)) * (1.0 / F_sq) * (1.0 - 1.0 / F_sq)));
    }
    return r;
}

// Partial-fraction series for ddotw, valid off xi = 0. k_max <= 0 picks the truncation from xi.
inline double ddotw_series(Complex zeta, double F_sq, int k_max = 0) {
    detail::require_froude(F_sq);
    const double xi = std::abs(zeta.real()), eta = zeta.imag();
    detail::require_strip(eta);
    if (xi == 0.0) throw DomainError("series representation excludes xi = 0");
    if (k_max <= 0) k_max = static_cast<int>(std::ceil(45.0 / (pi * xi))) + 2;
    const auto roots = dispersion_roots(F_sq, k_max);
    double v = 0.0;
    for (int k = k_max; k >= 0; --k) {
        const double tk = roots.t[k], st = std::sin(tk);
        v += roots.T[k] * std::sin(tk * eta) * std::exp(-tk * xi) / (st * st);
    }
    const double a = 0.5 * pi * xi, e1 = std::exp(-a), e2 = std::exp(-2.0 * a);
    const double sh = detail::sinpi(0.5 * eta), ch = detail::cospi(0.5 * eta);
    // cosh(a)/(cosh(2a) - cos(pi eta)) and 1/(cosh a + cos(pi eta/2)) without overflow
    const double r1 = e1 * (1.0 + e2) / (1.0 + e2 * e2 - 2.0 * detail::cospi(eta) * e2);
    const double r2 = 2.0 * e1 / (1.0 + e2 + 2.0 * ch * e1);
    v -= sh * r1;
    return 2.0 * pi * sh * r2 + 4.0 * pi * v;
}

// Evaluates ddotw by the series where it converges fast and by quadrature near xi = 0.
inline double ddotw(Complex zeta, double F_sq) {
    if (std::abs(zeta.real()) >= 0.25) return ddotw_series(zeta, F_sq);
    return ddotw_integral(zeta, F_sq);
}

struct SmallAmplitudePrediction {
    double beta = 0.0, F_sq = 0.0;
    double kappa = 0.0, gamma = 0.0, b = 0.0;
    double ddotw_eta1 = 0.0, ddotw_eta3 = 0.0;

    // Leading-order surface elevation w(xi + i) ~ beta^2 ddotw(xi + i)
    double w_surface(double xi) const {
        if (beta == 0.0) return 0.0;
        return beta * beta * ddotw(Complex(xi, 1.0), F_sq);
    }
};

inline SmallAmplitudePrediction small_amplitude_prediction(double beta, double F_sq) {
    detail::require_froude(F_sq);
    detail::require_beta(beta);
    SmallAmplitudePrediction p;
    p.beta = beta;
    p.F_sq = F_sq;
    p.ddotw_eta1 = ddotw_eta_moment(0, F_sq);
    p.ddotw_eta3 = ddotw_eta_moment(1, F_sq);
    if (beta == 0.0) return p;
    p.kappa = -p.ddotw_eta3 / pi * beta * beta * beta;
    p.gamma = -4.0 * std::tan(pi * beta);
    p.b = beta + p.ddotw_eta1 * beta * beta * beta;
    return p;
}

// Interpolating projection of the exact surface trace onto M+1 cosine modes of period 2 lambda.
inline SurfaceSpectrum project_exact(const ExactZeroGravityWave& wave, double lambda, int M) {
    NodeTransform tf(M);
    std::vector<double> g(M + 1), c(M + 1);
    for (int j = 0; j <= M; ++j) g[j] = wave(Complex(lambda * j / M, 1.0)).imag() - 1.0;
    tf.cosine_project(g.data(), c.data());
    return SurfaceSpectrum{c, lambda};
}

}  // namespace wbv
