#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/special_functions/sin_pi.hpp>

#include "wbv/errors.hpp"
#include "wbv/geometry.hpp"
#include "wbv/potentials.hpp"
#include "wbv/solver.hpp"
#include "wbv/spectral.hpp"

namespace wbv {

// Leading-order hollow vortex of conformal radius rho replacing the point vortex at i beta0.

// Finite Fourier density on the unit circle, mu(tau) = sum_{m=-K}^{K} c_m tau^m.
struct FourierDensity {
    std::vector<Complex> coeffs;  // index m + K

    int K() const { return static_cast<int>(coeffs.size() / 2); }
    Complex coeff(int m) const {
        const int k = K();
        return std::abs(m) > k ? Complex(0.0) : coeffs[static_cast<std::size_t>(m + k)];
    }
    Complex operator()(Complex tau) const {
        Complex s = 0.0;
        const int k = K();
        for (int m = -k; m <= k; ++m) s += coeffs[static_cast<std::size_t>(m + k)] * std::pow(tau, m);
        return s;
    }

    static FourierDensity mode(int m, Complex c = 1.0) {
        FourierDensity d;
        d.coeffs.assign(static_cast<std::size_t>(2 * std::abs(m) + 1), 0.0);
        d.coeffs[static_cast<std::size_t>(m + std::abs(m))] = c;
        return d;
    }
    // c Re tau
    static FourierDensity cos1(double c) {
        FourierDensity d;
        d.coeffs = {0.5 * c, 0.0, 0.5 * c};
        return d;
    }
};

// (1/2 pi i) \oint (mu(s) - mu(tau)) / (s - tau) ds. Nonnegative powers give polynomial
// difference quotients and integrate to 0; s^{-m} leaves -tau^{-m}.
inline Complex cauchy_op(const FourierDensity& mu, Complex tau) {
    Complex s = 0.0;
    for (int m = 1; m <= mu.K(); ++m) s -= mu.coeff(-m) * std::pow(tau, -m);
    return s;
}

namespace detail {

inline constexpr int layer_nodes = 2048;

// (1/2 pi i) \oint mu(conj s) rho ds / (rho s - i beta - zeta): smooth unless zeta nears -i beta
inline Complex mirror_layer(const FourierDensity& mu, double rho, double beta, Complex zeta, int n = layer_nodes) {
    Complex s = 0.0;
    for (int j = 0; j < n; ++j) {
        const Complex sg = std::polar(1.0, 2.0 * pi * j / n);
        s += mu(std::conj(sg)) * sg / (rho * sg - Complex(0.0, beta) - zeta);
    }
    return s * rho / double(n);
}

}  // namespace detail

// Z^rho[mu](zeta) = (1/2 pi i) \oint [mu(s)/(rho s + i beta - zeta) + mu(conj s)/(rho s - i beta - zeta)] rho ds.
// On the core circle the first term is replaced by its outer limit, which equals cauchy_op exactly.
inline Complex layer_potential(const FourierDensity& mu, double rho, double beta, Complex zeta,
                               int n = detail::layer_nodes) {
    if (rho == 0.0) throw DomainError("layer potential needs rho != 0");
    const double r = std::abs(rho);
    const Complex ib(0.0, beta);
    const double d_up = std::abs(zeta - ib), d_dn = std::abs(zeta + ib);
    const double on_tol = 1e-12 * std::max(1.0, r);
    if (d_up < r - on_tol || d_dn < r - on_tol) throw DomainError("layer potential evaluated inside a core circle");
    if (std::abs(d_up - r) <= on_tol) return cauchy_op(mu, (zeta - ib) / rho) + detail::mirror_layer(mu, rho, beta, zeta, n);
    Complex s = 0.0;
    for (int j = 0; j < n; ++j) {
        const Complex sg = std::polar(1.0, 2.0 * pi * j / n);
        s += mu(sg) * sg / (rho * sg + ib - zeta);
    }
    return s * rho / double(n) + detail::mirror_layer(mu, rho, beta, zeta, n);
}

// Two-term trace on the core circle: C mu(tau) - rho mu_1 / (2 i beta).
inline Complex layer_trace_expansion(const FourierDensity& mu, double rho, double beta, Complex tau) {
    return cauchy_op(mu, tau) - rho * mu.coeff(1) / Complex(0.0, 2.0 * beta);
}

using MapProvider = std::function<Complex(Complex, int)>;

struct PointVortexBase {
    MapProvider map;
    double kappa0 = 0.0;
    double beta0 = 0.0;
    double gamma0 = 0.0;

    PointVortexBase(MapProvider f, double kappa, double beta, double gamma, double tol = 1e-6)
        : map(std::move(f)), kappa0(kappa), beta0(beta), gamma0(gamma) {
        if (!(beta > 0.0 && beta < 1.0)) throw DomainError("hollow vortex base needs 0 < beta < 1");
        const Complex ib(0.0, beta);
        const Complex f1 = map(ib, 1);
        if (f1 == 0.0) throw DomainError("f_z vanishes at the vortex");
        const double res = std::abs(map(ib, 2) / f1 - Complex(0.0, pi * kappa));
        if (!(res < tol)) throw DomainError("base is not a vortex equilibrium: advection residual " + std::to_string(res));
    }

    // f_z and f_zzz at i beta0, real by the reflection symmetry
    double fz() const { return real_at(1); }
    double fzzz() const { return real_at(3); }

private:
    double real_at(int order) const {
        const Complex v = map(Complex(0.0, beta0), order);
        if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v))) throw DomainError("symmetry violation: map derivative at the vortex is not real");
        return v.real();
    }
};

inline PointVortexBase solution_base(const SolutionPoint& theta) {
    const SpectralMap f(theta.spec);
    return PointVortexBase([f](Complex z, int k) { return f(z, k); }, theta.kappa, theta.beta, theta.gamma());
}

struct HollowParams {
    double gamma_rho;
    double q_rho;
};

// gamma^rho = gamma0 and rho^2 q^rho = gamma0^2 / (4 f_z^2) (1/pi^2 - rho^2 kappa0^2 / 4), truncated as printed
inline HollowParams leading_params(const PointVortexBase& base, double rho) {
    if (rho == 0.0) throw DomainError("q^rho diverges at rho = 0");
    const double fz = base.fz();
    const double lead = base.gamma0 * base.gamma0 / (4.0 * fz * fz);
    return {base.gamma0, lead * (1.0 / (pi * pi) - rho * rho * base.kappa0 * base.kappa0 / 4.0) / (rho * rho)};
}

namespace detail {
inline double csc2pi(double beta) {
    const double s = boost::math::sin_pi(beta);
    return 1.0 / (s * s);
}
}  // namespace detail

// c in mu_dot = c Re tau
inline double mu_dot(const PointVortexBase& base) {
    const double k = base.kappa0;
    return pi * pi * base.fz() * ((1.0 - 3.0 * detail::csc2pi(base.beta0)) / 6.0 - k * k / 4.0) - base.fzzz() / 2.0;
}

// rho^3 [pi^2 f_z (kappa0^2/8 - (1 - 3 csc^2(pi beta0))/12) + f_zzz/4]
inline Complex centroid(const PointVortexBase& base, double rho) {
    const double k = base.kappa0;
    const double c = pi * pi * base.fz() * (k * k / 8.0 - (1.0 - 3.0 * detail::csc2pi(base.beta0)) / 12.0) + base.fzzz() / 4.0;
    return rho * rho * rho * c;
}

// f0(i beta0 + rho tau_j) + rho^2 Z^rho[rho mu_dot](i beta0 + rho tau_j), tau_j = exp(2 pi i j / n)
inline std::vector<Complex> boundary_approx(const PointVortexBase& base, double rho, int n_nodes) {
    if (rho == 0.0) throw DomainError("boundary needs rho != 0");
    if (n_nodes < 3) throw DomainError("boundary needs at least 3 nodes");
    const FourierDensity mu = FourierDensity::cos1(rho * mu_dot(base));
    const Complex ib(0.0, base.beta0);
    std::vector<Complex> out(static_cast<std::size_t>(n_nodes));
    for (int j = 0; j < n_nodes; ++j) {
        const Complex z = ib + rho * std::polar(1.0, 2.0 * pi * j / n_nodes);
        out[static_cast<std::size_t>(j)] = base.map(z, 0) + rho * rho * layer_potential(mu, rho, base.beta0, z);
    }
    return out;
}

// (1/2 pi i) \oint f d zeta over the core circle by the trapezoidal rule on boundary samples
inline Complex boundary_contour_mean(const std::vector<Complex>& boundary, double rho) {
    const int n = static_cast<int>(boundary.size());
    Complex s = 0.0;
    for (int j = 0; j < n; ++j) s += boundary[static_cast<std::size_t>(j)] * std::polar(1.0, 2.0 * pi * j / n);
    return s * rho / double(n);
}

struct HollowVortexApprox {
    double rho = 0.0;
    double gamma_rho = 0.0;
    double q_rho = 0.0;
    Complex centroid;
    std::vector<Complex> boundary;
    double mu_dot_coeff = 0.0;

    // closed simple curve: open polyline check plus the closing segment against the non-adjacent ones
    bool simple() const {
        const auto& b = boundary;
        const std::size_t n = b.size();
        if (geometry::polyline_self_intersects(b)) return false;
        for (std::size_t i = 1; i + 2 < n; ++i)
            if (geometry::segments_intersect(b[n - 1], b[0], b[i], b[i + 1])) return false;
        return true;
    }
};

inline HollowVortexApprox hollow_vortex(const PointVortexBase& base, double rho, int n_nodes = 256) {
    const auto p = leading_params(base, rho);
    HollowVortexApprox h;
    h.rho = rho;
    h.gamma_rho = p.gamma_rho;
    h.q_rho = p.q_rho;
    h.centroid = centroid(base, rho);
    h.mu_dot_coeff = mu_dot(base);
    h.boundary = boundary_approx(base, rho, n_nodes);
    return h;
}

}  // namespace wbv
