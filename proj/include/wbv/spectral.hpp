#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "wbv/errors.hpp"
#include "wbv/geometry.hpp"
#include "wbv/potentials.hpp"

namespace wbv {

// Surface trace w(xi + i) = sum_m coeffs[m] cos(m pi xi / lambda).
struct SurfaceSpectrum {
    std::vector<double> coeffs;
    double half_period = 1.0;

    int M() const { return static_cast<int>(coeffs.size()) - 1; }

    double wavenumber(int m) const { return m * pi / half_period; }

    double normalization_defect() const {
        double s = 0.0;
        for (std::size_t m = 0; m < coeffs.size(); ++m) s += (m % 2 == 0 ? 1.0 : -1.0) * coeffs[m];
        return s;
    }

    double max_abs_coeff() const {
        double mx = 0.0;
        for (double c : coeffs) mx = std::max(mx, std::abs(c));
        return mx;
    }

    // |w_M| / max_m |w_m|; zero for the trivial spectrum.
    double decay_ratio() const {
        const double mx = max_abs_coeff();
        return mx > 0.0 ? std::abs(coeffs.back()) / mx : 0.0;
    }

    void validate() const {
        if (coeffs.empty()) throw DomainError("spectrum needs at least one coefficient");
        detail::require_lambda(half_period);
        for (double c : coeffs)
            if (!std::isfinite(c)) throw DomainError("non-finite spectral coefficient");
    }

    static SurfaceSpectrum zero(int M, double lambda) {
        return SurfaceSpectrum{std::vector<double>(static_cast<std::size_t>(M) + 1, 0.0), lambda};
    }
};

struct StripPoint {
    double xi = 0.0;
    double eta = 0.0;
};

namespace detail {

// cosh(k eta)/sinh(k), k > 0, |eta| <= 1
inline double cosh_ratio(double eta, double k) {
    const double ae = std::abs(eta);
    return std::exp(k * (ae - 1.0)) * (1.0 + std::exp(-2.0 * k * ae)) / (-std::expm1(-2.0 * k));
}

// k coth(k), continuous at k = 0
inline double k_coth(double k) {
    if (k == 0.0) return 1.0;
    return k * (1.0 + std::exp(-2.0 * k)) / (-std::expm1(-2.0 * k));
}

inline void require_strip(double eta) {
    if (!(std::abs(eta) <= 1.0)) throw DomainError("strip point needs |eta| <= 1, got " + std::to_string(eta));
}

}  // namespace detail

// Partial derivative d^dxi/dxi d^deta/deta of the harmonic, eta-odd extension of w.
inline double eval_w(const SurfaceSpectrum& spec, StripPoint p, int dxi = 0, int deta = 0) {
    if (dxi < 0 || deta < 0 || dxi + deta > 3) throw DomainError("derivative order must be at most 3");
    detail::require_strip(p.eta);
    double s = 0.0;
    if (dxi == 0 && deta == 0) s = spec.coeffs[0] * p.eta;
    if (dxi == 0 && deta == 1) s = spec.coeffs[0];
    for (int m = spec.M(); m >= 1; --m) {
        const double c = spec.coeffs[m];
        if (c == 0.0) continue;
        const double k = spec.wavenumber(m);
        const double arg = k * p.xi;
        double tx = 0.0;
        switch (dxi) {
            case 0: tx = std::cos(arg); break;
            case 1: tx = -std::sin(arg); break;
            case 2: tx = -std::cos(arg); break;
            default: tx = std::sin(arg); break;
        }
        const double ty = (deta % 2 == 0) ? detail::sinh_ratio(p.eta, k) : detail::cosh_ratio(p.eta, k);
        s += c * tx * ty * std::pow(k, dxi + deta);
    }
    return s;
}

struct Traces {
    std::vector<double> w, w_xi, w_eta;
};

// Traces on eta = 1 at arbitrary xi by direct summation.
inline Traces surface_traces(const SurfaceSpectrum& spec, const std::vector<double>& grid) {
    Traces t;
    t.w.assign(grid.size(), 0.0);
    t.w_xi.assign(grid.size(), 0.0);
    t.w_eta.assign(grid.size(), spec.coeffs[0]);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double w = spec.coeffs[0], wx = 0.0, we = spec.coeffs[0];
        for (int m = spec.M(); m >= 1; --m) {
            const double c = spec.coeffs[m];
            if (c == 0.0) continue;
            const double k = spec.wavenumber(m);
            const double cs = std::cos(k * grid[j]), sn = std::sin(k * grid[j]);
            w += c * cs;
            wx -= c * k * sn;
            we += c * detail::k_coth(k) * cs;
        }
        t.w[j] = w;
        t.w_xi[j] = wx;
        t.w_eta[j] = we;
    }
    return t;
}

// f(zeta) = (1 + w0) zeta + sum_m w_m sin(k zeta)/sinh(k) and its derivatives up to order 3.
inline Complex conformal_map(const SurfaceSpectrum& spec, Complex zeta, int order = 0) {
    if (order < 0 || order > 3) throw DomainError("map derivative order must be 0..3");
    detail::require_strip(zeta.imag());
    const double xi = zeta.real(), eta = zeta.imag();
    Complex s = 0.0;
    for (int m = spec.M(); m >= 1; --m) {
        const double c = spec.coeffs[m];
        if (c == 0.0) continue;
        const double k = spec.wavenumber(m);
        const double cs = std::cos(k * xi), sn = std::sin(k * xi);
        const double C = detail::cosh_ratio(eta, k), S = detail::sinh_ratio(eta, k);
        // sin(k zeta)/sinh k and cos(k zeta)/sinh k
        const Complex sin_t(sn * C, cs * S), cos_t(cs * C, -sn * S);
        const double kn = std::pow(k, order);
        switch (order) {
            case 0: s += c * sin_t; break;
            case 1: s += c * kn * cos_t; break;
            case 2: s -= c * kn * sin_t; break;
            default: s -= c * kn * cos_t; break;
        }
    }
    const double a = 1.0 + spec.coeffs[0];
    if (order == 0) s += a * zeta;
    if (order == 1) s += a;
    return s;
}

// Map functor over a spectrum; exposes the interface shared with the closed-form maps.
class SpectralMap {
public:
    explicit SpectralMap(SurfaceSpectrum spec) : spec_(std::move(spec)) { spec_.validate(); }
    Complex operator()(Complex zeta, int order = 0) const { return conformal_map(spec_, zeta, order); }
    double half_period() const { return spec_.half_period; }
    const SurfaceSpectrum& spectrum() const { return spec_; }

private:
    SurfaceSpectrum spec_;
};

struct InjectivityDiagnostic {
    double min_fz = std::numeric_limits<double>::infinity();
    bool self_intersecting = false;
};

// min |f_z| on a sample grid of [0, xi_max] x [0, 1] (both boundaries dense) and a polyline
// test of the surface image over [-xi_max, xi_max]. Map(zeta, order) must be odd and real on R.
template <class Map>
InjectivityDiagnostic injectivity_check(const Map& f, double xi_max, int n_samples) {
    if (n_samples < 4) throw DomainError("injectivity check needs at least 4 samples");
    InjectivityDiagnostic d;
    const int n_lines = 8;
    for (int i = 0; i <= n_samples; ++i) {
        const double xi = xi_max * i / n_samples;
        d.min_fz = std::min({d.min_fz, std::abs(f(Complex(xi, 0.0), 1)), std::abs(f(Complex(xi, 1.0), 1))});
        if (i % 4 == 0)
            for (int l = 1; l < n_lines; ++l)
                d.min_fz = std::min(d.min_fz, std::abs(f(Complex(xi, static_cast<double>(l) / n_lines), 1)));
    }
    std::vector<geometry::Point> poly;
    poly.reserve(2 * static_cast<std::size_t>(n_samples) + 1);
    for (int i = -n_samples; i <= n_samples; ++i) poly.push_back(f(Complex(xi_max * i / n_samples, 1.0), 0));
    d.self_intersecting = geometry::polyline_self_intersects(poly);
    return d;
}

inline InjectivityDiagnostic injectivity_check(const SurfaceSpectrum& spec, int n_samples) {
    return injectivity_check(SpectralMap(spec), spec.half_period, n_samples);
}

// Smallest admissible noise level for w_xi at the given spectrum.
inline double derivative_noise_floor(const SurfaceSpectrum& spec) {
    double s = 0.0;
    for (int m = 1; m <= spec.M(); ++m) s += std::abs(spec.coeffs[m]) * spec.wavenumber(m);
    return 64.0 * machine_eps * s;
}

struct MonotonicityDiagnostic {
    bool monotone = true;
    bool degenerate = false;  // spectrum is identically zero
    double max_w_xi = 0.0;    // largest (positive = violating) sample
    double max_abs_w_xi = 0.0;
};

// w_xi <= 0 on a grid of (0, lambda) x (0, 1]. Samples count as zero below a roundoff floor plus the
// larger of rel_floor times the largest slope (a solve to residual 1e-10 pins w_xi no closer) and the
// slope amplitude k_M |w_M| of the last retained mode (truncation).
inline MonotonicityDiagnostic monotonicity(const SurfaceSpectrum& spec, int n_xi = 64, int n_eta = 16,
                                           double rel_floor = 1e-9) {
    MonotonicityDiagnostic d;
    if (spec.max_abs_coeff() == 0.0) {
        d.degenerate = true;
        return d;
    }
    d.max_w_xi = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n_xi; ++i) {
        const double xi = spec.half_period * i / (n_xi + 1);
        for (int j = 1; j <= n_eta; ++j) {
            const double v = eval_w(spec, {xi, static_cast<double>(j) / n_eta}, 1, 0);
            d.max_w_xi = std::max(d.max_w_xi, v);
            d.max_abs_w_xi = std::max(d.max_abs_w_xi, std::abs(v));
        }
    }
    const double trunc = spec.wavenumber(spec.M()) * std::abs(spec.coeffs.back());
    d.monotone = d.max_w_xi <= derivative_noise_floor(spec) + std::max(rel_floor * d.max_abs_w_xi, trunc);
    return d;
}

// FFTW real-to-real transforms on the collocation nodes xi_j = j lambda / M, j = 0..M.
// Not thread-safe: each instance owns scratch buffers.
class NodeTransform {
public:
    explicit NodeTransform(int M) : M_(M) {
        if (M < 2) throw DomainError("node transforms need M >= 2");
        cin_ = fftw_alloc_real(M + 1);
        cout_ = fftw_alloc_real(M + 1);
        sin_ = fftw_alloc_real(M - 1);
        sout_ = fftw_alloc_real(M - 1);
        cplan_ = fftw_plan_r2r_1d(M + 1, cin_, cout_, FFTW_REDFT00, FFTW_ESTIMATE);
        splan_ = fftw_plan_r2r_1d(M - 1, sin_, sout_, FFTW_RODFT00, FFTW_ESTIMATE);
    }
    NodeTransform(const NodeTransform&) = delete;
    NodeTransform& operator=(const NodeTransform&) = delete;
    ~NodeTransform() {
        fftw_destroy_plan(cplan_);
        fftw_destroy_plan(splan_);
        fftw_free(cin_);
        fftw_free(cout_);
        fftw_free(sin_);
        fftw_free(sout_);
    }

    int M() const { return M_; }

    // g_j = sum_{m=0}^{M} c_m cos(pi m j / M)
    void cosine_sum(const double* c, double* g) {
        cin_[0] = c[0];
        cin_[M_] = c[M_];
        for (int m = 1; m < M_; ++m) cin_[m] = 0.5 * c[m];
        fftw_execute(cplan_);
        for (int j = 0; j <= M_; ++j) g[j] = cout_[j];
    }

    // s_j = sum_{m=1}^{M-1} d_m sin(pi m j / M); d has M+1 entries, d_0 and d_M ignored.
    void sine_sum(const double* d, double* s) {
        for (int m = 1; m < M_; ++m) sin_[m - 1] = 0.5 * d[m];
        fftw_execute(splan_);
        s[0] = 0.0;
        s[M_] = 0.0;
        for (int j = 1; j < M_; ++j) s[j] = sout_[j - 1];
    }

    // Inverse of cosine_sum.
    void cosine_project(const double* g, double* c) {
        for (int j = 0; j <= M_; ++j) cin_[j] = g[j];
        fftw_execute(cplan_);
        const double inv = 1.0 / M_;
        for (int m = 0; m <= M_; ++m) c[m] = cout_[m] * inv;
        c[0] *= 0.5;
        c[M_] *= 0.5;
    }

    Traces traces(const SurfaceSpectrum& spec) {
        if (spec.M() != M_) throw DomainError("spectrum size does not match the transform");
        const double lam = spec.half_period;
        Traces t;
        t.w.resize(M_ + 1);
        t.w_xi.resize(M_ + 1);
        t.w_eta.resize(M_ + 1);
        std::vector<double> tmp(M_ + 1);
        cosine_sum(spec.coeffs.data(), t.w.data());
        for (int m = 0; m <= M_; ++m) tmp[m] = spec.coeffs[m] * detail::k_coth(m * pi / lam);
        cosine_sum(tmp.data(), t.w_eta.data());
        for (int m = 0; m <= M_; ++m) tmp[m] = -spec.coeffs[m] * (m * pi / lam);
        sine_sum(tmp.data(), t.w_xi.data());
        return t;
    }

private:
    int M_;
    double *cin_, *cout_, *sin_, *sout_;
    fftw_plan cplan_, splan_;
};

inline std::vector<double> collocation_nodes(int M, double lambda) {
    std::vector<double> x(static_cast<std::size_t>(M) + 1);
    for (int j = 0; j <= M; ++j) x[j] = lambda * j / M;
    return x;
}

}  // namespace wbv
