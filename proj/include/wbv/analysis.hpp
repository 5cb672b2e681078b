#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wbv/errors.hpp"
#include "wbv/geometry.hpp"
#include "wbv/potentials.hpp"
#include "wbv/solver.hpp"
#include "wbv/spectral.hpp"

namespace wbv {

struct Streamline {
    std::string label;
    std::vector<Complex> conformal;  // points in the strip
    std::vector<Complex> physical;   // their images under f
    double level = 0.0;              // value of the stream function along the line
    bool closed = false;
    bool truncated = false;
};

struct WaveFlags {
    bool overhanging = false;
    bool monotone = true;
    bool monotone_degenerate = false;
    bool self_intersecting = false;
};

struct PhysicalWave {
    std::vector<Complex> surface;
    double b = 0.0;
    double gamma = 0.0;
    std::vector<Streamline> streamlines;
    std::vector<std::string> notices;
    WaveFlags flags;
};

struct OverhangDiagnostic {
    bool overhanging = false;
    double xi = 0.0;  // first zero of Re f_z(xi + i) on (0, lambda)
};

// Sign change of Re f_z(xi + i) = 1 + w_eta on (0, lambda): scan at 4x oversampled nodes, then bisect.
inline OverhangDiagnostic overhang(const SurfaceSpectrum& spec) {
    spec.validate();
    const int M = spec.M();
    if (M < 1) return {};
    const int N = 4 * std::max(M, 2);
    NodeTransform tf(N);
    const Traces t = tf.traces(SurfaceSpectrum{[&] {
                                                   auto c = spec.coeffs;
                                                   c.resize(static_cast<std::size_t>(N) + 1, 0.0);
                                                   return c;
                                               }(),
                                               spec.half_period});
    auto g = [&](double xi) { return 1.0 + eval_w(spec, {xi, 1.0}, 0, 1); };
    const double h = spec.half_period / N;
    for (int j = 0; j < N; ++j) {
        const double a = 1.0 + t.w_eta[j], b = 1.0 + t.w_eta[j + 1];
        if (a > 0.0 && b <= 0.0) {
            double lo = j * h, hi = (j + 1) * h;
            for (int it = 0; it < 60 && hi - lo > 1e-15 * spec.half_period; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 0.0 ? lo : hi) = mid;
            }
            return {true, 0.5 * (lo + hi)};
        }
        if (a <= 0.0 && j > 0) return {true, j * h};
    }
    return {};
}

inline bool overhang_flag(const SolutionPoint& theta, const WaveParams& params) {
    if (theta.spec.half_period != params.lambda) throw DomainError("solution half-period differs from params");
    return overhang(theta.spec).overhanging;
}

inline MonotonicityDiagnostic monotonicity_flag(const SolutionPoint& theta, const WaveParams& params, int n_xi = 64,
                                                int n_eta = 16) {
    if (theta.spec.half_period != params.lambda) throw DomainError("solution half-period differs from params");
    return monotonicity(theta.spec, n_xi, n_eta);
}

inline ComplexPotential solution_potential(const SolutionPoint& theta, const WaveParams& params, double pole_eps = 1e-12) {
    return ComplexPotential(periodic_config(theta.kappa, theta.beta, params.lambda), pole_eps);
}

inline double stream_function(const SolutionPoint& theta, const WaveParams& params, StripPoint p) {
    detail::require_strip(p.eta);
    return solution_potential(theta, params).stream(Complex(p.xi, p.eta));
}

// Bed stagnation point: zero of Re(W_z / f_z)(xi, 0) on (0, xi_max). On the bed both factors are real.
template <class Map>
std::optional<double> bed_stagnation_point(const ComplexPotential& W, const Map& f, double xi_max, int n_scan = 2000) {
    auto u = [&](double xi) { return (W.velocity(Complex(xi, 0.0)) / f(Complex(xi, 0.0), 1)).real(); };
    double prev = u(xi_max * 1e-6);
    for (int i = 1; i <= n_scan; ++i) {
        const double x1 = xi_max * i / n_scan;
        const double v = u(x1);
        if ((prev > 0) != (v > 0)) {
            double lo = xi_max * (i - 1) / n_scan, hi = x1;
            if (i == 1) lo = xi_max * 1e-6;
            const bool lo_pos = prev > 0;
            for (int it = 0; it < 100 && hi - lo > 1e-14 * xi_max; ++it) {
                const double mid = 0.5 * (lo + hi);
                ((u(mid) > 0) == lo_pos ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = v;
    }
    return std::nullopt;
}

struct StreamlineOptions {
    int n_seeds = 6;
    bool separatrix = true;
    double step = 0.02;       // conformal arclength per step, shrunk near the vortex
    int max_steps = 20000;
    double level_tol = 1e-10;  // corrector target on |psi - level|
};

namespace detail {

// Newton projection onto {psi = level} along the gradient i conj(W_z).
inline bool project_to_level(const ComplexPotential& W, Complex& z, double level, double tol) {
    for (int it = 0; it < 20; ++it) {
        const PotentialValue v = W(z);
        const double r = v.W.imag() - level;
        if (std::abs(r) < tol) return true;
        const Complex grad = Complex(0.0, 1.0) * std::conj(v.W_z);
        const double g2 = std::norm(grad);
        if (!(g2 > 0.0)) return false;
        z -= r / g2 * grad;
        if (std::abs(z.imag()) > 1.0) z.imag(std::copysign(1.0, z.imag()));
    }
    return std::abs(W.stream(z) - level) < tol;
}

// Newton in eta alone, keeping xi fixed (psi_eta = Re W_z).
inline void project_vertically(const ComplexPotential& W, Complex& z, double level, double tol) {
    for (int it = 0; it < 20; ++it) {
        const PotentialValue v = W(z);
        const double r = v.W.imag() - level;
        if (std::abs(r) < tol || v.W_z.real() == 0.0) return;
        z.imag(std::clamp(z.imag() - r / v.W_z.real(), -1.0, 1.0));
    }
}

// Follows the level set through z0 with initial direction dir0 (unit complex) until xi leaves (0, xi_max)
// or returns to xi = 0. Points are reflected to a full symmetric curve by the caller.
inline std::vector<Complex> follow_level(const ComplexPotential& W, Complex z0, Complex dir0, double level, double xi_max,
                                         double beta, const StreamlineOptions& opt, bool& truncated, bool& returned) {
    std::vector<Complex> pts{z0};
    Complex z = z0, dir = dir0;
    truncated = returned = false;
    for (int k = 0; k < opt.max_steps; ++k) {
        const double dv = std::min(std::abs(z - Complex(0.0, beta)), std::abs(z + Complex(0.0, beta)));
        double h = std::min(opt.step, 0.2 * dv);
        Complex zn;
        bool ok = false;
        for (int tries = 0; tries < 12 && !ok; ++tries, h *= 0.5) {
            const Complex v = std::conj(W.velocity(z));
            Complex d = v / std::abs(v);
            if ((d * std::conj(dir)).real() < 0) d = -d;
            // midpoint predictor
            const Complex zm = z + 0.5 * h * d;
            Complex vm = std::conj(W.velocity(zm));
            vm /= std::abs(vm);
            if ((vm * std::conj(d)).real() < 0) vm = -vm;
            zn = z + h * vm;
            if (std::abs(zn.imag()) > 1.0) zn.imag(std::copysign(1.0, zn.imag()));
            ok = project_to_level(W, zn, level, opt.level_tol) && std::abs(zn - z) < 2.0 * h;
            if (ok) dir = vm;
        }
        if (!ok) {
            truncated = true;
            return pts;
        }
        if (zn.real() >= xi_max) {
            // clip onto the half-period line
            const double t = (xi_max - z.real()) / (zn.real() - z.real());
            Complex ze = z + t * (zn - z);
            ze.real(xi_max);
            project_vertically(W, ze, level, opt.level_tol);
            pts.push_back(ze);
            return pts;
        }
        if (zn.real() <= 0.0 && k > 0) {
            const double t = z.real() / (z.real() - zn.real());
            Complex ze = z + t * (zn - z);
            ze.real(0.0);
            project_vertically(W, ze, level, opt.level_tol);
            pts.push_back(ze);
            returned = true;
            return pts;
        }
        pts.push_back(zn);
        z = zn;
    }
    truncated = true;
    return pts;
}

// Mirror a half curve in xi -> -xi: closed loops get the reversed mirror appended, open lines are
// extended to the left.
inline std::vector<Complex> mirror(const std::vector<Complex>& half, bool closed) {
    std::vector<Complex> out;
    if (closed) {
        out = half;
        for (auto it = half.rbegin() + 1; it != half.rend(); ++it) out.push_back(Complex(-it->real(), it->imag()));
        return out;
    }
    for (auto it = half.rbegin(); it != half.rend() - 1; ++it) out.push_back(Complex(-it->real(), it->imag()));
    out.insert(out.end(), half.begin(), half.end());
    return out;
}

}  // namespace detail

// Level sets of Im W through seeds i(beta + j (1 - beta)/(N + 1)), j = 1..N, plus the separatrix from the bed
// stagnation point. Traced in the strip and mapped forward through f.
template <class Map>
std::vector<Streamline> trace_streamlines(const ComplexPotential& W, const Map& f, double beta, double xi_max,
                                          const StreamlineOptions& opt, std::vector<std::string>* notices = nullptr) {
    std::vector<Streamline> out;
    auto finish = [&](Streamline& s) {
        s.physical.reserve(s.conformal.size());
        for (const Complex& z : s.conformal) s.physical.push_back(f(z));
        out.push_back(std::move(s));
    };
    for (int j = 1; j <= opt.n_seeds; ++j) {
        const Complex z0(0.0, beta + j * (1.0 - beta) / (opt.n_seeds + 1));
        Streamline s;
        s.label = "seed_" + std::to_string(j);
        s.level = W.stream(z0);
        bool truncated = false, returned = false;
        const auto half = detail::follow_level(W, z0, Complex(1.0, 0.0), s.level, xi_max, beta, opt, truncated, returned);
        s.closed = returned;
        s.truncated = truncated;
        s.conformal = detail::mirror(half, returned);
        finish(s);
    }
    if (opt.separatrix) {
        const auto xs = W.config().gamma != 0.0 ? bed_stagnation_point(W, f, xi_max) : std::nullopt;
        if (!xs) {
            if (notices) notices->push_back("no bed stagnation point: separatrix omitted");
        } else {
            // the dividing line leaves the wall vertically; start just above it on psi = 0
            Complex z0(*xs, std::min(1e-3, 0.1 * std::abs(beta)));
            Streamline s;
            s.label = "separatrix";
            s.level = 0.0;
            bool truncated = false, returned = false;
            std::vector<Complex> half{Complex(*xs, 0.0)};
            // psi is O(eta^3) on the start point; a stalled corrector there is harmless
            detail::project_to_level(W, z0, 0.0, opt.level_tol);
            const auto rest = detail::follow_level(W, z0, Complex(0.0, 1.0), 0.0, xi_max, beta, opt, truncated, returned);
            half.insert(half.end(), rest.begin(), rest.end());
            s.truncated = truncated || !returned;
            s.closed = false;
            // half runs from the bed at +xs to xi = 0; mirror to reach the bed at -xs
            std::vector<Complex> full(half.begin(), half.end());
            for (auto it = half.rbegin() + 1; it != half.rend(); ++it) full.push_back(Complex(-it->real(), it->imag()));
            s.conformal = std::move(full);
            finish(s);
        }
    }
    return out;
}

inline std::vector<Streamline> trace_streamlines(const SolutionPoint& theta, const WaveParams& params,
                                                 const StreamlineOptions& opt = {},
                                                 std::vector<std::string>* notices = nullptr) {
    const SpectralMap f(theta.spec);
    return trace_streamlines(solution_potential(theta, params), f, theta.beta, params.lambda, opt, notices);
}

struct ReconstructOptions {
    int n_points = 1025;
    bool streamlines = false;
    StreamlineOptions streamline;
};

inline PhysicalWave reconstruct(const SolutionPoint& theta, const WaveParams& params, const ReconstructOptions& opt = {}) {
    if (theta.spec.half_period != params.lambda) throw DomainError("solution half-period differs from params");
    if (opt.n_points < 2) throw DomainError("reconstruction needs at least two surface points");
    const SpectralMap f(theta.spec);
    PhysicalWave pw;
    pw.surface.reserve(static_cast<std::size_t>(opt.n_points));
    for (int j = 0; j < opt.n_points; ++j) {
        const double xi = -params.lambda + 2.0 * params.lambda * j / (opt.n_points - 1);
        pw.surface.push_back(f(Complex(xi, 1.0)));
    }
    pw.b = f(Complex(0.0, theta.beta)).imag();
    pw.gamma = theta.gamma();
    pw.flags.overhanging = overhang(theta.spec).overhanging;
    const auto mono = monotonicity(theta.spec);
    pw.flags.monotone = mono.monotone;
    pw.flags.monotone_degenerate = mono.degenerate;
    pw.flags.self_intersecting = geometry::polyline_self_intersects(pw.surface);
    if (opt.streamlines) pw.streamlines = trace_streamlines(theta, params, opt.streamline, &pw.notices);
    return pw;
}

// max of V = -Im(W_z / f_z) over interior samples of (0, lambda) x (0, 1), skipping a disc around the vortex.
// Negative means downward flow right of the crest line.
inline double max_vertical_velocity(const SolutionPoint& theta, const WaveParams& params, int n_xi = 32, int n_eta = 16) {
    const auto W = solution_potential(theta, params);
    const SpectralMap f(theta.spec);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n_xi; ++i)
        for (int j = 1; j < n_eta; ++j) {
            const Complex z(params.lambda * i / (n_xi + 1), static_cast<double>(j) / n_eta);
            if (std::abs(z - Complex(0.0, theta.beta)) < 1e-3) continue;
            mx = std::max(mx, -(W.velocity(z) / f(z, 1)).imag());
        }
    return mx;
}

struct SummaryRow {
    double s, beta, kappa, Q, gamma, b;
    bool overhang, monotone;
    double min_fz;
};

inline std::vector<SummaryRow> curve_summary(const CurveRecord& rec) {
    std::vector<SummaryRow> rows;
    rows.reserve(rec.points.size());
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        const SolutionPoint& p = rec.points[i];
        const PointDiagnostics& d = rec.diagnostics[i];
        rows.push_back({rec.arclength[i], p.beta, p.kappa, p.Q, d.gamma, conformal_map(p.spec, Complex(0.0, p.beta)).imag(),
                        overhang(p.spec).overhanging, d.monotone, d.min_fz});
    }
    return rows;
}

}  // namespace wbv
