#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

namespace wbv::test {

using C = std::complex<double>;

// Trapezoidal rule on the circle |z - c| = r; spectrally accurate for analytic integrands.
inline C contour_integral(const std::function<C(C)>& f, C center, double r, int n = 512) {
    C s = 0.0;
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * std::numbers::pi * j / n;
        const C e = std::polar(1.0, th);
        s += f(center + r * e) * C(0.0, r) * e;
    }
    return s * (2.0 * std::numbers::pi / n);
}

// Gauss-Legendre (20 points, composite) along the segment a -> b.
inline C segment_integral(const std::function<C(C)>& f, C a, C b, int pieces = 64) {
    static const double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
                                 0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
                                 0.9639719272779138, 0.9931285991850949};
    static const double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
                                 0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
                                 0.0406014298003869, 0.0176140071391521};
    C s = 0.0;
    for (int p = 0; p < pieces; ++p) {
        const C a0 = a + (b - a) * (double(p) / pieces), b0 = a + (b - a) * (double(p + 1) / pieces);
        const C mid = 0.5 * (a0 + b0), half = 0.5 * (b0 - a0);
        for (int i = 0; i < 10; ++i) s += w[i] * (f(mid + half * x[i]) + f(mid - half * x[i]));
    }
    // pieces have equal length
    return s * (0.5 * (b - a) / double(pieces));
}

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

}  // namespace wbv::test
