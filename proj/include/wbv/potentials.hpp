#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "wbv/errors.hpp"

namespace wbv {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double machine_eps = std::numeric_limits<double>::epsilon();

namespace detail {

inline double sinpi(double x) { return boost::math::sin_pi(x); }
inline double cospi(double x) { return boost::math::cos_pi(x); }

inline void require_beta(double beta) {
    if (!std::isfinite(beta) || !(std::abs(beta) < 1.0))
        throw DomainError("vortex altitude must satisfy |beta| < 1, got " + std::to_string(beta));
}

inline void require_lambda(double lambda) {
    if (!std::isfinite(lambda) || !(lambda > 0.0))
        throw DomainError("half-period must be positive and finite, got " + std::to_string(lambda));
}

// log(sinh x) without overflow; imaginary part is only defined mod 2 pi.
inline Complex log_sinh(Complex x) {
    if (std::abs(x) < 0.5) return std::log(std::sinh(x));
    if (x.real() < 0.0) return log_sinh(-x) + Complex(0.0, pi);
    return x - std::log(2.0) + std::log(1.0 - std::exp(-2.0 * x));
}

inline Complex coth(Complex x) { return 1.0 / std::tanh(x); }

// sinh(b x)/sinh(x) for x > 0, |b| < 1
inline double sinh_ratio(double b, double x) {
    const double ab = std::abs(b);
    const double r = std::exp(-x * (1.0 - ab)) * (-std::expm1(-2.0 * x * ab)) / (-std::expm1(-2.0 * x));
    return b < 0 ? -r : r;
}

}  // namespace detail

// gamma sin(pi beta) <= 0; beta == 0 forces gamma == 0.
struct VortexConfig {
    double gamma = 0.0;
    double beta = 0.0;
    std::optional<double> half_period;

    bool periodic() const { return half_period.has_value(); }

    void validate() const {
        detail::require_beta(beta);
        if (!std::isfinite(gamma)) throw DomainError("circulation must be finite");
        if (half_period) detail::require_lambda(*half_period);
        if (gamma * detail::sinpi(beta) > 0.0)
            throw AdmissibilityError("circulation and altitude violate gamma sin(pi beta) <= 0");
        if (beta == 0.0 && gamma != 0.0) throw AdmissibilityError("a vortex on the bed must have zero circulation");
    }
};

// Solitary circulation; requires cos(pi beta) - kappa sin(pi beta) > 0.
inline double gamma_solitary(double kappa, double beta) {
    detail::require_beta(beta);
    if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
    if (beta == 0.0) return 0.0;
    const double s = detail::sinpi(beta), c = detail::cospi(beta);
    const double d = c - kappa * s;
    if (!(d > 0.0))
        throw AdmissibilityError("inadmissible (kappa, beta): cos(pi beta) - kappa sin(pi beta) = " +
                                 std::to_string(d) + " is not positive");
    return -4.0 * s / d;
}

// Positive inside the admissible set, zero on its boundary.
inline double admissibility_margin_solitary(double kappa, double beta) {
    return detail::cospi(beta) - kappa * detail::sinpi(beta);
}

// S(beta, lambda) = cot(pi beta)/4 + sum_k sin(2 k pi beta)/(exp(2 k pi lambda) - 1)
inline double lattice_sum_S(double beta, double lambda, double tol = machine_eps) {
    detail::require_beta(beta);
    detail::require_lambda(lambda);
    if (beta == 0.0) throw DomainError("lattice sum is singular at beta = 0");
    const double head = 0.25 * detail::cospi(beta) / detail::sinpi(beta);
    const double q = std::exp(-2.0 * pi * lambda);
    const double one_minus_q = -std::expm1(-2.0 * pi * lambda);
    double sum = 0.0;
    double qk = 1.0;
    for (long k = 1; k < 100000000; ++k) {
        sum += detail::sinpi(2.0 * k * beta) / std::expm1(2.0 * pi * lambda * k);
        qk *= q;
        const double tail = qk * q / (one_minus_q * one_minus_q);
        if (tail <= tol * std::max(1.0, std::abs(head + sum))) break;
    }
    return head + sum;
}

inline double admissibility_margin_periodic(double kappa, double beta, double lambda) {
    if (beta == 0.0) return std::numeric_limits<double>::infinity();
    const double d = kappa - 4.0 * lattice_sum_S(beta, lambda);
    return beta > 0.0 ? -d : d;
}

// gamma = 4/(kappa - 4 S); zero at beta = 0.
inline double gamma_periodic(double kappa, double beta, double lambda, double tol = 1e-14) {
    detail::require_beta(beta);
    detail::require_lambda(lambda);
    if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
    if (beta == 0.0) return 0.0;
    const double S = lattice_sum_S(beta, lambda);
    const double d = kappa - 4.0 * S;
    if (std::abs(d) <= tol * std::max({1.0, std::abs(kappa), 4.0 * std::abs(S)}))
        throw DegeneratePointError("kappa - 4 S(beta, lambda) vanishes: circulation unbounded");
    if ((beta > 0.0 && d > 0.0) || (beta < 0.0 && d < 0.0))
        throw AdmissibilityError("inadmissible (kappa, beta, lambda): kappa - 4 S = " + std::to_string(d) +
                                 " has the wrong sign for beta = " + std::to_string(beta));
    return 4.0 / d;
}

inline VortexConfig solitary_config(double kappa, double beta) {
    return VortexConfig{gamma_solitary(kappa, beta), beta, std::nullopt};
}

inline VortexConfig periodic_config(double kappa, double beta, double lambda) {
    return VortexConfig{gamma_periodic(kappa, beta, lambda), beta, lambda};
}

// Test hook behind `validate --inject-fault a-periodic-sign`: flips the vortex term of the periodic a.
namespace fault {
inline bool a_periodic_sign = false;
inline double a_periodic_factor() { return a_periodic_sign ? -1.0 : 1.0; }
}  // namespace fault

inline double a_solitary(double xi, double kappa, double beta) {
    const double g = gamma_solitary(kappa, beta);
    if (g == 0.0) return 1.0;
    const double ch = std::cosh(pi * xi);
    if (!std::isfinite(ch)) return 1.0;
    return 1.0 - 0.5 * g * detail::sinpi(beta) / (ch + detail::cospi(beta));
}

// Terms needed so that the neglected part of the cosine series is below eps.
inline long a_periodic_terms(double beta, double lambda) {
    detail::require_beta(beta);
    detail::require_lambda(lambda);
    if (beta == 0.0) return 0;
    const double rho = std::exp(-pi * (1.0 - std::abs(beta)) / lambda);
    const double denom = (-std::expm1(-pi * (1.0 - std::abs(beta)) / lambda)) * (-std::expm1(-2.0 * pi / lambda));
    // 2 rho^(K+1) / denom < eps
    const double k = (std::log(0.5 * machine_eps * denom)) / std::log(rho);
    return std::max(1L, static_cast<long>(std::ceil(k)));
}

// c_k = sinh(k pi beta/lambda)/sinh(k pi/lambda), k = 1..K
inline std::vector<double> a_periodic_coefficients(double beta, double lambda, long n_terms) {
    std::vector<double> c(static_cast<std::size_t>(n_terms));
    for (long k = 1; k <= n_terms; ++k) c[k - 1] = detail::sinh_ratio(beta, k * pi / lambda);
    return c;
}

inline double a_periodic(double xi, double kappa, double beta, double lambda, long n_terms) {
    const double g = gamma_periodic(kappa, beta, lambda);
    if (g == 0.0) return 1.0;
    const auto c = a_periodic_coefficients(beta, lambda, n_terms);
    // sum small terms first
    double s = 0.0;
    for (long k = n_terms; k >= 1; --k) s += c[k - 1] * std::cos(k * pi * xi / lambda);
    return 1.0 - fault::a_periodic_factor() * g / (2.0 * lambda) * (beta + 2.0 * s);
}

inline double a_periodic(double xi, double kappa, double beta, double lambda) {
    return a_periodic(xi, kappa, beta, lambda, a_periodic_terms(beta, lambda));
}

// Weierstrass functions of the rectangular lattice 2 lambda Z + 2i Z, via q-series in
// the nome exp(-pi lambda) built on the half-period i.
class WeierstrassLattice {
public:
    explicit WeierstrassLattice(double lambda, double tol = machine_eps) : lambda_(lambda) {
        detail::require_lambda(lambda);
        const double q = std::exp(-2.0 * pi * lambda);
        const double one_minus_q = -std::expm1(-2.0 * pi * lambda);
        const double decay = -std::expm1(-pi * lambda);
        // |c_n sinh(n pi z)| <= exp(-n pi lambda)/(1-q) on the reduced cell
        for (long n = 1; n < 10000000; ++n) {
            c_.push_back(1.0 / std::expm1(2.0 * pi * lambda * n));
            const double tail = std::exp(-(n + 1) * pi * lambda) / (one_minus_q * decay);
            if (tail < tol) break;
        }
        double s = 0.0;
        for (std::size_t n = c_.size(); n >= 1; --n) s += static_cast<double>(n) * c_[n - 1];
        (void)q;
        eta_i_ = Complex(0.0, -pi * pi / 12.0 * (1.0 - 24.0 * s));
        eta_lambda_ = zeta_reduced(Complex(lambda, 0.0)).real();
    }

    double lambda() const { return lambda_; }
    Complex eta_i() const { return eta_i_; }
    double eta_lambda() const { return eta_lambda_; }
    const std::vector<double>& q_coefficients() const { return c_; }

    // Shift count k with Re(z - 2 k lambda) in [-lambda, lambda].
    long cell(Complex z) const { return std::lround(z.real() / (2.0 * lambda_)); }

    Complex zeta(Complex z) const {
        check_finite(z);
        const long k = cell(z);
        const Complex z0 = z - 2.0 * lambda_ * static_cast<double>(k);
        check_pole(z0);
        return zeta_reduced(z0) + 2.0 * eta_lambda_ * static_cast<double>(k);
    }

    Complex log_sigma(Complex z) const {
        check_finite(z);
        const long k = cell(z);
        const double kd = static_cast<double>(k);
        const Complex z0 = z - 2.0 * lambda_ * kd;
        check_pole(z0);
        Complex s = std::log(2.0 / pi) + detail::log_sinh(0.5 * pi * z0) - Complex(0.0, 0.5) * eta_i_ * z0 * z0;
        const Complex e = std::exp(pi * z0), ei = std::exp(-pi * z0);
        for (std::size_t n = c_.size(); n >= 1; --n) {
            const double p = std::exp(-2.0 * pi * lambda_ * static_cast<double>(n));
            s += std::log(1.0 - p * e) + std::log(1.0 - p * ei) - 2.0 * std::log1p(-p);
        }
        // sigma(z + 2 lambda) = -exp(2 eta_lambda (z + lambda)) sigma(z)
        return s + Complex(0.0, pi * kd) + 2.0 * eta_lambda_ * (kd * z0 + lambda_ * kd * kd);
    }

private:
    Complex zeta_reduced(Complex z) const {
        Complex s = 0.0;
        for (std::size_t n = c_.size(); n >= 1; --n) s += c_[n - 1] * std::sinh(pi * static_cast<double>(n) * z);
        return Complex(0.0, -1.0) * eta_i_ * z + 0.5 * pi * detail::coth(0.5 * pi * z) - 2.0 * pi * s;
    }

    static void check_finite(Complex z) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("non-finite argument");
    }

    void check_pole(Complex z0) const {
        const double m = 2.0 * std::round(z0.imag() / 2.0);
        if (std::abs(z0 - Complex(0.0, m)) < 64.0 * machine_eps * std::max(1.0, std::abs(z0)))
            throw PoleError("argument is a lattice point");
    }

    double lambda_;
    std::vector<double> c_;
    Complex eta_i_;
    double eta_lambda_ = 0.0;
};

inline Complex weierstrass_zeta(Complex z, double lambda, double tol = machine_eps) {
    return WeierstrassLattice(lambda, tol).zeta(z);
}

// log sigma(z_minus) - log sigma(z_plus); the imaginary part is defined mod 2 pi.
inline Complex log_sigma_ratio(Complex z_minus, Complex z_plus, double lambda) {
    const WeierstrassLattice L(lambda);
    return L.log_sigma(z_minus) - L.log_sigma(z_plus);
}

struct PotentialValue {
    Complex W;
    Complex W_z;
};

// Relative complex potential of a vortex at i beta (and its image at -i beta) in the strip
// 0 < eta < 1, solitary or 2 lambda-periodic.
class ComplexPotential {
public:
    explicit ComplexPotential(const VortexConfig& cfg, double pole_eps = 1e-12) : cfg_(cfg), pole_eps_(pole_eps) {
        cfg_.validate();
        if (cfg_.periodic()) {
            const WeierstrassLattice L(*cfg_.half_period);
            c_ = L.q_coefficients();
        }
    }

    const VortexConfig& config() const { return cfg_; }

    PotentialValue operator()(Complex zeta) const {
        check(zeta);
        if (cfg_.gamma == 0.0) return {zeta, 1.0};
        const Complex f = cfg_.gamma / Complex(0.0, 2.0 * pi);
        const Complex ib(0.0, cfg_.beta);
        if (!cfg_.periodic()) {
            const Complex a = 0.5 * pi * (zeta - ib), b = 0.5 * pi * (zeta + ib);
            return {f * (detail::log_sinh(a) - detail::log_sinh(b)) + zeta,
                    f * 0.5 * pi * (detail::coth(a) - detail::coth(b)) + 1.0};
        }
        const double lam = *cfg_.half_period;
        const long k = std::lround(zeta.real() / (2.0 * lam));
        const double kd = static_cast<double>(k);
        const Complex z0 = zeta - 2.0 * lam * kd;
        const Complex a = 0.5 * pi * (z0 - ib), b = 0.5 * pi * (z0 + ib);
        Complex bracket = detail::log_sinh(a) - detail::log_sinh(b);
        Complex dsum = 0.0;
        const Complex em = std::exp(2.0 * a), ep = std::exp(2.0 * b);
        const Complex emi = 1.0 / em, epi = 1.0 / ep;
        for (std::size_t n = c_.size(); n >= 1; --n) {
            const double nd = static_cast<double>(n);
            const double p = std::exp(-2.0 * pi * lam * nd);
            bracket += std::log(1.0 - p * em) - std::log(1.0 - p * ep) + std::log(1.0 - p * emi) -
                       std::log(1.0 - p * epi);
            dsum += c_[n - 1] * detail::sinpi(nd * cfg_.beta) * std::cosh(pi * nd * z0);
        }
        const Complex Wz = f * (0.5 * pi * (detail::coth(a) - detail::coth(b)) + Complex(0.0, 4.0 * pi) * dsum) + 1.0;
        // Quasi-period shift is real: W(z + 2 lambda) = W(z) + 2 lambda - gamma beta
        const Complex W = f * bracket + z0 + kd * (2.0 * lam - cfg_.gamma * cfg_.beta);
        return {W, Wz};
    }

    Complex velocity(Complex zeta) const { return (*this)(zeta).W_z; }
    double stream(Complex zeta) const { return (*this)(zeta).W.imag(); }

private:
    void check(Complex zeta) const {
        if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) throw DomainError("non-finite argument");
        if (cfg_.gamma == 0.0) return;
        Complex z = zeta;
        if (cfg_.periodic()) {
            const double lam = *cfg_.half_period;
            z -= 2.0 * lam * std::round(z.real() / (2.0 * lam));
        }
        for (double s : {1.0, -1.0}) {
            const double m = 2.0 * std::round((z.imag() - s * cfg_.beta) / 2.0);
            if (std::abs(z - Complex(0.0, s * cfg_.beta + m)) < pole_eps_)
                throw PoleError("evaluation point within " + std::to_string(pole_eps_) + " of a vortex");
        }
    }

    VortexConfig cfg_;
    double pole_eps_;
    std::vector<double> c_;
};

inline PotentialValue complex_potential(Complex zeta, const VortexConfig& cfg, double pole_eps = 1e-12) {
    return ComplexPotential(cfg, pole_eps)(zeta);
}

struct LaurentCoeffs {
    Complex c_minus1;
    Complex c0;
    Complex c1;
};

// Coefficients of W_z = c_{-1}/(z - i beta) + c0 + c1 (z - i beta) + ...
inline LaurentCoeffs solitary_laurent_coeffs(const VortexConfig& cfg) {
    cfg.validate();
    if (cfg.periodic()) throw DomainError("Laurent coefficients are tabulated for the solitary potential only");
    if (cfg.beta == 0.0) throw DomainError("Laurent expansion about i beta needs beta != 0");
    const double cot = detail::cospi(cfg.beta) / detail::sinpi(cfg.beta);
    const Complex two_pi_i(0.0, 2.0 * pi);
    return {cfg.gamma / two_pi_i, 1.0 + 0.25 * cfg.gamma * cot,
            -pi * cfg.gamma / Complex(0.0, 24.0) * (2.0 + 3.0 * cot * cot)};
}

}  // namespace wbv
