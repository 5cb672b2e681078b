#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wbv/errors.hpp"
#include "wbv/potentials.hpp"
#include "wbv/spectral.hpp"

namespace wbv {

struct WaveParams {
    double delta = 0.0;  // 1/F^2
    double lambda = 1.0;
    int M = 16;

    void validate() const {
        if (!std::isfinite(delta) || delta < 0.0) throw DomainError("delta = 1/F^2 must be a non-negative number");
        detail::require_lambda(lambda);
        if (M < 2) throw DomainError("mode count M must be at least 2");
    }
    int size() const { return M + 4; }
    int rows() const { return M + 3; }
};

struct SolutionPoint {
    SurfaceSpectrum spec;
    double Q = 0.0;
    double kappa = 0.0;
    double beta = 0.0;

    int M() const { return spec.M(); }

    Eigen::VectorXd pack() const {
        const int M = spec.M();
        Eigen::VectorXd x(M + 4);
        for (int m = 0; m <= M; ++m) x[m] = spec.coeffs[m];
        x[M + 1] = Q;
        x[M + 2] = kappa;
        x[M + 3] = beta;
        return x;
    }

    static SolutionPoint unpack(const Eigen::VectorXd& x, double lambda) {
        const int M = static_cast<int>(x.size()) - 4;
        if (M < 0) throw DomainError("packed vector too short");
        SolutionPoint p;
        p.spec.half_period = lambda;
        p.spec.coeffs.assign(x.data(), x.data() + M + 1);
        p.Q = x[M + 1];
        p.kappa = x[M + 2];
        p.beta = x[M + 3];
        return p;
    }

    static SolutionPoint trivial(const WaveParams& params) {
        return SolutionPoint{SurfaceSpectrum::zero(params.M, params.lambda), 0.0, 0.0, 0.0};
    }

    bool is_trivial() const {
        if (Q != 0.0 || kappa != 0.0 || beta != 0.0) return false;
        return spec.max_abs_coeff() == 0.0;
    }

    double gamma() const { return gamma_periodic(kappa, beta, spec.half_period); }

    // Zero-padded copy with M_new modes (truncating if smaller).
    SolutionPoint resized(int M_new) const {
        SolutionPoint p = *this;
        p.spec.coeffs.resize(static_cast<std::size_t>(M_new) + 1, 0.0);
        return p;
    }
};

// Step scale table for finite differences: h_i = sqrt(eps) max(|x_i|, scale_i).
struct JacobianScales {
    double coeff = 1.0;
    double Q = 1.0;
    double kappa = 1.0;
    double beta = 1.0;
};

inline double default_tolerance(const Eigen::VectorXd& theta) {
    const int M = static_cast<int>(theta.size()) - 4;
    return 1e-10 * std::max({1.0, std::abs(theta[M + 1]), std::abs(theta[M + 2])});
}

// Discrete residual on the nodes xi_j = j lambda / M:
//   rows 0..M  Bernoulli  a^2/(2 |f_z|^2) + delta w - 1/2 - Q
//   row  M+1   advection  w_xixi/(1 + w_eta) at i beta minus pi kappa
//   row  M+2   normalization sum (-1)^m w_m
// Holds FFTW plans and caches; one instance per thread.
class ResidualSystem {
public:
    explicit ResidualSystem(WaveParams params, JacobianScales scales = {})
        : p_(params), scales_(scales), tf_((params.validate(), params.M)) {
        const int M = p_.M;
        cos_tab_.resize(2 * M);
        sin_tab_.resize(2 * M);
        for (int r = 0; r < 2 * M; ++r) {
            cos_tab_[r] = detail::cospi(static_cast<double>(r) / M);
            sin_tab_[r] = detail::sinpi(static_cast<double>(r) / M);
        }
        k_.resize(M + 1);
        kcoth_.resize(M + 1);
        for (int m = 0; m <= M; ++m) {
            k_[m] = m * pi / p_.lambda;
            kcoth_[m] = detail::k_coth(k_[m]);
        }
    }

    const WaveParams& params() const { return p_; }
    int size() const { return p_.size(); }
    int rows() const { return p_.rows(); }

    Eigen::VectorXd residual(const Eigen::VectorXd& theta) { return evaluate(theta).R; }
    Eigen::VectorXd residual(const SolutionPoint& pt) { return residual(pt.pack()); }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) {
        const int M = p_.M, n = size(), r = rows();
        const double sq = std::sqrt(machine_eps);
        Eval base = evaluate(theta);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(r, n);

        // coefficient columns: traces are linear in w_m, so the perturbed residual is assembled
        // from the base traces plus h times the mode's own traces
        std::vector<double> w(M + 1), wx(M + 1), we(M + 1);
        for (int m = 0; m <= M; ++m) {
            const double x = theta[m];
            volatile double xp = x + sq * std::max(std::abs(x), scales_.coeff);
            const double h = xp - x;
            for (int j = 0; j <= M; ++j) {
                const int idx = static_cast<int>((static_cast<long>(m) * j) % (2 * M));
                w[j] = base.w[j] + h * cos_tab_[idx];
                wx[j] = base.wx[j] - h * k_[m] * sin_tab_[idx];
                we[j] = base.we[j] + h * kcoth_[m] * cos_tab_[idx];
            }
            for (int j = 0; j <= M; ++j)
                J(j, m) = (bernoulli(base.a[j], w[j], wx[j], we[j], theta[M + 1]) - base.R[j]) / h;
            const AdvectionFactors& af = advection_factors(theta[M + 3]);
            const double wxx = base.wxx_v + h * af.dxx[m];
            const double wev = base.we_v + h * af.deta[m];
            J(M + 1, m) = (wxx / (1.0 + wev) - pi * theta[M + 2] - base.R[M + 1]) / h;
            J(M + 2, m) = (m % 2 == 0) ? 1.0 : -1.0;
        }
        for (int j = 0; j <= M; ++j) J(j, M + 1) = -1.0;

        // parameter columns by central differences (the residual is even in beta at the trivial point)
        const double cb = std::cbrt(machine_eps);
        for (int col : {M + 2, M + 3}) {
            const double scale = col == M + 2 ? scales_.kappa : scales_.beta;
            const double x = theta[col];
            const double h = cb * std::max(std::abs(x), scale);
            Eigen::VectorXd tp = theta, tm = theta;
            tp[col] = x + h;
            tm[col] = x - h;
            const double hh = tp[col] - tm[col];
            J.col(col) = (evaluate(tp).R - evaluate(tm).R) / hh;
        }
        return J;
    }

    // a(xi_j) for j = 0..M
    std::vector<double> a_nodes(double kappa, double beta) {
        const double g = gamma_periodic(kappa, beta, p_.lambda);
        const std::vector<double>& br = a_bracket(beta);
        std::vector<double> a(p_.M + 1);
        const double sg = fault::a_periodic_factor();
        for (int j = 0; j <= p_.M; ++j) a[j] = 1.0 - sg * g / (2.0 * p_.lambda) * br[j];
        return a;
    }

    // min |f_z| over the surface and bed nodes
    double min_fz_nodes(const SurfaceSpectrum& spec) {
        const int M = p_.M;
        Traces t = tf_.traces(spec);
        double mn = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= M; ++j) mn = std::min(mn, std::hypot(t.w_xi[j], 1.0 + t.w_eta[j]));
        std::vector<double> c(M + 1), g(M + 1);
        c[0] = 1.0 + spec.coeffs[0];
        for (int m = 1; m <= M; ++m) c[m] = spec.coeffs[m] * k_[m] * std::exp(-k_[m]) * 2.0 / (-std::expm1(-2.0 * k_[m]));
        tf_.cosine_sum(c.data(), g.data());
        for (int j = 0; j <= M; ++j) mn = std::min(mn, std::abs(g[j]));
        return mn;
    }

    NodeTransform& transform() { return tf_; }

private:
    struct Eval {
        Eigen::VectorXd R;
        std::vector<double> w, wx, we, a;
        double wxx_v = 0.0, we_v = 0.0;
    };

    struct AdvectionFactors {
        std::vector<double> dxx, deta;  // d w_xixi(i beta)/d w_m, d w_eta(i beta)/d w_m
    };

    double bernoulli(double a, double w, double wx, double we, double Q) const {
        return 0.5 * a * a / (wx * wx + (1.0 + we) * (1.0 + we)) + p_.delta * w - 0.5 - Q;
    }

    Eval evaluate(const Eigen::VectorXd& theta) {
        const int M = p_.M;
        if (theta.size() != size()) throw DomainError("packed vector has the wrong length for M");
        for (int i = 0; i < theta.size(); ++i)
            if (!std::isfinite(theta[i])) throw NumericalError("non-finite unknown", i);
        const double Q = theta[M + 1], kappa = theta[M + 2], beta = theta[M + 3];
        detail::require_beta(beta);
        Eval e;
        e.a = a_nodes(kappa, beta);
        SurfaceSpectrum spec{std::vector<double>(theta.data(), theta.data() + M + 1), p_.lambda};
        Traces t = tf_.traces(spec);
        e.w = std::move(t.w);
        e.wx = std::move(t.w_xi);
        e.we = std::move(t.w_eta);
        e.R.resize(rows());
        for (int j = 0; j <= M; ++j) {
            e.R[j] = bernoulli(e.a[j], e.w[j], e.wx[j], e.we[j], Q);
            if (!std::isfinite(e.R[j])) throw NumericalError("non-finite Bernoulli residual at node " + std::to_string(j), j);
        }
        const AdvectionFactors& af = advection_factors(beta);
        double wxx = 0.0, wev = 0.0;
        for (int m = M; m >= 0; --m) {
            wxx += theta[m] * af.dxx[m];
            wev += theta[m] * af.deta[m];
        }
        e.wxx_v = wxx;
        e.we_v = wev;
        e.R[M + 1] = wxx / (1.0 + wev) - pi * kappa;
        if (!std::isfinite(e.R[M + 1])) throw NumericalError("non-finite advection residual", M + 1);
        double nrm = 0.0;
        for (int m = M; m >= 0; --m) nrm += (m % 2 == 0 ? 1.0 : -1.0) * theta[m];
        e.R[M + 2] = nrm;
        return e;
    }

    // beta + 2 sum_k sinh(k pi beta/lambda)/sinh(k pi/lambda) cos(k pi j/M), aliased onto the nodes
    const std::vector<double>& a_bracket(double beta) {
        auto it = bracket_cache_.find(beta);
        if (it != bracket_cache_.end()) return it->second;
        if (bracket_cache_.size() > 16) bracket_cache_.clear();
        const int M = p_.M;
        std::vector<double> out(M + 1, beta);
        if (beta != 0.0) {
            const long K = a_periodic_terms(beta, p_.lambda);
            std::vector<double> fold(M + 1, 0.0);
            for (long k = K; k >= 1; --k) {
                long r = k % (2L * M);
                if (r > M) r = 2L * M - r;
                fold[r] += 2.0 * detail::sinh_ratio(beta, k * pi / p_.lambda);
            }
            std::vector<double> s(M + 1);
            tf_.cosine_sum(fold.data(), s.data());
            for (int j = 0; j <= M; ++j) out[j] = beta + s[j];
        }
        return bracket_cache_.emplace(beta, std::move(out)).first->second;
    }

    const AdvectionFactors& advection_factors(double beta) {
        auto it = adv_cache_.find(beta);
        if (it != adv_cache_.end()) return it->second;
        if (adv_cache_.size() > 16) adv_cache_.clear();
        const int M = p_.M;
        AdvectionFactors f;
        f.dxx.assign(M + 1, 0.0);
        f.deta.assign(M + 1, 0.0);
        f.deta[0] = 1.0;
        for (int m = 1; m <= M; ++m) {
            f.dxx[m] = -k_[m] * k_[m] * detail::sinh_ratio(beta, k_[m]);
            f.deta[m] = k_[m] * detail::cosh_ratio(beta, k_[m]);
        }
        return adv_cache_.emplace(beta, std::move(f)).first->second;
    }

    WaveParams p_;
    JacobianScales scales_;
    NodeTransform tf_;
    std::vector<double> cos_tab_, sin_tab_, k_, kcoth_;
    std::map<double, std::vector<double>> bracket_cache_;
    std::map<double, AdvectionFactors> adv_cache_;
};

inline Eigen::VectorXd residual(const SolutionPoint& theta, const WaveParams& params) {
    ResidualSystem sys(params);
    return sys.residual(theta.pack());
}

inline Eigen::MatrixXd jacobian(const SolutionPoint& theta, const WaveParams& params, JacobianScales scales = {}) {
    ResidualSystem sys(params, scales);
    return sys.jacobian(theta.pack());
}

struct Hyperplane {
    Eigen::VectorXd anchor;
    Eigen::VectorXd normal;
};

struct NewtonSettings {
    double tol = 0.0;  // <= 0 selects 1e-10 max(1, |Q|, |kappa|)
    int max_iter = 15;
    int max_halvings = 30;
    double rcond_min = 1e-15;
};

struct NewtonResult {
    Eigen::VectorXd theta;
    int iterations = 0;
    double residual_norm = 0.0;
    // Solution of [J; n^T] v = e_last from the last factorization (empty if none was made).
    Eigen::VectorXd null_hint;
    int bordered_sign = 0;
};

namespace detail {

inline int lu_det_sign(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    int s = static_cast<int>(std::lround(lu.permutationP().determinant()));
    const auto& U = lu.matrixLU();
    for (int i = 0; i < U.rows(); ++i) {
        if (U(i, i) < 0) s = -s;
        if (U(i, i) == 0) return 0;
    }
    return s;
}

inline Eigen::MatrixXd bordered(const Eigen::MatrixXd& J, const Eigen::VectorXd& c) {
    Eigen::MatrixXd B(J.rows() + 1, J.cols());
    B.topRows(J.rows()) = J;
    B.row(J.rows()) = c.transpose();
    return B;
}

}  // namespace detail

inline NewtonResult newton_correct(ResidualSystem& sys, const Eigen::VectorXd& theta0, const Hyperplane& plane,
                                   const NewtonSettings& settings = {}) {
    const int n = sys.size();
    if (theta0.size() != n || plane.anchor.size() != n || plane.normal.size() != n)
        throw DomainError("Newton inputs have inconsistent sizes");
    const double nn = plane.normal.norm();
    if (!(std::abs(nn - 1.0) < 1e-8)) throw DomainError("hyperplane normal must be a unit vector");

    auto full = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd F(n);
        F.head(n - 1) = sys.residual(x);
        F[n - 1] = plane.normal.dot(x - plane.anchor);
        return F;
    };
    auto tol_at = [&](const Eigen::VectorXd& x) { return settings.tol > 0 ? settings.tol : default_tolerance(x); };

    NewtonResult res;
    res.theta = theta0;
    Eigen::VectorXd F = full(res.theta);
    double norm = F.lpNorm<Eigen::Infinity>();
    for (int it = 0;; ++it) {
        if (norm < tol_at(res.theta)) {
            res.iterations = it;
            res.residual_norm = norm;
            return res;
        }
        if (it >= settings.max_iter)
            throw NonconvergenceError("Newton did not converge in " + std::to_string(settings.max_iter) +
                                          " iterations; residual " + std::to_string(norm),
                                      norm, it);
        const Eigen::MatrixXd B = detail::bordered(sys.jacobian(res.theta), plane.normal);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        const double rc = lu.rcond();
        if (!(rc >= settings.rcond_min))
            throw SingularJacobianError("singular bordered Jacobian (rcond " + std::to_string(rc) + ")", rc);
        const Eigen::VectorXd dx = lu.solve(-F);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[n - 1] = 1.0;
        res.null_hint = lu.solve(e);
        res.bordered_sign = detail::lu_det_sign(lu);

        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= settings.max_halvings; ++h, t *= 0.5) {
            const Eigen::VectorXd xt = res.theta + t * dx;
            Eigen::VectorXd Ft;
            try {
                Ft = full(xt);
            } catch (const Error&) {
                continue;
            }
            const double nt = Ft.lpNorm<Eigen::Infinity>();
            if (nt < norm || nt < tol_at(xt)) {
                res.theta = xt;
                F = Ft;
                norm = nt;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NonconvergenceError("damped Newton step failed to reduce the residual (" + std::to_string(norm) + ")",
                                      norm, it + 1);
    }
}

inline SolutionPoint newton_correct(const SolutionPoint& theta0, const Hyperplane& plane, const WaveParams& params,
                                    const NewtonSettings& settings = {}) {
    ResidualSystem sys(params);
    return SolutionPoint::unpack(newton_correct(sys, theta0.pack(), plane, settings).theta, params.lambda);
}

inline Eigen::VectorXd unit_vector(int n, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    return e;
}

struct TangentResult {
    Eigen::VectorXd t;
    int bordered_sign = 0;
};

inline TangentResult tangent_with_sign(ResidualSystem& sys, const Eigen::VectorXd& theta,
                                       const std::optional<Eigen::VectorXd>& previous) {
    const int n = sys.size();
    const Eigen::MatrixXd J = sys.jacobian(theta);
    TangentResult r;
    if (!previous) {
        // rank check and null vector from a QR factorization of J^T
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J.transpose());
        qr.setThreshold(1e-11);
        if (qr.rank() != J.rows()) throw DegeneratePointError("Jacobian rank " + std::to_string(qr.rank()) +
                                                              " leaves a null space of dimension other than one");
        Eigen::MatrixXd Qm = qr.householderQ();
        r.t = Qm.col(n - 1);
        if (r.t[n - 1] < 0) r.t = -r.t;
        const Eigen::MatrixXd B = detail::bordered(J, r.t);
        r.bordered_sign = detail::lu_det_sign(Eigen::PartialPivLU<Eigen::MatrixXd>(B));
        return r;
    }
    const Eigen::MatrixXd B = detail::bordered(J, *previous);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const double rc = lu.rcond();
    if (!(rc > 1e-13)) throw DegeneratePointError("bordered tangent system is singular (rcond " + std::to_string(rc) + ")");
    r.t = lu.solve(unit_vector(n, n - 1));
    r.t.normalize();
    if (r.t.dot(*previous) < 0) r.t = -r.t;
    r.bordered_sign = detail::lu_det_sign(lu);
    return r;
}

inline Eigen::VectorXd tangent(const SolutionPoint& theta, const WaveParams& params,
                               const std::optional<Eigen::VectorXd>& previous = std::nullopt) {
    ResidualSystem sys(params);
    return tangent_with_sign(sys, theta.pack(), previous).t;
}

struct PointDiagnostics {
    double residual_norm = 0.0;
    double min_fz = 1.0;
    double gamma = 0.0;
    double decay_ratio = 0.0;
    double a_min = 1.0;
    double margin = std::numeric_limits<double>::infinity();
    double normalization = 0.0;
    bool monotone = true;
};

inline PointDiagnostics diagnose(ResidualSystem& sys, const SolutionPoint& pt) {
    PointDiagnostics d;
    const Eigen::VectorXd x = pt.pack();
    d.residual_norm = sys.residual(x).lpNorm<Eigen::Infinity>();
    d.min_fz = sys.min_fz_nodes(pt.spec);
    d.gamma = pt.gamma();
    d.decay_ratio = pt.spec.decay_ratio();
    const auto a = sys.a_nodes(pt.kappa, pt.beta);
    d.a_min = *std::min_element(a.begin(), a.end());
    d.margin = admissibility_margin_periodic(pt.kappa, pt.beta, pt.spec.half_period);
    d.normalization = pt.spec.normalization_defect();
    d.monotone = monotonicity(pt.spec).monotone;
    return d;
}

struct ContinuationSettings {
    double ds0 = 0.01;
    double ds_min = 1e-7;
    double ds_max = 0.2;
    int predictor_order = 2;
    int max_steps = 400;
    int fast_iterations = 3;
    double min_turn_cos = 0.9;  // reject steps whose tangent turns more than ~25 degrees
    NewtonSettings newton;
    std::optional<double> beta_target;
    double margin_min = 1e-4;
    double min_fz_min = 1e-2;
    double decay_max = 1e-6;
};

struct CurveEvent {
    int index = 0;
    std::string kind;
};

struct CurveRecord {
    WaveParams params;
    ContinuationSettings settings;
    std::vector<SolutionPoint> points;
    std::vector<Eigen::VectorXd> tangents;
    std::vector<double> steps;      // chord length from the previous point
    std::vector<double> arclength;  // accumulated
    std::vector<int> newton_iterations;
    std::vector<int> bordered_sign;
    std::vector<PointDiagnostics> diagnostics;
    std::vector<CurveEvent> events;
    std::string stop_reason;
};

class CurveStalledError : public Error {
public:
    CurveStalledError(const std::string& what, std::shared_ptr<CurveRecord> partial)
        : Error(what), partial_(std::move(partial)) {}
    const CurveRecord& partial() const { return *partial_; }

private:
    std::shared_ptr<CurveRecord> partial_;
};

namespace detail {

// Lagrange extrapolation of vectors y_i at nodes s_i to s.
inline Eigen::VectorXd lagrange(const std::vector<double>& s, const std::vector<const Eigen::VectorXd*>& y, double x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(y[0]->size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        double L = 1.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            if (j != i) L *= (x - s[j]) / (s[i] - s[j]);
        out += L * *y[i];
    }
    return out;
}

}  // namespace detail

inline CurveRecord continue_curve(ResidualSystem& sys, const SolutionPoint& start, const ContinuationSettings& st) {
    if (st.predictor_order < 0 || st.predictor_order > 3) throw DomainError("predictor order must be 0..3");
    if (!(st.ds0 > 0 && st.ds_min > 0 && st.ds_max >= st.ds0)) throw DomainError("step sizes must satisfy 0 < ds0 <= ds_max");
    const WaveParams& prm = sys.params();
    if (start.M() != prm.M) throw DomainError("start point has the wrong mode count");
    const int n = sys.size();
    const int ib = n - 1;

    auto rec = std::make_shared<CurveRecord>();
    rec->params = prm;
    rec->settings = st;

    Eigen::VectorXd x0 = start.pack();
    const double r0 = sys.residual(x0).lpNorm<Eigen::Infinity>();
    if (!(r0 < (st.newton.tol > 0 ? st.newton.tol : default_tolerance(x0))))
        throw DomainError("start point does not solve the residual (norm " + std::to_string(r0) + ")");

    TangentResult t0;
    if (start.is_trivial()) {
        t0.t = unit_vector(n, ib);
        t0.bordered_sign = detail::lu_det_sign(Eigen::PartialPivLU<Eigen::MatrixXd>(detail::bordered(sys.jacobian(x0), t0.t)));
    } else {
        t0 = tangent_with_sign(sys, x0, std::nullopt);
    }

    auto push = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& t, int sign, double step, int iters) {
        SolutionPoint p = SolutionPoint::unpack(x, prm.lambda);
        rec->diagnostics.push_back(diagnose(sys, p));
        rec->points.push_back(std::move(p));
        rec->tangents.push_back(t);
        rec->bordered_sign.push_back(sign);
        rec->steps.push_back(step);
        rec->arclength.push_back(rec->arclength.empty() ? 0.0 : rec->arclength.back() + step);
        rec->newton_iterations.push_back(iters);
        const std::size_t k = rec->points.size() - 1;
        if (k > 0) {
            const double b0 = rec->tangents[k - 1][ib], b1 = t[ib];
            if ((b0 > 0 && b1 < 0) || (b0 < 0 && b1 > 0)) rec->events.push_back({static_cast<int>(k), "beta_fold"});
            if (rec->bordered_sign[k - 1] * sign < 0) rec->events.push_back({static_cast<int>(k), "det_sign_change"});
        }
    };
    push(x0, t0.t, t0.bordered_sign, 0.0, 0);

    auto stalled = [&](const std::string& why) {
        rec->stop_reason = "stalled";
        throw CurveStalledError("continuation stalled: " + why, rec);
    };

    double ds = st.ds0;
    for (int step = 0; step < st.max_steps; ++step) {
        const std::size_t k = rec->points.size() - 1;
        const Eigen::VectorXd xk = rec->points[k].pack();
        const Eigen::VectorXd& tk = rec->tangents[k];
        bool done = false;
        std::string last_failure;
        while (true) {
            if (ds < st.ds_min) stalled(last_failure.empty() ? "step below ds_min" : last_failure);
            // predictor
            const std::size_t np = std::min<std::size_t>(k + 1, static_cast<std::size_t>(st.predictor_order) + 1);
            Eigen::VectorXd xp, np_vec;
            if (np <= 1) {
                xp = xk + ds * tk;
                np_vec = tk;
            } else {
                std::vector<double> s;
                std::vector<const Eigen::VectorXd*> ys, ts;
                std::vector<Eigen::VectorXd> packed;
                packed.reserve(np);
                for (std::size_t i = k + 1 - np; i <= k; ++i) packed.push_back(rec->points[i].pack());
                for (std::size_t i = 0; i < np; ++i) {
                    s.push_back(rec->arclength[k + 1 - np + i]);
                    ys.push_back(&packed[i]);
                    ts.push_back(&rec->tangents[k + 1 - np + i]);
                }
                const double s_new = rec->arclength[k] + ds;
                xp = detail::lagrange(s, ys, s_new);
                np_vec = detail::lagrange(s, ts, s_new);
                np_vec.normalize();
            }
            if (!(std::abs(xp[ib]) < 1.0)) {
                if (ds * 0.5 < st.ds_min) {
                    rec->stop_reason = "beta_range";
                    done = true;
                    break;
                }
                ds *= 0.5;
                continue;
            }
            NewtonResult nr;
            try {
                nr = newton_correct(sys, xp, Hyperplane{xp, np_vec}, st.newton);
            } catch (const Error& e) {
                last_failure = e.what();
                ds *= 0.5;
                continue;
            }
            TangentResult tn;
            if (nr.null_hint.size() == n) {
                tn.t = nr.null_hint.normalized();
                if (tn.t.dot(tk) < 0) tn.t = -tn.t;
                tn.bordered_sign = nr.bordered_sign;
            } else {
                try {
                    tn = tangent_with_sign(sys, nr.theta, np_vec);
                } catch (const Error& e) {
                    last_failure = e.what();
                    ds *= 0.5;
                    continue;
                }
            }
            if (tn.t.dot(tk) < st.min_turn_cos) {
                last_failure = "tangent turned too sharply";
                ds *= 0.5;
                continue;
            }
            const double chord = (nr.theta - xk).norm();
            // land exactly on the target altitude if this step crosses it
            if (st.beta_target) {
                const double bt = *st.beta_target, b0 = xk[ib], b1 = nr.theta[ib];
                if ((b0 - bt) * (b1 - bt) <= 0 && b1 != b0 && b0 != bt) {
                    const Eigen::VectorXd anchor = xk + (nr.theta - xk) * ((bt - b0) / (b1 - b0));
                    NewtonResult land;
                    try {
                        land = newton_correct(sys, anchor, Hyperplane{anchor, unit_vector(n, ib)}, st.newton);
                    } catch (const Error& e) {
                        last_failure = std::string("landing on the target altitude failed: ") + e.what();
                        ds *= 0.5;
                        continue;
                    }
                    TangentResult tl = tangent_with_sign(sys, land.theta, tk);
                    push(land.theta, tl.t, tl.bordered_sign, (land.theta - xk).norm(), land.iterations);
                    rec->stop_reason = "beta_target";
                    done = true;
                    break;
                }
            }
            push(nr.theta, tn.t, tn.bordered_sign, chord, nr.iterations);
            if (nr.iterations <= st.fast_iterations) ds = std::min(2.0 * ds, st.ds_max);
            break;
        }
        if (done) break;
        const PointDiagnostics& d = rec->diagnostics.back();
        if (d.decay_ratio > st.decay_max) {
            rec->stop_reason = "under_resolved";
            break;
        }
        if (d.margin < st.margin_min) {
            rec->stop_reason = "admissibility_margin";
            break;
        }
        if (d.min_fz < st.min_fz_min) {
            rec->stop_reason = "min_fz";
            break;
        }
    }
    if (rec->stop_reason.empty()) rec->stop_reason = "max_steps";
    return *rec;
}

inline CurveRecord continue_curve(const SolutionPoint& start, const WaveParams& params, const ContinuationSettings& st) {
    ResidualSystem sys(params);
    return continue_curve(sys, start, st);
}

}  // namespace wbv
