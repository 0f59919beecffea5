#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "planebarg/bargmann.hpp"
#include "planebarg/grids.hpp"
#include "planebarg/special.hpp"

namespace planebarg {

// ---------------------------------------------------------------------------
// Cotangent points and canonical transforms
// ---------------------------------------------------------------------------

// Point of the cotangent bundle of hyperplane space. (eta, tau) is the raw
// covector with eta orthogonal to omega. The scaled constructor accepts the
// fiber parametrization (2 pi tau eta, 2 pi tau) used by the canonical map.
struct CotangentPointP {
    Vec omega;
    double t = 0.0;
    Vec eta;
    double tau = 0.0;

    static CotangentPointP from_raw(const Vec& omega, double t, const Vec& eta, double tau) {
        require_unit(omega, "CotangentPointP");
        if (std::abs(dot(eta, omega)) > 1e-10 * std::max(1.0, norm(eta)))
            throw std::invalid_argument("CotangentPointP: eta must be orthogonal to omega");
        return {omega, t, eta, tau};
    }

    static CotangentPointP from_scaled(const Vec& omega, double t, const Vec& eta_s, double tau_s) {
        return from_raw(omega, t, (2.0 * pi * tau_s) * eta_s, 2.0 * pi * tau_s);
    }
};

// Point of the weighted-phase graph {(x - i xi, 2 pi xi)}.
struct LambdaPhiPoint {
    CVec z;
    CVec zeta_dual;
};

inline double lambda_phi_defect(const LambdaPhiPoint& p) {
    double worst = 0.0;
    for (int i = 0; i < p.z.n; ++i)
        worst = std::max(worst, std::abs(p.zeta_dual[i] - cplx(-2.0 * pi * p.z[i].imag(), 0.0)));
    return worst;
}

// kappa_B in the scaled fiber variables: (omega, t, 2 pi tau eta, 2 pi tau)
// maps to (t omega - eta - i tau omega, 2 pi tau omega). The stored raw
// covector is converted first; a zero covector maps to the zero section.
inline LambdaPhiPoint kappa_B(const CotangentPointP& p) {
    const int n = p.omega.n;
    LambdaPhiPoint out;
    out.z = CVec::zero(n);
    out.zeta_dual = CVec::zero(n);
    const double scale = std::max({1.0, std::abs(p.tau), norm(p.eta)});
    if (std::abs(p.tau) <= 1e-14 * scale) {
        if (norm(p.eta) > 1e-12 * scale)
            throw std::invalid_argument("kappa_B: tau = 0 with eta != 0 is outside the fiber chart");
        for (int i = 0; i < n; ++i) out.z[i] = p.t * p.omega[i];
        return out;
    }
    const double tau_s = p.tau / (2.0 * pi);
    for (int i = 0; i < n; ++i) {
        const double eta_s = p.eta[i] / p.tau;
        out.z[i] = cplx(p.t * p.omega[i] - eta_s, -tau_s * p.omega[i]);
        out.zeta_dual[i] = p.tau * p.omega[i];
    }
    return out;
}

// Inverse map: (x - i xi, 2 pi xi) with xi != 0 pulls back to the antipodal
// pair +-(xi/|xi|, x.xi/|xi|, 2 pi |xi| (-x + (x.xi) xi/|xi|^2), 2 pi |xi|).
// The canonical representative comes first.
inline std::pair<CotangentPointP, CotangentPointP> kappa_B_inv(const Vec& x, const Vec& xi) {
    const double r = norm(xi);
    if (r <= 0.0) throw std::invalid_argument("kappa_B_inv: xi must be nonzero");
    const int n = x.n;
    Vec omega = (1.0 / r) * xi;
    double t = dot(x, omega);
    Vec eta = Vec::zero(n);
    const double xxi = dot(x, xi);
    for (int i = 0; i < n; ++i) eta[i] = 2.0 * pi * r * (-x[i] + xxi * xi[i] / (r * r));
    double tau = 2.0 * pi * r;

    CotangentPointP a = CotangentPointP::from_raw(omega, t, eta, tau);
    CotangentPointP b = CotangentPointP::from_raw(-omega, -t, -eta, -tau);
    if (is_canonical_representative(a.omega, a.t)) return {a, b};
    return {b, a};
}

// Canonical transform of the Euclidean-side transform: (x, 2 pi xi) maps to
// (x - i xi, 2 pi xi).
inline LambdaPhiPoint kappa_T(const Vec& x, const Vec& xi) {
    LambdaPhiPoint p;
    p.z = phase_point(x, xi);
    p.zeta_dual = CVec::zero(x.n);
    for (int i = 0; i < x.n; ++i) p.zeta_dual[i] = 2.0 * pi * xi[i];
    return p;
}

// Maps sinogram-space detections to object phase space through kappa_B.
// Detections with tau = 0 carry no object frequency and are rejected.
inline std::vector<std::pair<Vec, Vec>> wavefront_map(const std::vector<CotangentPointP>& dets) {
    std::vector<std::pair<Vec, Vec>> out;
    out.reserve(dets.size());
    for (const auto& p : dets) {
        if (std::abs(p.tau) <= 1e-14 * std::max(1.0, norm(p.eta)))
            throw std::invalid_argument("wavefront_map: detection with tau = 0");
        const LambdaPhiPoint lp = kappa_B(p);
        out.emplace_back(real_part(lp.z), frequency_part(lp.z));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Charts and phase analysis
// ---------------------------------------------------------------------------

// Local chart of the sphere: axes permuted so the largest |omega_j| is last,
// then omega_last = sign * sqrt(1 - |omega'|^2). The permutation keeps the
// remaining axes in increasing order.
struct SphereChart {
    int n = 2;
    std::array<int, 3> perm{0, 1, 2};  // chart axis -> original axis
    double sign = 1.0;
};

inline SphereChart make_chart(const Vec& omega) {
    SphereChart c;
    c.n = omega.n;
    int imax = 0;
    for (int i = 1; i < omega.n; ++i)
        if (std::abs(omega[i]) > std::abs(omega[imax])) imax = i;
    int k = 0;
    for (int i = 0; i < omega.n; ++i)
        if (i != imax) c.perm[static_cast<std::size_t>(k++)] = i;
    c.perm[static_cast<std::size_t>(omega.n - 1)] = imax;
    c.sign = omega[imax] >= 0.0 ? 1.0 : -1.0;
    return c;
}

// zeta = (omega'_1, ..., omega'_{n-1}, t) in the chart frame.
inline Vec chart_coordinates(const SphereChart& c, const Vec& omega, double t) {
    Vec zeta = Vec::zero(c.n);
    for (int i = 0; i < c.n - 1; ++i) zeta[i] = omega[c.perm[static_cast<std::size_t>(i)]];
    zeta[c.n - 1] = t;
    return zeta;
}

inline void chart_point(const SphereChart& c, const Vec& zeta, Vec& omega, double& t) {
    omega = Vec::zero(c.n);
    double w2 = 0.0;
    for (int i = 0; i < c.n - 1; ++i) {
        omega[c.perm[static_cast<std::size_t>(i)]] = zeta[i];
        w2 += zeta[i] * zeta[i];
    }
    if (w2 >= 1.0) throw std::domain_error("chart_point: |omega'| must stay below 1");
    omega[c.perm[static_cast<std::size_t>(c.n - 1)]] = c.sign * std::sqrt(1.0 - w2);
    t = zeta[c.n - 1];
}

namespace detail {

// Richardson-extrapolated central differences (one extrapolation level).
inline double fd_derivative(const std::function<double(const Vec&)>& f, Vec zeta, int a,
                            double step) {
    const auto central = [&](double s) {
        Vec zp = zeta, zm = zeta;
        zp[a] += s;
        zm[a] -= s;
        return (f(zp) - f(zm)) / (2.0 * s);
    };
    const double d1 = central(step);
    const double d2 = central(0.5 * step);
    return (4.0 * d2 - d1) / 3.0;
}

inline double fd_second(const std::function<double(const Vec&)>& f, Vec zeta, int a, int b,
                        double step) {
    const auto stencil = [&](double s) {
        if (a == b) {
            Vec zp = zeta, zm = zeta;
            zp[a] += s;
            zm[a] -= s;
            return (f(zp) - 2.0 * f(zeta) + f(zm)) / (s * s);
        }
        Vec pp = zeta, pm = zeta, mp = zeta, mm = zeta;
        pp[a] += s;
        pp[b] += s;
        pm[a] += s;
        pm[b] -= s;
        mp[a] -= s;
        mp[b] += s;
        mm[a] -= s;
        mm[b] -= s;
        return (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * s * s);
    };
    const double d1 = stencil(step);
    const double d2 = stencil(0.5 * step);
    return (4.0 * d2 - d1) / 3.0;
}

inline cplx fd_derivative_c(const std::function<cplx(const Vec&)>& f, Vec zeta, int a,
                            double step) {
    const auto central = [&](double s) {
        Vec zp = zeta, zm = zeta;
        zp[a] += s;
        zm[a] -= s;
        return (f(zp) - f(zm)) / (2.0 * s);
    };
    const cplx d1 = central(step);
    const cplx d2 = central(0.5 * step);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace detail

inline constexpr double phase_fd_step = 1e-4;

// Im phi as a function of the chart coordinates, for fixed (x, xi).
inline std::function<double(const Vec&)> im_phase_in_chart(const SphereChart& chart, const Vec& x,
                                                           const Vec& xi) {
    return [chart, x, xi](const Vec& zeta) {
        Vec omega;
        double t;
        chart_point(chart, zeta, omega, t);
        const double a = dot(x, omega) - t;
        const double b = dot(xi, omega);
        return pi * (a * a - b * b);
    };
}

struct CriticalPointResult {
    Vec omega;           // canonical representative of the stationary direction
    double t = 0.0;
    double grad_norm = 0.0;  // FD gradient of Im phi at the point, should vanish
    std::string degenerate_set;
};

// Stationary-phase structure of Im phi at (x, xi != 0): the non-degenerate
// critical point is omega = +-xi/|xi|, t = x.omega; the degenerate set is
// x.omega = t with xi.omega = 0.
inline CriticalPointResult critical_points(const Vec& x, const Vec& xi) {
    const double r = norm(xi);
    if (r <= 0.0) throw std::invalid_argument("critical_points: xi must be nonzero");
    CriticalPointResult res;
    res.omega = (1.0 / r) * xi;
    res.t = dot(x, res.omega);
    canonical_representative(res.omega, res.t);

    const SphereChart chart = make_chart(res.omega);
    const auto f = im_phase_in_chart(chart, x, xi);
    const Vec zeta0 = chart_coordinates(chart, res.omega, res.t);
    double g2 = 0.0;
    for (int a = 0; a < x.n; ++a) {
        const double g = detail::fd_derivative(f, zeta0, a, phase_fd_step);
        g2 += g * g;
    }
    res.grad_norm = std::sqrt(g2);
    res.degenerate_set =
        "directions with x.omega = t and xi.omega = 0 (a full equator of hyperplanes through x)";
    return res;
}

struct HessianResult {
    double eigen_min = 0.0;       // smallest eigenvalue of the Im phi Hessian in the chart
    cplx det_zzeta{};             // FD determinant of the mixed phase Hessian
    cplx det_closed{};            // chart closed form of the same determinant
    double det_rel_err = 0.0;
};

// Hessian data at the non-degenerate critical point of (x, xi).
inline HessianResult hessian_check(const Vec& x, const Vec& xi) {
    const double r = norm(xi);
    if (r <= 0.0) throw std::invalid_argument("hessian_check: xi must be nonzero");
    const int n = x.n;
    Vec omega = (1.0 / r) * xi;
    double t = dot(x, omega);
    canonical_representative(omega, t);
    const SphereChart chart = make_chart(omega);

    const auto f = im_phase_in_chart(chart, x, xi);
    const Vec zeta0 = chart_coordinates(chart, omega, t);

    HessianResult res;
    Eigen::MatrixXd H(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            const double v = detail::fd_second(f, zeta0, a, b, phase_fd_step);
            H(a, b) = v;
            H(b, a) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    res.eigen_min = es.eigenvalues().minCoeff();

    // phi'_z in the permuted frame as a function of the chart coordinates;
    // z is real (= x) at the critical point evaluation.
    const CVec zc = complexify(x);
    const auto phi_z = [&](const Vec& zeta, int row) {
        Vec om;
        double tt;
        chart_point(chart, zeta, om, tt);
        const cplx s = cdot(zc, om) - tt;
        return cplx(0.0, 2.0 * pi) * s * om[chart.perm[static_cast<std::size_t>(row)]];
    };
    Eigen::MatrixXcd M(n, n);
    for (int row = 0; row < n; ++row) {
        const auto comp = [&](const Vec& zeta) { return phi_z(zeta, row); };
        for (int col = 0; col < n; ++col)
            M(row, col) = detail::fd_derivative_c(comp, zeta0, col, phase_fd_step);
    }
    res.det_zzeta = M.determinant();

    // Closed form (2 pi)^n (xi_n/omega_n)^{n-1} (-i omega_n) det(E + w' w'^T / omega_n^2),
    // in the chart frame, with det(E + w' w'^T / omega_n^2) = 1/omega_n^2.
    const double omega_last = omega[chart.perm[static_cast<std::size_t>(n - 1)]];
    const double xi_last = xi[chart.perm[static_cast<std::size_t>(n - 1)]];
    const double ratio = xi_last / omega_last;  // equals xi.omega at the critical point
    res.det_closed = std::pow(2.0 * pi, n) * std::pow(ratio, n - 1) *
                     cplx(0.0, -omega_last) / (omega_last * omega_last);
    res.det_rel_err = std::abs(res.det_zzeta - res.det_closed) / std::abs(res.det_closed);
    return res;
}

// Smallest |eigenvalue| of the Im phi Hessian at a degenerate critical point
// (t = x.omega with xi.omega = 0); analytically zero.
inline double degenerate_hessian_eigen(const Vec& x, const Vec& xi, const Vec& omega_perp) {
    require_unit(omega_perp, "degenerate_hessian_eigen");
    if (std::abs(dot(xi, omega_perp)) > 1e-10)
        throw std::invalid_argument("degenerate_hessian_eigen: omega must be orthogonal to xi");
    const int n = x.n;
    const SphereChart chart = make_chart(omega_perp);
    const auto f = im_phase_in_chart(chart, x, xi);
    const Vec zeta0 = chart_coordinates(chart, omega_perp, dot(x, omega_perp));
    Eigen::MatrixXd H(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            const double v = detail::fd_second(f, zeta0, a, b, phase_fd_step);
            H(a, b) = v;
            H(b, a) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) best = std::min(best, std::abs(es.eigenvalues()(i)));
    return best;
}

// ---------------------------------------------------------------------------
// Decay scans
// ---------------------------------------------------------------------------

enum class DecayClass : std::uint8_t { exponential_decay, rapid_decay, slow };

inline const char* to_string(DecayClass c) {
    switch (c) {
        case DecayClass::exponential_decay: return "exponential_decay";
        case DecayClass::rapid_decay: return "rapid_decay";
        default: return "slow";
    }
}

struct DecaySample {
    double h = 0.0;
    double magnitude = 0.0;      // e^{-pi xi^2/h} |transform|
    double log_magnitude = 0.0;  // computed before any clamping
    bool clamped = false;
};

struct DecayThresholds {
    double exp_slope = 0.01;  // slope threshold in 1/h for exponential decay
    double poly_order = 3.0;  // slope threshold in log h for rapid decay
};

struct DecayProfile {
    Vec x;
    Vec xi;
    std::vector<DecaySample> samples;
    double fitted_rate = 0.0;   // slope of log magnitude against 1/h
    double loglog_slope = 0.0;  // slope of log magnitude against log h
    DecayClass classification = DecayClass::slow;
    bool any_clamped = false;
};

namespace detail {

inline double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double m = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    return denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
}

}  // namespace detail

// Weighted-magnitude decay scan of a transform evaluator at z = x - i xi. The
// evaluator receives (z, h). Classification: exponential if the log magnitude
// falls in 1/h faster than exp_slope; otherwise rapid if it falls in log h
// with order at least poly_order; otherwise slow.
inline DecayProfile decay_scan(const std::function<cplx(const CVec&, double)>& evaluator,
                               const Vec& x, const Vec& xi, const std::vector<double>& h_list,
                               const DecayThresholds& thr = {}) {
    if (norm(xi) <= 0.0) throw std::invalid_argument("decay_scan: xi must be nonzero");
    if (h_list.size() < 4) throw std::invalid_argument("decay_scan: need at least 4 h values");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1]))
            throw std::invalid_argument("decay_scan: h_list must be strictly decreasing");

    DecayProfile prof;
    prof.x = x;
    prof.xi = xi;
    const CVec z = phase_point(x, xi);
    for (double h : h_list) {
        DecaySample s;
        s.h = h;
        const cplx val = evaluator(z, h);
        s.log_magnitude = log_weighted_magnitude(val, xi, h);
        s.clamped = s.log_magnitude <= -690.0;  // below normal double range
        s.magnitude = s.clamped ? 0.0 : std::exp(s.log_magnitude);
        prof.any_clamped = prof.any_clamped || s.clamped;
        prof.samples.push_back(s);
    }

    std::vector<double> inv_h, log_h, log_m;
    for (const auto& s : prof.samples) {
        if (s.clamped) continue;
        inv_h.push_back(1.0 / s.h);
        log_h.push_back(std::log(s.h));
        log_m.push_back(s.log_magnitude);
    }
    if (log_m.size() < 2) {
        // everything underflowed: the transform vanishes faster than anything
        // we can resolve
        prof.fitted_rate = -std::numeric_limits<double>::infinity();
        prof.classification = DecayClass::exponential_decay;
        return prof;
    }
    prof.fitted_rate = detail::lsq_slope(inv_h, log_m);
    prof.loglog_slope = detail::lsq_slope(log_h, log_m);
    if (prof.fitted_rate <= -thr.exp_slope)
        prof.classification = DecayClass::exponential_decay;
    else if (prof.loglog_slope >= thr.poly_order)
        prof.classification = DecayClass::rapid_decay;
    else
        prof.classification = DecayClass::slow;
    return prof;
}

inline DecayProfile decay_scan(const GridFunction& u, const Vec& x, const Vec& xi,
                               const std::vector<double>& h_list, const DecayThresholds& thr = {}) {
    return decay_scan([&u](const CVec& z, double h) { return bargmann_T(u, z, h); }, x, xi, h_list,
                      thr);
}

inline DecayProfile decay_scan(const Sinogram& U, const Vec& x, const Vec& xi,
                               const std::vector<double>& h_list, const DecayThresholds& thr = {}) {
    return decay_scan([&U](const CVec& z, double h) { return bargmann_B(U, z, h); }, x, xi, h_list,
                      thr);
}

// ---------------------------------------------------------------------------
// Degenerate-point cutoff experiment
// ---------------------------------------------------------------------------

inline double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

// Cutoff adapted to (x0, xi0): chi_1(omega) is 1 on the band of directions
// orthogonal to some frequency in the rho-ball around xi0 and 0 where
// |nu.omega| could reach 1/2; chi_2(t) is 1 on [-T0, T0] and 0 outside
// (-T1, T1). Both are even.
struct CutoffSpec {
    Vec x0;
    Vec xi0;
    double rho = 0.25;
    double T0 = 0.0;
    double T1 = 0.0;
    double band_inner = 0.0;  // chi_1 = 1 for |xi0_hat . omega| <= band_inner
    double band_outer = 0.0;  // chi_1 = 0 for |xi0_hat . omega| >= band_outer
};

inline CutoffSpec make_cutoff_spec(const Vec& x0, const Vec& xi0, double rho) {
    const double r = norm(xi0);
    if (r <= 0.0) throw std::invalid_argument("make_cutoff_spec: xi0 must be nonzero");
    if (!(rho > 0.0) || rho > std::min(0.5 * r, 1.0))
        throw std::invalid_argument("make_cutoff_spec: need 0 < rho <= min(|xi0|/2, 1)");
    CutoffSpec spec;
    spec.x0 = x0;
    spec.xi0 = xi0;
    spec.rho = rho;
    const double sin_a = rho / r;
    const double alpha = std::asin(sin_a);
    const double outer = std::cos(pi / 3.0 + alpha);
    if (!(sin_a < outer))
        throw std::invalid_argument("make_cutoff_spec: rho too large for the direction band");
    spec.band_inner = sin_a;
    spec.band_outer = outer;

    // sup |x.omega| over the ball around x0 and the direction sets; the
    // decomposition of x0 along xi0_hat gives a tight upper bound.
    const double p = std::abs(dot(x0, xi0)) / r;
    double perp2 = dot(x0, x0) - p * p;
    const double perp = std::sqrt(std::max(0.0, perp2));
    spec.T0 = p * sin_a + perp + rho;
    spec.T1 = std::max(p * outer + perp + rho, spec.T0 + 0.5);
    return spec;
}

inline double cutoff_chi(const CutoffSpec& spec, const Vec& omega, double t) {
    const double r = norm(spec.xi0);
    const double c = std::abs(dot(omega, spec.xi0)) / r;
    double chi1;
    if (c <= spec.band_inner)
        chi1 = 1.0;
    else if (c >= spec.band_outer)
        chi1 = 0.0;
    else
        chi1 = 1.0 - smoothstep((c - spec.band_inner) / (spec.band_outer - spec.band_inner));
    const double at = std::abs(t);
    double chi2;
    if (at <= spec.T0)
        chi2 = 1.0;
    else if (at >= spec.T1)
        chi2 = 0.0;
    else
        chi2 = 1.0 - smoothstep((at - spec.T0) / (spec.T1 - spec.T0));
    return chi1 * chi2;
}

inline Sinogram apply_cutoff(const Sinogram& U, const CutoffSpec& spec) {
    Sinogram out = U;
    for (std::size_t d = 0; d < U.dirs.size(); ++d) {
        const Vec& om = U.dirs.directions[d];
        for (int j = 0; j < U.t_count; ++j) out.at(d, j) *= cutoff_chi(spec, om, U.t(j));
    }
    return out;
}

struct CutoffResult {
    double measured_rate = 0.0;
    double bound_rate = 0.0;  // pi |xi0|^2 / 8
    bool ok = false;
    std::vector<std::pair<double, double>> sup_log;  // (h, sup log weighted magnitude)
};

// Measures the exponential decay rate of the weighted magnitude of the
// transform of chi * U over the rho-balls around (x0, xi0) and checks it
// against the degenerate-region bound.
inline CutoffResult degenerate_cutoff_experiment(const Sinogram& U, const CutoffSpec& spec,
                                                 const std::vector<double>& h_list,
                                                 unsigned threads = 0) {
    if (h_list.size() < 4)
        throw std::invalid_argument("degenerate_cutoff_experiment: need at least 4 h values");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1]))
            throw std::invalid_argument("degenerate_cutoff_experiment: h_list must decrease");

    const Sinogram chiU = apply_cutoff(U, spec);
    const int n = U.dirs.n;

    // deterministic sample points in B_rho(x0) x B_rho(xi0)
    std::vector<std::pair<Vec, Vec>> pts;
    pts.emplace_back(spec.x0, spec.xi0);
    for (int a = 0; a < n; ++a) {
        Vec xp = spec.x0, xm = spec.x0;
        xp[a] += 0.5 * spec.rho;
        xm[a] -= 0.5 * spec.rho;
        pts.emplace_back(xp, spec.xi0);
        pts.emplace_back(xm, spec.xi0);
        Vec fp = spec.xi0, fm = spec.xi0;
        fp[a] += 0.5 * spec.rho;
        fm[a] -= 0.5 * spec.rho;
        pts.emplace_back(spec.x0, fp);
        pts.emplace_back(spec.x0, fm);
    }

    CutoffResult res;
    res.bound_rate = pi * dot(spec.xi0, spec.xi0) / 8.0;
    std::vector<double> sup(h_list.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
        const double h = h_list[hi];
        std::vector<double> logs(pts.size());
        parallel_for(
            pts.size(),
            [&](std::size_t p) {
                const cplx val = bargmann_B(chiU, phase_point(pts[p].first, pts[p].second), h);
                logs[p] = log_weighted_magnitude(val, pts[p].second, h);
            },
            threads);
        for (double lv : logs) sup[hi] = std::max(sup[hi], lv);
        res.sup_log.emplace_back(h, sup[hi]);
    }

    std::vector<double> inv_h, log_m;
    for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
        if (sup[hi] <= -690.0) continue;
        inv_h.push_back(1.0 / h_list[hi]);
        log_m.push_back(sup[hi]);
    }
    if (log_m.size() < 2) {
        res.measured_rate = std::numeric_limits<double>::infinity();
        res.ok = true;  // everything vanished below resolvable magnitude
        return res;
    }
    res.measured_rate = -detail::lsq_slope(inv_h, log_m);
    res.ok = res.measured_rate >= 0.9 * res.bound_rate;
    return res;
}

}  // namespace planebarg
