#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "planebarg/grids.hpp"
#include "planebarg/parallel.hpp"
#include "planebarg/special.hpp"
#include "planebarg/transforms.hpp"

namespace planebarg {

// ---------------------------------------------------------------------------
// Bargmann transform on R^n
// ---------------------------------------------------------------------------

// T_h u(z) = 2^{n/4} h^{-3n/4} integral e^{-pi (z-y)^2 / h} u(y) dy over a
// tensor quadrature box. Generic callable path; the grid path below is the
// fast one.
inline cplx bargmann_T(const std::function<cplx(const Vec&)>& u, const CVec& z, double h,
                       const GridSpec& quad) {
    if (h <= 0.0) throw std::invalid_argument("bargmann_T: h must be positive");
    const int n = z.n;
    KahanSum<cplx> acc;
    GridFunction::for_each_index(quad, [&](const std::array<int, 3>& idx, std::size_t) {
        const Vec y = quad.point(idx);
        double w = 1.0;
        for (int a = 0; a < n; ++a) w *= quad.axis_weight(a, idx[static_cast<std::size_t>(a)]);
        cplx q = 0.0;
        for (int a = 0; a < n; ++a) {
            const cplx d = z[a] - y[a];
            q += d * d;
        }
        const cplx term = w * std::exp(-pi * q / h) * u(y);
        if (!std::isfinite(term.real()) || !std::isfinite(term.imag()))
            throw std::runtime_error("bargmann_T: non-finite integrand");
        acc.add(term);
    });
    return std::pow(2.0, 0.25 * n) * std::pow(h, -0.75 * n) * acc.get();
}

// Grid-function path: the Gaussian kernel factors per axis, so the n-D sum is
// a sequence of 1-D contractions (N^n multiply-adds instead of N^n kernel
// evaluations).
inline cplx bargmann_T(const GridFunction& u, const CVec& z, double h) {
    if (h <= 0.0) throw std::invalid_argument("bargmann_T: h must be positive");
    const GridSpec& g = u.grid;
    const int n = g.n;

    std::array<std::vector<cplx>, 3> kern;
    for (int a = 0; a < n; ++a) {
        const int m = g.shape[static_cast<std::size_t>(a)];
        kern[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            const cplx d = z[a] - g.axis_coord(a, j);
            kern[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] =
                g.axis_weight(a, j) * std::exp(-pi * d * d / h);
        }
    }

    const int n0 = g.shape[0], n1 = g.shape[1], n2 = g.shape[2];
    KahanSum<cplx> acc;
    if (n == 1) {
        for (int i = 0; i < n0; ++i)
            acc.add(kern[0][static_cast<std::size_t>(i)] * u.values[static_cast<std::size_t>(i)]);
    } else if (n == 2) {
        for (int i = 0; i < n0; ++i) {
            KahanSum<cplx> row;
            const cplx* src = u.values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n1);
            for (int j = 0; j < n1; ++j) row.add(kern[1][static_cast<std::size_t>(j)] * src[j]);
            acc.add(kern[0][static_cast<std::size_t>(i)] * row.get());
        }
    } else {
        for (int i = 0; i < n0; ++i) {
            KahanSum<cplx> plane;
            for (int j = 0; j < n1; ++j) {
                KahanSum<cplx> row;
                const cplx* src = u.values.data() +
                                  (static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) +
                                   static_cast<std::size_t>(j)) *
                                      static_cast<std::size_t>(n2);
                for (int k = 0; k < n2; ++k) row.add(kern[2][static_cast<std::size_t>(k)] * src[k]);
                plane.add(kern[1][static_cast<std::size_t>(j)] * row.get());
            }
            acc.add(kern[0][static_cast<std::size_t>(i)] * plane.get());
        }
    }
    return std::pow(2.0, 0.25 * n) * std::pow(h, -0.75 * n) * acc.get();
}

// ---------------------------------------------------------------------------
// Phase and amplitude of the hyperplane-space transform
// ---------------------------------------------------------------------------

// phi(z, omega, t) = i pi (z.omega - t)^2
inline cplx phase_phi(const CVec& z, const Vec& omega, double t) {
    require_unit(omega, "phase_phi");
    const cplx s = cdot(z, omega) - t;
    return cplx(0.0, pi) * s * s;
}

// Im phi(x - i xi, omega, t) = pi (x.omega - t)^2 - pi (xi.omega)^2
inline double im_phase(const Vec& x, const Vec& xi, const Vec& omega, double t) {
    require_unit(omega, "im_phase");
    const double a = dot(x, omega) - t;
    const double b = dot(xi, omega);
    return pi * (a * a - b * b);
}

// a_n(z, omega, t) = H_{n-1}(sqrt(pi/h) (z.omega - t))
inline cplx amplitude_a(int n, const CVec& z, const Vec& omega, double t, double h) {
    if (n < 2) throw std::invalid_argument("amplitude_a: n must be >= 2");
    if (h <= 0.0) throw std::invalid_argument("amplitude_a: h must be positive");
    require_unit(omega, "amplitude_a");
    const cplx s = std::sqrt(pi / h) * (cdot(z, omega) - t);
    return hermite(static_cast<unsigned>(n - 1), s);
}

// ---------------------------------------------------------------------------
// Bargmann transform on hyperplane space
// ---------------------------------------------------------------------------

namespace detail {

// Inner t-sum of kernel * U for one direction. The Gaussian factor on the
// uniform t lattice is advanced by a two-term multiplicative recurrence,
// re-anchored with an exact exponential every 16 steps to bound drift.
inline cplx bargmann_b_row(const cplx* urow, int t_count, double t_lo, double dt, const cplx& c,
                           double h, int herm_order, int j_lo, int j_hi) {
    const double sph = std::sqrt(pi / h);
    const cplx a = sph * (c - t_lo);  // s_j = a - d*(j - j_lo)
    const double d = sph * dt;

    const double r = std::exp(-2.0 * d * d);
    cplx s = a;
    cplx e = std::exp(-s * s);
    cplx m = std::exp(2.0 * s * d - d * d);

    KahanSum<cplx> acc;
    for (int j = j_lo; j <= j_hi; ++j) {
        if (((j - j_lo) & 15) == 0 && j != j_lo) {
            s = a - d * static_cast<double>(j - j_lo);
            e = std::exp(-s * s);
            m = std::exp(2.0 * s * d - d * d);
        }
        cplx herm;
        switch (herm_order) {
            case 1: herm = 2.0 * s; break;
            case 2: herm = 4.0 * s * s - 2.0; break;
            default: herm = hermite(static_cast<unsigned>(herm_order), s); break;
        }
        const double w = (j == 0 || j == t_count - 1) ? 0.5 * dt : dt;
        acc.add(w * e * herm * urow[j]);
        // advance e to the next lattice node
        e *= m;
        m *= r;
        s -= d;
    }
    return acc.get();
}

}  // namespace detail

// B_h U(z): normalized oscillatory pairing of U with the Gaussian-Hermite
// kernel over hyperplane space, realized as half of the double-cover sum.
// The input must carry the signed cover parity (for odd n the even tag means
// the same function class and is accepted).
inline cplx bargmann_B(const Sinogram& U, const CVec& z, double h) {
    if (h <= 0.0) throw std::invalid_argument("bargmann_B: h must be positive");
    const int n = U.dirs.n;
    if (n % 2 == 0 && U.parity == Parity::Even)
        throw std::invalid_argument("bargmann_B: even-cover input is invalid for even n");

    const int order = n - 1;
    const double dt = U.dt();
    const double window_cut = 41.5;  // exp(-41.5) ~ 1e-18 of the kernel peak
    KahanSum<cplx> acc;
    for (std::size_t d = 0; d < U.dirs.size(); ++d) {
        const cplx c = cdot(z, U.dirs.directions[d]);
        const double reach = std::sqrt(c.imag() * c.imag() + window_cut * h / pi);
        int j_lo = static_cast<int>(std::floor((c.real() - reach - U.t_min) / dt));
        int j_hi = static_cast<int>(std::ceil((c.real() + reach - U.t_min) / dt));
        j_lo = std::max(j_lo, 0);
        j_hi = std::min(j_hi, U.t_count - 1);
        if (j_lo > j_hi) continue;
        const cplx row = detail::bargmann_b_row(
            U.values.data() + d * static_cast<std::size_t>(U.t_count), U.t_count, U.t(j_lo), dt, c,
            h, order, j_lo, j_hi);
        acc.add(U.dirs.weights[d] * row);
    }
    return bargmann_b_constant(n) * std::pow(h, -0.75 * n) * 0.5 * acc.get();
}

// Weighted magnitude e^{-pi xi^2 / h} |F(x - i xi)| in log form; safe against
// underflow of the weight.
inline double log_weighted_magnitude(const cplx& value, const Vec& xi, double h) {
    const double a = std::abs(value);
    const double logv = a > 0.0 ? std::log(a) : -745.0;
    return logv - pi * dot(xi, xi) / h;
}

// ---------------------------------------------------------------------------
// Coherent states
// ---------------------------------------------------------------------------

struct CoherentState {
    Vec x;
    Vec xi;
    double h = 1.0;
};

// psi(y; x, xi, h) = 2^{n/4} h^{-n/4} e^{-2 pi i (x-y).xi / h - pi (x-y)^2 / h}
inline cplx coherent_state_value(const CoherentState& cs, const Vec& y) {
    const int n = cs.x.n;
    const Vec d = cs.x - y;
    const double quad = dot(d, d);
    const double phase = -2.0 * pi * dot(d, cs.xi) / cs.h;
    return std::pow(2.0, 0.25 * n) * std::pow(cs.h, -0.25 * n) *
           std::exp(cplx(-pi * quad / cs.h, phase));
}

struct CoherentStats {
    double norm = 0.0;
    Vec mean_pos;
    Vec mean_freq;
    double var_pos = 0.0;   // integral |2 pi (y - mean) u|^2
    double var_freq = 0.0;  // same on the h-Fourier side
};

namespace detail {

inline void position_stats(const GridFunction& u, double& norm2, Vec& mean, double& var) {
    const GridSpec& g = u.grid;
    norm2 = 0.0;
    mean = Vec::zero(g.n);
    GridFunction::for_each_index(g, [&](const std::array<int, 3>& idx, std::size_t lin) {
        double w = 1.0;
        for (int a = 0; a < g.n; ++a) w *= g.axis_weight(a, idx[static_cast<std::size_t>(a)]);
        const double p = w * std::norm(u.values[lin]);
        norm2 += p;
        for (int a = 0; a < g.n; ++a) mean[a] += p * g.axis_coord(a, idx[static_cast<std::size_t>(a)]);
    });
    for (int a = 0; a < g.n; ++a) mean[a] /= norm2;
    double acc = 0.0;
    GridFunction::for_each_index(g, [&](const std::array<int, 3>& idx, std::size_t lin) {
        double w = 1.0;
        double r2 = 0.0;
        for (int a = 0; a < g.n; ++a) {
            w *= g.axis_weight(a, idx[static_cast<std::size_t>(a)]);
            const double dy = g.axis_coord(a, idx[static_cast<std::size_t>(a)]) - mean[a];
            r2 += dy * dy;
        }
        acc += w * 4.0 * pi * pi * r2 * std::norm(u.values[lin]);
    });
    var = acc / norm2;
}

}  // namespace detail

// Quadrature statistics of a coherent state: L2 norm, phase-space means, and
// the position/frequency spreads.
inline CoherentStats coherent_stats(const CoherentState& cs, int points_per_axis = 101,
                                    double halfwidth_sigmas = 9.0) {
    const int n = cs.x.n;
    const double sigma = std::sqrt(cs.h / (4.0 * pi));
    const double hw = halfwidth_sigmas * sigma;

    Vec lo = cs.x, hi = cs.x;
    std::array<int, 3> shape{1, 1, 1};
    for (int a = 0; a < n; ++a) {
        lo[a] -= hw;
        hi[a] += hw;
        shape[static_cast<std::size_t>(a)] = points_per_axis;
    }
    const GridSpec g = GridSpec::box(lo, hi, shape);
    const GridFunction psi = sample([&](const Vec& y) { return coherent_state_value(cs, y); }, g);

    CoherentStats st;
    double norm2 = 0.0;
    detail::position_stats(psi, norm2, st.mean_pos, st.var_pos);
    st.norm = std::sqrt(norm2);

    Vec flo = cs.xi, fhi = cs.xi;
    for (int a = 0; a < n; ++a) {
        flo[a] -= hw;
        fhi[a] += hw;
    }
    const GridSpec fg = GridSpec::box(flo, fhi, shape);
    const GridFunction spec = fourier_h(psi, cs.h, &fg);
    double fnorm2 = 0.0;
    detail::position_stats(spec, fnorm2, st.mean_freq, st.var_freq);
    return st;
}

// Husimi-type weight: e^{-pi xi^2/h} T_h u(x - i xi). Equals
// h^{-n/2} <u, psi(.; x, xi, h)>; the test suite checks both quadrature routes.
inline cplx husimi_weight(const GridFunction& u, const Vec& x, const Vec& xi, double h) {
    const cplx t = bargmann_T(u, phase_point(x, xi), h);
    return std::exp(-pi * dot(xi, xi) / h) * t;
}

struct HeisenbergResult {
    double sigma_pos = 0.0;
    double sigma_freq = 0.0;
    double product = 0.0;
    double bound = 0.0;  // n pi h
    bool ok = false;
};

// Spread product check sigma(u, x) sigma(F_h u, xi) >= n pi h. The input is
// normalized internally; means are the quadrature means.
inline HeisenbergResult heisenberg_check(const GridFunction& u, double h,
                                         const GridSpec* freq_grid = nullptr) {
    HeisenbergResult r;
    double norm2 = 0.0;
    Vec mean = Vec::zero(u.grid.n);
    double var = 0.0;
    detail::position_stats(u, norm2, mean, var);
    if (norm2 <= 0.0) throw std::invalid_argument("heisenberg_check: zero input");
    r.sigma_pos = std::sqrt(var);

    const GridFunction spec = fourier_h(u, h, freq_grid);
    double fnorm2 = 0.0;
    Vec fmean = Vec::zero(u.grid.n);
    double fvar = 0.0;
    detail::position_stats(spec, fnorm2, fmean, fvar);
    r.sigma_freq = std::sqrt(fvar);

    r.product = r.sigma_pos * r.sigma_freq;
    r.bound = u.grid.n * pi * h;
    r.ok = r.product >= r.bound * (1.0 - 1e-6);
    return r;
}

// Max discrete Cauchy-Riemann residual of f at z (central differences in the
// real and imaginary part of each coordinate).
inline double dbar_residual(const std::function<cplx(const CVec&)>& f, const CVec& z,
                            double step = 1e-3) {
    double worst = 0.0;
    for (int a = 0; a < z.n; ++a) {
        CVec zp = z, zm = z, zpi = z, zmi = z;
        zp[a] += step;
        zm[a] -= step;
        zpi[a] += cplx(0.0, step);
        zmi[a] -= cplx(0.0, step);
        const cplx dre = (f(zp) - f(zm)) / (2.0 * step);
        const cplx dim = (f(zpi) - f(zmi)) / (2.0 * step);
        worst = std::max(worst, std::abs(0.5 * (dre + cplx(0.0, 1.0) * dim)));
    }
    return worst;
}

}  // namespace planebarg
