#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "planebarg/grids.hpp"
#include "planebarg/parallel.hpp"
#include "planebarg/special.hpp"

namespace planebarg {

namespace detail {

// FFTW plan creation/destruction is not thread safe; executions on disjoint
// buffers are. Plans use FFTW_ESTIMATE so results are reproducible.
inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

inline void fft_inplace(std::vector<cplx>& a, int sign) {
    const int n = static_cast<int>(a.size());
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

// Frequency of DFT bin k for sample spacing dt (length n buffer).
inline double fft_freq(int k, int n, double dt) {
    const int kk = (k <= n / 2) ? k : k - n;
    return kk / (dt * n);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Radon transform
// ---------------------------------------------------------------------------

// Quadrature for the (n-1)-dimensional integral over a hyperplane: uniform
// tensor rule on [-radius, radius]^{n-1} in an orthonormal frame of omega-perp.
struct HyperplaneQuad {
    double radius = 6.0;
    double spacing = 1.0 / 16.0;
};

// Orthonormal basis of omega-perp built by Gram-Schmidt from the standard
// basis vectors least aligned with omega; ties break to the smallest index.
inline std::vector<Vec> perp_basis(const Vec& omega) {
    const int n = omega.n;
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(omega[a]) < std::abs(omega[b]); });

    std::vector<Vec> basis;
    for (int idx = 0; idx < n - 1; ++idx) {
        Vec e = Vec::zero(n);
        e[order[static_cast<std::size_t>(idx)]] = 1.0;
        Vec v = e - dot(e, omega) * omega;
        for (const Vec& b : basis) v = v - dot(v, b) * b;
        const double len = norm(v);
        if (len < 1e-12) throw std::runtime_error("perp_basis: degenerate direction");
        basis.push_back((1.0 / len) * v);
    }
    return basis;
}

inline void require_unit(const Vec& omega, const char* who) {
    if (std::abs(norm(omega) - 1.0) > 1e-10)
        throw std::invalid_argument(std::string(who) + ": omega must be a unit vector");
}

// Integral of f over the hyperplane {x : x.omega = t}.
inline cplx radon(const std::function<cplx(const Vec&)>& f, const Vec& omega, double t,
                  const HyperplaneQuad& quad = {}) {
    require_unit(omega, "radon");
    const int n = omega.n;
    const auto basis = perp_basis(omega);
    const int m = static_cast<int>(std::ceil(2.0 * quad.radius / quad.spacing)) + 1;
    const double step = 2.0 * quad.radius / (m - 1);

    const Vec base = t * omega;
    KahanSum<cplx> acc;
    if (n == 2) {
        for (int i = 0; i < m; ++i) {
            const double s = -quad.radius + step * i;
            const double w = (i == 0 || i == m - 1) ? 0.5 * step : step;
            acc.add(w * f(base + s * basis[0]));
        }
    } else {
        for (int i = 0; i < m; ++i) {
            const double s1 = -quad.radius + step * i;
            const double w1 = (i == 0 || i == m - 1) ? 0.5 * step : step;
            const Vec row = base + s1 * basis[0];
            for (int j = 0; j < m; ++j) {
                const double s2 = -quad.radius + step * j;
                const double w2 = (j == 0 || j == m - 1) ? 0.5 * step : step;
                acc.add(w1 * w2 * f(row + s2 * basis[1]));
            }
        }
    }
    const cplx val = acc.get();
    if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
        throw std::runtime_error("radon: non-finite integrand");
    return val;
}

// Clamped Catmull-Rom interpolation on a uniform 1-D table.
inline cplx interp_cubic(const cplx* data, int count, double pos) {
    const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, count - 2);
    const double u = pos - j;
    const auto tap = [&](int i) { return data[std::clamp(i, 0, count - 1)]; };
    const cplx p0 = tap(j - 1), p1 = tap(j), p2 = tap(j + 1), p3 = tap(j + 2);
    return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

// Interpolated evaluation of a grid function at an arbitrary point
// (separable Catmull-Rom, clamped at the box faces).
inline cplx interp_grid(const GridFunction& g, const Vec& y) {
    const GridSpec& spec = g.grid;
    const int n = spec.n;
    std::array<double, 3> pos{};
    for (int a = 0; a < n; ++a) pos[static_cast<std::size_t>(a)] = (y[a] - spec.origin[a]) / spec.spacing[a];

    if (n == 1) return interp_cubic(g.values.data(), spec.shape[0], pos[0]);
    if (n == 2) {
        std::array<cplx, 4> col{};
        const int j = std::clamp(static_cast<int>(std::floor(pos[0])), 0, spec.shape[0] - 2);
        for (int di = 0; di < 4; ++di) {
            const int i = std::clamp(j - 1 + di, 0, spec.shape[0] - 1);
            col[static_cast<std::size_t>(di)] = interp_cubic(
                g.values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.shape[1]),
                spec.shape[1], pos[1]);
        }
        return interp_cubic(col.data(), 4, pos[0] - j + 1.0);
    }
    std::array<cplx, 4> col{};
    const int j0 = std::clamp(static_cast<int>(std::floor(pos[0])), 0, spec.shape[0] - 2);
    for (int di = 0; di < 4; ++di) {
        const int i = std::clamp(j0 - 1 + di, 0, spec.shape[0] - 1);
        std::array<cplx, 4> row{};
        const int j1 = std::clamp(static_cast<int>(std::floor(pos[1])), 0, spec.shape[1] - 2);
        for (int dj = 0; dj < 4; ++dj) {
            const int jj = std::clamp(j1 - 1 + dj, 0, spec.shape[1] - 1);
            const std::size_t base =
                (static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.shape[1]) +
                 static_cast<std::size_t>(jj)) *
                static_cast<std::size_t>(spec.shape[2]);
            row[static_cast<std::size_t>(dj)] = interp_cubic(g.values.data() + base, spec.shape[2], pos[2]);
        }
        col[static_cast<std::size_t>(di)] = interp_cubic(row.data(), 4, pos[1] - j1 + 1.0);
    }
    return interp_cubic(col.data(), 4, pos[0] - j0 + 1.0);
}

inline cplx radon(const GridFunction& u, const Vec& omega, double t,
                  const HyperplaneQuad& quad = {}) {
    return radon([&u](const Vec& y) { return interp_grid(u, y); }, omega, t, quad);
}

// Dual Radon transform: integral of U(omega, x.omega) over the sphere.
// Requires an input that is even on the double cover.
inline cplx dual_radon(const Sinogram& U, const Vec& x) {
    if (parity_sign(U.parity, U.dirs.n) != 1)
        throw std::invalid_argument("dual_radon: input must be even on hyperplane space");
    KahanSum<cplx> acc;
    const double dt = U.dt();
    for (std::size_t d = 0; d < U.dirs.size(); ++d) {
        const double s = dot(x, U.dirs.directions[d]);
        if (s < U.t_min - 1e-12 || s > U.t_max + 1e-12)
            throw std::domain_error("dual_radon: x.omega outside the t grid");
        const double pos = (s - U.t_min) / dt;
        acc.add(U.dirs.weights[d] *
                interp_cubic(U.values.data() + d * static_cast<std::size_t>(U.t_count), U.t_count, pos));
    }
    return acc.get();
}

// ---------------------------------------------------------------------------
// t-axis Fourier multipliers
// ---------------------------------------------------------------------------

enum class FilterMode : std::uint8_t {
    even_derivative,     // (-1)^k d^{2k}/dt^{2k}, odd n
    hilbert_derivative,  // (-1)^{k-1}/pi d^{2k-1}/dt^{2k-1} of the Hilbert transform, even n
    fft_multiplier,      // |2 pi tau|^{n-1}
};

struct FilterSpec {
    int n = 2;
    FilterMode mode = FilterMode::fft_multiplier;

    FilterSpec(int dim, FilterMode m) : n(dim), mode(m) {
        if (m == FilterMode::even_derivative && dim % 2 == 0)
            throw std::invalid_argument("FilterSpec: even_derivative needs odd n");
        if (m == FilterMode::hilbert_derivative && dim % 2 == 1)
            throw std::invalid_argument("FilterSpec: hilbert_derivative needs even n");
    }
};

namespace detail {

inline int padded_length(const Sinogram& s, int pad_factor) {
    if (pad_factor <= 0) {
        // enough zero padding that periodization of slowly decaying filtered
        // tails stays below the library's quadrature tolerances
        const double span = s.t_max - s.t_min;
        pad_factor = std::max(4, static_cast<int>(std::ceil(512.0 / span)));
    }
    return s.t_count * pad_factor;
}

// Apply a frequency multiplier per direction through a zero-padded FFT.
inline Sinogram apply_multiplier(const Sinogram& s, const std::function<cplx(double)>& mult,
                                 int pad_factor) {
    Sinogram out = s;
    const int np = padded_length(s, pad_factor);
    const double dt = s.dt();
    std::vector<cplx> buf(static_cast<std::size_t>(np));
    for (std::size_t d = 0; d < s.dirs.size(); ++d) {
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        for (int j = 0; j < s.t_count; ++j) buf[static_cast<std::size_t>(j)] = s.at(d, j);
        fft_inplace(buf, FFTW_FORWARD);
        for (int k = 0; k < np; ++k) {
            const double tau = fft_freq(k, np, dt);
            cplx m = mult(tau);
            if (np % 2 == 0 && k == np / 2 && m.imag() != 0.0) m = 0.0;  // odd multiplier at Nyquist
            buf[static_cast<std::size_t>(k)] *= m;
        }
        fft_inplace(buf, FFTW_BACKWARD);
        const double scale = 1.0 / np;
        for (int j = 0; j < s.t_count; ++j) out.at(d, j) = scale * buf[static_cast<std::size_t>(j)];
    }
    return out;
}

}  // namespace detail

inline Parity flip_parity(Parity p, int n) {
    if (n % 2 == 0) return p == Parity::Even ? Parity::Signed : Parity::Even;
    return p;  // for odd n both tags mean the even cover; see hilbert_t note
}

// Hilbert transform in t (convolution with PV 1/t), realized as the Fourier
// multiplier -i pi sgn(tau) with sgn(0) = 0. Flips the cover parity: an even
// input produces an odd output. For odd n the two parity tags coincide and the
// odd output is not representable by a tag; the tag is left unchanged there.
inline Sinogram hilbert_t(const Sinogram& s, int pad_factor = 0) {
    Sinogram out = detail::apply_multiplier(
        s,
        [](double tau) {
            if (tau > 0.0) return cplx(0.0, -pi);
            if (tau < 0.0) return cplx(0.0, pi);
            return cplx(0.0, 0.0);
        },
        pad_factor);
    out.parity = flip_parity(s.parity, s.dirs.n);
    return out;
}

// |D_t|^{n-1} U. The derivative modes follow the integer-order reduction
// (pure even derivative for odd n, odd derivative of the Hilbert transform
// over pi for even n); fft_multiplier applies |2 pi tau|^{n-1} directly.
inline Sinogram abs_dt_power(const Sinogram& s, int n, FilterMode mode = FilterMode::fft_multiplier,
                             int pad_factor = 0) {
    if (n < 2) throw std::invalid_argument("abs_dt_power: n must be >= 2");
    FilterSpec spec(n, mode);  // validates mode vs parity of n
    const int order = n - 1;

    if (mode == FilterMode::fft_multiplier) {
        return detail::apply_multiplier(
            s, [order](double tau) { return cplx(std::pow(std::abs(2.0 * pi * tau), order), 0.0); },
            pad_factor);
    }
    if (mode == FilterMode::even_derivative) {
        const int k = order / 2;  // n = 2k+1
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return detail::apply_multiplier(
            s,
            [order, sign](double tau) {
                cplx m = std::pow(cplx(0.0, 2.0 * pi * tau), order);
                return sign * m;
            },
            pad_factor);
    }
    // hilbert_derivative: n = 2k even, order = 2k-1
    const int k = n / 2;
    const double sign = ((k - 1) % 2 == 0) ? 1.0 : -1.0;
    Sinogram h = hilbert_t(s, pad_factor);
    Sinogram out = detail::apply_multiplier(
        h, [order](double tau) { return std::pow(cplx(0.0, 2.0 * pi * tau), order); }, pad_factor);
    out.parity = s.parity;
    for (auto& v : out.values) v *= sign / pi;
    return out;
}

// ---------------------------------------------------------------------------
// h-Fourier transform
// ---------------------------------------------------------------------------

namespace detail {

// One-axis dense contraction: out(k, rest) = sum_j kernel(k, j) in(j, rest),
// built directly from the quadrature; grids need not match the FFT lattice.
inline GridFunction fourier_axis(const GridFunction& in, const GridSpec& out_spec, int axis,
                                 double h, int sign) {
    const GridSpec& gi = in.grid;
    GridSpec mixed = gi;
    mixed.origin[axis] = out_spec.origin[axis];
    mixed.spacing[axis] = out_spec.spacing[axis];
    mixed.shape[static_cast<std::size_t>(axis)] = out_spec.shape[static_cast<std::size_t>(axis)];

    const int n_in = gi.shape[static_cast<std::size_t>(axis)];
    const int n_out = mixed.shape[static_cast<std::size_t>(axis)];

    std::vector<cplx> kernel(static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_in));
    for (int k = 0; k < n_out; ++k) {
        const double eta = mixed.axis_coord(axis, k);
        for (int j = 0; j < n_in; ++j) {
            const double y = gi.axis_coord(axis, j);
            const double w = gi.axis_weight(axis, j);
            kernel[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_in) +
                   static_cast<std::size_t>(j)] =
                w * std::exp(cplx(0.0, sign * 2.0 * pi * y * eta / h));
        }
    }

    // strides of the axis in the row-major layout
    std::size_t stride_in = 1, stride_out = 1, outer = 1, inner = 1;
    for (int a = axis + 1; a < gi.n; ++a) {
        stride_in *= static_cast<std::size_t>(gi.shape[static_cast<std::size_t>(a)]);
        stride_out *= static_cast<std::size_t>(mixed.shape[static_cast<std::size_t>(a)]);
        inner *= static_cast<std::size_t>(gi.shape[static_cast<std::size_t>(a)]);
    }
    for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(gi.shape[static_cast<std::size_t>(a)]);

    GridFunction out;
    out.grid = mixed;
    out.values.assign(mixed.size(), cplx(0.0));
    for (std::size_t o = 0; o < outer; ++o) {
        const cplx* src = in.values.data() + o * static_cast<std::size_t>(n_in) * stride_in;
        cplx* dst = out.values.data() + o * static_cast<std::size_t>(n_out) * stride_out;
        for (int k = 0; k < n_out; ++k) {
            const cplx* ker = kernel.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(n_in);
            for (std::size_t r = 0; r < inner; ++r) {
                KahanSum<cplx> acc;
                for (int j = 0; j < n_in; ++j)
                    acc.add(ker[j] * src[static_cast<std::size_t>(j) * stride_in + r]);
                dst[static_cast<std::size_t>(k) * stride_out + r] = acc.get();
            }
        }
    }
    return out;
}

inline GridFunction fourier_impl(const GridFunction& u, double h, const GridSpec* out_spec,
                                 int sign) {
    if (h <= 0.0) throw std::invalid_argument("fourier_h: h must be positive");
    const GridSpec spec = out_spec ? *out_spec : u.grid;
    GridFunction cur = u;
    for (int a = 0; a < u.grid.n; ++a) cur = fourier_axis(cur, spec, a, h, sign);
    const double amp = std::pow(h, -0.5 * u.grid.n);
    for (auto& v : cur.values) v *= amp;
    return cur;
}

}  // namespace detail

// F_h u(eta) = h^{-n/2} integral e^{-2 pi i y.eta / h} u(y) dy, evaluated on
// the dual grid (defaults to the input grid) by dense separable quadrature.
inline GridFunction fourier_h(const GridFunction& u, double h, const GridSpec* out_spec = nullptr) {
    return detail::fourier_impl(u, h, out_spec, -1);
}

// Inverse transform: same kernel with the opposite sign.
inline GridFunction fourier_h_inv(const GridFunction& u, double h,
                                  const GridSpec* out_spec = nullptr) {
    return detail::fourier_impl(u, h, out_spec, +1);
}

// ---------------------------------------------------------------------------
// Filtered backprojection
// ---------------------------------------------------------------------------

// u(x) = fbp_scale(n) * Rdual(|D_t|^{n-1} U)(x) for U = R u.
inline GridFunction inverse_radon(const Sinogram& U, int n, const GridSpec& eval,
                                  FilterMode mode = FilterMode::fft_multiplier,
                                  unsigned threads = 0) {
    if (parity_sign(U.parity, U.dirs.n) != 1)
        throw std::invalid_argument("inverse_radon: input must be even on hyperplane space");
    const Sinogram filtered = abs_dt_power(U, n, mode);
    const double scale = fbp_scale(n);
    GridFunction out;
    out.grid = eval;
    out.values.assign(eval.size(), cplx(0.0));

    std::vector<Vec> points(eval.size());
    GridFunction::for_each_index(eval, [&](const std::array<int, 3>& idx, std::size_t lin) {
        points[lin] = eval.point(idx);
    });
    parallel_for(
        eval.size(), [&](std::size_t i) { out.values[i] = scale * dual_radon(filtered, points[i]); },
        threads);
    return out;
}

// ---------------------------------------------------------------------------
// Plancherel pairing and range moments
// ---------------------------------------------------------------------------

struct PlancherelResult {
    cplx lhs{};   // plancherel_constant(n) * integral(u v)
    cplx rhs{};   // hyperplane-space pairing of |D_t|^{n-1} R u with R v
    double rel_gap = 0.0;
};

inline cplx integrate_product(const GridFunction& u, const GridFunction& v) {
    KahanSum<cplx> acc;
    GridFunction::for_each_index(u.grid, [&](const std::array<int, 3>& idx, std::size_t lin) {
        double w = 1.0;
        for (int a = 0; a < u.grid.n; ++a) w *= u.grid.axis_weight(a, idx[static_cast<std::size_t>(a)]);
        acc.add(w * u.values[lin] * v.values[lin]);
    });
    return acc.get();
}

// Hyperplane-space pairing (1/2) sum over the double cover of A * B.
inline cplx pair_sinograms(const Sinogram& A, const Sinogram& B) {
    KahanSum<cplx> acc;
    for (std::size_t d = 0; d < A.dirs.size(); ++d) {
        KahanSum<cplx> row;
        for (int j = 0; j < A.t_count; ++j) row.add(A.t_weight(j) * A.at(d, j) * B.at(d, j));
        acc.add(A.dirs.weights[d] * row.get());
    }
    return 0.5 * acc.get();
}

inline PlancherelResult plancherel_check(const std::function<cplx(const Vec&)>& u,
                                         const std::function<cplx(const Vec&)>& v, int n,
                                         const GridSpec& xquad, const DirectionGrid& dirs,
                                         double t_max, int t_count,
                                         const HyperplaneQuad& quad = {},
                                         FilterMode mode = FilterMode::fft_multiplier) {
    const GridFunction ug = sample(u, xquad);
    const GridFunction vg = sample(v, xquad);
    const cplx lhs = plancherel_constant(n) * integrate_product(ug, vg);

    const auto ru = sample_sino([&](const Vec& w, double t) { return radon(u, w, t, quad); }, dirs,
                                -t_max, t_max, t_count, Parity::Even);
    const auto rv = sample_sino([&](const Vec& w, double t) { return radon(v, w, t, quad); }, dirs,
                                -t_max, t_max, t_count, Parity::Even);
    const cplx rhs = pair_sinograms(abs_dt_power(ru, n, mode), rv);

    PlancherelResult r;
    r.lhs = lhs;
    r.rhs = rhs;
    const double denom = std::abs(lhs);
    r.rel_gap = denom > 1e-300 ? std::abs(lhs - rhs) / denom : std::abs(rhs);
    return r;
}

// Monomial exponents of total degree k in n variables, lexicographic.
inline std::vector<std::array<int, 3>> homogeneous_exponents(int n, int k) {
    std::vector<std::array<int, 3>> out;
    if (n == 2) {
        for (int a = k; a >= 0; --a) out.push_back({a, k - a, 0});
    } else {
        for (int a = k; a >= 0; --a)
            for (int b = k - a; b >= 0; --b) out.push_back({a, b, k - a - b});
    }
    return out;
}

// Relative residual of fitting the k-th t-moment of U by a homogeneous
// polynomial of degree k in omega (weighted least squares over the direction
// grid). A vanishing moment vector fits trivially and returns zero.
inline double moment_residual(const Sinogram& U, int k) {
    if (k < 0) throw std::invalid_argument("moment_residual: k must be >= 0");
    const std::size_t nd = U.dirs.size();
    Eigen::VectorXcd m(static_cast<Eigen::Index>(nd));
    double scale = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
        KahanSum<cplx> acc;
        for (int j = 0; j < U.t_count; ++j)
            acc.add(U.t_weight(j) * U.at(d, j) * std::pow(U.t(j), k));
        m(static_cast<Eigen::Index>(d)) = acc.get();
        for (int j = 0; j < U.t_count; ++j)
            scale = std::max(scale, std::abs(U.at(d, j)) * std::pow(std::abs(U.t(j)), k));
    }

    const auto expo = homogeneous_exponents(U.dirs.n, k);
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(expo.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(nd));
    for (std::size_t d = 0; d < nd; ++d) {
        w(static_cast<Eigen::Index>(d)) = std::sqrt(U.dirs.weights[d]);
        const Vec& om = U.dirs.directions[d];
        for (std::size_t c = 0; c < expo.size(); ++c) {
            double mono = 1.0;
            for (int a = 0; a < U.dirs.n; ++a)
                mono *= std::pow(om[a], expo[c][static_cast<std::size_t>(a)]);
            A(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) = mono;
        }
    }
    Eigen::MatrixXcd Aw = w.asDiagonal() * A;
    Eigen::VectorXcd mw = w.asDiagonal() * m;
    const double mnorm = mw.norm();
    const double floor_norm = 1e-12 * std::max(1.0, scale * (U.t_max - U.t_min)) *
                              std::sqrt(static_cast<double>(nd));
    if (mnorm <= floor_norm) return 0.0;
    Eigen::VectorXcd coef = Aw.colPivHouseholderQr().solve(mw);
    return (Aw * coef - mw).norm() / mnorm;
}

}  // namespace planebarg
