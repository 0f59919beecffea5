#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "planebarg/special.hpp"

namespace planebarg {

// Fixed-capacity vectors for points of R^n, n <= 3. Geometry in this library
// is runtime-dimensional but never exceeds three axes.
struct Vec {
    int n = 0;
    std::array<double, 3> v{0.0, 0.0, 0.0};

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    static Vec zero(int dim) {
        Vec r;
        r.n = dim;
        return r;
    }
};

struct CVec {
    int n = 0;
    std::array<cplx, 3> v{};

    cplx& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    cplx operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    static CVec zero(int dim) {
        CVec r;
        r.n = dim;
        return r;
    }
};

inline Vec vec2(double x, double y) { return {2, {x, y, 0.0}}; }
inline Vec vec3(double x, double y, double z) { return {3, {x, y, z}}; }

inline Vec operator+(Vec a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) a[i] += b[i];
    return a;
}
inline Vec operator-(Vec a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) a[i] -= b[i];
    return a;
}
inline Vec operator*(double s, Vec a) {
    for (int i = 0; i < a.n; ++i) a[i] *= s;
    return a;
}
inline Vec operator-(Vec a) {
    for (int i = 0; i < a.n; ++i) a[i] = -a[i];
    return a;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline CVec operator-(CVec a, const CVec& b) {
    for (int i = 0; i < a.n; ++i) a[i] -= b[i];
    return a;
}

// Complex bilinear pairing z.w = sum z_j w_j (no conjugation).
inline cplx cdot(const CVec& a, const CVec& b) {
    cplx s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}
inline cplx cdot(const CVec& a, const Vec& b) {
    cplx s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

inline CVec complexify(const Vec& x) {
    CVec r = CVec::zero(x.n);
    for (int i = 0; i < x.n; ++i) r[i] = x[i];
    return r;
}

// z = x - i xi.
inline CVec phase_point(const Vec& x, const Vec& xi) {
    CVec r = CVec::zero(x.n);
    for (int i = 0; i < x.n; ++i) r[i] = cplx(x[i], -xi[i]);
    return r;
}
inline Vec real_part(const CVec& z) {
    Vec r = Vec::zero(z.n);
    for (int i = 0; i < z.n; ++i) r[i] = z[i].real();
    return r;
}
inline Vec frequency_part(const CVec& z) {
    Vec r = Vec::zero(z.n);
    for (int i = 0; i < z.n; ++i) r[i] = -z[i].imag();
    return r;
}

// ---------------------------------------------------------------------------
// Uniform box grids
// ---------------------------------------------------------------------------

struct GridSpec {
    int n = 0;
    Vec origin;            // coordinate of index (0,...,0)
    Vec spacing;           // per-axis step, > 0
    std::array<int, 3> shape{1, 1, 1};

    // Inclusive uniform grid on the box [lo, hi]^axes.
    static GridSpec box(const Vec& lo, const Vec& hi, const std::array<int, 3>& points) {
        GridSpec g;
        g.n = lo.n;
        g.origin = lo;
        g.spacing = Vec::zero(lo.n);
        g.shape = points;
        for (int a = 0; a < lo.n; ++a) {
            if (points[static_cast<std::size_t>(a)] < 2)
                throw std::invalid_argument("GridSpec::box: need at least two points per axis");
            g.spacing[a] = (hi[a] - lo[a]) / (points[static_cast<std::size_t>(a)] - 1);
            if (!(g.spacing[a] > 0.0))
                throw std::invalid_argument("GridSpec::box: spacing must be positive");
        }
        return g;
    }

    static GridSpec cube(int n, double lo, double hi, int points_per_axis) {
        Vec l = Vec::zero(n), h = Vec::zero(n);
        std::array<int, 3> p{1, 1, 1};
        for (int a = 0; a < n; ++a) {
            l[a] = lo;
            h[a] = hi;
            p[static_cast<std::size_t>(a)] = points_per_axis;
        }
        return box(l, h, p);
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
        return s;
    }

    Vec point(const std::array<int, 3>& idx) const {
        Vec y = origin;
        for (int a = 0; a < n; ++a) y[a] += spacing[a] * idx[static_cast<std::size_t>(a)];
        return y;
    }

    double axis_coord(int axis, int i) const { return origin[axis] + spacing[axis] * i; }

    // Trapezoid weight along one axis (uniform interior, halved endpoints).
    double axis_weight(int axis, int i) const {
        const int m = shape[static_cast<std::size_t>(axis)];
        return (i == 0 || i == m - 1) ? 0.5 * spacing[axis] : spacing[axis];
    }

    double cell_volume() const {
        double vol = 1.0;
        for (int a = 0; a < n; ++a) vol *= spacing[a];
        return vol;
    }
};

struct GridFunction {
    GridSpec grid;
    std::vector<cplx> values;  // row-major; last axis fastest

    std::size_t index(const std::array<int, 3>& idx) const {
        std::size_t lin = 0;
        for (int a = 0; a < grid.n; ++a)
            lin = lin * static_cast<std::size_t>(grid.shape[static_cast<std::size_t>(a)]) +
                  static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        return lin;
    }

    cplx& at(const std::array<int, 3>& idx) { return values[index(idx)]; }
    cplx at(const std::array<int, 3>& idx) const { return values[index(idx)]; }

    double l2_norm() const {
        double s = 0.0;
        for_each_index(grid, [&](const std::array<int, 3>& idx, std::size_t lin) {
            double w = 1.0;
            for (int a = 0; a < grid.n; ++a) w *= grid.axis_weight(a, idx[static_cast<std::size_t>(a)]);
            s += w * std::norm(values[lin]);
        });
        return std::sqrt(s);
    }

    template <typename F>
    static void for_each_index(const GridSpec& g, F&& f) {
        std::array<int, 3> idx{0, 0, 0};
        const int d = g.n;
        std::size_t lin = 0;
        while (true) {
            f(idx, lin);
            ++lin;
            int a = d - 1;
            while (a >= 0) {
                if (++idx[static_cast<std::size_t>(a)] < g.shape[static_cast<std::size_t>(a)]) break;
                idx[static_cast<std::size_t>(a)] = 0;
                --a;
            }
            if (a < 0) break;
        }
    }
};

inline double relative_l2_error(const GridFunction& approx, const GridFunction& exact) {
    double num = 0.0, den = 0.0;
    GridFunction::for_each_index(exact.grid, [&](const std::array<int, 3>& idx, std::size_t lin) {
        double w = 1.0;
        for (int a = 0; a < exact.grid.n; ++a)
            w *= exact.grid.axis_weight(a, idx[static_cast<std::size_t>(a)]);
        num += w * std::norm(approx.values[lin] - exact.values[lin]);
        den += w * std::norm(exact.values[lin]);
    });
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Pointwise sampling of a callable onto a grid. Non-finite samples are an
// input error, not a silent NaN in later quadratures.
inline GridFunction sample(const std::function<cplx(const Vec&)>& f, const GridSpec& g) {
    GridFunction u;
    u.grid = g;
    u.values.resize(g.size());
    GridFunction::for_each_index(g, [&](const std::array<int, 3>& idx, std::size_t lin) {
        const cplx val = f(g.point(idx));
        if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
            throw std::invalid_argument("sample: non-finite value at a grid node");
        u.values[lin] = val;
    });
    return u;
}

// ---------------------------------------------------------------------------
// Direction grids on S^{n-1}
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// recurrence; nodes are mirrored so u[m-1-i] == -u[i] holds exactly.
inline void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(m), 0.0);
    weights.assign(static_cast<std::size_t>(m), 0.0);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(m - 1 - i)] = x;
        nodes[static_cast<std::size_t>(i)] = -x;
        weights[static_cast<std::size_t>(m - 1 - i)] = w;
        weights[static_cast<std::size_t>(i)] = w;
    }
    if (m % 2 == 1) {
        // odd rules keep the center node at exactly zero
        nodes[static_cast<std::size_t>(m / 2)] = 0.0;
    }
}

}  // namespace detail

struct DirectionGrid {
    int n = 2;
    std::vector<Vec> directions;
    std::vector<double> weights;          // quadrature weights for integral over S^{n-1}
    std::vector<std::size_t> antipode;    // involution pairing omega with -omega

    std::size_t size() const { return directions.size(); }
};

// n = 2: uniform circle rule with M = resolution angles.
// n = 3: Gauss-Legendre in cos(polar) with `resolution` nodes times a uniform
//        azimuth rule with 2*resolution angles. Both constructions place -omega
//        on-grid and fill the second half by exact negation.
inline DirectionGrid make_direction_grid(int n, int resolution) {
    if (n != 2 && n != 3) throw std::invalid_argument("make_direction_grid: n must be 2 or 3");
    if (resolution < 2 || resolution % 2 != 0)
        throw std::invalid_argument("make_direction_grid: resolution must be even and >= 2");

    DirectionGrid g;
    g.n = n;
    if (n == 2) {
        const int m = resolution;
        g.directions.resize(static_cast<std::size_t>(m));
        g.weights.assign(static_cast<std::size_t>(m), 2.0 * pi / m);
        g.antipode.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m / 2; ++i) {
            const double th = 2.0 * pi * i / m;
            g.directions[static_cast<std::size_t>(i)] = vec2(std::cos(th), std::sin(th));
            g.directions[static_cast<std::size_t>(i + m / 2)] =
                -g.directions[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < m; ++i)
            g.antipode[static_cast<std::size_t>(i)] = static_cast<std::size_t>((i + m / 2) % m);
        return g;
    }

    const int np = resolution;          // polar nodes (Gauss-Legendre in cos theta)
    const int ma = 2 * resolution;      // azimuth count, even
    std::vector<double> u, wu;
    detail::gauss_legendre(np, u, wu);

    std::vector<double> ca(static_cast<std::size_t>(ma)), sa(static_cast<std::size_t>(ma));
    for (int j = 0; j < ma / 2; ++j) {
        const double ph = 2.0 * pi * j / ma;
        ca[static_cast<std::size_t>(j)] = std::cos(ph);
        sa[static_cast<std::size_t>(j)] = std::sin(ph);
        ca[static_cast<std::size_t>(j + ma / 2)] = -ca[static_cast<std::size_t>(j)];
        sa[static_cast<std::size_t>(j + ma / 2)] = -sa[static_cast<std::size_t>(j)];
    }

    g.directions.resize(static_cast<std::size_t>(np) * static_cast<std::size_t>(ma));
    g.weights.resize(g.directions.size());
    g.antipode.resize(g.directions.size());
    const double waz = 2.0 * pi / ma;
    for (int i = 0; i < np; ++i) {
        const double st = std::sqrt(std::max(0.0, 1.0 - u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)]));
        for (int j = 0; j < ma; ++j) {
            const std::size_t d = static_cast<std::size_t>(i) * static_cast<std::size_t>(ma) +
                                  static_cast<std::size_t>(j);
            g.directions[d] = vec3(st * ca[static_cast<std::size_t>(j)],
                                   st * sa[static_cast<std::size_t>(j)],
                                   u[static_cast<std::size_t>(i)]);
            g.weights[d] = wu[static_cast<std::size_t>(i)] * waz;
            const std::size_t ai = static_cast<std::size_t>(np - 1 - i);
            const std::size_t aj = static_cast<std::size_t>((j + ma / 2) % ma);
            g.antipode[d] = ai * static_cast<std::size_t>(ma) + aj;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Sinograms
// ---------------------------------------------------------------------------

// Parity of a function on the double cover S^{n-1} x R:
//   Even:   U(-omega, -t) =  U(omega, t)
//   Signed: U(-omega, -t) = (-1)^{n-1} U(omega, t)
enum class Parity : std::uint8_t { Even, Signed };

inline int parity_sign(Parity p, int n) {
    if (p == Parity::Even) return 1;
    return (n % 2 == 1) ? 1 : -1;
}

struct Sinogram {
    DirectionGrid dirs;
    double t_min = -8.0;
    double t_max = 8.0;
    int t_count = 2;
    std::vector<cplx> values;  // direction-major: values[d * t_count + j]
    Parity parity = Parity::Even;

    double dt() const { return (t_max - t_min) / (t_count - 1); }
    double t(int j) const { return t_min + dt() * j; }
    double t_weight(int j) const { return (j == 0 || j == t_count - 1) ? 0.5 * dt() : dt(); }

    cplx& at(std::size_t d, int j) { return values[d * static_cast<std::size_t>(t_count) + static_cast<std::size_t>(j)]; }
    cplx at(std::size_t d, int j) const { return values[d * static_cast<std::size_t>(t_count) + static_cast<std::size_t>(j)]; }

    bool t_symmetric() const {
        return std::abs(t_min + t_max) <= 1e-12 * std::max(1.0, std::abs(t_max));
    }
};

inline Sinogram sample_sino(const std::function<cplx(const Vec&, double)>& f,
                            const DirectionGrid& dirs, double t_min, double t_max, int t_count,
                            Parity parity) {
    if (t_count < 2) throw std::invalid_argument("sample_sino: need at least two t samples");
    Sinogram s;
    s.dirs = dirs;
    s.t_min = t_min;
    s.t_max = t_max;
    s.t_count = t_count;
    s.parity = parity;
    s.values.resize(dirs.size() * static_cast<std::size_t>(t_count));
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        for (int j = 0; j < t_count; ++j) {
            const cplx val = f(dirs.directions[d], s.t(j));
            if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
                throw std::invalid_argument("sample_sino: non-finite sample");
            s.at(d, j) = val;
        }
    }
    return s;
}

// Max-norm violation of the sinogram's declared parity, evaluated through the
// antipode permutation and the t-reflection j -> t_count-1-j. Requires a t
// grid symmetric about zero so the reflection stays on-grid.
inline double parity_defect(const Sinogram& s) {
    if (!s.t_symmetric())
        throw std::invalid_argument("parity_defect: t grid must be symmetric about 0");
    const double sgn = parity_sign(s.parity, s.dirs.n);
    double worst = 0.0;
    for (std::size_t d = 0; d < s.dirs.size(); ++d) {
        const std::size_t ad = s.dirs.antipode[d];
        for (int j = 0; j < s.t_count; ++j) {
            const cplx diff = s.at(ad, s.t_count - 1 - j) - sgn * s.at(d, j);
            worst = std::max(worst, std::abs(diff));
        }
    }
    return worst;
}

// Deterministic representative of a hyperplane (omega, t) ~ (-omega, -t):
// first nonzero omega component positive, ties broken by positive t.
inline bool is_canonical_representative(const Vec& omega, double t, double tol = 1e-12) {
    for (int i = 0; i < omega.n; ++i) {
        if (std::abs(omega[i]) > tol) return omega[i] > 0.0;
    }
    return t >= 0.0;
}

inline void canonical_representative(Vec& omega, double& t) {
    if (!is_canonical_representative(omega, t)) {
        omega = -omega;
        t = -t;
    }
}

}  // namespace planebarg
