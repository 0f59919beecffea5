#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace planebarg {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// Physicists' Hermite polynomial H_l at complex argument, evaluated by the
// three-term recurrence H_{l+1}(s) = 2 s H_l(s) - 2 l H_{l-1}(s). The explicit
// factorial sum overflows for moderate l; the recurrence does not.
inline cplx hermite(unsigned l, cplx s) {
    cplx p0 = 1.0;
    if (l == 0) return p0;
    cplx p1 = 2.0 * s;
    for (unsigned j = 1; j < l; ++j) {
        const cplx next = 2.0 * s * p1 - 2.0 * static_cast<double>(j) * p0;
        p0 = p1;
        p1 = next;
    }
    return p1;
}

inline double hermite(unsigned l, double s) { return hermite(l, cplx(s, 0.0)).real(); }

// C_n = (4 pi)^{(n-1)/2} Gamma(n/2) Gamma(1/2).
inline double constant_C(int n) {
    if (n < 2) throw std::invalid_argument("constant_C: dimension must be >= 2");
    return std::pow(4.0 * pi, 0.5 * (n - 1)) * std::tgamma(0.5 * n) * std::tgamma(0.5);
}

// A_{2k+1} = (-1)^k k! / (2^{k/2-1/4} (2k)!)
// A_{2k}   = (-1)^{k-1/2} pi^{1/2} / (2^{3k/2} (k-1)!), branch (-1)^{k-1/2} = i (-1)^{k-1}.
inline cplx constant_A(int n) {
    if (n < 2) throw std::invalid_argument("constant_A: dimension must be >= 2");
    if (n % 2 == 1) {
        const int k = (n - 1) / 2;
        const double num = ((k % 2 == 0) ? 1.0 : -1.0) * std::tgamma(k + 1.0);
        const double den = std::pow(2.0, 0.5 * k - 0.25) * std::tgamma(2.0 * k + 1.0);
        return {num / den, 0.0};
    }
    const int k = n / 2;
    const double mag = std::sqrt(pi) / (std::pow(2.0, 1.5 * k) * std::tgamma(static_cast<double>(k)));
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^{k-1}
    return {0.0, sign * mag};
}

struct PaperConstants {
    int n = 2;
    double C = 0.0;
    cplx A{};
};

inline PaperConstants paper_constants(int n) { return {n, constant_C(n), constant_A(n)}; }

// Constant K_n with  K_n * integral(u v) = integral over hyperplane space of
// |D_t|^{n-1} R u * R v, where the hyperplane-space integral is half of the
// integral over the double cover S^{n-1} x R. Fixed by the projection-slice
// theorem in the e^{-2 pi i} Fourier convention; verified by quadrature in the
// test suite.
inline double plancherel_constant(int n) {
    if (n < 2) throw std::invalid_argument("plancherel_constant: dimension must be >= 2");
    return std::pow(2.0 * pi, n - 1);
}

// u = fbp_scale(n) * Rdual(|D_t|^{n-1} R u), with Rdual integrating over the
// full sphere.
inline double fbp_scale(int n) { return 0.5 / std::pow(2.0 * pi, n - 1); }

// Normalization of the hyperplane-space Bargmann transform that makes
// T_h u = B_h R u (n odd) and T_h u = B_h H R u (n even) hold exactly:
//   n = 2k+1:  (-1)^k 2^{n/4+1-n} pi^{(1-n)/2}
//   n = 2k:    (-1)^k 2^{n/4+1-n} pi^{-k-1/2}
// Derived by applying the Plancherel identity above to the Gaussian kernel of
// T_h; confirmed numerically against closed-form Gaussian transforms.
inline cplx bargmann_b_constant(int n) {
    if (n < 2) throw std::invalid_argument("bargmann_b_constant: dimension must be >= 2");
    const double p2 = std::pow(2.0, 0.25 * n + 1.0 - n);
    if (n % 2 == 1) {
        const int k = (n - 1) / 2;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return {sign * p2 * std::pow(pi, 0.5 * (1.0 - n)), 0.0};
    }
    const int k = n / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return {sign * p2 * std::pow(pi, -k - 0.5), 0.0};
}

// Closed form of the Bargmann transform of u(y) = e^{-pi |y|^2}:
//   2^{n/4} h^{-3n/4} (h/(1+h))^{n/2} e^{-pi z^2 / (1+h)}
// with z^2 the complex bilinear square. Used as a cross-check target wherever
// an exact transform value is needed.
inline cplx bargmann_of_gaussian(int n, double h, const cplx* z) {
    if (h <= 0.0) throw std::invalid_argument("bargmann_of_gaussian: h must be positive");
    cplx z2 = 0.0;
    for (int j = 0; j < n; ++j) z2 += z[j] * z[j];
    const double amp = std::pow(2.0, 0.25 * n) * std::pow(h, -0.75 * n) *
                       std::pow(h / (1.0 + h), 0.5 * n);
    return amp * std::exp(-pi * z2 / (1.0 + h));
}

}  // namespace planebarg
