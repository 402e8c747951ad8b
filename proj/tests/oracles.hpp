#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the solvers under test.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_complex.hpp>

#include <corner_spectrum/types.hpp>

namespace oracle {

using corner::cplx;
using corner::pi;
using corner::two_pi;
using Mat4 = std::array<std::array<cplx, 4>, 4>;

/// The transmission matrix in the plain {cos, sin} basis, as displayed.
inline Mat4 displayed_matrix(cplx l, double mu, double w) {
    const cplx c2 = std::cos(2.0 * pi * l), s2 = std::sin(2.0 * pi * l);
    const cplx cw = std::cos(l * w), sw = std::sin(l * w);
    return Mat4{{{-1.0, 0.0, c2, s2},
                 {0.0, -1.0, -mu * s2, mu * c2},
                 {-cw, -sw, cw, sw},
                 {sw, -cw, -mu * sw, mu * cw}}};
}

inline cplx det3(const cplx m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Laplace expansion along the first row.
inline cplx cofactor_det(const Mat4& m) {
    cplx acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        cplx minor[3][3];
        for (int r = 1; r < 4; ++r) {
            int cc = 0;
            for (int c = 0; c < 4; ++c)
                if (c != j) minor[r - 1][cc++] = m[r][c];
        }
        acc += (j % 2 == 0 ? 1.0 : -1.0) * m[0][j] * det3(minor);
    }
    return acc;
}

/// Displayed matrix expanded by cofactors in 100-digit arithmetic, so the
/// exp(4 pi |Im lambda|) cancellation of its plain form does not pollute the result.
inline cplx displayed_determinant_mp(cplx l, double mu, double w) {
    using C = boost::multiprecision::cpp_complex_100;
    using R = boost::multiprecision::cpp_bin_float_100;
    const R rpi = boost::math::constants::pi<R>();
    const C L(R(l.real()), R(l.imag()));
    const R M(mu), W(w);
    const C c2 = cos(2 * rpi * L), s2 = sin(2 * rpi * L);
    const C cw = cos(L * W), sw = sin(L * W);
    const C m[4][4] = {{C(-1), C(0), c2, s2},
                       {C(0), C(-1), -M * s2, M * c2},
                       {-cw, -sw, cw, sw},
                       {sw, -cw, -M * sw, M * cw}};
    auto d3 = [](const C a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    C acc(0);
    for (int j = 0; j < 4; ++j) {
        C minor[3][3];
        for (int r = 1; r < 4; ++r) {
            int cc = 0;
            for (int c = 0; c < 4; ++c)
                if (c != j) minor[r - 1][cc++] = m[r][c];
        }
        acc += (j % 2 == 0 ? C(1) : C(-1)) * m[0][j] * d3(minor);
    }
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

inline double rho(double mu) { return std::abs(mu - 1.0) / (2.0 * std::abs(mu + 1.0)); }
inline double lambda1_formula(double mu) { return 2.0 / pi * std::acos(rho(mu)); }
inline double eta_formula(double mu) { return 2.0 / pi * std::acosh(rho(mu)); }

/// Brent-free bisection on a real function with a sign change.
template <class F>
double bisect(F f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Smooth piecewise angular function satisfying the four transmission
/// conditions for a+/a- = mu; used for manufactured symbol solves.
class ManufacturedAngular {
public:
    struct D {
        double v, d1, d2;
    };

    ManufacturedAngular(const corner::MaterialPair& mp, double omega) : mp_(mp), omega_(omega) {
        const double mu = mp.mu();
        const D mw = minus(omega), m0 = minus(0.0), qw = base_plus(omega), q2 = base_plus(two_pi);
        p0_ = mw.v - qw.v;
        m0_ = mw.d1 / mu - qw.d1;
        p1_ = m0.v - q2.v;
        m1_ = m0.d1 / mu - q2.d1;
    }

    D minus(double t) const {
        return {std::cos(1.3 * t) + 0.4 * std::sin(2.1 * t) + 0.2 * t * t,
                -1.3 * std::sin(1.3 * t) + 0.84 * std::cos(2.1 * t) + 0.4 * t,
                -1.69 * std::cos(1.3 * t) - 1.764 * std::sin(2.1 * t) + 0.4};
    }

    D base_plus(double t) const {
        const double e = std::exp(t / 5), s = std::sin(t), c = std::cos(t);
        return {0.3 * s * e, 0.3 * e * (c + s / 5), 0.3 * e * (-s + 2 * c / 5 + s / 25)};
    }

    D plus(double t) const {
        const double h = two_pi - omega_, x = (t - omega_) / h;
        const double h00 = 2 * x * x * x - 3 * x * x + 1, h10 = x * x * x - 2 * x * x + x;
        const double h01 = -2 * x * x * x + 3 * x * x, h11 = x * x * x - x * x;
        const double d00 = 6 * x * x - 6 * x, d10 = 3 * x * x - 4 * x + 1, d01 = -6 * x * x + 6 * x,
                     d11 = 3 * x * x - 2 * x;
        const double e00 = 12 * x - 6, e10 = 6 * x - 4, e01 = -12 * x + 6, e11 = 6 * x - 2;
        const D q = base_plus(t);
        return {q.v + p0_ * h00 + h * m0_ * h10 + p1_ * h01 + h * m1_ * h11,
                q.d1 + (p0_ * d00 + h * m0_ * d10 + p1_ * d01 + h * m1_ * d11) / h,
                q.d2 + (p0_ * e00 + h * m0_ * e10 + p1_ * e01 + h * m1_ * e11) / (h * h)};
    }

    D eval(double t, corner::Sector s) const { return s == corner::Sector::Minus ? minus(t) : plus(t); }
    cplx value(double t, corner::Sector s) const { return eval(t, s).v; }

    cplx apply_symbol(cplx l, double t, corner::Sector s) const {
        const D d = eval(t, s);
        const double a = s == corner::Sector::Minus ? mp_.a_minus() : mp_.a_plus();
        return a * (l * l * d.v + d.d2);
    }

private:
    corner::MaterialPair mp_;
    double omega_;
    double p0_, m0_, p1_, m1_;
};

/// Value and first two derivatives of a scalar profile.
struct Jet {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
};

/// exp(-1 / (1 - s^2)) on |s| < 1, zero outside.
inline Jet bump(double s) {
    if (std::abs(s) >= 1.0) return {};
    const double q = 1.0 - s * s, b = std::exp(-1.0 / q);
    const double g1 = -2.0 * s / (q * q), g2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    return {b, b * g1, b * (g1 * g1 + g2)};
}

/// bump((t - centre) / half_width) as a function of t.
inline Jet bump_t(double t, double centre, double half_width) {
    const Jet b = bump((t - centre) / half_width);
    return {b.v, b.d1 / half_width, b.d2 / (half_width * half_width)};
}

/// Smooth step: 1 for t <= t0, 0 for t >= t1, C-infinity in between.
inline Jet smooth_step(double t, double t0, double t1) {
    const double x = (t1 - t) / (t1 - t0);
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    auto f = [](double y) {
        const double e = std::exp(-1.0 / y);
        return Jet{e, e / (y * y), e * (1.0 / (y * y * y * y) - 2.0 / (y * y * y))};
    };
    const Jet a = f(x), b0 = f(1.0 - x);
    const Jet b{b0.v, -b0.d1, b0.d2};
    const double d = a.v + b.v, d1 = a.d1 + b.d1, d2 = a.d2 + b.d2;
    const double s = a.v / d;
    const double s1 = (a.d1 * d - a.v * d1) / (d * d);
    const double s2 = ((a.d2 * d - a.v * d2) * d - 2.0 * d1 * (a.d1 * d - a.v * d1)) / (d * d * d);
    const double dx = -1.0 / (t1 - t0);
    return {s, s1 * dx, s2 * dx * dx};
}

}  // namespace oracle
