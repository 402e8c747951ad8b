#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "quadrature.hpp"
#include "types.hpp"

namespace corner {

namespace detail {

/// sin(z)/z, entire.
inline cplx sinc(cplx z) {
    if (std::abs(z) < 1e-4) {
        const cplx z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

/// sin(lambda x) / lambda, with the limit x at lambda = 0.
inline cplx sin_over_lambda(cplx lambda, double x) { return x * sinc(lambda * x); }

/// int_0^len e^{i l sigma} f(x0 + dir sigma) dsigma, where f is the panel
/// interpolant of forcing on panel pn of sector s and [x0, x0 + dir len] lies in
/// that panel. The Gauss rule is sized to the oscillation of the kernel, and
/// the range is cut where |e^{i l sigma}| < e^{-40}.
inline cplx exp_local_integral(const AngularGrid& g, Sector s, int pn, std::span<const cplx> forcing, cplx l,
                               double x0, double len, int dir, std::vector<double>& lv) {
    if (len <= 0.0) return 0.0;
    const auto& op = g.ops();
    const int n = g.nodes_per_panel();
    const double kappa = l.imag();
    const double cut = kappa > 0.0 ? std::min(len, 40.0 / kappa) : len;
    const int m = std::clamp(n + static_cast<int>(std::ceil(0.75 * std::abs(l) * cut)), n, 512);
    const GaussRule& gr = gauss_legendre(m);
    const double pa = g.panel_begin(s, pn), pb = g.panel_end(s, pn);
    const int base = g.sector_offset(s) + pn * n;
    const cplx i1(0.0, 1.0);
    lv.resize(n);
    cplx acc = 0.0;
    for (int q = 0; q < m; ++q) {
        const double sigma = 0.5 * cut * (gr.nodes[q] + 1.0);
        const double y = x0 + dir * sigma;
        const double ref = std::clamp(2.0 * (y - pa) / (pb - pa) - 1.0, -1.0, 1.0);
        lagrange_values(op.nodes, op.bary, ref, lv);
        cplx fy = 0.0;
        for (int j = 0; j < n; ++j) fy += lv[j] * forcing[base + j];
        acc += 0.5 * cut * gr.weights[q] * std::exp(i1 * l * sigma) * fy;
    }
    return acc;
}

}  // namespace detail

/// Homogeneous basis used for the coefficient pairs of an AngularFunction.
enum class BasisKind {
    /// {cos(lambda x), sin(lambda x)/lambda} with x = theta - c measured from
    /// the sector midpoint c; at lambda = 0 this is the limit basis {1, x}.
    SectorTrig,
    /// Per sector (a, b): {exp(i l (theta - a)), exp(i l (b - theta))} with
    /// l = +-lambda chosen so that Im l >= 0. Both functions are bounded by 1
    /// on the sector, which keeps large |Im lambda| solves stable.
    SectorExponential,
};

/// Particular part of a solution of a(lambda^2 + d^2/dtheta^2) W = F,
/// sampled on an angular grid. forcing holds F / a at the nodes.
struct ParticularPart {
    std::shared_ptr<const AngularGrid> grid;
    std::vector<cplx> value;
    std::vector<cplx> deriv;
    std::vector<cplx> forcing;
    // Traces per sector (index 0 = minus, 1 = plus) at the sector ends.
    std::array<cplx, 2> begin_value{}, end_value{}, begin_deriv{}, end_deriv{};
    std::array<cplx, 2> begin_forcing{}, end_forcing{};
    // Exponential variation of parameters only: wavenumber l (Im l >= 0), the
    // forward integral I at each panel start and the backward integral J at each
    // panel end, indexed like the panels (minus sector first).
    cplx wavenumber{};
    std::vector<cplx> panel_forward;
    std::vector<cplx> panel_backward;
};

/// Piecewise function on the circle: on each sector a combination of the two
/// homogeneous solutions of (lambda^2 + d^2/dtheta^2) W = 0, plus an optional
/// sampled particular part.
class AngularFunction {
public:
    struct Sample {
        cplx value;
        cplx d1;
        cplx d2;
    };

    AngularFunction(cplx lambda, double omega, BasisKind kind, std::array<cplx, 2> coeffs_minus,
                    std::array<cplx, 2> coeffs_plus,
                    std::optional<ParticularPart> particular = std::nullopt)
        : lambda_(lambda),
          omega_(omega),
          kind_(kind),
          coeffs_{coeffs_minus, coeffs_plus},
          particular_(std::move(particular)) {
        require_valid_omega(omega);
        require_finite(lambda);
    }

    cplx lambda() const noexcept { return lambda_; }
    double omega() const noexcept { return omega_; }
    BasisKind basis() const noexcept { return kind_; }
    const std::array<cplx, 2>& coeffs_minus() const noexcept { return coeffs_[0]; }
    const std::array<cplx, 2>& coeffs_plus() const noexcept { return coeffs_[1]; }
    bool has_particular() const noexcept { return particular_.has_value(); }
    const std::optional<ParticularPart>& particular() const noexcept { return particular_; }

    double sector_begin(Sector s) const noexcept { return s == Sector::Minus ? 0.0 : omega_; }
    double sector_end(Sector s) const noexcept { return s == Sector::Minus ? omega_ : two_pi; }
    double sector_mid(Sector s) const noexcept { return 0.5 * (sector_begin(s) + sector_end(s)); }

    /// Sector containing theta; the interface ray theta = omega is assigned to G-.
    Sector sector_at(double theta) const noexcept { return theta <= omega_ ? Sector::Minus : Sector::Plus; }

    /// Value and first two derivatives at theta, using the formula of sector s
    /// (so one-sided traces at the interfaces are available).
    Sample evaluate(double theta, Sector s) const {
        const auto h = homogeneous(theta, s);
        const auto& c = coeffs_[static_cast<int>(s)];
        Sample out{c[0] * h[0] + c[1] * h[1], c[0] * h[2] + c[1] * h[3], {}};
        out.d2 = -lambda_ * lambda_ * out.value;
        if (particular_) {
            const auto p = particular_sample(theta, s);
            out.value += p.value;
            out.d1 += p.d1;
            out.d2 += p.d2;
        }
        return out;
    }

    cplx operator()(double theta) const { return evaluate(theta, sector_at(theta)).value; }

    /// Values at the nodes of a grid.
    std::vector<cplx> sample(const AngularGrid& grid) const {
        std::vector<cplx> out(grid.size());
        for (int i = 0; i < grid.size(); ++i) out[i] = evaluate(grid.node(i), grid.sector_of(i)).value;
        return out;
    }

    /// L2(G) norm by quadrature on the given grid.
    double l2_norm(const AngularGrid& grid) const {
        const auto s = sample(grid);
        return std::sqrt(grid.l2_norm_squared<cplx>(s));
    }

    AngularFunction scaled(cplx factor) const {
        AngularFunction out = *this;
        for (auto& sector : out.coeffs_)
            for (auto& c : sector) c *= factor;
        if (out.particular_) {
            auto& p = *out.particular_;
            for (auto* v : {&p.value, &p.deriv, &p.forcing})
                for (auto& x : *v) x *= factor;
            for (auto* a : {&p.begin_value, &p.end_value, &p.begin_deriv, &p.end_deriv, &p.begin_forcing,
                            &p.end_forcing})
                for (auto& x : *a) x *= factor;
            for (auto* v : {&p.panel_forward, &p.panel_backward})
                for (auto& x : *v) x *= factor;
        }
        return out;
    }

    /// Coefficients (alpha-, beta-, alpha+, beta+) of the representation
    /// alpha cos(lambda theta) + beta sin(lambda theta) on each sector
    /// ({1, theta} at lambda = 0). Only meaningful for the homogeneous part;
    /// for large |Im lambda| the conversion of SectorExponential coefficients
    /// may overflow.
    std::array<cplx, 4> trig_coefficients() const {
        std::array<cplx, 4> out{};
        const cplx i1(0.0, 1.0);
        for (int s = 0; s < 2; ++s) {
            const auto& c = coeffs_[s];
            if (kind_ == BasisKind::SectorTrig) {
                // cos(l(t - c)) = cos(lt) cos(lc) + sin(lt) sin(lc),
                // sin(l(t - c)) = sin(lt) cos(lc) - cos(lt) sin(lc).
                const double mid = sector_mid(static_cast<Sector>(s));
                const cplx cc = std::cos(lambda_ * mid);
                const cplx so = detail::sin_over_lambda(lambda_, mid);
                out[2 * s] = c[0] * cc - c[1] * so;
                out[2 * s + 1] = lambda_ == cplx(0.0) ? c[1] : c[0] * std::sin(lambda_ * mid) + c[1] * cc / lambda_;
            } else {
                const auto sec = static_cast<Sector>(s);
                const double a = sector_begin(sec), b = sector_end(sec);
                const double sign = lambda_.imag() >= 0.0 ? 1.0 : -1.0;
                const cplx l = sign * lambda_;
                const cplx ea = std::exp(-i1 * l * a), eb = std::exp(i1 * l * b);
                out[2 * s] = c[0] * ea + c[1] * eb;
                out[2 * s + 1] = sign * i1 * (c[0] * ea - c[1] * eb);
            }
        }
        return out;
    }

    /// Homogeneous basis at theta on sector s: {u1, u2, u1', u2'}.
    std::array<cplx, 4> homogeneous(double theta, Sector s) const {
        if (kind_ == BasisKind::SectorTrig) {
            const double x = theta - sector_mid(s);
            const cplx co = std::cos(lambda_ * x);
            const cplx so = detail::sin_over_lambda(lambda_, x);
            return {co, so, -lambda_ * lambda_ * so, co};
        }
        const cplx i1(0.0, 1.0);
        const cplx l = lambda_.imag() >= 0.0 ? lambda_ : -lambda_;
        const double a = sector_begin(s), b = sector_end(s);
        const cplx u1 = std::exp(i1 * l * (theta - a));
        const cplx u2 = std::exp(i1 * l * (b - theta));
        return {u1, u2, i1 * l * u1, -i1 * l * u2};
    }

private:
    Sample particular_sample(double theta, Sector s) const {
        const auto& p = *particular_;
        const int k = static_cast<int>(s);
        const cplx lam2 = lambda_ * lambda_;
        if (theta == sector_begin(s))
            return {p.begin_value[k], p.begin_deriv[k], p.begin_forcing[k] - lam2 * p.begin_value[k]};
        if (theta == sector_end(s))
            return {p.end_value[k], p.end_deriv[k], p.end_forcing[k] - lam2 * p.end_value[k]};
        const auto& g = *p.grid;
        if (!p.panel_forward.empty()) {
            const cplx i1(0.0, 1.0);
            const cplx l = p.wavenumber;
            const int pn = g.panel_of(s, theta);
            const int slot = k * g.panels_per_sector() + pn;
            const double pa = g.panel_begin(s, pn), pb = g.panel_end(s, pn);
            std::vector<double> lv;
            const cplx fi = std::exp(i1 * l * (theta - pa)) * p.panel_forward[slot] +
                            detail::exp_local_integral(g, s, pn, p.forcing, l, theta, theta - pa, -1, lv);
            const cplx bj = std::exp(i1 * l * (pb - theta)) * p.panel_backward[slot] +
                            detail::exp_local_integral(g, s, pn, p.forcing, l, theta, pb - theta, +1, lv);
            const cplx v = (fi + bj) / (2.0 * i1 * l);
            const cplx f = g.interpolate<cplx>(p.forcing, s, theta);
            return {v, 0.5 * (fi - bj), f - lam2 * v};
        }
        const cplx v = g.interpolate<cplx>(p.value, s, theta);
        const cplx d = g.interpolate<cplx>(p.deriv, s, theta);
        const cplx f = g.interpolate<cplx>(p.forcing, s, theta);
        return {v, d, f - lam2 * v};
    }

    cplx lambda_;
    double omega_;
    BasisKind kind_;
    std::array<std::array<cplx, 2>, 2> coeffs_;
    std::optional<ParticularPart> particular_;
};

}  // namespace corner
