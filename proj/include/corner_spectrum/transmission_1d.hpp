#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "angular_function.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"
#include "types.hpp"

namespace corner {

enum class Side { Minus, Plus };

/// coeff * y^power * exp(-rate |y|), rate > 0.
struct ExpTerm {
    cplx coeff;
    int power = 0;
    double rate = 1.0;
};

/// Finite sum of ExpTerm on one half-line.
class ExpPoly {
public:
    ExpPoly() = default;
    ExpPoly(std::vector<ExpTerm> terms, Side side) : terms_(std::move(terms)), side_(side) {
        for (const auto& t : terms_) {
            if (!(t.rate > 0.0) || !std::isfinite(t.rate))
                throw DomainError("exponential-polynomial term needs a positive finite decay rate");
            if (t.power < 0) throw DomainError("exponential-polynomial term needs a nonnegative power");
            if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()))
                throw DomainError("exponential-polynomial coefficient must be finite");
        }
    }

    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    Side side() const noexcept { return side_; }

    cplx operator()(double y) const {
        cplx acc = 0.0;
        for (const auto& t : terms_) acc += t.coeff * std::pow(y, t.power) * std::exp(-t.rate * std::abs(y));
        return acc;
    }

    /// d/dy on this side (exp(-rate|y|) = exp(sign * rate * y)).
    ExpPoly derivative() const {
        const double sign = side_ == Side::Plus ? -1.0 : 1.0;
        std::vector<ExpTerm> out;
        for (const auto& t : terms_) {
            if (t.power > 0) out.push_back({t.coeff * double(t.power), t.power - 1, t.rate});
            out.push_back({t.coeff * (sign * t.rate), t.power, t.rate});
        }
        return ExpPoly(std::move(out), side_);
    }

    ExpPoly& operator+=(const ExpPoly& o) {
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        return *this;
    }

    ExpPoly scaled(cplx f) const {
        ExpPoly r = *this;
        for (auto& t : r.terms_) t.coeff *= f;
        return r;
    }

private:
    std::vector<ExpTerm> terms_;
    Side side_ = Side::Plus;
};

/// Samples on a half-line. y runs monotonically away from 0 and y[0] = 0.
struct HalfLineSamples {
    std::vector<double> y;
    std::vector<cplx> values;

    /// Uniform grid 0, +-step, ..., +-length.
    static std::vector<double> uniform_grid(Side side, double length = 40.0, double step = 1.0 / 128) {
        const int n = static_cast<int>(std::llround(length / step));
        std::vector<double> y(n + 1);
        const double sign = side == Side::Plus ? 1.0 : -1.0;
        for (int i = 0; i <= n; ++i) y[i] = sign * (length * i) / n;
        return y;
    }

    static HalfLineSamples from(const ExpPoly& f, std::vector<double> y) {
        HalfLineSamples s{std::move(y), {}};
        s.values.reserve(s.y.size());
        for (double v : s.y) s.values.push_back(f(v));
        return s;
    }
};

namespace detail {

inline void validate_half_line(const HalfLineSamples& s, Side side, const char* what) {
    if (s.y.size() != s.values.size()) throw DomainError(std::string(what) + ": grid and values differ in size");
    if (s.y.size() < 3) throw ResolutionError(std::string(what) + ": need at least three grid nodes");
    if (s.y[0] != 0.0) throw DomainError(std::string(what) + ": grid must start at the interface y = 0");
    const double sign = side == Side::Plus ? 1.0 : -1.0;
    for (std::size_t i = 1; i < s.y.size(); ++i)
        if (!(sign * (s.y[i] - s.y[i - 1]) > 0.0))
            throw DomainError(std::string(what) + ": grid must be strictly monotone away from 0");
    for (const auto& v : s.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError(std::string(what) + ": right-hand side is not square-integrable (non-finite samples)");
}

}  // namespace detail

/// Right-hand side of the half-line transmission model, sampled, with an
/// optional exponential-polynomial description per side.
struct HalfLineRHS {
    HalfLineSamples minus;
    HalfLineSamples plus;
    std::optional<ExpPoly> closed_minus;
    std::optional<ExpPoly> closed_plus;

    static HalfLineRHS from_terms(std::vector<ExpTerm> minus_terms, std::vector<ExpTerm> plus_terms,
                                  double length = 40.0, double step = 1.0 / 128) {
        HalfLineRHS r;
        r.closed_minus = ExpPoly(std::move(minus_terms), Side::Minus);
        r.closed_plus = ExpPoly(std::move(plus_terms), Side::Plus);
        r.minus = HalfLineSamples::from(*r.closed_minus, HalfLineSamples::uniform_grid(Side::Minus, length, step));
        r.plus = HalfLineSamples::from(*r.closed_plus, HalfLineSamples::uniform_grid(Side::Plus, length, step));
        return r;
    }

    static HalfLineRHS from_samples(HalfLineSamples minus, HalfLineSamples plus) {
        HalfLineRHS r{std::move(minus), std::move(plus), std::nullopt, std::nullopt};
        detail::validate_half_line(r.minus, Side::Minus, "h_minus");
        detail::validate_half_line(r.plus, Side::Plus, "h_plus");
        return r;
    }

    bool has_closed_form() const noexcept { return closed_minus.has_value() && closed_plus.has_value(); }
};

struct InterfaceTraces {
    cplx value;
    cplx deriv_plus;
    cplx deriv_minus;
};

struct TransmissionSolution1D {
    HalfLineSamples w_minus;
    HalfLineSamples w_plus;
    std::optional<ExpPoly> closed_minus;
    std::optional<ExpPoly> closed_plus;
    InterfaceTraces traces;
    /// w_minus(0) and w_plus(0) as stored on the two grids.
    cplx value_minus_at_0;
    cplx value_plus_at_0;

    double continuity_residual() const { return std::abs(value_plus_at_0 - value_minus_at_0); }
    double transmission_residual(const MaterialPair& mp) const {
        return std::abs(mp.a_plus() * traces.deriv_plus - mp.a_minus() * traces.deriv_minus);
    }
};

enum class Solve1DMethod { Auto, ClosedForm, FiniteDifference };

namespace detail {

/// Decaying solution of w - w'' = f on one side with w(0) = 0, by
/// undetermined coefficients on each decay rate.
inline ExpPoly dirichlet_half_line(const ExpPoly& f) {
    const double sign = f.side() == Side::Plus ? -1.0 : 1.0;
    std::map<double, std::vector<cplx>> groups;
    for (const auto& t : f.terms()) {
        auto& poly = groups[t.rate];
        if (static_cast<int>(poly.size()) <= t.power) poly.resize(t.power + 1, 0.0);
        poly[t.power] += t.coeff;
    }
    std::vector<ExpTerm> out;
    cplx at_zero = 0.0;
    for (const auto& [rate, c] : groups) {
        // w = R(y) e^{a y}: (1 - a^2) R - 2a R' - R'' = c(y).
        const double a = sign * rate;
        const int p = static_cast<int>(c.size()) - 1;
        std::vector<cplx> r(p + 3, 0.0);
        if (rate == 1.0) {
            for (int k = p; k >= 0; --k)
                r[k + 1] = -(c[k] + double((k + 2) * (k + 1)) * r[k + 2]) / (2.0 * a * (k + 1));
        } else {
            for (int k = p; k >= 0; --k)
                r[k] = (c[k] + 2.0 * a * (k + 1) * r[k + 1] + double((k + 2) * (k + 1)) * r[k + 2]) / (1.0 - a * a);
        }
        for (int k = 0; k < static_cast<int>(r.size()); ++k)
            if (r[k] != 0.0) out.push_back({r[k], k, rate});
        at_zero += r[0];
    }
    if (at_zero != 0.0) out.push_back({-at_zero, 0, 1.0});
    return ExpPoly(std::move(out), f.side());
}

struct HalfLineFD {
    std::vector<cplx> w;
    cplx slope;  // d/ds at s = 0
};

/// Second-order solve of w - w'' = f on 0 = s_0 < ... < s_n with w(0) =
/// w(s_n) = 0. The slope at 0 uses w(s_1) = w(0) + s_1 w'(0) + (s_1^2/6)
/// (2 w''(0) + w''(s_1)) with w'' = w - f.
inline HalfLineFD fd_half_line(std::span<const double> s, std::span<const cplx> f) {
    const int n = static_cast<int>(s.size()) - 1;
    std::vector<cplx> w(n + 1, 0.0);
    if (n >= 2) {
        std::vector<cplx> lo(n + 1), di(n + 1), up(n + 1), rhs(n + 1);
        for (int i = 1; i < n; ++i) {
            const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i], hs = hm + hp;
            lo[i] = -2.0 / (hm * hs);
            up[i] = -2.0 / (hp * hs);
            di[i] = 1.0 + 2.0 / (hm * hp);
            rhs[i] = f[i];
        }
        for (int i = 2; i < n; ++i) {
            const cplx m = lo[i] / di[i - 1];
            di[i] -= m * up[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        w[n - 1] = rhs[n - 1] / di[n - 1];
        for (int i = n - 2; i >= 1; --i) w[i] = (rhs[i] - up[i] * w[i + 1]) / di[i];
    }
    const double h = s[1];
    const cplx d0 = w[0] - f[0], d1 = w[1] - f[1];
    return {w, (w[1] - w[0]) / h - h / 6.0 * (2.0 * d0 + d1)};
}

/// FD solve on the given grid, with the interface slope Richardson
/// extrapolated against every-other-node when the interval count is even.
inline HalfLineFD fd_half_line_extrapolated(const HalfLineSamples& h, double a, Side side) {
    const std::size_t n = h.y.size();
    std::vector<double> s(n);
    std::vector<cplx> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::abs(h.y[i]);
        f[i] = h.values[i] / a;
    }
    auto fine = fd_half_line(s, f);
    if ((n - 1) % 2 == 0 && n >= 5) {
        std::vector<double> sc;
        std::vector<cplx> fc;
        for (std::size_t i = 0; i < n; i += 2) {
            sc.push_back(s[i]);
            fc.push_back(f[i]);
        }
        const auto coarse = fd_half_line(sc, fc);
        fine.slope = (4.0 * fine.slope - coarse.slope) / 3.0;
    }
    if (side == Side::Minus) fine.slope = -fine.slope;
    return fine;
}

}  // namespace detail

/// Solves a_-(w - w'') = h_- on y < 0, a_+(w - w'') = h_+ on y > 0 with w
/// continuous and a_+ w_+'(0) = a_- w_-'(0), decaying at infinity. Built as
/// w = w0 + c e^{-|y|} with w0 the Dirichlet half-line solutions and c fixed
/// by the transmission condition.
inline TransmissionSolution1D solve_1d(const MaterialPair& mp, const HalfLineRHS& rhs,
                                       Solve1DMethod method = Solve1DMethod::Auto) {
    const double ap = mp.a_plus(), am = mp.a_minus();
    if (ap + am == 0.0) throw ExcludedContrastError("a+ + a- = 0 is excluded");
    const bool closed =
        method == Solve1DMethod::ClosedForm || (method == Solve1DMethod::Auto && rhs.has_closed_form());
    if (closed && !rhs.has_closed_form())
        throw DomainError("closed-form solve requested without exponential-polynomial data");

    TransmissionSolution1D sol;
    if (closed) {
        ExpPoly w0m = detail::dirichlet_half_line(rhs.closed_minus->scaled(1.0 / am));
        ExpPoly w0p = detail::dirichlet_half_line(rhs.closed_plus->scaled(1.0 / ap));
        const cplx dm = w0m.derivative()(0.0), dp = w0p.derivative()(0.0);
        const cplx c = (ap * dp - am * dm) / (ap + am);
        w0m += ExpPoly({{c, 0, 1.0}}, Side::Minus);
        w0p += ExpPoly({{c, 0, 1.0}}, Side::Plus);
        sol.traces = {c, w0p.derivative()(0.0), w0m.derivative()(0.0)};
        sol.w_minus = HalfLineSamples::from(w0m, rhs.minus.y);
        sol.w_plus = HalfLineSamples::from(w0p, rhs.plus.y);
        sol.value_minus_at_0 = w0m(0.0);
        sol.value_plus_at_0 = w0p(0.0);
        sol.closed_minus = std::move(w0m);
        sol.closed_plus = std::move(w0p);
        return sol;
    }

    detail::validate_half_line(rhs.minus, Side::Minus, "h_minus");
    detail::validate_half_line(rhs.plus, Side::Plus, "h_plus");
    const auto fm = detail::fd_half_line_extrapolated(rhs.minus, am, Side::Minus);
    const auto fp = detail::fd_half_line_extrapolated(rhs.plus, ap, Side::Plus);
    const cplx c = (ap * fp.slope - am * fm.slope) / (ap + am);
    auto assemble = [&](const HalfLineSamples& grid, const std::vector<cplx>& w0) {
        HalfLineSamples out{grid.y, w0};
        for (std::size_t i = 0; i < out.y.size(); ++i) out.values[i] += c * std::exp(-std::abs(out.y[i]));
        return out;
    };
    sol.w_minus = assemble(rhs.minus, fm.w);
    sol.w_plus = assemble(rhs.plus, fp.w);
    sol.traces = {c, fp.slope - c, fm.slope + c};
    sol.value_minus_at_0 = sol.w_minus.values[0];
    sol.value_plus_at_0 = sol.w_plus.values[0];
    return sol;
}

namespace detail {

/// Three-point Lagrange derivatives on a nonuniform grid (one-sided at the ends).
inline std::vector<cplx> grid_derivative(std::span<const double> y, std::span<const cplx> v) {
    const std::size_t n = y.size();
    std::vector<cplx> d(n);
    auto three = [&](std::size_t i0, double x) {
        const double x0 = y[i0], x1 = y[i0 + 1], x2 = y[i0 + 2];
        const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        return l0 * v[i0] + l1 * v[i0 + 1] + l2 * v[i0 + 2];
    };
    d[0] = three(0, y[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three(i - 1, y[i]);
    d[n - 1] = three(n - 3, y[n - 1]);
    return d;
}

/// Second derivative: three-point stencil inside, cubic through four nodes at the ends.
inline std::vector<cplx> grid_second_derivative(std::span<const double> y, std::span<const cplx> v) {
    const std::size_t n = y.size();
    std::vector<cplx> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = y[i] - y[i - 1], hp = y[i + 1] - y[i];
        d[i] = 2.0 * ((v[i + 1] - v[i]) / hp - (v[i] - v[i - 1]) / hm) / (hp + hm);
    }
    auto cubic = [&](std::size_t i0, double x) {
        const double* t = &y[i0];
        const cplx f01 = (v[i0 + 1] - v[i0]) / (t[1] - t[0]), f12 = (v[i0 + 2] - v[i0 + 1]) / (t[2] - t[1]),
                   f23 = (v[i0 + 3] - v[i0 + 2]) / (t[3] - t[2]);
        const cplx f012 = (f12 - f01) / (t[2] - t[0]), f123 = (f23 - f12) / (t[3] - t[1]);
        const cplx f0123 = (f123 - f012) / (t[3] - t[0]);
        return 2.0 * f012 + 2.0 * f0123 * ((x - t[0]) + (x - t[1]) + (x - t[2]));
    };
    if (n >= 4) {
        d[0] = cubic(0, y[0]);
        d[n - 1] = cubic(n - 4, y[n - 1]);
    } else {
        d[0] = d[1];
        d[n - 1] = d[n - 2];
    }
    return d;
}

inline double trapezoid_norm_squared(std::span<const double> y, std::span<const cplx> v, double weight = 1.0) {
    double acc = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i)
        acc += 0.5 * std::abs(y[i] - y[i - 1]) * (std::norm(v[i]) + std::norm(v[i - 1]));
    return weight * weight * acc;
}

}  // namespace detail

/// L2 norm of half-line samples by the trapezoid rule.
inline double l2_norm(const HalfLineSamples& z) {
    if (z.y.size() != z.values.size() || z.y.size() < 2) throw ResolutionError("l2_norm: need at least two nodes");
    return std::sqrt(detail::trapezoid_norm_squared(z.y, z.values));
}

/// Norm with parameter rho: order 2 gives
/// sqrt(||(1+rho)^2 z||^2 + ||(1+rho) z'||^2 + ||z''||^2), order 1 gives
/// sqrt(||(1+rho) z||^2 + ||z'||^2).
inline double parametric_norm(const HalfLineSamples& z, double rho, int order) {
    if (order != 1 && order != 2) throw DomainError("parametric_norm: order must be 1 or 2");
    if (!(rho >= 0.0)) throw DomainError("parametric_norm: rho must be nonnegative");
    if (z.y.size() != z.values.size()) throw DomainError("parametric_norm: grid and values differ in size");
    if (static_cast<int>(z.y.size()) < 2 * order + 1)
        throw ResolutionError("parametric_norm: grid too coarse for the requested derivative order");
    const double k = 1.0 + rho;
    const auto d1 = detail::grid_derivative(z.y, z.values);
    double acc = detail::trapezoid_norm_squared(z.y, z.values, std::pow(k, order)) +
                 detail::trapezoid_norm_squared(z.y, d1, order == 2 ? k : 1.0);
    if (order == 2) {
        const auto d2 = detail::grid_second_derivative(z.y, z.values);
        acc += detail::trapezoid_norm_squared(z.y, d2);
    }
    return std::sqrt(acc);
}

/// Smooth angular test function with values and two derivatives per sector.
struct ProbeFunction {
    std::function<AngularFunction::Sample(double, Sector)> eval;
};

inline ProbeFunction probe_from(const AngularFunction& f) {
    return {[f](double t, Sector s) { return f.evaluate(t, s); }};
}

/// ||V||_{H^2(G, |eta|)} / ||L(lambda) V||_{L^2(G)} by Gauss quadrature.
inline double symbol_bound_ratio(const MaterialPair& mp, double omega, cplx lambda, const ProbeFunction& v,
                                 int nodes_per_sector = 128) {
    const AngularGrid grid(omega, nodes_per_sector, 8);
    const double k = 1.0 + std::abs(lambda.imag());
    double num = 0.0, den = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const Sector s = grid.sector_of(i);
        const auto d = v.eval(grid.node(i), s);
        const double a = s == Sector::Minus ? mp.a_minus() : mp.a_plus();
        num += grid.weight(i) * (std::pow(k, 4) * std::norm(d.value) + k * k * std::norm(d.d1) + std::norm(d.d2));
        den += grid.weight(i) * std::norm(a * (lambda * lambda * d.value + d.d2));
    }
    return std::sqrt(num / den);
}

namespace detail {

/// Random trigonometric polynomial on each sector, with a cubic Hermite
/// correction on the plus sector enforcing continuity of V and a dV/dtheta
/// at theta = omega and theta = 0 = 2 pi.
inline ProbeFunction random_transmission_probe(const MaterialPair& mp, double omega, std::mt19937_64& rng,
                                               int degree = 4) {
    std::normal_distribution<double> nd;
    struct Trig {
        std::vector<std::array<double, 2>> c;
        AngularFunction::Sample operator()(double t) const {
            AngularFunction::Sample s{0.0, 0.0, 0.0};
            for (std::size_t k = 0; k < c.size(); ++k) {
                const double w = double(k), cs = std::cos(w * t), sn = std::sin(w * t);
                s.value += c[k][0] * cs + c[k][1] * sn;
                s.d1 += w * (-c[k][0] * sn + c[k][1] * cs);
                s.d2 += -w * w * (c[k][0] * cs + c[k][1] * sn);
            }
            return s;
        }
    };
    Trig pm, pp;
    for (int k = 0; k <= degree; ++k) {
        pm.c.push_back({nd(rng), nd(rng)});
        pp.c.push_back({nd(rng), nd(rng)});
    }
    const double mu = mp.mu(), h = two_pi - omega;
    const auto mw = pm(omega), m0 = pm(0.0), qw = pp(omega), q2 = pp(two_pi);
    const cplx p0 = mw.value - qw.value, m0d = mw.d1 / mu - qw.d1;
    const cplx p1 = m0.value - q2.value, m1d = m0.d1 / mu - q2.d1;
    ProbeFunction out;
    out.eval = [=](double t, Sector s) -> AngularFunction::Sample {
        if (s == Sector::Minus) return pm(t);
        const double x = (t - omega) / h;
        const double h00 = 2 * x * x * x - 3 * x * x + 1, h10 = x * x * x - 2 * x * x + x;
        const double h01 = -2 * x * x * x + 3 * x * x, h11 = x * x * x - x * x;
        const double d00 = 6 * x * x - 6 * x, d10 = 3 * x * x - 4 * x + 1, d01 = -6 * x * x + 6 * x,
                     d11 = 3 * x * x - 2 * x;
        const double e00 = 12 * x - 6, e10 = 6 * x - 4, e01 = -12 * x + 6, e11 = 6 * x - 2;
        auto q = pp(t);
        q.value += p0 * h00 + h * m0d * h10 + p1 * h01 + h * m1d * h11;
        q.d1 += (p0 * d00 + h * m0d * d10 + p1 * d01 + h * m1d * d11) / h;
        q.d2 += (p0 * e00 + h * m0d * e10 + p1 * e01 + h * m1d * e11) / (h * h);
        return q;
    };
    return out;
}

}  // namespace detail

/// For each eta, the ratio ||V||_{H^2(G,|eta|)} / ||L(xi + i eta) V|| for a
/// random V satisfying the transmission conditions. The line Re lambda = xi
/// must avoid the spectrum.
inline std::vector<double> symbol_bound_probe(double mu, double omega, double xi, const std::vector<double>& eta_list,
                                              std::uint64_t seed = 1) {
    const auto mp = MaterialPair::from_contrast(mu);
    require_valid_omega(omega);
    double im_max = 1.0;
    for (double e : eta_list) im_max = std::max(im_max, std::abs(e) + 1.0);
    const auto hits = roots_near_line(mu, omega, xi, im_max);
    if (!hits.empty()) throw PreconditionError("symbol_bound_probe: line Re lambda = xi meets the spectrum", hits);
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    out.reserve(eta_list.size());
    for (double e : eta_list) {
        const auto v = detail::random_transmission_probe(mp, omega, rng);
        out.push_back(symbol_bound_ratio(mp, omega, cplx(xi, e), v));
    }
    return out;
}

}  // namespace corner
