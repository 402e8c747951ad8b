#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "angular_function.hpp"
#include "mellin_symbol.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"
#include "types.hpp"

namespace corner {

using Matrix = Eigen::MatrixXcd;

/// Uniform grid in t = log r.
struct RadialGrid {
    double t_min = -12.0;
    double t_max = 6.0;
    int nodes = 4096;

    RadialGrid() = default;
    RadialGrid(double t0, double t1, int n) : t_min(t0), t_max(t1), nodes(n) {
        if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) throw DomainError("radial grid needs t_min < t_max");
        if (n < 5) throw ResolutionError("radial grid needs at least five nodes");
    }

    double step() const noexcept { return (t_max - t_min) / (nodes - 1); }
    double t(int k) const noexcept { return k == nodes - 1 ? t_max : t_min + k * step(); }
    double weight(int k) const noexcept { return (k == 0 || k == nodes - 1) ? 0.5 * step() : step(); }
};

/// Symmetric uniform grid eta_j in [-eta_max, eta_max]; eta(n-1-j) = -eta(j) exactly.
struct LineGrid {
    double eta_max = 128.0;
    int nodes = 4096;

    LineGrid() = default;
    LineGrid(double emax, int n) : eta_max(emax), nodes(n) {
        if (!(emax > 0.0) || !std::isfinite(emax)) throw DomainError("eta grid needs a positive finite eta_max");
        if (n < 3) throw ResolutionError("eta grid needs at least three nodes");
    }

    double step() const noexcept { return 2.0 * eta_max / (nodes - 1); }
    double eta(int j) const noexcept { return eta_max * (2.0 * j - (nodes - 1)) / (nodes - 1); }
    double weight(int j) const noexcept { return (j == 0 || j == nodes - 1) ? 0.5 * step() : step(); }
};

/// Samples v(e^t, theta) on a tensor grid: rows follow t, columns follow the
/// angular grid nodes.
class RadialFunction {
public:
    RadialFunction(RadialGrid t, std::shared_ptr<const AngularGrid> angular, Matrix values,
                   bool compact_support = false)
        : t_(t), angular_(std::move(angular)), values_(std::move(values)), compact_(compact_support) {
        if (!angular_) throw DomainError("radial function needs an angular grid");
        if (values_.rows() != t_.nodes || values_.cols() != angular_->size())
            throw DomainError("radial function values do not match the tensor grid");
        if (!values_.allFinite()) throw DomainError("radial function values must be finite");
    }

    /// Samples f(t, theta, sector).
    template <class F>
    static RadialFunction sample(RadialGrid t, std::shared_ptr<const AngularGrid> angular, F&& f,
                                 bool compact_support = false) {
        Matrix v(t.nodes, angular->size());
        for (int k = 0; k < t.nodes; ++k)
            for (int i = 0; i < angular->size(); ++i)
                v(k, i) = f(t.t(k), angular->node(i), angular->sector_of(i));
        return RadialFunction(t, std::move(angular), std::move(v), compact_support);
    }

    static RadialFunction zero(RadialGrid t, std::shared_ptr<const AngularGrid> angular) {
        return RadialFunction(t, angular, Matrix::Zero(t.nodes, angular->size()), true);
    }

    const RadialGrid& t_grid() const noexcept { return t_; }
    const AngularGrid& angular() const noexcept { return *angular_; }
    std::shared_ptr<const AngularGrid> angular_ptr() const noexcept { return angular_; }
    const Matrix& values() const noexcept { return values_; }
    Matrix& values() noexcept { return values_; }
    bool compact_support() const noexcept { return compact_; }

    /// sqrt(int int |v|^2 e^{2 a t} dt dtheta).
    double weighted_l2(double a = 0.0) const {
        double acc = 0.0;
        for (int k = 0; k < t_.nodes; ++k) {
            double row = 0.0;
            for (int i = 0; i < angular_->size(); ++i) row += angular_->weight(i) * std::norm(values_(k, i));
            acc += t_.weight(k) * std::exp(2.0 * a * t_.t(k)) * row;
        }
        return std::sqrt(acc);
    }

private:
    RadialGrid t_;
    std::shared_ptr<const AngularGrid> angular_;
    Matrix values_;
    bool compact_;
};

/// V(xi + i eta_j, theta_i) on a vertical line.
struct MellinLineData {
    double xi;
    LineGrid eta;
    std::shared_ptr<const AngularGrid> angular;
    Matrix values;

    /// (int ||V(xi + i eta)||^2_{L2(G)} d eta / 2 pi)^{1/2}.
    double l2_norm() const {
        double acc = 0.0;
        for (int j = 0; j < eta.nodes; ++j) {
            double row = 0.0;
            for (int i = 0; i < angular->size(); ++i) row += angular->weight(i) * std::norm(values(j, i));
            acc += eta.weight(j) * row;
        }
        return std::sqrt(acc / two_pi);
    }

    /// (int ||V(xi + i eta)||^2_{H^s(G, |eta|)} d eta / 2 pi)^{1/2}, derivatives per sector.
    double parametric_norm(int s) const {
        if (s < 0 || s > 2) throw DomainError("line norm order must be 0, 1 or 2");
        const int n = angular->size();
        std::vector<cplx> row(n);
        double acc = 0.0;
        for (int j = 0; j < eta.nodes; ++j) {
            for (int i = 0; i < n; ++i) row[i] = values(j, i);
            const double k = 1.0 + std::abs(eta.eta(j));
            double sum = angular->l2_norm_squared<cplx>(row) * std::pow(k, 2 * s);
            if (s >= 1) {
                const auto d1 = angular->differentiate<cplx>(row);
                sum += angular->l2_norm_squared<cplx>(d1) * std::pow(k, 2 * (s - 1));
                if (s == 2) sum += angular->l2_norm_squared<cplx>(angular->differentiate<cplx>(d1));
            }
            acc += eta.weight(j) * sum;
        }
        return std::sqrt(acc / two_pi);
    }
};

struct WeightedNormSpec {
    int s = 0;
    double gamma = 0.0;
};

namespace detail {

/// Tolerance for the integrability check at the ends of the t-grid.
inline constexpr double edge_decay_tolerance = 1e-8;

inline void check_integrable(const RadialFunction& v, cplx lambda) {
    const auto& tg = v.t_grid();
    double peak = 0.0, edge = 0.0;
    for (int k = 0; k < tg.nodes; ++k) {
        const double m = v.values().row(k).cwiseAbs().maxCoeff() * std::exp(-lambda.real() * tg.t(k));
        if (!std::isfinite(m)) throw DomainError("Mellin transform: e^{-xi t} v overflows on the grid");
        peak = std::max(peak, m);
        if (k == 0 || k == tg.nodes - 1) edge = std::max(edge, m);
    }
    if (edge > edge_decay_tolerance * peak)
        throw DomainError("Mellin transform: e^{-xi t} v does not decay at the ends of the t-grid");
}

}  // namespace detail

/// v_hat(lambda, theta) = int r^{-lambda} v dr / r by the trapezoid rule in t,
/// at a single complex lambda.
inline std::vector<cplx> mellin_at(const RadialFunction& v, cplx lambda) {
    detail::check_integrable(v, lambda);
    const auto& tg = v.t_grid();
    Eigen::RowVectorXcd w(tg.nodes);
    for (int k = 0; k < tg.nodes; ++k) w[k] = tg.weight(k) * std::exp(-lambda * tg.t(k));
    const Eigen::RowVectorXcd r = w * v.values();
    return std::vector<cplx>(r.data(), r.data() + r.size());
}

namespace detail {

/// out(m, :) = sum_n in(n, :) exp(i sign (x0 + n dx)(y0 + m dy)) for m < n_out,
/// by Bluestein's chirp-z convolution: n m = (n^2 + m^2 - (m - n)^2) / 2.
inline Matrix chirp_z(const Matrix& in, double x0, double dx, double y0, double dy, int n_out, int sign) {
    const int n_in = static_cast<int>(in.rows());
    const double beta = sign * dx * dy;
    int len = 1;
    while (len < n_in + n_out - 1) len *= 2;
    std::vector<cplx> pre(n_in), post(n_out), kernel(len, cplx(0.0)), kernel_hat;
    for (int n = 0; n < n_in; ++n) {
        const double nn = static_cast<double>(n);
        pre[n] = std::polar(1.0, sign * nn * dx * y0 + 0.5 * beta * nn * nn);
    }
    for (int m = 0; m < n_out; ++m) {
        const double mm = static_cast<double>(m);
        post[m] = std::polar(1.0, sign * x0 * (y0 + mm * dy) + 0.5 * beta * mm * mm);
    }
    for (int d = -(n_in - 1); d < n_out; ++d) {
        const double dd = static_cast<double>(d);
        kernel[(d + len) % len] = std::polar(1.0, -0.5 * beta * dd * dd);
    }
    Eigen::FFT<double> fft;
    fft.fwd(kernel_hat, kernel);
    Matrix out(n_out, in.cols());
    std::vector<cplx> buf(len), buf_hat, conv;
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        for (int n = 0; n < n_in; ++n) buf[n] = in(n, c) * pre[n];
        fft.fwd(buf_hat, buf);
        for (int k = 0; k < len; ++k) buf_hat[k] *= kernel_hat[k];
        fft.inv(conv, buf_hat);
        for (int m = 0; m < n_out; ++m) out(m, c) = post[m] * conv[m];
    }
    return out;
}

}  // namespace detail

/// Transform on the line Re lambda = xi: the Fourier transform in t of
/// e^{-xi t} v by the trapezoid rule, evaluated on the eta grid by chirp-z.
inline MellinLineData mellin_forward(const RadialFunction& v, double xi, const LineGrid& eta = {}) {
    detail::check_integrable(v, xi);
    const auto& tg = v.t_grid();
    Matrix damped = v.values();
    for (int k = 0; k < tg.nodes; ++k) damped.row(k) *= tg.weight(k) * std::exp(-xi * tg.t(k));
    return {xi, eta, v.angular_ptr(),
            detail::chirp_z(damped, tg.t_min, tg.step(), eta.eta(0), eta.step(), eta.nodes, -1)};
}

/// v(r, theta) = (1/2 pi) int r^lambda V(lambda, theta) d eta on the t-grid, trapezoid in eta.
inline RadialFunction mellin_inverse(const MellinLineData& data, const RadialGrid& t = {}) {
    Matrix weighted = data.values;
    for (int j = 0; j < data.eta.nodes; ++j) weighted.row(j) *= data.eta.weight(j) / two_pi;
    Matrix out = detail::chirp_z(weighted, data.eta.eta(0), data.eta.step(), t.t_min, t.step(), t.nodes, 1);
    for (int k = 0; k < t.nodes; ++k) out.row(k) *= std::exp(data.xi * t.t(k));
    return RadialFunction(t, data.angular, std::move(out));
}

namespace detail {

/// d/dt of each column: fourth-order central differences inside, second-order
/// one-sided at the two ends of the grid.
inline Matrix t_derivative(const Matrix& v, double h) {
    const int n = static_cast<int>(v.rows());
    if (n < 5) throw ResolutionError("t-derivative stencil needs at least five nodes");
    Matrix d(v.rows(), v.cols());
    d.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) / (2.0 * h);
    d.row(1) = (v.row(2) - v.row(0)) / (2.0 * h);
    for (int k = 2; k < n - 2; ++k)
        d.row(k) = (v.row(k - 2) - 8.0 * v.row(k - 1) + 8.0 * v.row(k + 1) - v.row(k + 2)) / (12.0 * h);
    d.row(n - 2) = (v.row(n - 1) - v.row(n - 3)) / (2.0 * h);
    d.row(n - 1) = (3.0 * v.row(n - 1) - 4.0 * v.row(n - 2) + v.row(n - 3)) / (2.0 * h);
    return d;
}

inline Matrix theta_derivative(const Matrix& v, const AngularGrid& g) {
    Matrix d(v.rows(), v.cols());
    std::vector<cplx> row(v.cols());
    for (int k = 0; k < v.rows(); ++k) {
        for (int i = 0; i < v.cols(); ++i) row[i] = v(k, i);
        const auto dr = g.differentiate<cplx>(row);
        for (int i = 0; i < v.cols(); ++i) d(k, i) = dr[i];
    }
    return d;
}

}  // namespace detail

/// ||v||^2_{K^s_gamma} = sum_{|alpha| <= s} ||r^{|alpha| - s + gamma} d^alpha v||^2 over
/// both sectors. Cartesian derivatives come from the polar chain rule:
/// r d_x = cos D_t - sin D_theta, r d_y = sin D_t + cos D_theta, and
/// r^2 d_xx = Dx Dx - cos Dx, r^2 d_xy = Dx Dy - cos Dy, r^2 d_yy = Dy Dy - sin Dy.
inline double weighted_norm(const RadialFunction& v, const WeightedNormSpec& spec) {
    if (spec.s < 0 || spec.s > 2) throw DomainError("weighted_norm: s must be 0, 1 or 2");
    const auto& g = v.angular();
    const auto& tg = v.t_grid();
    const double h = tg.step();
    // Every term carries the weight e^{2 (gamma - s + 1) t} in (t, theta).
    const double a = spec.gamma - spec.s + 1.0;
    auto norm2 = [&](const Matrix& m) {
        const RadialFunction f(tg, v.angular_ptr(), m);
        return std::pow(f.weighted_l2(a), 2);
    };
    double acc = norm2(v.values());
    if (spec.s == 0) return std::sqrt(acc);

    Eigen::RowVectorXd c(g.size()), s(g.size());
    for (int i = 0; i < g.size(); ++i) {
        c[i] = std::cos(g.node(i));
        s[i] = std::sin(g.node(i));
    }
    auto dx = [&](const Matrix& m) -> Matrix {
        const Matrix mt = detail::t_derivative(m, h), mth = detail::theta_derivative(m, g);
        return mt.array().rowwise() * c.cast<cplx>().array() - mth.array().rowwise() * s.cast<cplx>().array();
    };
    auto dy = [&](const Matrix& m) -> Matrix {
        const Matrix mt = detail::t_derivative(m, h), mth = detail::theta_derivative(m, g);
        return mt.array().rowwise() * s.cast<cplx>().array() + mth.array().rowwise() * c.cast<cplx>().array();
    };
    const Matrix vx = dx(v.values()), vy = dy(v.values());
    acc += norm2(vx) + norm2(vy);
    if (spec.s == 2) {
        const Matrix vxx = dx(vx).array() - vx.array().rowwise() * c.cast<cplx>().array();
        const Matrix vxy = dx(vy).array() - vy.array().rowwise() * c.cast<cplx>().array();
        const Matrix vyy = dy(vy).array() - vy.array().rowwise() * s.cast<cplx>().array();
        acc += norm2(vxx) + norm2(vxy) + norm2(vyy);
    }
    return std::sqrt(acc);
}

/// Solves L(lambda) W = V(lambda) node by node along the line. Real data on a
/// symmetric eta grid is handled with W(xi - i eta) = conj W(xi + i eta).
inline MellinLineData solve_on_line(const MaterialPair& mp, const MellinLineData& rhs, bool real_data) {
    const SymbolSolver solver(mp, rhs.angular);
    MellinLineData out{rhs.xi, rhs.eta, rhs.angular, Matrix(rhs.values.rows(), rhs.values.cols())};
    const int n = rhs.angular->size();
    std::vector<cplx> f(n), w(n);
    const int last = rhs.eta.nodes - 1;
    for (int j = 0; j < rhs.eta.nodes; ++j) {
        if (real_data && j > last - j) {
            out.values.row(j) = out.values.row(last - j).conjugate();
            continue;
        }
        for (int i = 0; i < n; ++i) f[i] = rhs.values(j, i);
        solver.solve_values(cplx(rhs.xi, rhs.eta.eta(j)), f, w);
        for (int i = 0; i < n; ++i) out.values(j, i) = w[i];
    }
    return out;
}

/// Roots of the determinant within 1e-6 of the line Re lambda = xi, |Im| <= im_max.
inline void require_clean_line(double mu, double omega, double xi, double im_max) {
    const auto hits = roots_near_line(mu, omega, xi, im_max);
    if (!hits.empty()) {
        std::string list;
        for (auto r : hits)
            list += " (" + std::to_string(r.real()) + ", " + std::to_string(r.imag()) + ")";
        throw PreconditionError("integration line Re lambda = " + std::to_string(xi) + " meets the spectrum at" + list,
                                hits);
    }
}

/// Solution w of a_{+-} Delta w = g with the transmission conditions, in the
/// space attached to gamma: h = r^2 g is transformed on Re lambda = 1 - gamma,
/// the symbol is inverted per eta, and the result is transformed back.
inline RadialFunction invert_on_line(const MaterialPair& mp, double omega, const RadialFunction& g, double gamma,
                                     const LineGrid& eta = {}) {
    require_valid_omega(omega);
    if (std::abs(g.angular().omega() - omega) > 1e-14)
        throw DomainError("invert_on_line: data sampled for a different corner opening");
    const double xi = 1.0 - gamma;
    require_clean_line(mp.mu(), omega, xi, eta.eta_max + 1.0);
    const auto& tg = g.t_grid();
    Matrix h = g.values();
    for (int k = 0; k < tg.nodes; ++k) h.row(k) *= std::exp(2.0 * tg.t(k));
    const RadialFunction hf(tg, g.angular_ptr(), std::move(h), g.compact_support());
    const bool real_data = hf.values().imag().cwiseAbs().maxCoeff() == 0.0;
    const auto line = solve_on_line(mp, mellin_forward(hf, xi, eta), real_data);
    return mellin_inverse(line, tg);
}

/// Half the distance from 0 to the nearest spectrum point with Re lambda < 0,
/// capped at 0.1.
inline double strip_epsilon(double mu, double omega) {
    const double im = imaginary_root_bound(mu, omega) + 0.5;
    double nearest = 0.2;
    for (const auto& r : find_spectrum(mu, omega, Band(-0.25, 0.0, im)).roots)
        if (r.lambda.real() < -1e-12) nearest = std::min(nearest, -r.lambda.real());
    return std::min(0.1, 0.5 * nearest);
}

/// Spectrum points with 0 <= Re lambda < 1.
inline std::vector<SpectralPoint> poles_in_strip(double mu, double omega) {
    const double im = imaginary_root_bound(mu, omega) + 0.5;
    return find_spectrum(mu, omega, Band(0.0, 1.0, im)).roots;
}

struct ResidueOptions {
    std::vector<double> radius_fractions{0.3, 0.5, 0.7};
    int contour_nodes = 64;
    /// Annulus in t = log r where the residue is sampled for the log-power fit.
    double fit_t_min = -1.0;
    double fit_t_max = 1.0;
    int fit_nodes = 9;
    double radius_tolerance = 1e-6;
};

/// Residue of r^lambda L(lambda)^{-1} h_hat(lambda) at lambda0 split as
/// r^{lambda0} sum_q log^q r A_q(theta), with the singular part of the H^1-side
/// solution equal to minus that residue.
struct SingularCoefficient {
    cplx lambda0;
    /// coefficients[q][k] = <T_q, phi_k> with T_q = -A_q and phi_k the L2(G)-normalised kernel basis.
    std::vector<std::vector<cplx>> coefficients;
    /// coefficients[0][0]: the factor c in u = u_reg + c chi r^{lambda0} phi_0.
    cplx coefficient;
    std::vector<AngularFunction> kernel;
    /// T_q sampled on the angular grid of the data.
    std::vector<std::vector<cplx>> log_terms;
    std::vector<double> radii;
    /// Largest disagreement of the fitted log terms across radii, relative to the
    /// larger of the fitted terms and the integrand size on the contours.
    double radius_spread = 0.0;

    const AngularFunction& angular() const { return kernel.front(); }
};

namespace detail {

struct ContourResidue {
    std::vector<Matrix> terms;  // A_q as 1 x n rows
    double scale;
};

/// Residue samples at radii r_j = e^{t_j} by K-point trapezoid quadrature on
/// |lambda - lambda0| = rho, then a least-squares fit against r^{lambda0} log^q r.
inline ContourResidue contour_residue(const SymbolSolver& solver, const RadialFunction& h, cplx lambda0, double rho,
                                      int q_max, const ResidueOptions& opts) {
    const int n = h.angular().size();
    const int K = opts.contour_nodes, J = opts.fit_nodes;
    std::vector<double> ts(J);
    for (int j = 0; j < J; ++j) ts[j] = opts.fit_t_min + (opts.fit_t_max - opts.fit_t_min) * j / (J - 1);
    Matrix res = Matrix::Zero(J, n);
    std::vector<cplx> w(n);
    double scale = 0.0;
    for (int k = 0; k < K; ++k) {
        const cplx z = std::polar(rho, two_pi * k / K);
        const cplx lambda = lambda0 + z;
        const auto hh = mellin_at(h, lambda);
        solver.solve_values(lambda, hh, w);
        const Eigen::Map<const Eigen::RowVectorXcd> wr(w.data(), n);
        for (int j = 0; j < J; ++j) {
            const cplx f = std::exp(lambda * ts[j]) * z;
            res.row(j) += (f / double(K)) * wr;
            scale = std::max(scale, std::abs(f) * std::sqrt(h.angular().l2_norm_squared<cplx>(w)));
        }
    }
    Matrix design(J, q_max + 1);
    for (int j = 0; j < J; ++j)
        for (int q = 0; q <= q_max; ++q) design(j, q) = std::exp(lambda0 * ts[j]) * std::pow(ts[j], q);
    const Matrix a = design.colPivHouseholderQr().solve(res);
    ContourResidue out;
    out.scale = scale;
    for (int q = 0; q <= q_max; ++q) out.terms.push_back(a.row(q));
    return out;
}

inline double grid_l2(const AngularGrid& g, const Matrix& row) {
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i) acc += g.weight(i) * std::norm(row(0, i));
    return std::sqrt(acc);
}

}  // namespace detail

/// Extracts the coefficient(s) of the singular term at lambda0 from data g via
/// the residue of r^lambda L(lambda)^{-1} h_hat(lambda), h = r^2 g.
inline SingularCoefficient singular_coefficient(const MaterialPair& mp, double omega, const RadialFunction& g,
                                                cplx lambda0, const ResidueOptions& opts = {}) {
    const double mu = mp.mu();
    require_valid_omega(omega);
    if (std::abs(g.angular().omega() - omega) > 1e-14)
        throw DomainError("singular_coefficient: data sampled for a different corner opening");
    if (opts.radius_fractions.empty() || opts.contour_nodes < 8 || opts.fit_nodes < 2)
        throw DomainError("singular_coefficient: invalid contour options");

    const double reach = 1.25;
    const auto nearby =
        find_spectrum(mu, omega, Band(lambda0.real() - reach, lambda0.real() + reach, std::abs(lambda0.imag()) + reach));
    const SpectralPoint* self = nullptr;
    double dist = 1.0;
    for (const auto& r : nearby.roots) {
        const double d = std::abs(r.lambda - lambda0);
        if (d < 1e-8) {
            self = &r;
        } else {
            dist = std::min(dist, d);
        }
    }
    if (!self) throw EmptyKernelError("singular_coefficient: lambda0 is not a spectrum point");
    if (dist < 1e-6) throw ContourError("singular_coefficient: lambda0 is not isolated from other poles");
    const int q_max = std::max(0, self->multiplicity - self->kernel_dim);
    if (q_max + 1 > opts.fit_nodes) throw DomainError("singular_coefficient: too few fit nodes for the pole order");

    const auto& tg = g.t_grid();
    Matrix hv = g.values();
    for (int k = 0; k < tg.nodes; ++k) hv.row(k) *= std::exp(2.0 * tg.t(k));
    const RadialFunction h(tg, g.angular_ptr(), std::move(hv), g.compact_support());
    const SymbolSolver solver(mp, g.angular_ptr());

    SingularCoefficient out;
    out.lambda0 = self->lambda;
    out.kernel = kernel_at(self->lambda, mu, omega);
    std::vector<detail::ContourResidue> fits;
    for (double f : opts.radius_fractions) {
        if (!(f > 0.0 && f < 1.0)) throw ContourError("singular_coefficient: radius fraction must lie in (0, 1)");
        out.radii.push_back(f * dist);
        fits.push_back(detail::contour_residue(solver, h, self->lambda, f * dist, q_max, opts));
    }
    double spread = 0.0, size = 0.0, scale = 1e-300;
    for (const auto& f : fits) scale = std::max(scale, f.scale);
    for (int q = 0; q <= q_max; ++q) {
        size = std::max(size, detail::grid_l2(g.angular(), fits[0].terms[q]));
        for (std::size_t r = 1; r < fits.size(); ++r)
            spread = std::max(spread, detail::grid_l2(g.angular(), fits[r].terms[q] - fits[0].terms[q]));
    }
    out.radius_spread = spread / std::max(size, scale);
    if (out.radius_spread > opts.radius_tolerance)
        throw QuadratureError("singular_coefficient: residue differs across contour radii (relative spread " +
                              std::to_string(out.radius_spread) + ")");

    std::vector<std::vector<cplx>> phis;
    for (const auto& phi : out.kernel) phis.push_back(phi.sample(g.angular()));
    for (int q = 0; q <= q_max; ++q) {
        std::vector<cplx> t(g.angular().size());
        for (int i = 0; i < g.angular().size(); ++i) t[i] = -fits[0].terms[q](0, i);
        std::vector<cplx> coeffs;
        for (const auto& p : phis) {
            cplx ip = 0.0;
            for (int i = 0; i < g.angular().size(); ++i) ip += g.angular().weight(i) * t[i] * std::conj(p[i]);
            coeffs.push_back(ip);
        }
        out.coefficients.push_back(std::move(coeffs));
        out.log_terms.push_back(std::move(t));
    }
    out.coefficient = out.coefficients[0][0];
    return out;
}

/// Residue of r^lambda L(lambda)^{-1} h_hat(lambda) at lambda0 on a t-grid
/// (no log-power projection), trapezoid rule on one circle.
inline RadialFunction residue_function(const MaterialPair& mp, const RadialFunction& g, cplx lambda0, double rho,
                                       const RadialGrid& t, int contour_nodes = 64) {
    const auto& tg = g.t_grid();
    Matrix hv = g.values();
    for (int k = 0; k < tg.nodes; ++k) hv.row(k) *= std::exp(2.0 * tg.t(k));
    const RadialFunction h(tg, g.angular_ptr(), std::move(hv), g.compact_support());
    const SymbolSolver solver(mp, g.angular_ptr());
    const int n = g.angular().size();
    Matrix out = Matrix::Zero(t.nodes, n);
    std::vector<cplx> w(n);
    for (int k = 0; k < contour_nodes; ++k) {
        const cplx z = std::polar(rho, two_pi * k / contour_nodes);
        const cplx lambda = lambda0 + z;
        solver.solve_values(lambda, mellin_at(h, lambda), w);
        const Eigen::Map<const Eigen::RowVectorXcd> wr(w.data(), n);
        for (int j = 0; j < t.nodes; ++j) out.row(j) += (std::exp(lambda * t.t(j)) * z / double(contour_nodes)) * wr;
    }
    return RadialFunction(t, g.angular_ptr(), std::move(out));
}

}  // namespace corner
