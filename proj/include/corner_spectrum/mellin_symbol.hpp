#pragma once

// Mellin symbol L(lambda) of the corner transmission problem:
// determinant, transmission matrix, solves and kernels.

#include <algorithm>
#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "angular_function.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace corner {

/// Factors of the determinant: A(lambda) = (b + c)(b - c).
struct DeterminantFactors {
    cplx b;
    cplx c;
};

/// A(lambda) = (mu^2+1) sin(lambda omega) sin(lambda(2pi-omega))
///           + 2 mu (1 - cos(lambda omega) cos(lambda(2pi-omega))).
inline cplx closed_form_determinant(cplx lambda, double mu, double omega) {
    const cplx s1 = std::sin(lambda * omega), s2 = std::sin(lambda * (two_pi - omega));
    const cplx c1 = std::cos(lambda * omega), c2 = std::cos(lambda * (two_pi - omega));
    return (mu * mu + 1.0) * s1 * s2 + 2.0 * mu * (1.0 - c1 * c2);
}

/// b = (mu+1) sin(lambda pi), c = (mu-1) sin(lambda(pi-omega)).
inline DeterminantFactors factored_determinant(cplx lambda, double mu, double omega) {
    return {(mu + 1.0) * std::sin(lambda * pi), (mu - 1.0) * std::sin(lambda * (pi - omega))};
}

namespace detail {

/// sin(z + k pi/2) * exp(-shift).
inline cplx scaled_sin_shift(cplx z, int k, double shift) {
    // sin(z) = (e^{iz} - e^{-iz}) / 2i; both terms scaled by e^{-shift}.
    const cplx i1(0.0, 1.0);
    const cplx ep = std::exp(i1 * z - shift), em = std::exp(-i1 * z - shift);
    const cplx s = (ep - em) / (2.0 * i1);
    const cplx c = 0.5 * (ep + em);
    switch (((k % 4) + 4) % 4) {
        case 0: return s;
        case 1: return c;
        case 2: return -s;
        default: return -c;
    }
}

}  // namespace detail

/// Determinant and its derivatives with a common factor exp(-2 pi |Im lambda|)
/// removed, so large imaginary parts neither overflow nor lose the root test.
struct ScaledDeterminant {
    std::vector<cplx> derivs;  // scaled A^(k), k = 0..order
    double log_scale = 0.0;    // A^(k) = derivs[k] * exp(log_scale)
    double factor_norm = 0.0;  // scaled |b|^2 + |c|^2

    /// |A| / max(1, |b|^2 + |c|^2), the scale-aware root measure.
    double relative() const {
        const double unit = std::exp(-log_scale);
        return std::abs(derivs[0]) / std::max(unit, factor_norm);
    }
};

inline ScaledDeterminant scaled_determinant(cplx lambda, double mu, double omega, int order = 0) {
    const double shift = pi * std::abs(lambda.imag());
    const double kb = pi, kc = pi - omega;
    std::vector<cplx> b(order + 1), c(order + 1);
    double pb = 1.0, pc = 1.0;
    for (int k = 0; k <= order; ++k) {
        b[k] = (mu + 1.0) * pb * detail::scaled_sin_shift(lambda * kb, k, shift);
        c[k] = (mu - 1.0) * pc * detail::scaled_sin_shift(lambda * kc, k, shift);
        pb *= kb;
        pc *= kc;
    }
    ScaledDeterminant out;
    out.log_scale = 2.0 * shift;
    out.factor_norm = std::norm(b[0]) + std::norm(c[0]);
    out.derivs.resize(order + 1);
    for (int n = 0; n <= order; ++n) {
        cplx acc = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= n; ++k) {
            acc += binom * (b[k] * b[n - k] - c[k] * c[n - k]);
            binom = binom * (n - k) / (k + 1);
        }
        out.derivs[n] = acc;
    }
    return out;
}

/// Scale-aware root test |A| <= tol * max(1, |b|^2 + |c|^2).
inline bool on_spectrum(cplx lambda, double mu, double omega, double tol = 1e-9) {
    return scaled_determinant(lambda, mu, omega).relative() <= tol;
}

/// The 4x4 matrix of the transmission conditions
///   W+(2pi) - W-(0) = 0,          (a+ W+'(2pi) - a- W-'(0)) / a- = 0,
///   W+(omega) - W-(omega) = 0,    (a+ W+'(omega) - a- W-'(omega)) / a- = 0.
/// entries uses W = alpha cos(lambda theta) + beta~ sin(lambda theta)/lambda on
/// each sector with unknowns (alpha-, beta~-, alpha+, beta~+); the column factor
/// 1/lambda is absorbed by the unscaled flux rows, so det(entries) = A(lambda)
/// exactly, entries equals the displayed matrix at lambda = 1 and reduces to
/// the limit basis {1, theta} at lambda = 0.
/// balanced is the same system in the pair anchored at each sector midpoint.
/// The change of basis is a rotation with unit determinant, so both matrices
/// share the determinant, but balanced has no exp(2 pi |Im lambda|) cancellation
/// and determinant() factors it instead of entries.
struct TransmissionMatrix {
    Eigen::Matrix4cd entries;
    Eigen::Matrix4cd balanced;
    cplx lambda;
    double mu;
    double omega;

    cplx determinant() const { return balanced.partialPivLu().determinant(); }
};

namespace detail {

/// Homogeneous basis of the given kind at the four trace points, arranged as the
/// transmission system. flux_scale divides the flux rows.
inline Eigen::Matrix4cd system_matrix(BasisKind kind, cplx lambda, double mu, double omega, double flux_scale) {
    const AngularFunction probe(lambda, omega, kind, {0.0, 0.0}, {0.0, 0.0});
    const auto m0 = probe.homogeneous(0.0, Sector::Minus);
    const auto mw = probe.homogeneous(omega, Sector::Minus);
    const auto pw = probe.homogeneous(omega, Sector::Plus);
    const auto p2 = probe.homogeneous(two_pi, Sector::Plus);
    Eigen::Matrix4cd m;
    m << -m0[0], -m0[1], p2[0], p2[1],
         -m0[2] / flux_scale, -m0[3] / flux_scale, mu * p2[2] / flux_scale, mu * p2[3] / flux_scale,
         -mw[0], -mw[1], pw[0], pw[1],
         -mw[2] / flux_scale, -mw[3] / flux_scale, mu * pw[2] / flux_scale, mu * pw[3] / flux_scale;
    return m;
}

inline double max_sector_width(double omega) { return std::max(omega, two_pi - omega); }

/// Trig basis is used while |lambda| * width stays moderate; beyond that the
/// bounded exponential pair keeps the system well scaled.
inline BasisKind preferred_basis(cplx lambda, double omega) {
    return std::abs(lambda) * max_sector_width(omega) <= 3.0 ? BasisKind::SectorTrig
                                                            : BasisKind::SectorExponential;
}

inline double flux_scale_for(BasisKind kind, cplx lambda) {
    return kind == BasisKind::SectorTrig ? 1.0 : std::max(1.0, std::abs(lambda));
}

}  // namespace detail

inline TransmissionMatrix assemble_matrix(cplx lambda, double mu, double omega) {
    require_valid_contrast(mu);
    require_valid_omega(omega);
    require_finite(lambda);
    const cplx c2 = std::cos(two_pi * lambda), s2 = detail::sin_over_lambda(lambda, two_pi);
    const cplx cw = std::cos(lambda * omega), sw = detail::sin_over_lambda(lambda, omega);
    const cplx l2 = lambda * lambda;
    Eigen::Matrix4cd e;
    e << -1.0, 0.0, c2, s2,
         0.0, -1.0, -mu * l2 * s2, mu * c2,
         -cw, -sw, cw, sw,
         l2 * sw, -cw, -mu * l2 * sw, mu * cw;
    return {e, detail::system_matrix(BasisKind::SectorTrig, lambda, mu, omega, 1.0), lambda, mu, omega};
}

struct SymbolOptions {
    int nodes_per_sector = 64;
    int panels_per_sector = 4;
    double root_tolerance = 1e-9;
};

/// Solver for a(lambda^2 + d^2/dtheta^2) W = F with the transmission conditions,
/// bound to one material pair and one angular grid.
class SymbolSolver {
public:
    SymbolSolver(const MaterialPair& materials, std::shared_ptr<const AngularGrid> grid,
                 double root_tolerance = 1e-9)
        : materials_(materials), grid_(std::move(grid)), root_tol_(root_tolerance) {
        if (!grid_) throw DomainError("symbol solver needs an angular grid");
    }

    SymbolSolver(const MaterialPair& materials, double omega, const SymbolOptions& opts = {})
        : SymbolSolver(materials,
                       std::make_shared<const AngularGrid>(omega, opts.nodes_per_sector, opts.panels_per_sector),
                       opts.root_tolerance) {}

    const AngularGrid& grid() const noexcept { return *grid_; }
    std::shared_ptr<const AngularGrid> grid_ptr() const noexcept { return grid_; }
    const MaterialPair& materials() const noexcept { return materials_; }

    /// Full solution as an AngularFunction.
    AngularFunction solve(cplx lambda, std::span<const cplx> rhs) const {
        Work w = run(lambda, rhs);
        return AngularFunction(lambda, grid_->omega(), w.kind, {w.x[0], w.x[1]}, {w.x[2], w.x[3]},
                               std::move(w.part));
    }

    /// Solution values at the grid nodes only.
    void solve_values(cplx lambda, std::span<const cplx> rhs, std::span<cplx> out) const {
        const Work w = run(lambda, rhs);
        const AngularFunction hom(lambda, grid_->omega(), w.kind, {w.x[0], w.x[1]}, {w.x[2], w.x[3]});
        for (int i = 0; i < grid_->size(); ++i)
            out[i] = hom.evaluate(grid_->node(i), grid_->sector_of(i)).value + w.part.value[i];
    }

    /// Throws NearSingularSymbolError when lambda is on the spectrum.
    void check_invertible(cplx lambda) const {
        const auto sd = scaled_determinant(lambda, materials_.mu(), grid_->omega());
        const double rel = sd.relative();
        if (rel <= root_tol_) {
            const double abs_det = std::exp(std::log(std::abs(sd.derivs[0])) + sd.log_scale);
            throw NearSingularSymbolError("Mellin symbol is not invertible at lambda = (" +
                                              std::to_string(lambda.real()) + ", " +
                                              std::to_string(lambda.imag()) + ")",
                                          abs_det, rel);
        }
    }

private:
    struct Work {
        BasisKind kind;
        std::array<cplx, 4> x;
        ParticularPart part;
    };

    Work run(cplx lambda, std::span<const cplx> rhs) const {
        require_finite(lambda);
        const AngularGrid& g = *grid_;
        if (static_cast<int>(rhs.size()) != g.size())
            throw DomainError("right-hand side must be sampled on the angular grid");
        check_invertible(lambda);

        const double omega = g.omega();
        const double mu = materials_.mu();
        Work w;
        w.kind = detail::preferred_basis(lambda, omega);
        auto& p = w.part;
        p.grid = grid_;
        p.value.assign(g.size(), 0.0);
        p.deriv.assign(g.size(), 0.0);
        p.forcing.resize(g.size());
        for (int i = 0; i < g.size(); ++i) {
            const double a = g.sector_of(i) == Sector::Minus ? materials_.a_minus() : materials_.a_plus();
            p.forcing[i] = rhs[i] / a;
        }
        for (Sector s : {Sector::Minus, Sector::Plus}) {
            if (w.kind == BasisKind::SectorTrig)
                particular_trig(lambda, s, p);
            else
                particular_exponential(lambda, s, p);
            const int k = static_cast<int>(s);
            p.begin_forcing[k] = extrapolate_forcing(p.forcing, s, g.sector_begin(s));
            p.end_forcing[k] = extrapolate_forcing(p.forcing, s, g.sector_end(s));
        }

        const double fs = detail::flux_scale_for(w.kind, lambda);
        const Eigen::Matrix4cd m = detail::system_matrix(w.kind, lambda, mu, omega, fs);
        Eigen::Vector4cd r;
        r << -(p.end_value[1] - p.begin_value[0]), -(mu * p.end_deriv[1] - p.begin_deriv[0]) / fs,
            -(p.begin_value[1] - p.end_value[0]), -(mu * p.begin_deriv[1] - p.end_deriv[0]) / fs;
        const Eigen::Vector4cd x = m.fullPivLu().solve(r);
        for (int i = 0; i < 4; ++i) w.x[i] = x[i];
        return w;
    }

    cplx extrapolate_forcing(const std::vector<cplx>& f, Sector s, double theta) const {
        return grid_->interpolate<cplx>(f, s, theta);
    }

    // Variation of parameters with {cos(lambda x), sin(lambda x)/lambda},
    // x = theta - sector_begin:
    //   W_p  = S(x) C(x) - cos(lambda x) Sx(x),
    //   W_p' = cos(lambda x) C(x) + lambda^2 S(x) Sx(x),
    // C = int_0^x cos(lambda y) f, Sx = int_0^x S(y) f.
    void particular_trig(cplx lambda, Sector s, ParticularPart& p) const {
        const AngularGrid& g = *grid_;
        const auto& op = g.ops();
        const int n = g.nodes_per_panel();
        const double a = g.sector_begin(s);
        const int k = static_cast<int>(s);
        const cplx lam2 = lambda * lambda;
        cplx c_start = 0.0, s_start = 0.0;
        std::vector<cplx> g1(n), g2(n);
        for (int pn = 0; pn < g.panels_per_sector(); ++pn) {
            const int base = g.sector_offset(s) + pn * n;
            const double half = 0.5 * (g.panel_end(s, pn) - g.panel_begin(s, pn));
            for (int j = 0; j < n; ++j) {
                const double x = g.node(base + j) - a;
                g1[j] = std::cos(lambda * x) * p.forcing[base + j];
                g2[j] = detail::sin_over_lambda(lambda, x) * p.forcing[base + j];
            }
            for (int i = 0; i < n; ++i) {
                cplx ci = c_start, si = s_start;
                for (int j = 0; j < n; ++j) {
                    ci += half * op.integrate(i, j) * g1[j];
                    si += half * op.integrate(i, j) * g2[j];
                }
                const double x = g.node(base + i) - a;
                const cplx co = std::cos(lambda * x), so = detail::sin_over_lambda(lambda, x);
                p.value[base + i] = so * ci - co * si;
                p.deriv[base + i] = co * ci + lam2 * so * si;
            }
            for (int j = 0; j < n; ++j) {
                c_start += half * op.weights[j] * g1[j];
                s_start += half * op.weights[j] * g2[j];
            }
        }
        const double x = g.sector_width(s);
        const cplx co = std::cos(lambda * x), so = detail::sin_over_lambda(lambda, x);
        p.begin_value[k] = 0.0;
        p.begin_deriv[k] = 0.0;
        p.end_value[k] = so * c_start - co * s_start;
        p.end_deriv[k] = co * c_start + lam2 * so * s_start;
    }

    // Variation of parameters with the bounded pair exp(+-i l theta), Im l >= 0:
    //   W_p = (I + J) / (2 i l),  W_p' = (I - J) / 2,
    //   I(theta) = int_a^theta e^{i l (theta - s)} f(s) ds,
    //   J(theta) = int_theta^b e^{i l (s - theta)} f(s) ds.
    // Each is propagated panel by panel plus a local piece within the panel.
    void particular_exponential(cplx lambda, Sector s, ParticularPart& p) const {
        const AngularGrid& g = *grid_;
        const int n = g.nodes_per_panel();
        const int k = static_cast<int>(s);
        const cplx i1(0.0, 1.0);
        const cplx l = lambda.imag() >= 0.0 ? lambda : -lambda;
        const int np = g.panels_per_sector();
        const int off = g.sector_offset(s);
        std::vector<cplx> fwd(g.nodes_per_sector()), bwd(g.nodes_per_sector());
        std::vector<double> lv;
        p.wavenumber = l;
        p.panel_forward.resize(2 * np);
        p.panel_backward.resize(2 * np);
        auto local = [&](int pn, double x0, double len, int dir) {
            return detail::exp_local_integral(g, s, pn, p.forcing, l, x0, len, dir, lv);
        };

        cplx start = 0.0;
        for (int pn = 0; pn < np; ++pn) {
            const double pa = g.panel_begin(s, pn), pb = g.panel_end(s, pn);
            p.panel_forward[k * np + pn] = start;
            for (int i = 0; i < n; ++i) {
                const int idx = pn * n + i;
                const double x = g.node(off + idx);
                fwd[idx] = std::exp(i1 * l * (x - pa)) * start + local(pn, x, x - pa, -1);
            }
            start = std::exp(i1 * l * (pb - pa)) * start + local(pn, pb, pb - pa, -1);
        }
        const cplx i_end = start;
        start = 0.0;
        for (int pn = np - 1; pn >= 0; --pn) {
            const double pa = g.panel_begin(s, pn), pb = g.panel_end(s, pn);
            p.panel_backward[k * np + pn] = start;
            for (int i = 0; i < n; ++i) {
                const int idx = pn * n + i;
                const double x = g.node(off + idx);
                bwd[idx] = std::exp(i1 * l * (pb - x)) * start + local(pn, x, pb - x, +1);
            }
            start = std::exp(i1 * l * (pb - pa)) * start + local(pn, pa, pb - pa, +1);
        }
        const cplx j_begin = start;
        const cplx inv = 1.0 / (2.0 * i1 * l);
        for (int idx = 0; idx < g.nodes_per_sector(); ++idx) {
            p.value[off + idx] = (fwd[idx] + bwd[idx]) * inv;
            p.deriv[off + idx] = 0.5 * (fwd[idx] - bwd[idx]);
        }
        p.begin_value[k] = j_begin * inv;
        p.begin_deriv[k] = -0.5 * j_begin;
        p.end_value[k] = i_end * inv;
        p.end_deriv[k] = 0.5 * i_end;
    }

    MaterialPair materials_;
    std::shared_ptr<const AngularGrid> grid_;
    double root_tol_;
};

/// Solves a(lambda^2 + d^2/dtheta^2) W = F with the transmission conditions;
/// rhs holds F sampled on the grid nodes.
inline AngularFunction solve_symbol(cplx lambda, const MaterialPair& materials, const AngularGrid& grid,
                                    std::span<const cplx> rhs, double root_tolerance = 1e-9) {
    const SymbolSolver solver(materials, std::make_shared<const AngularGrid>(grid), root_tolerance);
    return solver.solve(lambda, rhs);
}

/// Convenience form with a- = 1, a+ = mu on the default grid for omega.
inline AngularFunction solve_symbol(cplx lambda, double mu, double omega, std::span<const cplx> rhs,
                                    const SymbolOptions& opts = {}) {
    const SymbolSolver solver(MaterialPair::from_contrast(mu), omega, opts);
    return solver.solve(lambda, rhs);
}

/// Default angular grid for omega.
inline AngularGrid default_angular_grid(double omega, const SymbolOptions& opts = {}) {
    return AngularGrid(omega, opts.nodes_per_sector, opts.panels_per_sector);
}

struct KernelOptions {
    double root_tolerance = 1e-9;
    double rank_tolerance = 1e-7;
    int nodes_per_sector = 64;
    int panels_per_sector = 4;
};

/// Orthonormal (in L2(G)) basis of the kernel of L(lambda0). Each function is
/// phased so that its largest grid sample is real and positive.
inline std::vector<AngularFunction> kernel_at(cplx lambda0, double mu, double omega, const KernelOptions& opts = {}) {
    require_valid_contrast(mu);
    require_valid_omega(omega);
    require_finite(lambda0);
    if (!on_spectrum(lambda0, mu, omega, opts.root_tolerance))
        throw EmptyKernelError("lambda0 is not on the spectrum (determinant above tolerance)");

    const BasisKind kind = detail::preferred_basis(lambda0, omega);
    const Eigen::Matrix4cd m =
        detail::system_matrix(kind, lambda0, mu, omega, detail::flux_scale_for(kind, lambda0));
    const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int dim = 0;
    for (int i = 0; i < 4; ++i)
        if (sv[i] <= opts.rank_tolerance * sv[0]) ++dim;
    dim = std::max(dim, 1);

    const AngularGrid grid(omega, opts.nodes_per_sector, opts.panels_per_sector);
    std::vector<AngularFunction> basis;
    std::vector<std::vector<cplx>> samples;
    for (int c = 4 - dim; c < 4; ++c) {
        const Eigen::Vector4cd v = svd.matrixV().col(c);
        std::array<cplx, 4> x{v[0], v[1], v[2], v[3]};
        std::vector<cplx> sx = AngularFunction(lambda0, omega, kind, {x[0], x[1]}, {x[2], x[3]}).sample(grid);
        // Modified Gram-Schmidt in L2(G).
        for (std::size_t b = 0; b < basis.size(); ++b) {
            cplx ip = 0.0;
            for (int i = 0; i < grid.size(); ++i) ip += grid.weight(i) * std::conj(samples[b][i]) * sx[i];
            const auto& cm = basis[b].coeffs_minus();
            const auto& cp = basis[b].coeffs_plus();
            x[0] -= ip * cm[0];
            x[1] -= ip * cm[1];
            x[2] -= ip * cp[0];
            x[3] -= ip * cp[1];
            for (int i = 0; i < grid.size(); ++i) sx[i] -= ip * samples[b][i];
        }
        const double nrm = std::sqrt(grid.l2_norm_squared<cplx>(sx));
        std::size_t imax = 0;
        for (std::size_t i = 1; i < sx.size(); ++i)
            if (std::abs(sx[i]) > std::abs(sx[imax]) * (1.0 + 1e-12)) imax = i;
        const cplx phase = std::abs(sx[imax]) > 0.0 ? std::conj(sx[imax]) / std::abs(sx[imax]) : cplx(1.0);
        const cplx f = phase / nrm;
        for (auto& xi : x) xi *= f;
        for (auto& si : sx) si *= f;
        basis.emplace_back(lambda0, omega, kind, std::array<cplx, 2>{x[0], x[1]}, std::array<cplx, 2>{x[2], x[3]});
        samples.push_back(std::move(sx));
    }
    return basis;
}

}  // namespace corner
