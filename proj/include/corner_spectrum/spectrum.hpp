#pragma once

// Spectrum of the Mellin symbol: argument-principle root finding, closed-form
// exponents at the right angle, regime labels and the singular-term inventory.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mellin_symbol.hpp"

namespace corner {

enum class Regime { IndexConjecturedYes, IndexConjecturedNo, EllipticContrast };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::IndexConjecturedYes: return "IndexConjecturedYes";
        case Regime::IndexConjecturedNo: return "IndexConjecturedNo";
        default: return "EllipticContrast";
    }
}

/// rho(mu) = |mu - 1| / (2 |mu + 1|).
inline double rho(double mu) {
    require_valid_contrast(mu);
    return std::abs(mu - 1.0) / (2.0 * std::abs(mu + 1.0));
}

inline constexpr double critical_low = -3.0;
inline constexpr double critical_high = -1.0 / 3.0;

/// Contrast regime; the critical interval [-3, -1/3] is closed.
inline Regime classify(double mu) {
    require_valid_contrast(mu);
    if (mu > 0.0) return Regime::EllipticContrast;
    if (mu >= critical_low && mu <= critical_high) return Regime::IndexConjecturedNo;
    return Regime::IndexConjecturedYes;
}

inline bool is_critical_endpoint(double mu) { return mu == critical_low || mu == critical_high; }

/// lambda1(mu) = (2/pi) arccos(rho) for mu < 0 outside (-3, -1/3); 0 at the endpoints.
inline double lambda1(double mu) {
    require_valid_contrast(mu);
    if (mu > 0.0) throw RegimeError("lambda1 is defined for negative contrast only");
    if (is_critical_endpoint(mu)) return 0.0;
    if (classify(mu) == Regime::IndexConjecturedNo)
        throw RegimeError("lambda1 is undefined for -3 < mu < -1/3 (rho > 1)");
    return 2.0 / pi * std::acos(std::min(rho(mu), 1.0));
}

/// eta(mu) = (2/pi) arcosh(rho) for -3 <= mu <= -1/3; 0 at the endpoints.
inline double eta(double mu) {
    require_valid_contrast(mu);
    if (classify(mu) != Regime::IndexConjecturedNo)
        throw RegimeError("eta is defined on the critical interval -3 <= mu <= -1/3 only");
    if (is_critical_endpoint(mu)) return 0.0;
    return 2.0 / pi * std::acosh(std::max(rho(mu), 1.0));
}

/// Search window re_min <= Re lambda < re_max, |Im lambda| <= im_max.
struct Band {
    double re_min;
    double re_max;
    double im_max;

    Band(double re_min_, double re_max_, double im_max_) : re_min(re_min_), re_max(re_max_), im_max(im_max_) {
        if (!(re_min < re_max)) throw DomainError("band needs re_min < re_max");
        if (!(im_max > 0.0)) throw DomainError("band needs im_max > 0");
    }

    bool contains(cplx z) const {
        return z.real() >= re_min && z.real() < re_max && std::abs(z.imag()) <= im_max;
    }
};

struct SpectralPoint {
    cplx lambda;
    int multiplicity = 1;
    int kernel_dim = 1;
};

struct SpectrumReport {
    std::vector<SpectralPoint> roots;
    Regime regime;
    double mu;
    double omega;
    Band band;

    int total_multiplicity() const {
        int n = 0;
        for (const auto& r : roots) n += r.multiplicity;
        return n;
    }
};

struct SpectrumOptions {
    double box_size = 0.5;
    int max_depth = 20;
    int edge_nodes = 256;
    int max_edge_nodes = 8192;
    double newton_tolerance = 1e-13;
    double root_tolerance = 1e-9;
    double pole_probe_radius = 1e-3;
};

/// Axis-aligned rectangle in the lambda plane.
struct Box {
    double x0, x1, y0, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= x0 - slack && z.real() <= x1 + slack && z.imag() >= y0 - slack && z.imag() <= y1 + slack;
    }
    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "[" << x0 << ", " << x1 << "] x [" << y0 << ", " << y1 << "]";
        return os.str();
    }
};

namespace detail {

/// Argument increment along a parametrised path, or nothing when the path
/// cannot be resolved with max_nodes segments. A segment is resolved when the
/// principal argument step stays below pi/3 and its length stays below
/// |A/A'| at both ends (a lower bound on the distance to the nearest zero
/// times its order), which rules out aliasing past a nearby zero. Nodes with
/// relative determinant below min_relative count as hits on a zero.
template <class Path>
std::optional<double> path_arg_increment(Path path, double mu, double omega, int nodes, int max_nodes,
                                         double min_relative = 0.0) {
    struct Node {
        cplx z, value;
        double reach;
    };
    auto eval = [&](double s, Node& out) {
        out.z = path(s);
        const auto sd = scaled_determinant(out.z, mu, omega, 1);
        out.value = sd.derivs[0];
        out.reach = std::abs(sd.derivs[0] / sd.derivs[1]);
        return out.value != cplx(0.0) && std::isfinite(std::abs(out.value)) && sd.relative() > min_relative;
    };
    for (int n = nodes; n <= max_nodes; n *= 2) {
        double total = 0.0;
        bool resolved = true;
        Node prev, cur;
        if (!eval(0.0, prev)) return std::nullopt;
        for (int k = 1; k <= n; ++k) {
            if (!eval(static_cast<double>(k) / n, cur)) return std::nullopt;
            const double step = std::arg(cur.value / prev.value);
            const double len = std::abs(cur.z - prev.z);
            if (std::abs(step) >= pi / 3 || len > std::min(prev.reach, cur.reach)) {
                resolved = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if (resolved) return total;
    }
    return std::nullopt;
}

inline std::optional<int> to_winding(double total) {
    const double w = total / two_pi;
    const double r = std::round(w);
    if (std::abs(w - r) > 0.1) return std::nullopt;
    return static_cast<int>(r);
}

}  // namespace detail

/// Number of zeros of A (with multiplicity) inside the box, by the argument
/// principle; nothing if the boundary passes too close to a zero.
inline std::optional<int> box_winding(const Box& b, double mu, double omega, const SpectrumOptions& opts = {}) {
    const std::array<std::array<cplx, 2>, 4> edges{{{cplx(b.x0, b.y0), cplx(b.x1, b.y0)},
                                                    {cplx(b.x1, b.y0), cplx(b.x1, b.y1)},
                                                    {cplx(b.x1, b.y1), cplx(b.x0, b.y1)},
                                                    {cplx(b.x0, b.y1), cplx(b.x0, b.y0)}}};
    double total = 0.0;
    for (const auto& e : edges) {
        const cplx a = e[0], d = e[1] - e[0];
        const auto inc = detail::path_arg_increment([&](double s) { return a + s * d; }, mu, omega,
                                                    opts.edge_nodes, opts.max_edge_nodes, 1e-13);
        if (!inc) return std::nullopt;
        total += *inc;
    }
    return detail::to_winding(total);
}

/// Number of zeros of A inside the circle |lambda - z| = r.
inline std::optional<int> circle_winding(cplx z, double r, double mu, double omega, const SpectrumOptions& opts = {}) {
    const auto inc = detail::path_arg_increment([&](double s) { return z + std::polar(r, two_pi * s); }, mu, omega,
                                                opts.edge_nodes, opts.max_edge_nodes);
    if (!inc) return std::nullopt;
    return detail::to_winding(*inc);
}

/// Newton iteration on A^(m-1) / A^(m) (so a zero of order m converges
/// quadratically). Returns the limit if the step fell below tol.
inline std::optional<cplx> newton_refine(cplx z, int m, double mu, double omega, double tol = 1e-13,
                                         int max_iter = 100) {
    for (int it = 0; it < max_iter; ++it) {
        const auto sd = scaled_determinant(z, mu, omega, m);
        const cplx den = sd.derivs[m];
        if (den == cplx(0.0) || !std::isfinite(std::abs(den))) return std::nullopt;
        const cplx step = sd.derivs[m - 1] / den;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(step) <= tol) return z;
    }
    return std::nullopt;
}

/// Bound K such that A has no zeros with |Im lambda| > K: a zero needs
/// |mu+1| sinh(pi k) <= |mu-1| cosh(|pi-omega| k), which fails for all k > K.
inline double imaginary_root_bound(double mu, double omega) {
    require_valid_contrast(mu);
    require_valid_omega(omega);
    const double d = std::abs(pi - omega);
    auto holds = [&](double k) {
        return std::abs(mu + 1.0) * std::sinh(pi * k) <= std::abs(mu - 1.0) * std::cosh(d * k);
    };
    double hi = 1.0;
    while (holds(hi)) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
    }
    return hi;
}

namespace detail {

class RootFinder {
public:
    RootFinder(double mu, double omega, const SpectrumOptions& opts) : mu_(mu), omega_(omega), opts_(opts) {}

    std::vector<SpectralPoint> run(const Box& outer, int winding) {
        roots_.clear();
        process(outer, winding, -1);
        return roots_;
    }

private:
    bool small(const Box& b) const { return std::max(b.width(), b.height()) <= opts_.box_size * (1 + 1e-12); }

    void process(const Box& b, int w, int depth) {
        if (w == 0) return;
        if (small(b) && depth < 0) depth = 0;
        if (depth >= 0) {
            if (try_isolated(b, w)) return;
            if (depth >= opts_.max_depth) {
                accept_cluster(b, w);
                return;
            }
        }
        split(b, w, depth < 0 ? -1 : depth + 1);
    }

    bool try_isolated(const Box& b, int w) {
        const auto z = newton_refine(b.center(), w, mu_, omega_, opts_.newton_tolerance);
        const double slack = 1e-9 * std::max(1.0, std::abs(b.center()));
        if (!z || !b.contains(*z, slack)) return false;
        if (!on_spectrum(*z, mu_, omega_, opts_.root_tolerance)) return false;
        if (w > 1) {
            const double r = opts_.pole_probe_radius * std::max(1.0, std::abs(*z));
            const auto cw = circle_winding(*z, r, mu_, omega_, opts_);
            if (!cw || *cw != w) return false;
        }
        add(*z, w);
        return true;
    }

    void accept_cluster(const Box& b, int w) {
        const auto z = newton_refine(b.center(), w, mu_, omega_, opts_.newton_tolerance);
        add(z && b.contains(*z, b.width() + b.height()) ? *z : b.center(), w);
    }

    void add(cplx z, int w) {
        const double snap = 1e-12 * std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) < snap) z.imag(0.0);
        if (std::abs(z.real()) < snap) z.real(0.0);
        for (const auto& r : roots_)
            if (std::abs(r.lambda - z) <= 1e-9 * std::max(1.0, std::abs(z))) return;
        roots_.push_back({z, w, 1});
    }

    void split(const Box& b, int w, int depth) {
        // Off-centre first: zeros sit on symmetry lines (real axis, integers), and a
        // double zero on an edge leaves the argument unchanged along it.
        static constexpr double fractions[] = {0.4713, 0.5291, 0.4427, 0.5573, 0.4139, 0.5861, 0.3853, 0.6147};
        const bool vertical = b.width() >= b.height();
        for (double f : fractions) {
            Box lo = b, hi = b;
            if (vertical) {
                lo.x1 = hi.x0 = b.x0 + f * b.width();
            } else {
                lo.y1 = hi.y0 = b.y0 + f * b.height();
            }
            const auto w1 = box_winding(lo, mu_, omega_, opts_);
            if (!w1) continue;
            const auto w2 = box_winding(hi, mu_, omega_, opts_);
            if (!w2 || *w1 + *w2 != w || *w1 < 0 || *w2 < 0) continue;
            process(lo, *w1, depth);
            process(hi, *w2, depth);
            return;
        }
        throw ResolutionError("winding count unstable after subdivision of box " + b.describe());
    }

    double mu_;
    double omega_;
    SpectrumOptions opts_;
    std::vector<SpectralPoint> roots_;
};

}  // namespace detail

/// Outer search rectangle: the band pushed outwards until its boundary is
/// clear of zeros, together with the winding number on it.
inline std::pair<Box, int> search_rectangle(double mu, double omega, const Band& band, const SpectrumOptions& opts = {}) {
    double margin = 1.37e-3 * std::max(1.0, band.re_max - band.re_min);
    for (int attempt = 0; attempt < 12; ++attempt) {
        const Box b{band.re_min - margin, band.re_max + margin, -band.im_max - margin, band.im_max + margin};
        if (const auto w = box_winding(b, mu, omega, opts)) return {b, *w};
        margin *= 1.618;
    }
    throw ResolutionError("no zero-free boundary found around the band");
}

/// All zeros of A(lambda) in the band, with multiplicity (winding number of
/// the isolating box) and kernel dimension.
inline SpectrumReport find_spectrum(double mu, double omega, const Band& band, const SpectrumOptions& opts = {}) {
    const Regime regime = classify(mu);
    require_valid_omega(omega);
    const auto [outer, w] = search_rectangle(mu, omega, band, opts);
    if (w < 0) throw ResolutionError("negative winding number on " + outer.describe());
    detail::RootFinder finder(mu, omega, opts);
    auto found = finder.run(outer, w);

    SpectrumReport report{{}, regime, mu, omega, band};
    KernelOptions kopt;
    kopt.root_tolerance = opts.root_tolerance;
    for (auto& r : found) {
        if (!band.contains(r.lambda)) continue;
        r.kernel_dim = static_cast<int>(kernel_at(r.lambda, mu, omega, kopt).size());
        report.roots.push_back(r);
    }
    std::sort(report.roots.begin(), report.roots.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return report;
}

/// Zeros of A on the vertical line Re lambda = xi (within tol), |Im| <= im_max.
inline std::vector<cplx> roots_near_line(double mu, double omega, double xi, double im_max, double tol = 1e-6,
                                         const SpectrumOptions& opts = {}) {
    const Band band(xi - 0.25, xi + 0.25, im_max);
    std::vector<cplx> out;
    for (const auto& r : find_spectrum(mu, omega, band, opts).roots)
        if (std::abs(r.lambda.real() - xi) < tol) out.push_back(r.lambda);
    return out;
}

/// A singular term r^lambda0 log^q r phi(theta), 0 <= q <= log_power_max.
struct SingularTermSpec {
    cplx lambda0;
    int log_power_max;
    AngularFunction angular;
    bool in_H1;
};

struct SingularInventory {
    std::vector<SingularTermSpec> terms;
    Regime regime;
    /// True when the H1 decomposition carries a singular term besides constants.
    bool h1_nontrivial_singular = false;
};

namespace detail {

inline bool is_constant(const AngularFunction& f, double omega) {
    const AngularGrid g(omega, 32);
    const auto s = f.sample(g);
    double dev = 0.0, mag = 0.0;
    for (const auto& v : s) {
        dev = std::max(dev, std::abs(v - s.front()));
        mag = std::max(mag, std::abs(v));
    }
    return dev <= 1e-10 * std::max(mag, 1e-300);
}

}  // namespace detail

/// Spectrum points in the strip 0 <= Re lambda < 1 with their log powers and
/// angular profiles. The log power is (zero order of A) - (kernel dimension),
/// the pole order of L(lambda)^-1 minus one when the kernel carries a single
/// Jordan chain.
inline SingularInventory singular_term_inventory(double mu, double omega, const SpectrumOptions& opts = {}) {
    const Regime regime = classify(mu);
    if (regime == Regime::EllipticContrast)
        throw RegimeError("the singular-term inventory is defined for negative contrast");
    const double kmax = imaginary_root_bound(mu, omega) + 0.5;
    const auto report = find_spectrum(mu, omega, Band(0.0, 1.0, kmax), opts);
    SingularInventory inv{{}, regime, false};
    for (const auto& r : report.roots) {
        const auto kernel = kernel_at(r.lambda, mu, omega);
        const int q = std::max(0, r.multiplicity - r.kernel_dim);
        for (const auto& phi : kernel) {
            const bool zero = r.lambda == cplx(0.0);
            const bool in_h1 = r.lambda.real() > 0.0 || (zero && detail::is_constant(phi, omega));
            inv.terms.push_back({r.lambda, q, phi, in_h1});
            if (in_h1 && !zero) inv.h1_nontrivial_singular = true;
        }
    }
    return inv;
}

}  // namespace corner
