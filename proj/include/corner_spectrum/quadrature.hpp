#pragma once

// Gauss-Legendre rules and the composite angular grid used by every solver on
// the circle G = G- u G+.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "types.hpp"

namespace corner {

struct GaussRule {
    std::vector<double> nodes;    // ascending, in (-1, 1)
    std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; results are cached.
inline const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw ResolutionError("Gauss rule needs at least one node");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(detail::compute_gauss_legendre(n));
    return *slot;
}

/// Barycentric weights for interpolation through the given nodes.
inline std::vector<double> barycentric_weights(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) w[j] /= (x[j] - x[k]);
    // Rescale to avoid under/overflow for larger n.
    const double scale = *std::max_element(w.begin(), w.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    });
    for (auto& wj : w) wj /= std::abs(scale);
    return w;
}

/// Lagrange basis values l_j(s) for the nodes x at the point s.
inline void lagrange_values(std::span<const double> x, std::span<const double> bw, double s,
                            std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (s == x[j]) {
            std::fill(out.begin(), out.end(), 0.0);
            out[j] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = bw[j] / (s - x[j]);
        denom += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

/// Reference-panel operators for n Gauss nodes on [-1, 1].
struct PanelOperators {
    int n = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> bary;
    Eigen::MatrixXd integrate;      // (I f)(x_i) = int_{-1}^{x_i} p_f
    Eigen::MatrixXd differentiate;  // (D f)(x_i) = p_f'(x_i)
};

inline const PanelOperators& panel_operators(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<PanelOperators>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (slot) return *slot;

    auto ops = std::make_unique<PanelOperators>();
    const GaussRule gr = detail::compute_gauss_legendre(n);
    ops->n = n;
    ops->nodes = gr.nodes;
    ops->weights = gr.weights;
    ops->bary = barycentric_weights(ops->nodes);

    // Cumulative integration: n-point Gauss on [-1, x_i] is exact for degree n-1.
    ops->integrate.resize(n, n);
    std::vector<double> lv(n);
    for (int i = 0; i < n; ++i) {
        const double half = 0.5 * (ops->nodes[i] + 1.0);
        for (int j = 0; j < n; ++j) ops->integrate(i, j) = 0.0;
        for (int m = 0; m < n; ++m) {
            const double s = -1.0 + half * (gr.nodes[m] + 1.0);
            lagrange_values(ops->nodes, ops->bary, s, lv);
            for (int j = 0; j < n; ++j) ops->integrate(i, j) += half * gr.weights[m] * lv[j];
        }
    }

    ops->differentiate.resize(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dij = (ops->bary[j] / ops->bary[i]) / (ops->nodes[i] - ops->nodes[j]);
            ops->differentiate(i, j) = dij;
            diag -= dij;
        }
        ops->differentiate(i, i) = diag;
    }
    slot = std::move(ops);
    return *slot;
}

enum class Sector { Minus = 0, Plus = 1 };

/// Composite Gauss grid on G- = (0, omega) and G+ = (omega, 2 pi). Each
/// sector is split into equal panels carrying the same number of nodes.
/// Node ordering: all minus-sector nodes (ascending), then all plus-sector
/// nodes (ascending).
class AngularGrid {
public:
    AngularGrid(double omega, int nodes_per_sector, int panels_per_sector = 4)
        : omega_(omega), panels_(panels_per_sector) {
        require_valid_omega(omega);
        if (panels_per_sector < 1 || nodes_per_sector < panels_per_sector ||
            nodes_per_sector % panels_per_sector != 0)
            throw ResolutionError("angular grid: nodes per sector must be a positive multiple of the panel count");
        per_panel_ = nodes_per_sector / panels_per_sector;
        if (per_panel_ < 2) throw ResolutionError("angular grid: need at least two nodes per panel");
        build();
    }

    double omega() const noexcept { return omega_; }
    int panels_per_sector() const noexcept { return panels_; }
    int nodes_per_panel() const noexcept { return per_panel_; }
    int nodes_per_sector() const noexcept { return panels_ * per_panel_; }
    int size() const noexcept { return 2 * nodes_per_sector(); }

    double sector_begin(Sector s) const noexcept { return s == Sector::Minus ? 0.0 : omega_; }
    double sector_end(Sector s) const noexcept { return s == Sector::Minus ? omega_ : two_pi; }
    double sector_width(Sector s) const noexcept { return sector_end(s) - sector_begin(s); }
    int sector_offset(Sector s) const noexcept { return s == Sector::Minus ? 0 : nodes_per_sector(); }

    double panel_begin(Sector s, int p) const noexcept {
        return sector_begin(s) + p * sector_width(s) / panels_;
    }
    double panel_end(Sector s, int p) const noexcept {
        return sector_begin(s) + (p + 1) * sector_width(s) / panels_;
    }

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double node(int i) const { return nodes_[i]; }
    double weight(int i) const { return weights_[i]; }
    Sector sector_of(int i) const noexcept { return i < nodes_per_sector() ? Sector::Minus : Sector::Plus; }

    const PanelOperators& ops() const { return panel_operators(per_panel_); }

    /// Panel index containing theta within sector s (clamped).
    int panel_of(Sector s, double theta) const noexcept {
        const double u = (theta - sector_begin(s)) / sector_width(s) * panels_;
        return std::clamp(static_cast<int>(std::floor(u)), 0, panels_ - 1);
    }

    /// Interpolates grid samples (size()) at theta inside sector s.
    template <class Scalar>
    Scalar interpolate(std::span<const Scalar> samples, Sector s, double theta) const {
        const int p = panel_of(s, theta);
        const double a = panel_begin(s, p), b = panel_end(s, p);
        const double x = 2.0 * (theta - a) / (b - a) - 1.0;
        const auto& op = ops();
        std::vector<double> lv(per_panel_);
        lagrange_values(op.nodes, op.bary, x, lv);
        const int base = sector_offset(s) + p * per_panel_;
        Scalar acc{};
        for (int j = 0; j < per_panel_; ++j) acc += lv[j] * samples[base + j];
        return acc;
    }

    /// Panel-wise spectral derivative of grid samples.
    template <class Scalar>
    std::vector<Scalar> differentiate(std::span<const Scalar> samples) const {
        std::vector<Scalar> out(samples.size());
        const auto& op = ops();
        for (Sector s : {Sector::Minus, Sector::Plus}) {
            const double scale = 2.0 / (sector_width(s) / panels_);
            for (int p = 0; p < panels_; ++p) {
                const int base = sector_offset(s) + p * per_panel_;
                for (int i = 0; i < per_panel_; ++i) {
                    Scalar acc{};
                    for (int j = 0; j < per_panel_; ++j) acc += op.differentiate(i, j) * samples[base + j];
                    out[base + i] = scale * acc;
                }
            }
        }
        return out;
    }

    /// Quadrature of |f|^2 over G.
    template <class Scalar>
    double l2_norm_squared(std::span<const Scalar> samples) const {
        double acc = 0.0;
        for (int i = 0; i < size(); ++i) acc += weights_[i] * std::norm(samples[i]);
        return acc;
    }

    bool same_layout(const AngularGrid& other) const noexcept {
        return omega_ == other.omega_ && panels_ == other.panels_ && per_panel_ == other.per_panel_;
    }

private:
    void build() {
        const GaussRule& g = gauss_legendre(per_panel_);
        nodes_.clear();
        weights_.clear();
        for (Sector s : {Sector::Minus, Sector::Plus}) {
            for (int p = 0; p < panels_; ++p) {
                const double a = panel_begin(s, p), b = panel_end(s, p);
                for (int j = 0; j < per_panel_; ++j) {
                    nodes_.push_back(a + 0.5 * (b - a) * (g.nodes[j] + 1.0));
                    weights_.push_back(0.5 * (b - a) * g.weights[j]);
                }
            }
        }
    }

    double omega_;
    int panels_;
    int per_panel_ = 0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace corner
