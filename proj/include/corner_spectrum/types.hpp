#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace corner {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Validates a contrast value mu = a+/a-. Zero and -1 are rejected.
inline void require_valid_contrast(double mu) {
    if (!std::isfinite(mu)) throw DomainError("contrast mu must be finite");
    if (mu == 0.0) throw ExcludedContrastError("contrast mu = 0 is excluded (a coefficient vanishes)");
    if (mu == -1.0) throw ExcludedContrastError("contrast mu = -1 is excluded (a+ + a- = 0)");
}

/// Coefficients of the two materials. a_minus lives on the sector (0, omega),
/// a_plus on (omega, 2 pi).
class MaterialPair {
public:
    MaterialPair(double a_plus, double a_minus) : a_plus_(a_plus), a_minus_(a_minus) {
        if (!std::isfinite(a_plus) || !std::isfinite(a_minus))
            throw DomainError("material coefficients must be finite");
        if (a_plus == 0.0 || a_minus == 0.0)
            throw ExcludedContrastError("material coefficients must be nonzero");
        if (a_plus + a_minus == 0.0)
            throw ExcludedContrastError("a+ + a- = 0 (contrast mu = -1) is excluded");
        require_valid_contrast(mu());
    }

    /// Pair with a_minus fixed and a_plus = mu * a_minus.
    static MaterialPair from_contrast(double mu, double a_minus = 1.0) {
        require_valid_contrast(mu);
        return MaterialPair(mu * a_minus, a_minus);
    }

    double a_plus() const noexcept { return a_plus_; }
    double a_minus() const noexcept { return a_minus_; }
    double mu() const noexcept { return a_plus_ / a_minus_; }

private:
    double a_plus_;
    double a_minus_;
};

/// Opening of the minus sector. G- = (0, omega), G+ = (omega, 2 pi).
class CornerConfig {
public:
    explicit CornerConfig(double omega = pi / 2) : omega_(omega) {
        if (!(omega > 0.0 && omega < two_pi))
            throw DomainError("corner opening omega must lie in (0, 2 pi)");
    }

    double omega() const noexcept { return omega_; }
    bool is_right_angle() const noexcept { return std::abs(omega_ - pi / 2) <= 1e-14; }

private:
    double omega_;
};

inline void require_valid_omega(double omega) { (void)CornerConfig(omega); }

inline void require_finite(cplx lambda) {
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        throw DomainError("frequency lambda must be finite");
}

}  // namespace corner
