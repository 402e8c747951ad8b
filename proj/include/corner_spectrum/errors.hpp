#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace corner {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The contrast mu = a+/a- is -1 (or a coefficient vanishes).
class ExcludedContrastError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The contrast is valid but belongs to the wrong regime for the request.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// The Mellin symbol is (numerically) not invertible at the requested frequency.
class NearSingularSymbolError : public Error {
public:
    NearSingularSymbolError(const std::string& what, double det_abs, double det_relative)
        : Error(what), det_abs_(det_abs), det_relative_(det_relative) {}

    /// |A(lambda)|, possibly +inf when the trigonometric terms overflow.
    double det_abs() const noexcept { return det_abs_; }
    /// |A(lambda)| / max(1, |b|^2 + |c|^2), always finite.
    double det_relative() const noexcept { return det_relative_; }

private:
    double det_abs_;
    double det_relative_;
};

/// kernel_at was called away from the spectrum.
class EmptyKernelError : public Error {
public:
    using Error::Error;
};

/// A discretisation is too coarse, or an adaptive count failed to stabilise.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// A residue contour touches or encloses another pole.
class ContourError : public Error {
public:
    using Error::Error;
};

/// Contour quadrature results disagree across radii.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// The integration line Re(lambda) = xi meets the spectrum.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& what, std::vector<std::complex<double>> roots)
        : Error(what), roots_(std::move(roots)) {}

    const std::vector<std::complex<double>>& offending_roots() const noexcept { return roots_; }

private:
    std::vector<std::complex<double>> roots_;
};

}  // namespace corner
