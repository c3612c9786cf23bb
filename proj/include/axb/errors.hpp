#pragma once

#include <stdexcept>
#include <string>

namespace axb {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or broken type invariant (bad units, empty ranges,
/// branch mismatches, weights that do not sum to one, ...).
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

/// A propagation mode stopped being a travelling wave: n^2 <= 0.
class evanescent_error : public error {
public:
    evanescent_error(const std::string& msg, double n_squared, double y)
        : error(msg), n_squared_(n_squared), y_(y) {}

    /// Offending squared refractive index.
    [[nodiscard]] double n_squared() const noexcept { return n_squared_; }
    /// Transverse position where it occurred.
    [[nodiscard]] double y() const noexcept { return y_; }

private:
    double n_squared_;
    double y_;
};

/// The ray cannot reach the requested transverse position; it turns
/// around where the local index drops to the ray invariant.
class turning_point_error : public error {
public:
    turning_point_error(const std::string& msg, double y_turn)
        : error(msg), y_turn_(y_turn) {}

    /// Transverse position of the turning point.
    [[nodiscard]] double y_turn() const noexcept { return y_turn_; }

private:
    double y_turn_;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class quadrature_error : public error {
public:
    quadrature_error(const std::string& msg, double estimate, double achieved_tol)
        : error(msg), estimate_(estimate), achieved_tol_(achieved_tol) {}

    /// Best integral estimate at the point of failure.
    [[nodiscard]] double estimate() const noexcept { return estimate_; }
    /// Error estimate actually achieved.
    [[nodiscard]] double achieved_tolerance() const noexcept { return achieved_tol_; }

private:
    double estimate_;
    double achieved_tol_;
};

/// Profile or data set without the structure an operation needs
/// (zero gradient, zero total weight, no half-maximum crossing, ...).
class degenerate_error : public error {
public:
    explicit degenerate_error(const std::string& msg) : error(msg) {}
};

/// File system or serialization failure.
class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw domain_error(msg);
}

} // namespace detail

} // namespace axb
