#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epom {

using cplx = std::complex<double>;

/// Input state contains NaN/Inf, or an operation was handed values it
/// cannot evaluate.
class InvalidStateError : public std::runtime_error {
public:
    explicit InvalidStateError(const std::string& what) : std::runtime_error(what) {}
};

/// Time integration failed (step-size underflow or non-finite state).
/// Carries the last time at which the state was still good.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : std::runtime_error(what + " (last good t = " + std::to_string(last_good_time) + ")"),
          last_good_time(last_good_time) {}
    double last_good_time;
};

/// Bad configuration value (caught before any numerics run).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline bool is_finite(const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace epom
