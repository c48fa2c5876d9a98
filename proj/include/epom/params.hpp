#pragma once

#include <array>
#include <cstddef>

#include "epom/common.hpp"

namespace epom {

/// Physical rates of the two mechanically coupled cavities, all expressed
/// in units of the mechanical frequency (omega_m = 1 is the time-scale
/// anchor; the drive amplitude carries units omega_m^{1/2}).
///
/// Cavity 1 is blue-detuned (delta[0] > 0, mechanical gain), cavity 2
/// red-detuned (delta[1] < 0, mechanical loss). The dissipative coupling
/// is parameterized by the dimensionless ratio eta = g_kappa / kappa, so
/// the displacement-modulated linewidth is kappa_x = kappa (1 + eta x).
struct SystemParams {
    std::array<double, 2> delta{1.0, -1.0};  // cavity detunings
    double g_m = 0.0;       // dispersive coupling rate
    double eta = 0.0;       // dissipative ratio g_kappa / kappa
    double kappa = 1.0;     // cavity linewidth
    double gamma_m = 0.0;   // mechanical damping
    double j_m = 0.0;       // phonon hopping
    double alpha_in = 0.0;  // drive amplitude (same on both cavities)
    double omega_m = 1.0;   // fixed normalization anchor

    void validate() const {
        if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
        if (!(gamma_m >= 0.0)) throw ConfigError("gamma_m must be >= 0");
        if (!(j_m >= 0.0)) throw ConfigError("j_m must be >= 0");
        if (!(alpha_in >= 0.0)) throw ConfigError("alpha_in must be >= 0");
        if (omega_m != 1.0) throw ConfigError("omega_m is the unit anchor and must equal 1");
        for (double d : delta)
            if (!std::isfinite(d)) throw ConfigError("detuning must be finite");
        if (!std::isfinite(g_m) || !std::isfinite(eta))
            throw ConfigError("coupling rates must be finite");
    }

    /// Same system with the cavity indices (and detunings) exchanged.
    SystemParams swapped() const {
        SystemParams q = *this;
        q.delta = {delta[1], delta[0]};
        return q;
    }
};

/// Mean-field state: intracavity amplitudes alpha_j and mechanical
/// amplitudes beta_j. Derived observables: x_j = 2 Re beta_j and the
/// photon number |alpha_j|^2.
///
/// Real-vector layout (for generic integrators and Jacobians) is fixed as
/// [Re a1, Im a1, Re a2, Im a2, Re b1, Im b1, Re b2, Im b2].
struct FieldState {
    std::array<cplx, 2> alpha{};
    std::array<cplx, 2> beta{};

    static constexpr std::size_t n_real = 8;

    bool finite() const {
        return is_finite(alpha[0]) && is_finite(alpha[1]) &&
               is_finite(beta[0]) && is_finite(beta[1]);
    }

    double x(int j) const { return 2.0 * beta[j].real(); }
    double photon(int j) const { return std::norm(alpha[j]); }

    std::array<double, n_real> to_reals() const {
        return {alpha[0].real(), alpha[0].imag(), alpha[1].real(), alpha[1].imag(),
                beta[0].real(),  beta[0].imag(),  beta[1].real(),  beta[1].imag()};
    }
    static FieldState from_reals(const std::array<double, n_real>& v) {
        FieldState s;
        s.alpha = {cplx(v[0], v[1]), cplx(v[2], v[3])};
        s.beta = {cplx(v[4], v[5]), cplx(v[6], v[7])};
        return s;
    }

    /// Cavity-index exchange 1 <-> 2.
    FieldState swapped() const {
        FieldState s;
        s.alpha = {alpha[1], alpha[0]};
        s.beta = {beta[1], beta[0]};
        return s;
    }

    FieldState& operator+=(const FieldState& o) {
        for (int j = 0; j < 2; ++j) { alpha[j] += o.alpha[j]; beta[j] += o.beta[j]; }
        return *this;
    }
    friend FieldState operator+(FieldState a, const FieldState& b) { return a += b; }
    friend FieldState operator-(const FieldState& a, const FieldState& b) {
        FieldState s;
        for (int j = 0; j < 2; ++j) {
            s.alpha[j] = a.alpha[j] - b.alpha[j];
            s.beta[j] = a.beta[j] - b.beta[j];
        }
        return s;
    }
    friend FieldState operator*(double c, const FieldState& a) {
        FieldState s;
        for (int j = 0; j < 2; ++j) { s.alpha[j] = c * a.alpha[j]; s.beta[j] = c * a.beta[j]; }
        return s;
    }

    double norm2() const {
        return std::norm(alpha[0]) + std::norm(alpha[1]) + std::norm(beta[0]) + std::norm(beta[1]);
    }
    double max_abs() const {
        double m = 0.0;
        for (int j = 0; j < 2; ++j) {
            m = std::max(m, std::abs(alpha[j]));
            m = std::max(m, std::abs(beta[j]));
        }
        return m;
    }
};

}  // namespace epom
