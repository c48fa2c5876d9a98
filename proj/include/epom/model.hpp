#pragma once

#include <array>

#include "epom/params.hpp"

namespace epom {

/// Displacement-shifted cavity detuning seen by cavity j,
///   delta_tilde_j = delta_j + 2 Re(beta_j) (g_m + i eta kappa / 2),
/// complex because the dissipative part modulates the linewidth.
inline cplx shifted_detuning(const SystemParams& p, const cplx& beta_j, int j) {
    return p.delta[j] + 2.0 * beta_j.real() * cplx(p.g_m, 0.5 * p.eta * p.kappa);
}

namespace detail {

/// Unchecked right-hand side; NaN/Inf inputs propagate to the output so
/// adaptive steppers can reject overflowing trial steps without throwing.
inline FieldState rhs_raw(const SystemParams& p, const FieldState& s) {
    const cplx I(0.0, 1.0);
    const double sqrt_kappa = std::sqrt(p.kappa);
    const cplx coupling(p.g_m, 0.5 * p.eta * p.kappa);
    FieldState d;
    for (int j = 0; j < 2; ++j) {
        const cplx a = s.alpha[j];
        const double x = s.x(j);
        d.alpha[j] = (I * (p.delta[j] + coupling * x) - 0.5 * p.kappa) * a +
                     sqrt_kappa * (1.0 + 0.5 * p.eta * x) * p.alpha_in;
        d.beta[j] = -(I * p.omega_m + 0.5 * p.gamma_m) * s.beta[j] +
                    I * p.j_m * s.beta[1 - j] +
                    p.eta * sqrt_kappa * (std::conj(a) - a) * p.alpha_in +
                    I * p.g_m * std::norm(a);
    }
    return d;
}

}  // namespace detail

/// Right-hand side of the mean-field (noise-free, operator-averaged)
/// dynamics:
///   da_j/dt = (i(delta_j + (g_m + i eta kappa/2) x_j) - kappa/2) a_j
///             + sqrt(kappa) (1 + (eta/2) x_j) alpha_in
///   db_j/dt = -(i omega_m + gamma_m/2) b_j + i j_m b_{3-j}
///             + eta sqrt(kappa) (a_j* - a_j) alpha_in + i g_m |a_j|^2
/// with x_j = 2 Re b_j.
inline FieldState nonlinear_rhs(const SystemParams& p, const FieldState& s) {
    if (!s.finite()) throw InvalidStateError("nonlinear_rhs: non-finite state");
    return detail::rhs_raw(p, s);
}

/// Exact linearization of nonlinear_rhs about `fixed`, applied to the
/// deviation d (noise inputs zero). Note the delta-beta coupling acts on
/// (db + db*) = 2 Re db: the drive and dispersive shifts only see the
/// mechanical position quadrature.
inline FieldState linearized_rhs(const SystemParams& p, const FieldState& fixed,
                                 const FieldState& d) {
    if (!fixed.finite() || !d.finite())
        throw InvalidStateError("linearized_rhs: non-finite state");
    const cplx I(0.0, 1.0);
    const double sqrt_kappa = std::sqrt(p.kappa);
    const cplx coupling(p.g_m, 0.5 * p.eta * p.kappa);
    FieldState out;
    for (int j = 0; j < 2; ++j) {
        const cplx a = fixed.alpha[j];
        const cplx da = d.alpha[j];
        const cplx db = d.beta[j];
        const double two_re_db = 2.0 * db.real();
        const cplx dtil = shifted_detuning(p, fixed.beta[j], j);
        out.alpha[j] = (I * dtil - 0.5 * p.kappa) * da +
                       (I * coupling * a + 0.5 * p.eta * sqrt_kappa * p.alpha_in) * two_re_db;
        out.beta[j] = -(I * p.omega_m + 0.5 * p.gamma_m) * db +
                      I * p.j_m * d.beta[1 - j] +
                      p.eta * sqrt_kappa * (std::conj(da) - da) * p.alpha_in +
                      I * p.g_m * (std::conj(a) * da + a * std::conj(da));
    }
    return out;
}

/// 8x8 real Jacobian of the flow at `fixed`, columns built by applying
/// linearized_rhs to the real basis vectors (layout per FieldState).
inline std::array<std::array<double, 8>, 8> real_jacobian(const SystemParams& p,
                                                          const FieldState& fixed) {
    std::array<std::array<double, 8>, 8> jac{};
    for (std::size_t c = 0; c < 8; ++c) {
        std::array<double, 8> e{};
        e[c] = 1.0;
        const auto col = linearized_rhs(p, fixed, FieldState::from_reals(e)).to_reals();
        for (std::size_t r = 0; r < 8; ++r) jac[r][c] = col[r];
    }
    return jac;
}

}  // namespace epom
