#pragma once

#include <Eigen/Dense>
#include <optional>

#include "epom/model.hpp"

namespace epom {

/// Converged mean-field fixed point plus solver diagnostics. `residual` is
/// the max-norm of the time-independent equations re-evaluated at the
/// returned point; results with residual above the gate are returned with
/// converged = false, never silently.
struct SteadyState {
    std::array<cplx, 2> alpha_bar{};
    std::array<cplx, 2> beta_bar{};
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;

    FieldState state() const {
        FieldState s;
        s.alpha = alpha_bar;
        s.beta = beta_bar;
        return s;
    }
};

struct SteadyOptions {
    double residual_gate = 1e-10;
    double step_tol = 1e-12;
    int max_iterations = 200;
};

namespace detail {

/// Mechanical amplitudes solving the (linear) beta part of the fixed-point
/// equations for given cavity amplitudes:
///   (i omega_m + gamma_m/2) b_j - i j_m b_{3-j} = F_j(alpha_j).
inline std::array<cplx, 2> beta_for_alpha(const SystemParams& p, const std::array<cplx, 2>& a) {
    const cplx I(0.0, 1.0);
    const double sqrt_kappa = std::sqrt(p.kappa);
    const cplx mu = I * p.omega_m + 0.5 * p.gamma_m;
    std::array<cplx, 2> F;
    for (int j = 0; j < 2; ++j)
        F[j] = p.eta * sqrt_kappa * (std::conj(a[j]) - a[j]) * p.alpha_in + I * p.g_m * std::norm(a[j]);
    const cplx det = mu * mu + p.j_m * p.j_m;
    return {(mu * F[0] + I * p.j_m * F[1]) / det, (I * p.j_m * F[0] + mu * F[1]) / det};
}

/// Closed-form cavity amplitudes of the decoupled (g_m = eta = 0) system,
/// used as the default Newton seed.
inline std::array<cplx, 2> decoupled_alpha(const SystemParams& p) {
    const cplx I(0.0, 1.0);
    std::array<cplx, 2> a;
    for (int j = 0; j < 2; ++j)
        a[j] = -std::sqrt(p.kappa) * p.alpha_in / (I * p.delta[j] - 0.5 * p.kappa);
    return a;
}

}  // namespace detail

/// Damped Newton iteration for the mean-field fixed point. The mechanical
/// amplitudes are eliminated exactly at every iterate (linear 2x2 solve),
/// so Newton effectively works on the cavity amplitudes while the Jacobian
/// is the full 8x8 linearization. Seeded from `guess` when given, else
/// from the decoupled closed form.
inline SteadyState solve_steady(const SystemParams& p,
                                std::optional<FieldState> guess = std::nullopt,
                                const SteadyOptions& opt = {}) {
    p.validate();
    SteadyState out;
    if (p.alpha_in == 0.0) {  // undriven: the zero state is exact
        out.residual = 0.0;
        out.converged = true;
        return out;
    }

    FieldState s;
    if (guess && guess->finite()) {
        s = *guess;
    } else {
        s.alpha = detail::decoupled_alpha(p);
    }
    s.beta = detail::beta_for_alpha(p, s.alpha);

    auto residual_of = [&](const FieldState& st) {
        const auto r = nonlinear_rhs(p, st).to_reals();
        double m = 0.0;
        for (double v : r) m = std::max(m, std::abs(v));
        return m;
    };

    double res = residual_of(s);
    int it = 0;
    for (; it < opt.max_iterations && res > opt.residual_gate; ++it) {
        const auto jac = real_jacobian(p, s);
        Eigen::Matrix<double, 8, 8> J;
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) J(r, c) = jac[r][c];
        const auto rv = nonlinear_rhs(p, s).to_reals();
        Eigen::Matrix<double, 8, 1> R;
        for (int r = 0; r < 8; ++r) R(r) = rv[r];
        const Eigen::Matrix<double, 8, 1> dx = J.partialPivLu().solve(-R);
        if (!dx.allFinite()) break;

        // damped update; mechanical part re-eliminated exactly
        double lambda = 1.0;
        FieldState trial;
        double trial_res = res;
        for (int k = 0; k < 60; ++k) {
            auto v = s.to_reals();
            for (int r = 0; r < 8; ++r) v[r] += lambda * dx(r);
            trial = FieldState::from_reals(v);
            trial.beta = detail::beta_for_alpha(p, trial.alpha);
            trial_res = residual_of(trial);
            if (trial_res < res) break;
            lambda *= 0.5;
        }
        if (trial_res >= res && lambda * dx.norm() < opt.step_tol * (1.0 + std::sqrt(s.norm2())))
            break;  // stagnated below step tolerance
        s = trial;
        res = trial_res;
        if (lambda * dx.norm() < opt.step_tol * (1.0 + std::sqrt(s.norm2())) &&
            res <= opt.residual_gate)
            break;
    }

    out.alpha_bar = s.alpha;
    out.beta_bar = s.beta;
    out.residual = res;
    out.iterations = it;
    out.converged = res <= opt.residual_gate;
    return out;
}

/// Continuation sweep over drive amplitudes: each point is seeded from the
/// previous solution, which keeps the solver on the branch continuously
/// connected to the undriven state.
inline std::vector<SteadyState> steady_sweep(SystemParams p, const std::vector<double>& alpha_grid,
                                             const SteadyOptions& opt = {}) {
    std::vector<SteadyState> out;
    out.reserve(alpha_grid.size());
    std::optional<FieldState> seed;
    for (double a : alpha_grid) {
        p.alpha_in = a;
        SteadyState ss = solve_steady(p, seed, opt);
        if (ss.converged) seed = ss.state();
        out.push_back(std::move(ss));
    }
    return out;
}

}  // namespace epom
