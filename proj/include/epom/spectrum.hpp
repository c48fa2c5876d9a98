#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "epom/parallel.hpp"
#include "epom/steady.hpp"

namespace epom {

/// The printed effective rates use a single common steady amplitude and
/// mix it with its conjugate between the two resonators. `AsPrinted`
/// follows that form verbatim; `Symmetrized` replaces the conjugated
/// amplitude by the amplitude itself for sensitivity studies.
enum class ConjugationConvention { AsPrinted, Symmetrized };

/// Adiabatically eliminated two-mode mechanical model at one operating
/// point. The printed rate expressions are complex for a complex steady
/// amplitude; the full values are retained (gamma_full/omega_full) and
/// their real parts populate the rate/frequency entries used by the
/// effective Hamiltonian.
struct EffectiveParams {
    std::array<double, 2> gamma_eff{};  // Re of the printed expressions
    std::array<double, 2> omega_eff{};
    std::array<cplx, 2> gamma_full{};   // diagnostic: unprojected values
    std::array<cplx, 2> omega_full{};
    double Gamma = 0.0;  // optical damping 4|G|^2/kappa
    cplx G{};            // optomechanically induced coupling g_m * alpha_bar
};

/// Effective rates from a converged steady state:
///   Gamma    = 4 |G|^2 / kappa,  G = g_m alpha_bar
///   gamma1   =  Gamma - gamma_m - 2 eta^2 a_in (conj(ab) sqrt(k) - a_in)
///   gamma2   = -(Gamma + gamma_m) + 2 eta^2 a_in (ab sqrt(k) - a_in)
///   omega1,2 = omega_m + (eta sqrt(Gamma)/2)(conj(ab)/ab sqrt(k) + a_in)
/// with ab the cavity-1 steady amplitude standing in for the common
/// amplitude (the red cavity's amplitude is its conjugate in the
/// decoupled limit, which is where the conjugation pattern comes from).
inline EffectiveParams effective_params(const SystemParams& p, const SteadyState& ss,
                                        ConjugationConvention conv = ConjugationConvention::AsPrinted) {
    if (!ss.converged)
        throw InvalidStateError("effective_params: steady state did not converge");
    const double sqrt_kappa = std::sqrt(p.kappa);
    const cplx ab = ss.alpha_bar[0];
    const cplx ab_conj = (conv == ConjugationConvention::AsPrinted) ? std::conj(ab) : ab;

    EffectiveParams ep;
    ep.G = p.g_m * ab;
    ep.Gamma = 4.0 * std::norm(ep.G) / p.kappa;
    const double e2a = 2.0 * p.eta * p.eta * p.alpha_in;
    ep.gamma_full[0] = ep.Gamma - p.gamma_m - e2a * (ab_conj * sqrt_kappa - p.alpha_in);
    ep.gamma_full[1] = -(ep.Gamma + p.gamma_m) + e2a * (ab * sqrt_kappa - p.alpha_in);
    const double half_eta_sqrtG = 0.5 * p.eta * std::sqrt(ep.Gamma);
    ep.omega_full[0] = p.omega_m + half_eta_sqrtG * (ab_conj * sqrt_kappa + p.alpha_in);
    ep.omega_full[1] = p.omega_m + half_eta_sqrtG * (ab * sqrt_kappa + p.alpha_in);
    for (int j = 0; j < 2; ++j) {
        ep.gamma_eff[j] = ep.gamma_full[j].real();
        ep.omega_eff[j] = ep.omega_full[j].real();
    }
    return ep;
}

/// Eigenstructure of the effective 2x2 Hamiltonian
///   H = [[w1 + i g1/2, -J], [-J, w2 + i g2/2]].
struct EffectiveSpectrum {
    cplx lambda_plus{}, lambda_minus{};
    cplx sigma{};
    std::array<double, 2> omega_pm{};  // {Re l+, Re l-}
    std::array<double, 2> gamma_pm{};  // {Im l+, Im l-}

    double omega_gap() const { return std::abs(omega_pm[0] - omega_pm[1]); }
    double gamma_gap() const { return std::abs(gamma_pm[0] - gamma_pm[1]); }
};

/// Closed-form eigenvalues
///   l_pm = (w1+w2)/2 + i(g1+g2)/4 +- sigma/4,
///   sigma = sqrt((2 dw + i dg)^2 + 16 J^2).
inline EffectiveSpectrum eigenvalues(const EffectiveParams& ep, double j_m) {
    const double dw = ep.omega_eff[0] - ep.omega_eff[1];
    const double dg = ep.gamma_eff[0] - ep.gamma_eff[1];
    const cplx z = cplx(2.0 * dw, dg);
    EffectiveSpectrum sp;
    sp.sigma = std::sqrt(z * z + 16.0 * j_m * j_m);
    const cplx center(0.5 * (ep.omega_eff[0] + ep.omega_eff[1]),
                      0.25 * (ep.gamma_eff[0] + ep.gamma_eff[1]));
    sp.lambda_plus = center + 0.25 * sp.sigma;
    sp.lambda_minus = center - 0.25 * sp.sigma;
    sp.omega_pm = {sp.lambda_plus.real(), sp.lambda_minus.real()};
    sp.gamma_pm = {sp.lambda_plus.imag(), sp.lambda_minus.imag()};
    return sp;
}

/// Oracle route: direct dense eigen-decomposition of H_eff. Kept separate
/// from the closed form so the two can cross-check each other.
inline std::array<cplx, 2> eigenvalues_direct(const EffectiveParams& ep, double j_m) {
    Eigen::Matrix2cd H;
    H(0, 0) = cplx(ep.omega_eff[0], 0.5 * ep.gamma_eff[0]);
    H(1, 1) = cplx(ep.omega_eff[1], 0.5 * ep.gamma_eff[1]);
    H(0, 1) = H(1, 0) = -j_m;
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(H, false);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

/// Swap lambda_plus/minus of `sp` if that pairs them closer to `prev`
/// (nearest-neighbor continuation across a scan; avoids branch flips at
/// the square-root cut).
inline void match_branches(const EffectiveSpectrum& prev, EffectiveSpectrum& sp) {
    const double keep = std::abs(sp.lambda_plus - prev.lambda_plus) +
                        std::abs(sp.lambda_minus - prev.lambda_minus);
    const double swap = std::abs(sp.lambda_plus - prev.lambda_minus) +
                        std::abs(sp.lambda_minus - prev.lambda_plus);
    if (swap < keep) {
        std::swap(sp.lambda_plus, sp.lambda_minus);
        sp.sigma = -sp.sigma;
        sp.omega_pm = {sp.lambda_plus.real(), sp.lambda_minus.real()};
        sp.gamma_pm = {sp.lambda_plus.imag(), sp.lambda_minus.imag()};
    }
}

struct EpScanPoint {
    double alpha_in = 0.0;
    EffectiveSpectrum spectrum;
    FieldState steady;  // converged fixed point (valid when steady_converged)
    double abs_sigma = 0.0;
    bool steady_converged = false;
    double steady_residual = 0.0;
};

struct EpScanReport {
    std::vector<EpScanPoint> points;
    double ep_alpha = 0.0;       // refined |sigma| minimizer
    double ep_abs_sigma = 0.0;
    double omega_gap_at_ep = 0.0;
    double gamma_gap_at_ep = 0.0;
    std::size_t grid_argmin = 0;
    bool boundary_minimum = false;  // argmin sat on a grid edge; refine skipped
};

namespace detail {

inline EpScanPoint ep_point(SystemParams p, double alpha_in, std::optional<FieldState>& seed,
                            ConjugationConvention conv) {
    p.alpha_in = alpha_in;
    EpScanPoint pt;
    pt.alpha_in = alpha_in;
    const SteadyState ss = solve_steady(p, seed);
    pt.steady_converged = ss.converged;
    pt.steady_residual = ss.residual;
    if (ss.converged) {
        seed = ss.state();
        pt.steady = ss.state();
        pt.spectrum = eigenvalues(effective_params(p, ss, conv), p.j_m);
        pt.abs_sigma = std::abs(pt.spectrum.sigma);
    }
    return pt;
}

}  // namespace detail

/// Scan |sigma| over a sorted drive grid and refine the minimizer by
/// golden-section search between the bracketing neighbors. Steady states
/// are continuation-seeded along the grid.
inline EpScanReport ep_scan(const SystemParams& p_template, const std::vector<double>& alpha_grid,
                            ConjugationConvention conv = ConjugationConvention::AsPrinted) {
    if (alpha_grid.empty()) throw ConfigError("ep_scan: empty grid");
    for (std::size_t i = 1; i < alpha_grid.size(); ++i)
        if (!(alpha_grid[i] > alpha_grid[i - 1]))
            throw ConfigError("ep_scan: grid must be sorted ascending");

    EpScanReport rep;
    std::optional<FieldState> seed;
    for (double a : alpha_grid) {
        rep.points.push_back(detail::ep_point(p_template, a, seed, conv));
        if (rep.points.size() >= 2)
            match_branches(rep.points[rep.points.size() - 2].spectrum, rep.points.back().spectrum);
    }

    std::size_t best = 0;
    double best_sigma = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        if (!rep.points[i].steady_converged) continue;
        if (rep.points[i].abs_sigma < best_sigma) {
            best_sigma = rep.points[i].abs_sigma;
            best = i;
        }
    }
    rep.grid_argmin = best;
    rep.boundary_minimum = (best == 0 || best + 1 == rep.points.size());

    double lo = alpha_grid[best > 0 ? best - 1 : best];
    double hi = alpha_grid[best + 1 < alpha_grid.size() ? best + 1 : best];
    if (rep.boundary_minimum || !(hi > lo)) {
        rep.ep_alpha = alpha_grid[best];
        rep.ep_abs_sigma = best_sigma;
        rep.omega_gap_at_ep = rep.points[best].spectrum.omega_gap();
        rep.gamma_gap_at_ep = rep.points[best].spectrum.gamma_gap();
        return rep;
    }

    // golden-section minimization of |sigma(alpha)| on [lo, hi]
    std::optional<FieldState> s2;
    if (rep.points[best].steady_converged) s2 = rep.points[best].steady;
    auto f = [&](double a) { return detail::ep_point(p_template, a, s2, conv); };
    constexpr double inv_phi = 0.6180339887498949;
    double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
    EpScanPoint pc = f(c), pd = f(d);
    for (int k = 0; k < 80 && (hi - lo) > 1e-10 * std::max(1.0, hi); ++k) {
        if (pc.abs_sigma < pd.abs_sigma) {
            hi = d; d = c; pd = pc;
            c = hi - inv_phi * (hi - lo);
            pc = f(c);
        } else {
            lo = c; c = d; pc = pd;
            d = lo + inv_phi * (hi - lo);
            pd = f(d);
        }
    }
    const EpScanPoint& pbest = pc.abs_sigma < pd.abs_sigma ? pc : pd;
    rep.ep_alpha = pbest.alpha_in;
    rep.ep_abs_sigma = pbest.abs_sigma;
    rep.omega_gap_at_ep = pbest.spectrum.omega_gap();
    rep.gamma_gap_at_ep = pbest.spectrum.gamma_gap();
    return rep;
}

struct SurfaceRow {
    double alpha_in = 0.0;
    double eta = 0.0;
    EffectiveSpectrum spectrum;
    double abs_sigma = 0.0;
    bool ok = false;
};

struct EigenSurface {
    std::vector<SurfaceRow> rows;                      // eta-major, alpha-minor
    std::vector<std::pair<double, double>> ep_locus;   // (eta, alpha_EP)
};

/// Spectrum table over an (alpha_in, eta) grid plus the per-eta EP locus.
/// Non-converged grid points are flagged and skipped by the locus. Each
/// eta row is an independent drive scan (continuation runs inside it), so
/// rows are computed in parallel and merged by eta index.
inline EigenSurface eigen_surface(const SystemParams& p_template,
                                  const std::vector<double>& alpha_grid,
                                  const std::vector<double>& eta_grid,
                                  ConjugationConvention conv = ConjugationConvention::AsPrinted,
                                  unsigned threads = 0) {
    if (alpha_grid.empty() || eta_grid.empty()) throw ConfigError("eigen_surface: empty grid");
    std::vector<EpScanReport> reps(eta_grid.size());
    parallel_for_index(eta_grid.size(), resolve_threads(threads), [&](std::size_t i) {
        SystemParams p = p_template;
        p.eta = eta_grid[i];
        reps[i] = ep_scan(p, alpha_grid, conv);
    });
    EigenSurface surf;
    surf.rows.reserve(alpha_grid.size() * eta_grid.size());
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
        for (const auto& pt : reps[i].points) {
            SurfaceRow row;
            row.alpha_in = pt.alpha_in;
            row.eta = eta_grid[i];
            row.spectrum = pt.spectrum;
            row.abs_sigma = pt.abs_sigma;
            row.ok = pt.steady_converged;
            surf.rows.push_back(row);
        }
        if (!reps[i].boundary_minimum) surf.ep_locus.emplace_back(eta_grid[i], reps[i].ep_alpha);
    }
    return surf;
}

}  // namespace epom
