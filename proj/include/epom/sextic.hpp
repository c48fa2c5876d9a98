#pragma once

#include <Eigen/Dense>
#include <vector>

#include "epom/params.hpp"

namespace epom {

/// Coefficients of the degree-6 steady-state amplitude polynomial
///   u^6 + a0 u^5 + a1 u^4 + a2 u^3 + a3 u^2 + a4 u + a5 = 0,  u = |alpha_bar_j|,
/// kept as a transcribed diagnostic next to the Newton solver (see
/// sextic_coefficients). The b/c intermediates are retained for inspection.
struct SexticCoefficients {
    std::array<double, 6> a{};  // a0..a5 = b0..b5 / c
    std::array<double, 6> b{};
    double c = 0.0;
    double Omega = 0.0;

    /// Monic polynomial value at u.
    double eval(double u) const {
        double v = 1.0;
        for (int k = 0; k < 6; ++k) v = v * u + a[k];
        return v;
    }
    cplx eval(const cplx& u) const {
        cplx v = 1.0;
        for (int k = 0; k < 6; ++k) v = v * u + a[k];
        return v;
    }
    double max_abs_coeff() const {
        double m = 1.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Amplitude-polynomial coefficients for cavity j. The expressions follow
/// the printed closed form verbatim, including its odd powers of u; the
/// Newton fixed point is the ground truth and any numerical disagreement
/// between the two routes is reported by callers rather than asserted.
inline SexticCoefficients sextic_coefficients(const SystemParams& p, int cavity = 0) {
    p.validate();
    if (!(p.g_m > 0.0))
        throw std::domain_error("sextic_coefficients: g_m must be > 0 (leading scale c vanishes)");
    const double g = p.g_m, eta = p.eta, kap = p.kappa, ain = p.alpha_in;
    const double wm = p.omega_m, Jm = p.j_m, gm_damp = p.gamma_m;
    const double D = p.delta[cavity];
    const double sqrt_kappa = std::sqrt(kap);

    const double Om = (wm * wm - Jm * Jm) * (wm + Jm) /
                      ((Jm * Jm - wm * wm) * (Jm * Jm - wm * wm) + wm * gm_damp);
    const double ek = eta * kap;
    const double q = ek * ek + 4.0;  // (eta kappa)^2 + 4

    SexticCoefficients sc;
    sc.Omega = Om;
    sc.c = (g * Om) * (g * Om) * q;
    sc.b[0] = -4.0 * g * Om * Om * eta * sqrt_kappa * ain * (eta * eta * kap * kap + 4.0);
    sc.b[1] = 4.0 * Om * Om * eta * eta * kap * ain * (eta * eta * kap * kap + 4.0) -
              kap * (g * Om * eta * ain) * (g * Om * eta * ain) +
              g * Om * (4.0 * D + eta * kap * kap);
    sc.b[2] = 4.0 * Om * Om * g * (eta * ain) * (eta * ain) * (eta * ain) * kap * sqrt_kappa -
              2.0 * Om * sqrt_kappa * ain * (4.0 * D + eta * kap * kap);
    sc.b[3] = 2.0 * Om * eta * kap * g * ain * ain -
              (2.0 * Om * kap) * (2.0 * Om * kap) * std::pow(eta * ain, 4) +
              D * D + kap * kap / 4.0;
    sc.b[4] = -4.0 * eta * kap * ain * ain * ain;
    sc.b[5] = -kap * ain;
    for (int k = 0; k < 6; ++k) sc.a[k] = sc.b[k] / sc.c;
    return sc;
}

struct SexticRoot {
    cplx value;
    bool physical_candidate = false;  // |Im| < 1e-8 and Re > 0
};

/// All six roots of the monic sextic via companion-matrix eigenvalues.
inline std::vector<SexticRoot> sextic_roots(const SexticCoefficients& sc) {
    Eigen::Matrix<double, 6, 6> comp = Eigen::Matrix<double, 6, 6>::Zero();
    for (int r = 1; r < 6; ++r) comp(r, r - 1) = 1.0;
    for (int r = 0; r < 6; ++r) comp(r, 5) = -sc.a[5 - r];
    Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(comp);
    std::vector<SexticRoot> roots(6);
    for (int k = 0; k < 6; ++k) {
        const cplx z(es.eigenvalues()(k).real(), es.eigenvalues()(k).imag());
        roots[k].value = z;
        roots[k].physical_candidate = std::abs(z.imag()) < 1e-8 && z.real() > 0.0;
    }
    return roots;
}

}  // namespace epom
