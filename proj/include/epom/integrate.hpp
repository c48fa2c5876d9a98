#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "epom/model.hpp"

namespace epom {

struct IntegratorConfig {
    enum class Method { FixedRk4, AdaptiveRk45 };

    Method method = Method::AdaptiveRk45;
    double dt = 0.01;          // fixed-step size (FixedRk4)
    double rel_tol = 1e-9;     // adaptive tolerances
    double abs_tol = 1e-12;
    double t_end = 0.0;
    double sample_stride = 0.5;
    double transient_fraction = 0.5;  // leading fraction discarded by analyses
    double max_step = 0.1;            // adaptive step cap

    void validate() const {
        if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
        if (method == Method::FixedRk4 && !(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (method == Method::AdaptiveRk45 && (!(rel_tol > 0.0) || !(abs_tol > 0.0)))
            throw ConfigError("tolerances must be > 0");
        if (!(sample_stride > 0.0)) throw ConfigError("sample_stride must be > 0");
        if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
            throw ConfigError("transient_fraction must be in [0,1)");
        if (!(max_step > 0.0)) throw ConfigError("max_step must be > 0");
    }
};

/// Uniformly sampled trajectory with the derived mechanical positions
/// x_j = 2 Re beta_j and photon numbers |alpha_j|^2 available per sample.
struct TimeSeries {
    std::vector<double> t;
    std::vector<FieldState> states;

    std::size_t size() const { return t.size(); }
    double x(int j, std::size_t k) const { return states[k].x(j); }
    double photon(int j, std::size_t k) const { return states[k].photon(j); }

    std::vector<double> x_series(int j) const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < size(); ++k) v[k] = x(j, k);
        return v;
    }

    /// Copy with the leading `fraction` of samples removed.
    TimeSeries tail_fraction(double fraction) const {
        TimeSeries out;
        const std::size_t skip = static_cast<std::size_t>(fraction * static_cast<double>(size()));
        out.t.assign(t.begin() + skip, t.end());
        out.states.assign(states.begin() + skip, states.end());
        return out;
    }

    double stride() const { return size() >= 2 ? t[1] - t[0] : 0.0; }
};

namespace detail {

inline FieldState axpy(const FieldState& y, double c, const FieldState& k) {
    FieldState r = y;
    for (int j = 0; j < 2; ++j) {
        r.alpha[j] += c * k.alpha[j];
        r.beta[j] += c * k.beta[j];
    }
    return r;
}

struct Rk4Step {
    FieldState y0, y1, f0, f1;  // endpoint values/derivatives for Hermite interpolation
    double t0 = 0, h = 0;

    void take(const SystemParams& p, const FieldState& y, double t, double dt) {
        const FieldState k1 = detail::rhs_raw(p, y);
        const FieldState k2 = detail::rhs_raw(p, axpy(y, 0.5 * dt, k1));
        const FieldState k3 = detail::rhs_raw(p, axpy(y, 0.5 * dt, k2));
        const FieldState k4 = detail::rhs_raw(p, axpy(y, dt, k3));
        FieldState out = y;
        for (int j = 0; j < 2; ++j) {
            out.alpha[j] += (dt / 6.0) * (k1.alpha[j] + 2.0 * k2.alpha[j] + 2.0 * k3.alpha[j] + k4.alpha[j]);
            out.beta[j] += (dt / 6.0) * (k1.beta[j] + 2.0 * k2.beta[j] + 2.0 * k3.beta[j] + k4.beta[j]);
        }
        y0 = y; y1 = out; f0 = k1;
        f1 = detail::rhs_raw(p, out);
        t0 = t; h = dt;
    }

    /// Cubic Hermite interpolant on [t0, t0+h] (locally 4th order).
    FieldState dense(double time) const {
        const double th = (time - t0) / h;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
        const double h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th);
        const double h11 = th * th * (th - 1);
        FieldState r;
        for (int j = 0; j < 2; ++j) {
            r.alpha[j] = h00 * y0.alpha[j] + h * h10 * f0.alpha[j] + h01 * y1.alpha[j] + h * h11 * f1.alpha[j];
            r.beta[j] = h00 * y0.beta[j] + h * h10 * f0.beta[j] + h01 * y1.beta[j] + h * h11 * f1.beta[j];
        }
        return r;
    }
};

/// Dormand-Prince 5(4) pair with PI step control and the standard
/// 4th-order continuous extension.
struct Dopri5 {
    const SystemParams* p = nullptr;
    double rel_tol = 1e-9, abs_tol = 1e-12, max_step = 0.1;
    double facold = 1e-4;

    FieldState y0, y1, k1, k7;
    std::array<FieldState, 8> rcont{};  // rcont[1..5] used
    double t0 = 0, h_done = 0;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    // 5th-order weights (= row 7 of A, FSAL)
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // error weights b5th - b4th
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;

    /// Attempt one step of size h from (t, y) with k1 = f(y) supplied
    /// (FSAL). On acceptance fills y1/k7/dense data and returns the scaled
    /// error <= 1; on rejection returns the error > 1 (caller shrinks h).
    /// Non-finite stage values are reported as a huge error.
    double attempt(double t, const FieldState& y, const FieldState& f_y, double h) {
        const SystemParams& pp = *p;
        const FieldState& K1 = f_y;
        const FieldState K2 = detail::rhs_raw(pp, lc(y, h, {{1.0 / 5, 0, 0, 0, 0, 0}}, {&K1}));
        const FieldState K3 = detail::rhs_raw(pp, lc(y, h, {{3.0 / 40, 9.0 / 40}}, {&K1, &K2}));
        const FieldState K4 = detail::rhs_raw(pp, lc(y, h, {{44.0 / 45, -56.0 / 15, 32.0 / 9}}, {&K1, &K2, &K3}));
        const FieldState K5 = detail::rhs_raw(
            pp, lc(y, h, {{19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729}},
                   {&K1, &K2, &K3, &K4}));
        const FieldState K6 = detail::rhs_raw(
            pp, lc(y, h, {{9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}},
                   {&K1, &K2, &K3, &K4, &K5}));
        const FieldState ynew = lc(y, h, {{b1, 0.0, b3, b4, b5, b6}}, {&K1, &K2, &K3, &K4, &K5, &K6});
        const FieldState K7 = detail::rhs_raw(pp, ynew);
        if (!ynew.finite()) return 1e100;

        // scaled RMS error over the 8 real components
        const auto ye = lc(FieldState{}, h, {{e1, 0.0, e3, e4, e5, e6, e7}},
                           {&K1, &K2, &K3, &K4, &K5, &K6, &K7})
                            .to_reals();
        const auto v0 = y.to_reals();
        const auto v1 = ynew.to_reals();
        double err = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            const double sc = abs_tol + rel_tol * std::max(std::abs(v0[i]), std::abs(v1[i]));
            const double q = ye[i] / sc;
            err += q * q;
        }
        err = std::sqrt(err / 8.0);
        if (!std::isfinite(err)) return 1e100;
        if (err <= 1.0) {
            y0 = y; y1 = ynew; k1 = K1; k7 = K7; t0 = t; h_done = h;
            const FieldState dy = ynew - y;
            rcont[1] = dy;
            rcont[2] = h * k1 - dy;
            rcont[3] = dy - h * k7 - rcont[2];
            rcont[4] = h * (lc(FieldState{}, 1.0, {{d1, 0.0, d3, d4, d5, d6, d7}},
                               {&K1, &K2, &K3, &K4, &K5, &K6, &K7}));
        }
        return err;
    }

    FieldState dense(double time) const {
        const double th = (time - t0) / h_done;
        const double th1 = 1.0 - th;
        FieldState r;
        for (int j = 0; j < 2; ++j) {
            r.alpha[j] = y0.alpha[j] +
                         th * (rcont[1].alpha[j] +
                               th1 * (rcont[2].alpha[j] +
                                      th * (rcont[3].alpha[j] + th1 * rcont[4].alpha[j])));
            r.beta[j] = y0.beta[j] +
                        th * (rcont[1].beta[j] +
                              th1 * (rcont[2].beta[j] +
                                     th * (rcont[3].beta[j] + th1 * rcont[4].beta[j])));
        }
        return r;
    }

private:
    static FieldState lc(const FieldState& y, double h, const std::array<double, 7>& w,
                         std::initializer_list<const FieldState*> ks) {
        FieldState r = y;
        std::size_t i = 0;
        for (const FieldState* k : ks) {
            const double c = h * w[i++];
            if (c == 0.0) continue;
            for (int j = 0; j < 2; ++j) {
                r.alpha[j] += c * k->alpha[j];
                r.beta[j] += c * k->beta[j];
            }
        }
        return r;
    }
};

}  // namespace detail

/// Integrate the mean-field equations from s0 over [0, cfg.t_end], calling
/// on_sample(t_k, state) at every output-grid point t_k = k * sample_stride
/// (including t = 0). Returns the state at t_end. Throws IntegrationError
/// on NaN blow-up or step-size underflow, carrying the last good time.
template <class F>
FieldState integrate_observe(const SystemParams& p, const FieldState& s0,
                             const IntegratorConfig& cfg, F&& on_sample) {
    cfg.validate();
    if (!s0.finite()) throw InvalidStateError("integrate: non-finite initial state");

    const double stride = cfg.sample_stride;
    const double t_end = cfg.t_end;
    const double grid_eps = 1e-9 * std::max(1.0, stride);
    std::size_t next_k = 0;
    auto emit_through = [&](double t_reached, auto&& dense_eval) {
        while (true) {
            const double tk = static_cast<double>(next_k) * stride;
            if (tk > t_end + grid_eps || tk > t_reached + grid_eps) break;
            on_sample(tk, dense_eval(tk));
            ++next_k;
        }
    };

    // t = 0 sample
    emit_through(0.0, [&](double) { return s0; });

    FieldState y = s0;
    double t = 0.0;

    if (cfg.method == IntegratorConfig::Method::FixedRk4) {
        detail::Rk4Step st;
        const double dt = cfg.dt;
        const long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
        for (long n = 0; n < n_steps; ++n) {
            const double h = std::min(dt, t_end - t);
            st.take(p, y, t, h);
            if (!st.y1.finite()) throw IntegrationError("integrate: state became non-finite", t);
            y = st.y1;
            t = (n + 1 < n_steps) ? (n + 1) * dt : t_end;
            emit_through(t, [&](double tk) { return st.dense(tk); });
        }
        return y;
    }

    detail::Dopri5 st;
    st.p = &p;
    st.rel_tol = cfg.rel_tol;
    st.abs_tol = cfg.abs_tol;
    st.max_step = cfg.max_step;
    FieldState f_y = nonlinear_rhs(p, y);  // checked once at entry
    double h = std::min(cfg.max_step, 1e-4);  // conservative start; controller adapts fast
    constexpr double safety = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facmin = 0.2, facmax = 10.0;
    bool just_rejected = false;

    while (t < t_end - 1e-14 * t_end) {
        h = std::min(h, t_end - t);
        if (!(h > std::max(1e-14, 1e-14 * t)))
            throw IntegrationError("integrate: step size underflow", t);
        const double err = st.attempt(t, y, f_y, h);
        const double fac11 = std::pow(std::max(err, 1e-30), expo1);
        if (err <= 1.0) {
            t += h;
            y = st.y1;
            f_y = st.k7;  // FSAL
            emit_through(t, [&](double tk) { return st.dense(tk); });
            double fac = fac11 / std::pow(st.facold, beta);
            fac = std::max(1.0 / facmax, std::min(1.0 / facmin, fac / safety));
            double hnew = h / fac;
            if (just_rejected) hnew = std::min(hnew, h);
            just_rejected = false;
            st.facold = std::max(err, 1e-4);
            h = std::min(hnew, cfg.max_step);
        } else {
            h = h / std::min(1.0 / facmin, fac11 / safety);
            just_rejected = true;
        }
    }
    return y;
}

/// Advance a state from t0 to t1 with no sampling (used by the Lyapunov
/// estimator and other lockstep drivers).
inline FieldState advance(const SystemParams& p, const FieldState& s0, double duration,
                          const IntegratorConfig& cfg) {
    IntegratorConfig c = cfg;
    c.t_end = duration;
    c.sample_stride = 2.0 * duration;  // only the t=0 sample fires
    return integrate_observe(p, s0, c, [](double, const FieldState&) {});
}

/// Full trajectory on the uniform output grid.
inline TimeSeries integrate(const SystemParams& p, const FieldState& s0,
                            const IntegratorConfig& cfg) {
    TimeSeries ts;
    const std::size_t n_expect = static_cast<std::size_t>(cfg.t_end / cfg.sample_stride) + 2;
    ts.t.reserve(n_expect);
    ts.states.reserve(n_expect);
    integrate_observe(p, s0, cfg, [&](double t, const FieldState& s) {
        ts.t.push_back(t);
        ts.states.push_back(s);
    });
    return ts;
}

}  // namespace epom
