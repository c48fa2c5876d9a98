#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace epom;
using epom::test::reference_params;

namespace {

SystemParams decoupled_params() {
    SystemParams p;
    p.delta = {0.7, -1.3};
    p.g_m = 0.0;
    p.eta = 0.0;
    p.j_m = 0.0;
    p.kappa = 0.073;
    p.gamma_m = 1.076e-5;
    p.alpha_in = 0.0;
    return p;
}

FieldState analytic_decoupled(const SystemParams& p, const FieldState& s0, double t) {
    const cplx I(0.0, 1.0);
    FieldState s;
    for (int j = 0; j < 2; ++j) {
        s.alpha[j] = s0.alpha[j] * std::exp((I * p.delta[j] - 0.5 * p.kappa) * t);
        s.beta[j] = s0.beta[j] * std::exp(-(I * p.omega_m + 0.5 * p.gamma_m) * t);
    }
    return s;
}

FieldState generic_start() {
    FieldState s0;
    s0.alpha = {cplx(1.0, -0.5), cplx(-0.3, 0.8)};
    s0.beta = {cplx(0.6, 0.1), cplx(-0.2, -0.9)};
    return s0;
}

}  // namespace

TEST_CASE("integrators reproduce the decoupled analytic solution", "[dynamics]") {
    const SystemParams p = decoupled_params();
    const FieldState s0 = generic_start();

    IntegratorConfig cfg;
    cfg.t_end = 1000.0;
    cfg.sample_stride = 100.0;

    SECTION("adaptive rk45") {
        cfg.method = IntegratorConfig::Method::AdaptiveRk45;
        cfg.rel_tol = 1e-9;
        cfg.abs_tol = 1e-12;
        const TimeSeries ts = integrate(p, s0, cfg);
        // local error is held at rel_tol per step; over ~2e4 steps the phase
        // error accumulates coherently, so the global bound carries a factor
        // of order n_steps * (actual/estimated local error) ~ 1e2 (measured
        // ~80x at this tolerance)
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const FieldState ref = analytic_decoupled(p, s0, ts.t[k]);
            CHECK((ts.states[k] - ref).max_abs() < 100 * cfg.rel_tol * std::max(1.0, ref.max_abs()));
        }
    }
    SECTION("fixed rk4") {
        cfg.method = IntegratorConfig::Method::FixedRk4;
        cfg.dt = 0.01;
        const TimeSeries ts = integrate(p, s0, cfg);
        const FieldState ref = analytic_decoupled(p, s0, cfg.t_end);
        CHECK((ts.states.back() - ref).max_abs() < 1e-6);
    }
}

TEST_CASE("fixed rk4 shows 4th-order self-convergence", "[dynamics][oracle]") {
    const SystemParams p = reference_params(20.0);
    const FieldState s0 = kicked_state(1e-3);

    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.t_end = 1000.0;
    cfg.sample_stride = cfg.t_end;

    auto end_state = [&](double dt) {
        IntegratorConfig c = cfg;
        c.dt = dt;
        return integrate(p, s0, c).states.back();
    };
    const FieldState y_h = end_state(0.2);
    const FieldState y_h2 = end_state(0.1);
    const FieldState y_h4 = end_state(0.05);
    // (y_h - y_h/2) / (y_h/2 - y_h/4) -> 2^4 for a 4th-order method
    const double ratio = (y_h - y_h2).max_abs() / (y_h2 - y_h4).max_abs();
    INFO("ratio = " << ratio);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("adaptive and fixed-step integrations agree on a sub-threshold trajectory",
          "[dynamics]") {
    const SystemParams p = reference_params(20.0);
    const FieldState s0 = kicked_state(1e-3);

    IntegratorConfig fine;
    fine.method = IntegratorConfig::Method::FixedRk4;
    fine.dt = 0.002;
    fine.t_end = 1000.0;
    fine.sample_stride = 50.0;

    IntegratorConfig ad;
    ad.method = IntegratorConfig::Method::AdaptiveRk45;
    ad.rel_tol = 1e-11;
    ad.abs_tol = 1e-13;
    ad.t_end = fine.t_end;
    ad.sample_stride = fine.sample_stride;

    const TimeSeries a = integrate(p, s0, fine);
    const TimeSeries b = integrate(p, s0, ad);
    REQUIRE(a.size() == b.size());
    double scale = 0.0;
    for (const auto& s : a.states) scale = std::max(scale, s.max_abs());
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK((a.states[k] - b.states[k]).max_abs() <= std::max(ad.rel_tol, 1e-8) * scale);
}

TEST_CASE("fixed-step integration is bit-deterministic", "[dynamics]") {
    const SystemParams p = reference_params(35.0);
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.dt = 0.05;
    cfg.t_end = 500.0;
    cfg.sample_stride = 25.0;
    const TimeSeries a = integrate(p, kicked_state(), cfg);
    const TimeSeries b = integrate(p, kicked_state(), cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.t[k] == b.t[k]);
        CHECK(a.states[k].to_reals() == b.states[k].to_reals());
    }
}

TEST_CASE("below threshold the trajectory converges to the solved fixed point",
          "[dynamics][steady]") {
    const SystemParams p = reference_params(5.0);
    const SteadyState ss = solve_steady(p);
    REQUIRE(ss.converged);

    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.dt = 0.1;
    // the optical switch-on rings the mechanics resonantly (the transient
    // beats at delta = +-omega_m), so the horizon must cover several
    // 2/gamma_m ring-down times
    cfg.t_end = 1.5e6;
    cfg.sample_stride = cfg.t_end;
    const TimeSeries ts = integrate(p, FieldState{}, cfg);
    const double dist = (ts.states.back() - ss.state()).max_abs();
    CHECK(dist < 1e-5 * std::sqrt(ss.state().norm2()));
}

TEST_CASE("integration failure reports the last good time", "[dynamics][errors]") {
    // runaway: strong dissipative drive makes the modulated linewidth go
    // negative; at a fixed step the blow-up overflows to NaN within a few
    // steps and must surface as an error, not a silent NaN record
    SystemParams p = reference_params(1e4, /*eta_over_gm=*/0.0);
    p.eta = 0.05;
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.dt = 0.05;
    cfg.t_end = 2e4;
    cfg.sample_stride = 100.0;
    try {
        integrate(p, kicked_state(), cfg);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.last_good_time >= 0.0);
        CHECK(e.last_good_time < cfg.t_end);
    }
}

TEST_CASE("config validation rejects bad settings", "[dynamics][errors]") {
    IntegratorConfig cfg;
    cfg.t_end = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.t_end = 10.0;
    cfg.transient_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.transient_fraction = 0.5;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("tail_fraction drops the leading samples", "[dynamics]") {
    TimeSeries ts;
    for (int k = 0; k < 10; ++k) {
        ts.t.push_back(k);
        FieldState s;
        s.beta[0] = k;
        ts.states.push_back(s);
    }
    const TimeSeries tail = ts.tail_fraction(0.5);
    REQUIRE(tail.size() == 5);
    CHECK(tail.t.front() == 5.0);
    CHECK(tail.x(0, 0) == 10.0);
}

TEST_CASE("amplitude scan: undriven row is all zeros and onset detection needs a crossing",
          "[dynamics][scan]") {
    const SystemParams p = reference_params(0.0);
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::FixedRk4;
    cfg.dt = 0.05;
    cfg.t_end = 2000.0;
    cfg.sample_stride = 1.0;
    cfg.transient_fraction = 0.5;
    const auto rows = amplitude_scan(p, {0.0, 5.0, 10.0}, cfg, /*kick_beta1=*/0.0);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].ok);
    CHECK(rows[0].max_photon[0] == 0.0);
    CHECK(rows[0].max_abs_x[1] == 0.0);
    CHECK(rows[1].max_photon[0] > 0.0);
    // every row is sub-threshold: no point crosses 10x the median
    CHECK_FALSE(detect_threshold(rows).has_value());
}
