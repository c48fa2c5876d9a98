#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <sstream>

#include "epom/run_config.hpp"
#include "test_helpers.hpp"

using namespace epom;
using nlohmann::json;

namespace {

json valid_config() {
    return json::parse(R"({
      "params": {"delta": [1.0, -1.0], "g_m": 1.076e-4, "eta": 0.1, "kappa": 7.3e-2,
                 "gamma_m": 1.076e-5, "j_m": 4e-4, "alpha_in": 20.0},
      "integrator": {"method": "fixed-rk4", "dt": 0.05, "t_end": 100.0,
                     "sample_stride": 1.0, "transient_fraction": 0.5},
      "units": "gm",
      "ep_scan": {"alpha_grid": {"start": 1, "stop": 10, "step": 1}},
      "bifurcation": {"eta_grid": {"values": [0.0, 0.1]},
                      "lyapunov": {"n_renorms": 100}}
    })");
}

}  // namespace

TEST_CASE("valid config passes key validation and parses", "[config]") {
    const json cfg = valid_config();
    CHECK_NOTHROW(validate_keys(cfg, config_schema()));
    const SystemParams p = parse_params(cfg, "gm");
    CHECK(p.eta == Catch::Approx(0.1 * 1.076e-4));  // gm-relative scaling
    const SystemParams q = parse_params(cfg, "omega");
    CHECK(q.eta == 0.1);
    const IntegratorConfig ic = parse_integrator(cfg);
    CHECK(ic.method == IntegratorConfig::Method::FixedRk4);
    CHECK(ic.t_end == 100.0);
}

TEST_CASE("unknown keys are rejected wherever they are injected", "[config]") {
    // fuzz: drop a junk key into every object of the config in turn
    const json base = valid_config();
    std::vector<std::string> paths;
    std::function<void(const json&, const std::string&)> walk = [&](const json& node,
                                                                    const std::string& path) {
        if (!node.is_object()) return;
        paths.push_back(path);
        for (const auto& [k, v] : node.items()) walk(v, path.empty() ? k : path + "/" + k);
    };
    walk(base, "");
    REQUIRE(paths.size() >= 6);

    epom::test::Lcg rng;
    for (const auto& path : paths) {
        json cfg = base;
        json* node = &cfg;
        if (!path.empty()) {
            std::istringstream ss(path);
            std::string part;
            while (std::getline(ss, part, '/')) node = &(*node)[part];
        }
        const std::string junk = "zz_" + std::to_string(static_cast<unsigned>(rng.uniform() * 1e6));
        (*node)[junk] = 1.0;
        INFO("injected at: /" << path);
        CHECK_THROWS_AS(validate_keys(cfg, config_schema()), ConfigError);
    }
}

TEST_CASE("grids parse from ranges and explicit values", "[config]") {
    const json r = json::parse(R"({"start": 0.0, "stop": 1.0, "step": 0.25})");
    const auto g = parse_grid(r, "g");
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    const auto scaled = parse_grid(r, "g", 2.0);
    CHECK(scaled.back() == 2.0);

    CHECK_THROWS_AS(parse_grid(json::parse(R"({"values": [1.0, 1.0]})"), "g"), ConfigError);
    CHECK_THROWS_AS(parse_grid(json::parse(R"({"start": 1, "stop": 0, "step": 1})"), "g"),
                    ConfigError);
    CHECK_THROWS_AS(parse_grid(json::parse(R"({"values": []})"), "g"), ConfigError);
}

TEST_CASE("bad parameter values are refused", "[config]") {
    json cfg = valid_config();
    cfg["params"]["kappa"] = -1.0;
    CHECK_THROWS_AS(parse_params(cfg, "gm"), ConfigError);
    cfg = valid_config();
    cfg["params"]["omega_m"] = 2.0;  // the unit anchor is fixed
    CHECK_THROWS_AS(parse_params(cfg, "gm"), ConfigError);
    cfg = valid_config();
    cfg["integrator"]["method"] = "leapfrog";
    CHECK_THROWS_AS(parse_integrator(cfg), ConfigError);
}
