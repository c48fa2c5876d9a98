#pragma once

// JSON run-configuration parsing shared by the CLI and its tests. Not part
// of the umbrella header: pulls in the vendored nlohmann/json.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "epom/integrate.hpp"
#include "epom/params.hpp"

namespace epom {

/// Allowed-key tree: every object in a config must match one of these
/// entries; unknown keys fail closed.
struct KeySchema {
    std::map<std::string, KeySchema> children;
    bool leaf = false;
};

inline KeySchema grid_schema() {
    KeySchema g;
    g.children["start"].leaf = true;
    g.children["stop"].leaf = true;
    g.children["step"].leaf = true;
    g.children["values"].leaf = true;
    return g;
}

inline KeySchema config_schema() {
    KeySchema root;
    KeySchema& params = root.children["params"];
    for (const char* k : {"delta", "g_m", "eta", "kappa", "gamma_m", "j_m", "alpha_in", "omega_m"})
        params.children[k].leaf = true;
    KeySchema& integ = root.children["integrator"];
    for (const char* k : {"method", "dt", "rel_tol", "abs_tol", "t_end", "sample_stride",
                          "transient_fraction", "max_step"})
        integ.children[k].leaf = true;
    root.children["units"].leaf = true;

    root.children["simulate"].children["kick_beta1"].leaf = true;
    root.children["steady"].children["alpha_grid"] = grid_schema();
    root.children["ep_scan"].children["alpha_grid"] = grid_schema();
    KeySchema& surf = root.children["eigen_surface"];
    surf.children["alpha_grid"] = grid_schema();
    surf.children["eta_grid"] = grid_schema();
    KeySchema lyap_common;
    for (const char* k : {"renorm_interval", "n_renorms", "d0_rel", "discard_fraction"})
        lyap_common.children[k].leaf = true;
    KeySchema& bif = root.children["bifurcation"];
    bif.children["eta_grid"] = grid_schema();
    bif.children["kick_beta1"].leaf = true;
    bif.children["lambda_chaotic"].leaf = true;
    bif.children["lyapunov"] = lyap_common;
    KeySchema& poin = root.children["poincare"];
    poin.children["rule"].leaf = true;
    poin.children["strobe_period"].leaf = true;
    poin.children["kick_beta1"].leaf = true;
    KeySchema& lyap = root.children["lyapunov"];
    lyap = lyap_common;
    lyap.children["kick_beta1"].leaf = true;
    lyap.children["eta_grid"] = grid_schema();
    return root;
}

/// Reject any key not present in the schema; the error names the offending
/// JSON path.
inline void validate_keys(const nlohmann::json& node, const KeySchema& schema,
                          const std::string& path = "") {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
        const auto it = schema.children.find(key);
        if (it == schema.children.end())
            throw ConfigError("unknown config key: " + path + "/" + key);
        if (!it->second.leaf) validate_keys(value, it->second, path + "/" + key);
    }
}

inline double get_num(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

/// Physical parameters; with units == "gm" the configured eta is a
/// fraction of g_m.
inline SystemParams parse_params(const nlohmann::json& cfg, const std::string& units) {
    if (!cfg.contains("params")) throw ConfigError("config needs a params object");
    const nlohmann::json& pj = cfg["params"];
    SystemParams p;
    if (pj.contains("delta")) {
        if (!pj["delta"].is_array() || pj["delta"].size() != 2)
            throw ConfigError("params/delta: expected [delta1, delta2]");
        p.delta = {get_num(pj["delta"][0], "params/delta[0]"),
                   get_num(pj["delta"][1], "params/delta[1]")};
    }
    if (pj.contains("g_m")) p.g_m = get_num(pj["g_m"], "params/g_m");
    if (pj.contains("eta")) p.eta = get_num(pj["eta"], "params/eta");
    if (pj.contains("kappa")) p.kappa = get_num(pj["kappa"], "params/kappa");
    if (pj.contains("gamma_m")) p.gamma_m = get_num(pj["gamma_m"], "params/gamma_m");
    if (pj.contains("j_m")) p.j_m = get_num(pj["j_m"], "params/j_m");
    if (pj.contains("alpha_in")) p.alpha_in = get_num(pj["alpha_in"], "params/alpha_in");
    if (pj.contains("omega_m")) p.omega_m = get_num(pj["omega_m"], "params/omega_m");
    if (units == "gm") p.eta *= p.g_m;
    p.validate();
    return p;
}

inline IntegratorConfig parse_integrator(const nlohmann::json& cfg) {
    IntegratorConfig ic;
    if (!cfg.contains("integrator")) return ic;
    const nlohmann::json& ij = cfg["integrator"];
    if (ij.contains("method")) {
        const std::string m = ij["method"].get<std::string>();
        if (m == "fixed-rk4")
            ic.method = IntegratorConfig::Method::FixedRk4;
        else if (m == "adaptive-rk45")
            ic.method = IntegratorConfig::Method::AdaptiveRk45;
        else
            throw ConfigError("integrator/method: expected fixed-rk4 or adaptive-rk45");
    }
    if (ij.contains("dt")) ic.dt = get_num(ij["dt"], "integrator/dt");
    if (ij.contains("rel_tol")) ic.rel_tol = get_num(ij["rel_tol"], "integrator/rel_tol");
    if (ij.contains("abs_tol")) ic.abs_tol = get_num(ij["abs_tol"], "integrator/abs_tol");
    if (ij.contains("t_end")) ic.t_end = get_num(ij["t_end"], "integrator/t_end");
    if (ij.contains("sample_stride"))
        ic.sample_stride = get_num(ij["sample_stride"], "integrator/sample_stride");
    if (ij.contains("transient_fraction"))
        ic.transient_fraction = get_num(ij["transient_fraction"], "integrator/transient_fraction");
    if (ij.contains("max_step")) ic.max_step = get_num(ij["max_step"], "integrator/max_step");
    return ic;
}

/// Strictly ascending grid from {start, stop, step} or explicit {values},
/// each entry scaled by `scale` (used for the eta unit conventions).
inline std::vector<double> parse_grid(const nlohmann::json& gj, const std::string& path,
                                      double scale = 1.0) {
    std::vector<double> g;
    if (gj.contains("values")) {
        for (const auto& v : gj["values"]) g.push_back(get_num(v, path + "/values") * scale);
    } else {
        if (!gj.contains("start") || !gj.contains("stop") || !gj.contains("step"))
            throw ConfigError(path + ": need start/stop/step or values");
        const double a = get_num(gj["start"], path + "/start");
        const double b = get_num(gj["stop"], path + "/stop");
        const double s = get_num(gj["step"], path + "/step");
        if (!(s > 0.0) || b < a) throw ConfigError(path + ": need step > 0 and stop >= start");
        for (long k = 0;; ++k) {
            const double v = a + static_cast<double>(k) * s;
            if (v > b + 1e-12 * std::max(1.0, std::abs(b))) break;
            g.push_back(v * scale);
        }
    }
    if (g.empty()) throw ConfigError(path + ": empty grid");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw ConfigError(path + ": grid must be strictly ascending");
    return g;
}

}  // namespace epom
