// epom — batch front-end for the coupled-cavity simulator.
//
// Usage:
//   epom <simulate|steady|ep-scan|eigen-surface|bifurcation|poincare|lyapunov>
//        --config <file> [--out <dir>] [--units gm|omega] [--threads N]
//
// Every command reads one JSON config (unknown keys are rejected), writes
// CSV artifacts plus a manifest.json into the output directory, and is
// deterministic: identical configs give byte-identical CSVs. Exit codes:
// 0 ok, 2 config error, 3 numeric failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epom/epom.hpp"
#include "epom/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace epom;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::string units;  // "", "gm", "omega"
    unsigned threads = 0;
};

// --- output helpers -----------------------------------------------------------

struct RunContext {
    json config;
    SystemParams params;
    IntegratorConfig integrator;
    std::string units = "gm";
    fs::path out;
    unsigned threads = 0;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;
    json result = json::object();

    double eta_scale() const { return units == "gm" ? params.g_m : 1.0; }

    void write_table(const std::string& name, const Table& t) {
        write_csv(out / name, t);
        outputs.push_back(name);
    }

    void finish(const std::string& command) {
        json manifest;
        manifest["command"] = command;
        manifest["version"] = epom::version;
        manifest["units"] = units;
        manifest["config"] = config;
        manifest["outputs"] = outputs;
        manifest["result"] = result;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        atomic_write(out / "manifest.json", manifest.dump(2) + "\n");
    }
};

double kick_of(const json& cfg, const char* section) {
    if (cfg.contains(section) && cfg[section].contains("kick_beta1"))
        return cfg[section]["kick_beta1"].get<double>();
    return 1e-3;
}

LyapunovOptions lyapunov_options(const json& lj) {
    LyapunovOptions opt;
    if (lj.contains("renorm_interval")) opt.renorm_interval = lj["renorm_interval"].get<double>();
    if (lj.contains("n_renorms")) opt.n_renorms = lj["n_renorms"].get<long>();
    if (lj.contains("d0_rel")) opt.d0_rel = lj["d0_rel"].get<double>();
    if (lj.contains("discard_fraction")) opt.discard_fraction = lj["discard_fraction"].get<double>();
    return opt;
}

// --- commands -----------------------------------------------------------------

int cmd_simulate(RunContext& ctx) {
    const double kick = kick_of(ctx.config, "simulate");
    Table t;
    t.columns = {"t", "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2",
                 "re_beta1", "im_beta1", "re_beta2", "im_beta2", "x1", "x2", "n1", "n2"};
    integrate_observe(ctx.params, kicked_state(kick), ctx.integrator,
                      [&](double time, const FieldState& s) {
                          t.add_row({time, s.alpha[0].real(), s.alpha[0].imag(), s.alpha[1].real(),
                                     s.alpha[1].imag(), s.beta[0].real(), s.beta[0].imag(),
                                     s.beta[1].real(), s.beta[1].imag(), s.x(0), s.x(1),
                                     s.photon(0), s.photon(1)});
                      });
    ctx.write_table("timeseries.csv", t);
    return 0;
}

int cmd_steady(RunContext& ctx) {
    std::vector<double> grid{ctx.params.alpha_in};
    if (ctx.config.contains("steady") && ctx.config["steady"].contains("alpha_grid"))
        grid = parse_grid(ctx.config["steady"]["alpha_grid"], "steady/alpha_grid");
    const auto sweep = steady_sweep(ctx.params, grid);
    Table t;
    t.columns = {"alpha_in", "re_alpha_bar1", "im_alpha_bar1", "re_alpha_bar2", "im_alpha_bar2",
                 "re_beta_bar1", "im_beta_bar1", "re_beta_bar2", "im_beta_bar2",
                 "residual", "iterations", "converged", "sextic_res1", "sextic_res2"};
    bool all_ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SteadyState& ss = sweep[i];
        all_ok = all_ok && ss.converged;
        SystemParams p = ctx.params;
        p.alpha_in = grid[i];
        // sextic cross-validation (diagnostic column, see docs)
        std::array<double, 2> sres{std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()};
        if (p.g_m > 0.0)
            for (int j = 0; j < 2; ++j) {
                const SexticCoefficients sc = sextic_coefficients(p, j);
                sres[j] = std::abs(sc.eval(std::abs(ss.alpha_bar[j]))) / sc.max_abs_coeff();
            }
        t.add_row({grid[i], ss.alpha_bar[0].real(), ss.alpha_bar[0].imag(),
                   ss.alpha_bar[1].real(), ss.alpha_bar[1].imag(), ss.beta_bar[0].real(),
                   ss.beta_bar[0].imag(), ss.beta_bar[1].real(), ss.beta_bar[1].imag(),
                   ss.residual, static_cast<long long>(ss.iterations),
                   static_cast<long long>(ss.converged ? 1 : 0), sres[0], sres[1]});
    }
    ctx.write_table("steady.csv", t);
    ctx.result["all_converged"] = all_ok;
    return 0;
}

int cmd_ep_scan(RunContext& ctx) {
    if (!ctx.config.contains("ep_scan") || !ctx.config["ep_scan"].contains("alpha_grid"))
        throw ConfigError("ep-scan needs ep_scan/alpha_grid");
    const auto grid = parse_grid(ctx.config["ep_scan"]["alpha_grid"], "ep_scan/alpha_grid");
    const EpScanReport rep = ep_scan(ctx.params, grid);
    Table t;
    t.columns = {"alpha_in", "omega_plus", "omega_minus", "gamma_plus", "gamma_minus",
                 "re_sigma", "im_sigma", "abs_sigma", "converged"};
    for (const auto& pt : rep.points)
        t.add_row({pt.alpha_in, pt.spectrum.omega_pm[0], pt.spectrum.omega_pm[1],
                   pt.spectrum.gamma_pm[0], pt.spectrum.gamma_pm[1], pt.spectrum.sigma.real(),
                   pt.spectrum.sigma.imag(), pt.abs_sigma,
                   static_cast<long long>(pt.steady_converged ? 1 : 0)});
    ctx.write_table("ep_scan.csv", t);
    ctx.result["ep_alpha"] = rep.ep_alpha;
    ctx.result["ep_abs_sigma"] = rep.ep_abs_sigma;
    ctx.result["omega_gap_at_ep"] = rep.omega_gap_at_ep;
    ctx.result["gamma_gap_at_ep"] = rep.gamma_gap_at_ep;
    ctx.result["boundary_minimum"] = rep.boundary_minimum;
    if (rep.boundary_minimum)
        std::cerr << "warning: |sigma| minimum sits on the grid boundary; EP not bracketed\n";
    return 0;
}

int cmd_eigen_surface(RunContext& ctx) {
    if (!ctx.config.contains("eigen_surface"))
        throw ConfigError("eigen-surface needs an eigen_surface section");
    const json& sj = ctx.config["eigen_surface"];
    if (!sj.contains("alpha_grid") || !sj.contains("eta_grid"))
        throw ConfigError("eigen-surface needs alpha_grid and eta_grid");
    const auto alpha_grid = parse_grid(sj["alpha_grid"], "eigen_surface/alpha_grid");
    const auto eta_grid = parse_grid(sj["eta_grid"], "eigen_surface/eta_grid", ctx.eta_scale());
    const EigenSurface surf = eigen_surface(ctx.params, alpha_grid, eta_grid);
    Table t;
    t.columns = {"alpha_in", "eta", "omega_plus", "omega_minus", "gamma_plus", "gamma_minus",
                 "abs_sigma", "ok"};
    for (const auto& row : surf.rows)
        t.add_row({row.alpha_in, row.eta, row.spectrum.omega_pm[0], row.spectrum.omega_pm[1],
                   row.spectrum.gamma_pm[0], row.spectrum.gamma_pm[1], row.abs_sigma,
                   static_cast<long long>(row.ok ? 1 : 0)});
    ctx.write_table("eigen_surface.csv", t);
    Table locus;
    locus.columns = {"eta", "alpha_ep"};
    for (const auto& [eta, a] : surf.ep_locus) locus.add_row({eta, a});
    ctx.write_table("ep_locus.csv", locus);
    return 0;
}

int cmd_bifurcation(RunContext& ctx) {
    if (!ctx.config.contains("bifurcation") || !ctx.config["bifurcation"].contains("eta_grid"))
        throw ConfigError("bifurcation needs bifurcation/eta_grid");
    const json& bj = ctx.config["bifurcation"];
    const auto eta_grid = parse_grid(bj["eta_grid"], "bifurcation/eta_grid", ctx.eta_scale());
    BifurcationOptions opt;
    opt.kick_beta1 = kick_of(ctx.config, "bifurcation");
    opt.threads = ctx.threads;
    if (bj.contains("lyapunov")) opt.lyapunov = lyapunov_options(bj["lyapunov"]);
    if (bj.contains("lambda_chaotic"))
        opt.classify.lambda_chaotic = bj["lambda_chaotic"].get<double>();
    const auto rows = bifurcation_diagram(ctx.params, eta_grid, ctx.integrator, opt);

    Table ext;
    ext.columns = {"eta", "eta_over_gm", "extremum"};
    Table summary;
    summary.columns = {"eta", "eta_over_gm", "lambda_max", "lambda_converged", "n_extrema",
                       "n_incommensurate", "label", "ok"};
    std::vector<ZoneLabel> labels;
    for (const auto& row : rows) {
        const double over_gm = ctx.params.g_m > 0 ? row.eta / ctx.params.g_m : 0.0;
        for (double e : row.extrema) ext.add_row({row.eta, over_gm, e});
        summary.add_row({row.eta, over_gm, row.lambda_max,
                         static_cast<long long>(row.lambda_converged ? 1 : 0),
                         static_cast<long long>(row.extrema.size()),
                         static_cast<long long>(row.n_incommensurate),
                         std::string(to_string(row.label)),
                         static_cast<long long>(row.ok ? 1 : 0)});
        if (row.ok) labels.push_back(row.label);
    }
    ctx.write_table("bifurcation.csv", ext);
    ctx.write_table("bifurcation_summary.csv", summary);

    const ZoneSegmentation seg = segment_zones(labels);
    json zones = json::array();
    for (const auto& s : seg.segments) {
        json z;
        z["label"] = to_string(s.label);
        z["eta_begin"] = rows[s.begin].eta;
        z["eta_end"] = rows[s.end - 1].eta;
        z["n_points"] = s.end - s.begin;
        zones.push_back(z);
    }
    ctx.result["zones"] = zones;
    ctx.result["zone_agreement"] = seg.agreement;
    return 0;
}

int cmd_poincare(RunContext& ctx) {
    SectionSpec spec;
    double kick = kick_of(ctx.config, "poincare");
    if (ctx.config.contains("poincare")) {
        const json& pj = ctx.config["poincare"];
        if (pj.contains("rule")) {
            const std::string r = pj["rule"].get<std::string>();
            if (r == "strobe")
                spec.rule = SectionSpec::Rule::Strobe;
            else if (r == "crossing")
                spec.rule = SectionSpec::Rule::Crossing;
            else
                throw ConfigError("poincare/rule: expected strobe or crossing");
        }
        if (pj.contains("strobe_period")) spec.strobe_period = pj["strobe_period"].get<double>();
    }
    const TimeSeries full = integrate(ctx.params, kicked_state(kick), ctx.integrator);
    const PoincareData pd =
        poincare_section(full.tail_fraction(ctx.integrator.transient_fraction), spec);
    Table t;
    t.columns = {"k", "x1", "x2"};
    for (std::size_t k = 0; k < pd.points.size(); ++k)
        t.add_row({static_cast<long long>(k), pd.points[k][0], pd.points[k][1]});
    ctx.write_table("poincare.csv", t);
    ctx.result["section"] = pd.section.describe();
    ctx.result["n_points"] = pd.points.size();
    ctx.result["spread"] = poincare_spread(pd);
    return 0;
}

int cmd_lyapunov(RunContext& ctx) {
    LyapunovOptions opt;
    double kick = 1e-3;
    std::optional<std::vector<double>> eta_grid;
    if (ctx.config.contains("lyapunov")) {
        const json& lj = ctx.config["lyapunov"];
        opt = lyapunov_options(lj);
        if (lj.contains("kick_beta1")) kick = lj["kick_beta1"].get<double>();
        if (lj.contains("eta_grid"))
            eta_grid = parse_grid(lj["eta_grid"], "lyapunov/eta_grid", ctx.eta_scale());
    }
    const double transient = ctx.integrator.transient_fraction * ctx.integrator.t_end;

    auto estimate_for = [&](SystemParams p) {
        FieldState s0 = kicked_state(kick);
        if (transient > 0.0) s0 = advance(p, s0, transient, ctx.integrator);
        return lyapunov_max(p, s0, ctx.integrator, opt);
    };

    if (eta_grid) {
        Table t;
        t.columns = {"eta", "eta_over_gm", "lambda_max", "n_renorms", "converged", "ok"};
        std::vector<LyapunovEstimate> ests(eta_grid->size());
        parallel_for_index(eta_grid->size(), resolve_threads(ctx.threads), [&](std::size_t i) {
            SystemParams p = ctx.params;
            p.eta = (*eta_grid)[i];
            try {
                ests[i] = estimate_for(p);
            } catch (const IntegrationError& e) {
                ests[i].ok = false;
                ests[i].fail_time = e.last_good_time;
            }
        });
        for (std::size_t i = 0; i < eta_grid->size(); ++i) {
            const auto& est = ests[i];
            t.add_row({(*eta_grid)[i],
                       ctx.params.g_m > 0 ? (*eta_grid)[i] / ctx.params.g_m : 0.0,
                       est.lambda_max, static_cast<long long>(est.n_renorms),
                       static_cast<long long>(est.converged ? 1 : 0),
                       static_cast<long long>(est.ok ? 1 : 0)});
        }
        ctx.write_table("lyapunov.csv", t);
        return 0;
    }

    const LyapunovEstimate est = estimate_for(ctx.params);
    if (!est.ok)
        throw IntegrationError("lyapunov estimate failed", est.fail_time);
    Table t;
    t.columns = {"k", "running_lambda"};
    for (std::size_t k = 0; k < est.convergence_trace.size(); ++k)
        t.add_row({static_cast<long long>(k), est.convergence_trace[k]});
    ctx.write_table("lyapunov.csv", t);
    ctx.result["lambda_max"] = est.lambda_max;
    ctx.result["n_renorms"] = est.n_renorms;
    ctx.result["converged"] = est.converged;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled-cavity optomechanics: simulation and spectral analysis"};
    app.require_subcommand(1);

    CliOptions opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "integrate one trajectory and write timeseries.csv"},
        {"steady", "solve mean-field fixed points over a drive grid"},
        {"ep-scan", "locate the exceptional point over a drive scan"},
        {"eigen-surface", "eigenvalue surface over a (drive, eta) grid"},
        {"bifurcation", "regime sweep over eta with zone labels"},
        {"poincare", "Poincare section of one trajectory"},
        {"lyapunov", "largest Lyapunov exponent estimate"}};
    for (const auto& [name, blurb] : commands) {
        CLI::App* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", opt.config_path, "JSON config file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--units", opt.units, "eta units: gm (fractions of g_m) or omega");
        sub->add_option("--threads", opt.threads, "worker threads (default: EPOM_THREADS or hardware)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad invocation is a config error
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunContext ctx;
    try {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot open config file: " + opt.config_path);
        try {
            ctx.config = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
        validate_keys(ctx.config, config_schema(), "");
        ctx.units = "gm";
        if (ctx.config.contains("units")) ctx.units = ctx.config["units"].get<std::string>();
        if (!opt.units.empty()) ctx.units = opt.units;
        if (ctx.units != "gm" && ctx.units != "omega")
            throw ConfigError("units must be gm or omega");
        ctx.params = parse_params(ctx.config, ctx.units);
        ctx.integrator = parse_integrator(ctx.config);
        ctx.threads = opt.threads;
        ctx.out = opt.out_dir;
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (!fs::is_directory(ctx.out))
            throw ConfigError("output directory is not writable: " + ctx.out.string());
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        int rc = 0;
        if (command == "simulate") rc = cmd_simulate(ctx);
        else if (command == "steady") rc = cmd_steady(ctx);
        else if (command == "ep-scan") rc = cmd_ep_scan(ctx);
        else if (command == "eigen-surface") rc = cmd_eigen_surface(ctx);
        else if (command == "bifurcation") rc = cmd_bifurcation(ctx);
        else if (command == "poincare") rc = cmd_poincare(ctx);
        else if (command == "lyapunov") rc = cmd_lyapunov(ctx);
        ctx.finish(command);
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
