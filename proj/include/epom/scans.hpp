#pragma once

#include <mutex>
#include <optional>
#include <vector>

#include "epom/integrate.hpp"
#include "epom/parallel.hpp"

namespace epom {

/// Deterministic default initial condition: zero fields plus a small real
/// kick on beta_1 that breaks the exchange symmetry and seeds any
/// mechanical instability without stochastic noise.
inline FieldState kicked_state(double kick_beta1 = 1e-3) {
    FieldState s;
    s.beta[0] = kick_beta1;
    return s;
}

/// Post-transient summary of one trajectory, reduced on the fly (no
/// trajectory storage).
struct AmplitudeScanRow {
    double alpha_in = 0.0;
    std::array<double, 2> mean_photon{};
    std::array<double, 2> max_photon{};
    std::array<double, 2> mean_abs_x{};
    std::array<double, 2> max_abs_x{};
    bool ok = false;
    double fail_time = 0.0;  // last good time when ok == false
};

/// Sweep the drive amplitude, integrating one trajectory per grid point
/// and reducing the post-transient samples to steady-window means/maxima
/// of the photon numbers and |x_j|. Integration failures flag the row and
/// the scan continues. Grid points run in parallel; rows are keyed by grid
/// index so the result is deterministic.
inline std::vector<AmplitudeScanRow> amplitude_scan(const SystemParams& p_template,
                                                    const std::vector<double>& alpha_grid,
                                                    const IntegratorConfig& cfg,
                                                    double kick_beta1 = 1e-3,
                                                    unsigned threads = 0) {
    for (std::size_t i = 1; i < alpha_grid.size(); ++i)
        if (!(alpha_grid[i] > alpha_grid[i - 1]))
            throw ConfigError("amplitude_scan: grid must be sorted ascending");
    cfg.validate();

    std::vector<AmplitudeScanRow> rows(alpha_grid.size());
    const double t_cut = cfg.transient_fraction * cfg.t_end;
    parallel_for_index(alpha_grid.size(), resolve_threads(threads), [&](std::size_t i) {
        SystemParams p = p_template;
        p.alpha_in = alpha_grid[i];
        AmplitudeScanRow& row = rows[i];
        row.alpha_in = alpha_grid[i];
        long n = 0;
        try {
            integrate_observe(p, kicked_state(kick_beta1), cfg, [&](double t, const FieldState& s) {
                if (t < t_cut) return;
                ++n;
                for (int j = 0; j < 2; ++j) {
                    const double ph = s.photon(j);
                    const double ax = std::abs(s.x(j));
                    row.mean_photon[j] += (ph - row.mean_photon[j]) / static_cast<double>(n);
                    row.mean_abs_x[j] += (ax - row.mean_abs_x[j]) / static_cast<double>(n);
                    row.max_photon[j] = std::max(row.max_photon[j], ph);
                    row.max_abs_x[j] = std::max(row.max_abs_x[j], ax);
                }
            });
            row.ok = n > 0;
        } catch (const IntegrationError& e) {
            row.ok = false;
            row.fail_time = e.last_good_time;
        }
    });
    return rows;
}

/// Instability-onset detector: the first grid point whose steady |x_1|
/// maximum exceeds 10x the median of that metric over the scan (with a
/// majority of the grid sub-threshold, the median is a sub-threshold
/// level). Returns nullopt when no point crosses.
inline std::optional<std::size_t> detect_threshold(const std::vector<AmplitudeScanRow>& rows,
                                                   double factor = 10.0) {
    std::vector<double> vals;
    for (const auto& r : rows)
        if (r.ok) vals.push_back(r.max_abs_x[0]);
    if (vals.size() < 3) return std::nullopt;
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    const double median = vals[vals.size() / 2];
    const double gate = factor * std::max(median, 1e-300);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].ok && rows[i].max_abs_x[0] > gate) return i;
    return std::nullopt;
}

}  // namespace epom
