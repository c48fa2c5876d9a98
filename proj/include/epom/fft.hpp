#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "epom/common.hpp"

namespace epom {

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_radix2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// One-sided Hann-windowed magnitude spectrum of a real record sampled at
/// `stride` time units. Uses the largest power-of-two suffix of the input;
/// the mean is removed before windowing. Frequencies are angular (rad per
/// time unit), bin width 2*pi / (n * stride).
struct Periodogram {
    std::vector<double> magnitude;  // bins 0 .. n/2-1
    double bin_width = 0.0;         // rad / time unit
    std::size_t n_used = 0;

    double freq(double bin) const { return bin * bin_width; }
};

inline Periodogram hann_periodogram(const std::vector<double>& samples, double stride) {
    std::size_t n = 1;
    while (n * 2 <= samples.size()) n *= 2;
    if (n < 8) throw ConfigError("periodogram: record too short");
    const std::size_t off = samples.size() - n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += samples[off + i];
    mean /= static_cast<double>(n);
    std::vector<cplx> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                               static_cast<double>(n - 1)));
        buf[i] = (samples[off + i] - mean) * w;
    }
    fft_radix2(buf);
    Periodogram pg;
    pg.n_used = n;
    pg.bin_width = 2.0 * M_PI / (static_cast<double>(n) * stride);
    pg.magnitude.resize(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) pg.magnitude[i] = std::abs(buf[i]);
    return pg;
}

struct SpectralPeak {
    std::size_t bin = 0;
    double freq = 0.0;       // parabolically refined, rad / time unit
    double amplitude = 0.0;
};

/// Local maxima of the magnitude spectrum above rel_floor * global max,
/// separated by at least min_distance bins, sorted by amplitude
/// descending. The first dc_guard bins are ignored. Peak positions are
/// refined by parabolic interpolation on log magnitude.
inline std::vector<SpectralPeak> find_peaks(const Periodogram& pg, double rel_floor = 0.05,
                                            std::size_t min_distance = 3,
                                            std::size_t dc_guard = 3) {
    const auto& m = pg.magnitude;
    if (m.size() < dc_guard + 2) return {};
    const double mx = *std::max_element(m.begin() + dc_guard, m.end());
    if (!(mx > 0.0)) return {};
    std::vector<SpectralPeak> peaks;
    for (std::size_t i = std::max<std::size_t>(dc_guard, 1); i + 1 < m.size(); ++i) {
        if (m[i] < rel_floor * mx) continue;
        if (!(m[i] > m[i - 1] && m[i] >= m[i + 1])) continue;
        SpectralPeak pk;
        pk.bin = i;
        pk.amplitude = m[i];
        // parabolic refinement in log magnitude
        const double l0 = std::log(std::max(m[i - 1], 1e-300));
        const double l1 = std::log(std::max(m[i], 1e-300));
        const double l2 = std::log(std::max(m[i + 1], 1e-300));
        const double denom = l0 - 2.0 * l1 + l2;
        const double d = (std::abs(denom) > 1e-300) ? 0.5 * (l0 - l2) / denom : 0.0;
        pk.freq = pg.freq(static_cast<double>(i) + std::clamp(d, -0.5, 0.5));
        peaks.push_back(pk);
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const SpectralPeak& a, const SpectralPeak& b) { return a.amplitude > b.amplitude; });
    // enforce minimum bin separation, keeping the stronger peak
    std::vector<SpectralPeak> kept;
    for (const auto& pk : peaks) {
        bool clash = false;
        for (const auto& k : kept)
            if ((pk.bin > k.bin ? pk.bin - k.bin : k.bin - pk.bin) < min_distance) {
                clash = true;
                break;
            }
        if (!clash) kept.push_back(pk);
    }
    return kept;
}

}  // namespace epom
