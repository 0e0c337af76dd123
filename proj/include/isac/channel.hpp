#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/grid.hpp"
#include "isac/rng.hpp"

namespace isac {

/// One propagation path. Delay and Doppler are in taps; Doppler may be
/// fractional (a pure phase ramp in time), delay must be an integer for the
/// time-domain operator.
struct ChannelPath {
    cd gain;
    double delay_taps = 0.0;
    double doppler_taps = 0.0;
};

struct ChannelRealization {
    std::vector<ChannelPath> paths;
    std::uint64_t seed = 0;

    double total_power() const {
        double p = 0.0;
        for (const auto& pa : paths) p += std::norm(pa.gain);
        return p;
    }
};

/// Speed of light, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

/// Maximum Doppler shift in Hz for a velocity in km/h at carrier f_c.
inline double doppler_hz_from_velocity(double v_kmh, double carrier_hz) {
    return (v_kmh / 3.6) * carrier_hz / kSpeedOfLight;
}

/**
 * Time-domain multipath channel:
 *
 *   y[t] = sum_i h_i * x[t - l_i] * exp(j 2 pi k_i (t - l_i) / (N (M + Lcp)))
 *
 * with t running over the whole frame and x zero before the frame start.
 * Doppler taps k_i may be real-valued; integer delays must stay below the
 * CP length so every OFDM symbol absorbs its own delay spread.
 */
inline TimeSignal apply_channel(const TimeSignal& sig, const ChannelRealization& ch) {
    const FrameGeometry& geom = sig.geometry;
    if (sig.samples.size() != geom.frame_samples())
        throw std::invalid_argument("apply_channel: signal length != frame size");
    const double denom = static_cast<double>(geom.n()) * geom.samples_per_symbol();
    const Eigen::Index len = sig.samples.size();

    TimeSignal out{Eigen::VectorXcd::Zero(len), geom};
    for (const auto& path : ch.paths) {
        if (path.delay_taps != std::floor(path.delay_taps))
            throw std::invalid_argument("apply_channel: fractional delay is not supported");
        const int l = static_cast<int>(path.delay_taps);
        if (l < 0 || l >= geom.cp_length)
            throw std::invalid_argument("apply_channel: path delay " + std::to_string(l) +
                                        " must satisfy 0 <= delay < cp_length (" +
                                        std::to_string(geom.cp_length) + ")");
        const double w = kTwoPi * path.doppler_taps / denom;
        for (Eigen::Index t = l; t < len; ++t)
            out.samples[t] += path.gain * sig.samples[t - l] *
                              std::polar(1.0, w * static_cast<double>(t - l));
    }
    return out;
}

/// 3GPP EVA power delay profile (TS 36.101): excess delays in ns and
/// relative powers in dB. Configuration defaults, overridable.
struct PowerDelayProfile {
    std::vector<double> delays_ns;
    std::vector<double> powers_db;
};

inline PowerDelayProfile eva_pdp() {
    return {{0, 30, 150, 310, 370, 710, 1090, 1730, 2510},
            {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9}};
}

/**
 * Random communication channel from a power delay profile: complex Gaussian
 * gains shaped by the PDP and renormalized to unit total power, delays
 * rounded to the nearest tap at sample rate M * delta_f, per-path Doppler
 * uniform in [-max_doppler_hz, +max_doppler_hz]. Gains are block-constant
 * over the frame; Doppler enters as the phase ramp in apply_channel.
 */
inline ChannelRealization sample_pdp_channel(std::uint64_t seed, const FrameGeometry& geom,
                                             double max_doppler_hz,
                                             const PowerDelayProfile& pdp) {
    if (pdp.delays_ns.size() != pdp.powers_db.size() || pdp.delays_ns.empty())
        throw std::invalid_argument("sample_pdp_channel: bad power delay profile");
    Rng rng(seed);
    ChannelRealization ch;
    ch.seed = seed;
    ch.paths.resize(pdp.delays_ns.size());
    for (size_t i = 0; i < pdp.delays_ns.size(); ++i) {
        const double lin = std::pow(10.0, pdp.powers_db[i] / 10.0);
        ch.paths[i].gain = std::sqrt(lin) * rng.cn01();
        ch.paths[i].delay_taps =
            std::round(pdp.delays_ns[i] * 1e-9 * geom.sample_rate_hz());
        ch.paths[i].doppler_taps =
            geom.doppler_tap_from_hz(rng.uniform(-max_doppler_hz, max_doppler_hz));
    }
    const double norm = std::sqrt(ch.total_power());
    for (auto& p : ch.paths) p.gain /= norm;
    return ch;
}

inline ChannelRealization sample_eva_channel(std::uint64_t seed, const FrameGeometry& geom,
                                             double max_doppler_hz) {
    return sample_pdp_channel(seed, geom, max_doppler_hz, eva_pdp());
}

/**
 * Random sensing scene: `count` equal-power reflectors with distinct integer
 * delays in [0, cp_length) and Doppler drawn U(0, nu_i) where the per-target
 * maximum nu_i = max_doppler_hz * (i+1) / count. Doppler is real-valued
 * (fractional taps).
 */
inline ChannelRealization sample_sensing_targets(std::uint64_t seed, const FrameGeometry& geom,
                                                 int count, double max_doppler_hz) {
    if (count < 1)
        throw std::invalid_argument("sample_sensing_targets: count must be >= 1");
    if (count > geom.cp_length)
        throw std::invalid_argument("sample_sensing_targets: more targets than distinct delays");
    Rng rng(seed);
    ChannelRealization ch;
    ch.seed = seed;

    std::vector<int> delays(geom.cp_length);
    for (int i = 0; i < geom.cp_length; ++i) delays[i] = i;
    for (int i = geom.cp_length - 1; i > 0; --i)
        std::swap(delays[i], delays[rng.uniform_int(i + 1)]);

    const double amp = 1.0 / std::sqrt(static_cast<double>(count));
    for (int i = 0; i < count; ++i) {
        const double nu_max = max_doppler_hz * (i + 1) / count;
        ChannelPath p;
        p.gain = std::polar(amp, rng.uniform(0.0, kTwoPi));
        p.delay_taps = delays[i];
        p.doppler_taps = geom.doppler_tap_from_hz(rng.uniform(0.0, nu_max));
        ch.paths.push_back(p);
    }
    return ch;
}

/// Noise variance per complex sample for an SNR in dB against a reference
/// signal power. +infinity SNR maps to zero variance.
inline double noise_variance(double snr_db, double signal_power_ref) {
    if (signal_power_ref <= 0.0)
        throw std::invalid_argument("noise_variance: reference power must be positive");
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    return signal_power_ref / std::pow(10.0, snr_db / 10.0);
}

/// Adds circular complex Gaussian noise of the given per-sample variance.
inline TimeSignal add_awgn(const TimeSignal& sig, double sigma2, Rng& rng) {
    if (sigma2 < 0.0)
        throw std::invalid_argument("add_awgn: variance must be >= 0");
    TimeSignal out = sig;
    if (sigma2 == 0.0) return out;
    const double s = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < out.samples.size(); ++i)
        out.samples[i] += s * rng.cn01();
    return out;
}

/**
 * Exact one-tap TF channel: the diagonal of the per-symbol TF channel
 * matrix realized by apply_channel,
 *
 *   H[m, n] = sum_i h_i e^{-j2pi m l_i / M}
 *                    e^{j2pi k_i (n(M+Lcp) + Lcp - l_i) / (N(M+Lcp))} chi(k_i),
 *   chi(k)  = (1/M) sum_{u=0}^{M-1} e^{j2pi k u / (N(M+Lcp))}.
 *
 * Off-diagonal (ICI) terms are not represented; they vanish for integer
 * Doppler and stay negligible at vehicular speeds.
 */
inline Grid one_tap_tf_channel(const ChannelRealization& ch, const FrameGeometry& geom) {
    const int m = geom.m();
    const int n = geom.n();
    const double denom = static_cast<double>(n) * geom.samples_per_symbol();
    Grid h = Grid::zeros(Domain::TimeFrequency, geom);
    for (const auto& path : ch.paths) {
        const int l = static_cast<int>(path.delay_taps);
        const double k = path.doppler_taps;
        cd chi(0.0, 0.0);
        for (int u = 0; u < m; ++u) chi += std::polar(1.0, kTwoPi * k * u / denom);
        chi /= static_cast<double>(m);
        for (int col = 0; col < n; ++col) {
            const cd sym_phase =
                path.gain * chi *
                std::polar(1.0, kTwoPi * k *
                                    (static_cast<double>(col) * geom.samples_per_symbol() +
                                     geom.cp_length - l) /
                                    denom);
            for (int row = 0; row < m; ++row)
                h.samples(row, col) +=
                    sym_phase * std::polar(1.0, -kTwoPi * static_cast<double>(row) * l / m);
        }
    }
    return h;
}

}  // namespace isac
