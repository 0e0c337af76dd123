#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "isac/channel.hpp"
#include "isac/geometry.hpp"
#include "isac/grid.hpp"
#include "isac/pilot.hpp"
#include "isac/rng.hpp"

namespace isac {

/**
 * Hypothesis-scan detector configuration.
 *
 * The decision threshold is CFAR-like: a hypothesis cell is reported only
 * if it is a 2D local maximum of the correlation map and its metric exceeds
 * threshold_scale times the map median, which makes detection invariant to
 * overall received power scaling.
 */
struct DetectionConfig {
    int max_doppler_tap = 0;       ///< k_max, detections reported for k <= k_max
    int max_delay_tap = 0;         ///< l_max, must stay below min(M, Lcp)
    double threshold_scale = 8.0;  ///< gamma as a multiple of the map median
    bool refine = true;            ///< fractional-Doppler refinement on detections
    int refine_width = 3;          ///< J, odd window width for refinement
    bool compensate_phase = true;  ///< apply Xi phase compensation per hypothesis
};

struct Detection {
    int doppler_tap = 0;
    int delay_tap = 0;
    double metric = 0.0;
    double doppler_hz = 0.0;  ///< doppler_tap on the CP-inclusive frame duration
    double delay_s = 0.0;     ///< delay_tap / (M * delta_f)
};

struct RefinedDetection {
    double doppler_taps = 0.0;
    int delay_tap = 0;
    double doppler_hz = 0.0;
};

/// Ground-truth decomposition of the matched correlator output.
struct SinrBreakdown {
    cd signal;                              ///< h_0 (matched pilot term, unit-normalized)
    std::vector<cd> pilot_interference;     ///< h_i * <P_[k0,l0], P_[ki,li]>, i >= 1
    std::vector<cd> data_interference;      ///< h_i * <P_[k0,l0], shifted DD data>, i >= 0
    cd noise_term;                          ///< <P_[k0,l0], noise>
    double sinr = 0.0;                      ///< |signal| / |sum of distortions|, inf flag below
    bool infinite = false;
};

struct SensingReport {
    std::vector<Detection> detections;
    std::vector<RefinedDetection> refined;  ///< 1:1 with detections when refine is on
    /// Correlation map vd: rows = delay hypothesis 0..l_max, cols = Doppler
    /// hypothesis over the full cyclic axis 0..N-1 (so refinement windows can
    /// wrap); detections are limited to k <= k_max.
    Eigen::MatrixXd correlation_map;
    double threshold = 0.0;  ///< absolute gamma applied (scale * median)
};

namespace detail {

/// Median of all map entries.
inline double map_median(const Eigen::MatrixXd& map) {
    std::vector<double> v(map.data(), map.data() + map.size());
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (v.size() % 2 == 0) {
        auto lo = std::max_element(v.begin(), mid);
        return 0.5 * (*lo + hi);
    }
    return hi;
}

}  // namespace detail

/**
 * Correlation map of Algorithm-1 hypotheses: for each Doppler tap k and
 * delay tap l,
 *
 *   vd(k, l) = | <P_[k,l] (*) Xi_<k,l>, R> | / <P_det, P_det>
 *
 * normalized by the detection-matrix energy so a matched unit-gain path
 * scores exactly |h|. Uses the outer-product structure of the pilot: per
 * Doppler hypothesis the row correlations against the Doppler sequence are
 * shared by all delay hypotheses.
 */
inline Eigen::MatrixXd correlation_map(const Grid& r_dd, const Pilot2D& pilot,
                                       const FrameGeometry& geom, int max_delay_tap,
                                       bool compensate_phase) {
    require_domain(r_dd, Domain::DelayDoppler, "correlation_map");
    require_dims(r_dd, geom, "correlation_map");
    const int m = geom.m();
    const int n = geom.n();
    if (max_delay_tap < 0 || max_delay_tap >= std::min(m, geom.cp_length))
        throw std::invalid_argument("correlation_map: need 0 <= l_max < min(M, cp_length)");
    const Eigen::VectorXd& a = pilot.doppler_seq.values;
    const Eigen::VectorXd& b = pilot.delay_seq.values;
    const double energy = a.squaredNorm() * b.squaredNorm();  // <P_det, P_det> * MN, |Xi|=1
    const double denom_phase = static_cast<double>(n) * geom.samples_per_symbol();

    Eigen::MatrixXd map(max_delay_tap + 1, n);
    Eigen::VectorXcd row_corr(m);
    Eigen::VectorXcd phased(m);
    for (int k = 0; k < n; ++k) {
        // row_corr[l'] = sum_k' a[(k'-k) mod N] * R[l', k']
        for (int l2 = 0; l2 < m; ++l2) {
            cd acc(0.0, 0.0);
            const auto& row = r_dd.samples;
            for (int k2 = 0; k2 < n; ++k2)
                acc += a[(k2 - k + n) % n] * row(l2, k2);
            row_corr[l2] = acc;
        }
        if (compensate_phase) {
            for (int l2 = 0; l2 < m; ++l2)
                phased[l2] = row_corr[l2] *
                             std::polar(1.0, -kTwoPi * k * static_cast<double>(l2) / denom_phase);
        } else {
            phased = row_corr;
        }
        for (int l = 0; l <= max_delay_tap; ++l) {
            cd acc(0.0, 0.0);
            for (int l2 = 0; l2 < m; ++l2)
                acc += b[(l2 - l + m) % m] * phased[l2];
            // constant hypothesis phase e^{-j2pi(Lcp - l)k/D} drops under |.|
            map(l, k) = std::abs(acc) / energy;
        }
    }
    return map;
}

/**
 * Weighted-centroid fractional-Doppler refinement around a map peak:
 * window of `width` (odd) Doppler cells taken cyclically, weights
 * w_j = exp(p_j) with peak magnitudes p_j normalized to max 1 in the
 * window, weights normalized to sum 1.
 */
inline double refine_doppler(const Eigen::MatrixXd& map, int peak_doppler_tap,
                             int peak_delay_tap, int width) {
    if (width < 1 || width % 2 == 0)
        throw std::invalid_argument("refine_doppler: window width must be odd and >= 1");
    const int n = static_cast<int>(map.cols());
    const int half = (width - 1) / 2;

    double peak = 0.0;
    for (int j = -half; j <= half; ++j)
        peak = std::max(peak, map(peak_delay_tap, ((peak_doppler_tap + j) % n + n) % n));
    if (peak <= 0.0) return peak_doppler_tap;

    double wsum = 0.0, centroid = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double v = map(peak_delay_tap, ((peak_doppler_tap + j) % n + n) % n);
        const double w = std::exp(v / peak);
        wsum += w;
        centroid += w * (peak_doppler_tap + j);
    }
    return centroid / wsum;
}

/**
 * Algorithm-1 sensing detection: scan all (Doppler, delay) hypotheses,
 * build the phase-compensated shifted pilot, correlate against the received
 * DD grid, and report local maxima above the CFAR threshold, each mapped to
 * a Doppler shift and a delay. Optionally refines each detection's Doppler
 * to fractional taps.
 */
inline SensingReport detect(const Grid& r_dd, const Pilot2D& pilot, const DetectionConfig& cfg,
                            const FrameGeometry& geom) {
    const int m = geom.m();
    const int n = geom.n();
    if (cfg.max_doppler_tap < 0 || cfg.max_doppler_tap >= n)
        throw std::invalid_argument("detect: need 0 <= k_max < N");
    if (cfg.max_delay_tap < 0 || cfg.max_delay_tap >= std::min(m, geom.cp_length))
        throw std::invalid_argument("detect: need 0 <= l_max < min(M, cp_length)");
    if (cfg.threshold_scale < 0.0)
        throw std::invalid_argument("detect: threshold scale must be >= 0");
    if (cfg.refine_width < 1 || cfg.refine_width % 2 == 0)
        throw std::invalid_argument("detect: refine width must be odd and >= 1");

    SensingReport report;
    report.correlation_map =
        correlation_map(r_dd, pilot, geom, cfg.max_delay_tap, cfg.compensate_phase);
    const Eigen::MatrixXd& map = report.correlation_map;
    report.threshold = cfg.threshold_scale * detail::map_median(map);

    const int rows = static_cast<int>(map.rows());
    for (int k = 0; k <= cfg.max_doppler_tap; ++k) {
        for (int l = 0; l < rows; ++l) {
            const double v = map(l, k);
            if (v <= report.threshold) continue;
            bool is_peak = true;
            for (int dl = -1; dl <= 1 && is_peak; ++dl) {
                const int l2 = l + dl;
                if (l2 < 0 || l2 >= rows) continue;
                for (int dk = -1; dk <= 1; ++dk) {
                    if (dl == 0 && dk == 0) continue;
                    if (map(l2, (k + dk + n) % n) > v) { is_peak = false; break; }
                }
            }
            if (!is_peak) continue;
            Detection det;
            det.doppler_tap = k;
            det.delay_tap = l;
            det.metric = v;
            det.doppler_hz = geom.doppler_hz_from_tap(k);
            det.delay_s = l / geom.sample_rate_hz();
            report.detections.push_back(det);
        }
    }

    if (cfg.refine) {
        for (const auto& det : report.detections) {
            RefinedDetection r;
            r.doppler_taps = refine_doppler(map, det.doppler_tap, det.delay_tap,
                                            cfg.refine_width);
            r.delay_tap = det.delay_tap;
            r.doppler_hz = geom.doppler_hz_from_tap(r.doppler_taps);
            report.refined.push_back(r);
        }
    }
    return report;
}

/**
 * Sensing-SINR decomposition of the matched correlator output for one
 * simulated frame with known ground truth. paths[0] is the matched target;
 * all path taps must be integers. data_dd and noise_dd are the DD-domain
 * images of the interfering data and noise (either may be empty).
 */
inline SinrBreakdown sinr_breakdown(const Pilot2D& pilot, int matched_doppler_tap,
                                    int matched_delay_tap,
                                    const std::vector<ChannelPath>& paths,
                                    const Grid* data_dd, const Grid* noise_dd) {
    if (paths.empty())
        throw std::invalid_argument("sinr_breakdown: need at least the matched path");
    for (const auto& p : paths)
        if (p.delay_taps != std::floor(p.delay_taps) ||
            p.doppler_taps != std::floor(p.doppler_taps))
            throw std::invalid_argument("sinr_breakdown: path taps must be integers");

    const Grid matched = cyclic_shift_2d(pilot, matched_doppler_tap, matched_delay_tap);
    SinrBreakdown out;
    out.signal = paths[0].gain;

    cd distortion(0.0, 0.0);
    for (size_t i = 1; i < paths.size(); ++i) {
        const Grid shifted = cyclic_shift_2d(pilot, static_cast<int>(paths[i].doppler_taps),
                                             static_cast<int>(paths[i].delay_taps));
        const cd v = paths[i].gain * inner_product_2d(matched, shifted);
        out.pilot_interference.push_back(v);
        distortion += v;
    }
    if (data_dd) {
        for (const auto& p : paths) {
            const Grid shifted = cyclic_shift_2d(*data_dd, static_cast<int>(p.doppler_taps),
                                                 static_cast<int>(p.delay_taps));
            const cd v = p.gain * inner_product_2d(matched, shifted);
            out.data_interference.push_back(v);
            distortion += v;
        }
    }
    if (noise_dd) {
        out.noise_term = inner_product_2d(matched, *noise_dd);
        distortion += out.noise_term;
    }

    const double d = std::abs(distortion);
    if (d == 0.0) {
        out.infinite = true;
        out.sinr = std::numeric_limits<double>::infinity();
    } else {
        out.sinr = std::abs(out.signal) / d;
    }
    return out;
}

enum class CcdfSource { QamData, Noise };

struct CcdfPoint {
    double value = 0.0;
    double ccdf = 0.0;
};

/**
 * Monte Carlo CCDF of |<P, S>| for a square pilot of natural m-sequence
 * size (15/63/255) against random 16QAM grids or complex Gaussian noise
 * grids. The matched autocorrelation reference is 1.
 */
inline std::vector<CcdfPoint> correlation_ccdf(int pilot_size, CcdfSource source, int trials,
                                               std::uint64_t seed) {
    if (trials <= 0)
        throw std::invalid_argument("correlation_ccdf: trials must be positive");
    int degree = 0;
    for (int d = 2; d <= 10; ++d)
        if ((1 << d) - 1 == pilot_size) degree = d;
    if (degree == 0)
        throw std::invalid_argument("correlation_ccdf: pilot size must be 2^m - 1");

    const FrameGeometry geom(pilot_size, pilot_size, 1.0, 0);
    const Pilot2D pilot = build_pilot(
        generate_m_sequence(default_primitive_poly(degree, 1), degree, (1u << degree) - 1),
        generate_m_sequence(default_primitive_poly(degree, 0), degree, (1u << degree) - 1),
        geom);

    static const double kQamLevels[4] = {-3.0, -1.0, 1.0, 3.0};
    Rng rng(seed);
    std::vector<double> vals(static_cast<size_t>(trials));
    Grid s = Grid::zeros(Domain::DelayDoppler, geom);
    for (int t = 0; t < trials; ++t) {
        for (int k = 0; k < pilot_size; ++k)
            for (int l = 0; l < pilot_size; ++l) {
                if (source == CcdfSource::QamData)
                    s.samples(l, k) = cd(kQamLevels[rng.uniform_int(4)],
                                         kQamLevels[rng.uniform_int(4)]) / std::sqrt(10.0);
                else
                    s.samples(l, k) = rng.cn01();
            }
        vals[static_cast<size_t>(t)] = std::abs(inner_product_2d(pilot.matrix, s));
    }
    std::sort(vals.begin(), vals.end());
    std::vector<CcdfPoint> table(vals.size());
    for (size_t i = 0; i < vals.size(); ++i)
        table[i] = {vals[i], static_cast<double>(vals.size() - 1 - i) / vals.size()};
    return table;
}

/// Empirical quantile of the CCDF sample values (table sorted ascending).
inline double ccdf_quantile(const std::vector<CcdfPoint>& table, double q) {
    if (table.empty()) throw std::invalid_argument("ccdf_quantile: empty table");
    const size_t idx = std::min(table.size() - 1,
                                static_cast<size_t>(q * static_cast<double>(table.size())));
    return table[idx].value;
}

/// Writes a correlation map as CSV with header k,l,vd.
inline void write_correlation_map_csv(std::ostream& os, const Eigen::MatrixXd& map) {
    os << "k,l,vd\n";
    char buf[64];
    for (Eigen::Index k = 0; k < map.cols(); ++k)
        for (Eigen::Index l = 0; l < map.rows(); ++l) {
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.10g\n", static_cast<long>(k),
                          static_cast<long>(l), map(l, k));
            os << buf;
        }
}

}  // namespace isac
