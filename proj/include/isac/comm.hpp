#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/grid.hpp"
#include "isac/rng.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// 16QAM, Gray-mapped, unit average symbol energy (levels {-3,-1,1,3}/sqrt(10)).
// Bits per symbol: [i1 i0 q1 q0], Gray on each rail: 00 -> -3, 01 -> -1,
// 11 -> +1, 10 -> +3.
// ---------------------------------------------------------------------------

namespace qam16 {

inline double gray_level(int b1, int b0) {
    static constexpr double lvl[4] = {-3.0, -1.0, 3.0, 1.0};  // index b1*2+b0
    return lvl[b1 * 2 + b0];
}

inline cd map_nibble(int i1, int i0, int q1, int q0) {
    return cd(gray_level(i1, i0), gray_level(q1, q0)) / std::sqrt(10.0);
}

inline Eigen::VectorXcd modulate(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 4 != 0)
        throw std::invalid_argument("qam16: bit count must be a multiple of 4");
    Eigen::VectorXcd out(bits.size() / 4);
    for (size_t i = 0; i < bits.size(); i += 4)
        out[static_cast<Eigen::Index>(i / 4)] =
            map_nibble(bits[i], bits[i + 1], bits[i + 2], bits[i + 3]);
    return out;
}

/// Hard-decision (nearest level per rail) demodulation.
inline void demodulate_symbol(cd s, std::uint8_t* bits) {
    const auto rail = [](double x, std::uint8_t* b1, std::uint8_t* b0) {
        const double v = x * std::sqrt(10.0);
        if (v < -2.0)      { *b1 = 0; *b0 = 0; }
        else if (v < 0.0)  { *b1 = 0; *b0 = 1; }
        else if (v < 2.0)  { *b1 = 1; *b0 = 1; }
        else               { *b1 = 1; *b0 = 0; }
    };
    rail(s.real(), &bits[0], &bits[1]);
    rail(s.imag(), &bits[2], &bits[3]);
}

inline std::vector<std::uint8_t> demodulate(const Eigen::VectorXcd& symbols) {
    std::vector<std::uint8_t> bits(static_cast<size_t>(symbols.size()) * 4);
    for (Eigen::Index i = 0; i < symbols.size(); ++i)
        demodulate_symbol(symbols[i], &bits[static_cast<size_t>(i) * 4]);
    return bits;
}

}  // namespace qam16

// ---------------------------------------------------------------------------
// Reference signals and channel estimation
// ---------------------------------------------------------------------------

/**
 * OFDM reference-signal pattern: a comb in frequency (every freq_stride-th
 * subcarrier) on OFDM symbols {0, N/2}, carrying unit-modulus pseudo-random
 * values. The RS cells are part of the data grid D.
 */
struct RsMask {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  ///< M x N, true = RS cell
    Eigen::MatrixXcd values;  ///< RS values at mask cells, zero elsewhere
    std::vector<int> rs_symbols;
    int freq_stride = 4;
};

inline RsMask build_rs_mask(const FrameGeometry& geom, int freq_stride, std::uint64_t seed) {
    if (freq_stride < 1 || freq_stride > geom.m())
        throw std::invalid_argument("build_rs_mask: bad frequency stride");
    RsMask rs;
    rs.freq_stride = freq_stride;
    rs.mask.setConstant(geom.m(), geom.n(), false);
    rs.values.setZero(geom.m(), geom.n());
    rs.rs_symbols = {0, geom.n() / 2};
    if (rs.rs_symbols[1] == rs.rs_symbols[0]) rs.rs_symbols.pop_back();
    Rng rng(seed);
    for (int s : rs.rs_symbols)
        for (int m = 0; m < geom.m(); m += freq_stride) {
            rs.mask(m, s) = true;
            rs.values(m, s) = std::polar(1.0, kPi / 4.0 + kPi / 2.0 * rng.uniform_int(4));
        }
    return rs;
}

/// Cells whose equivalent RS magnitude falls below this are excluded from
/// the LS estimate and filled by interpolation instead.
inline constexpr double kEffRsMinMagnitude = 0.1;

enum class CsiMode { Perfect, EquivalentRs, PilotIgnorantRs };

struct ChannelEstimate {
    Grid h_tf;
    CsiMode source = CsiMode::Perfect;
};

/**
 * Equivalent reference signal S_eff = (D + sqrt(rho) * pilot_tf) at the RS
 * positions: the receiver treats the known data-RS plus the co-located
 * sensing pilot as one composite reference. Near-zero cells (destructive
 * sums) are flagged invalid.
 */
struct EquivalentRs {
    Eigen::MatrixXcd values;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

inline EquivalentRs build_equivalent_rs(const RsMask& rs, const Grid& data_tf,
                                        const Grid& scaled_pilot_tf) {
    require_domain(data_tf, Domain::TimeFrequency, "build_equivalent_rs");
    EquivalentRs eff;
    eff.values.setZero(data_tf.rows(), data_tf.cols());
    eff.valid.setConstant(data_tf.rows(), data_tf.cols(), false);
    for (Eigen::Index n = 0; n < data_tf.cols(); ++n)
        for (Eigen::Index m = 0; m < data_tf.rows(); ++m) {
            if (!rs.mask(m, n)) continue;
            const cd s = data_tf.samples(m, n) + scaled_pilot_tf.samples(m, n);
            eff.values(m, n) = s;
            eff.valid(m, n) = std::abs(s) >= kEffRsMinMagnitude;
        }
    return eff;
}

namespace detail {

/// Linear interpolation of scattered (index, value) points onto 0..size-1
/// with edge replication. Points must be sorted by index.
inline void interp_line(const std::vector<std::pair<int, cd>>& pts, Eigen::Index size,
                        std::vector<cd>& out) {
    out.assign(static_cast<size_t>(size), cd(0.0, 0.0));
    if (pts.empty()) return;
    size_t j = 0;
    for (Eigen::Index i = 0; i < size; ++i) {
        if (i <= pts.front().first) { out[i] = pts.front().second; continue; }
        if (i >= pts.back().first) { out[i] = pts.back().second; continue; }
        while (pts[j + 1].first < i) ++j;
        const auto& [x0, y0] = pts[j];
        const auto& [x1, y1] = pts[j + 1];
        const double t = static_cast<double>(i - x0) / (x1 - x0);
        out[i] = y0 + t * (y1 - y0);
    }
}

}  // namespace detail

/**
 * LS channel estimation on the RS lattice followed by bilinear
 * interpolation (linear across the frequency comb within each RS symbol,
 * then linear in time between RS symbols, edges replicated).
 *
 * EquivalentRs divides by the composite reference (unbiased under the
 * sensing pilot); PilotIgnorantRs divides by the data RS alone, which
 * leaves the pilot contribution as estimation bias.
 */
inline ChannelEstimate estimate_channel(const Grid& y_tf, const RsMask& rs,
                                        const Grid& data_tf, const Grid& scaled_pilot_tf,
                                        CsiMode mode) {
    require_domain(y_tf, Domain::TimeFrequency, "estimate_channel");
    if (mode == CsiMode::Perfect)
        throw std::invalid_argument("estimate_channel: Perfect CSI is not estimated; "
                                    "use one_tap_tf_channel");
    const Eigen::Index m = y_tf.rows();
    const Eigen::Index n = y_tf.cols();

    EquivalentRs eff = build_equivalent_rs(rs, data_tf, scaled_pilot_tf);
    if (mode == CsiMode::PilotIgnorantRs) {
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < m; ++r)
                if (rs.mask(r, c)) {
                    eff.values(r, c) = data_tf.samples(r, c);
                    eff.valid(r, c) = std::abs(eff.values(r, c)) >= kEffRsMinMagnitude;
                }
    }

    // Per RS symbol: LS at valid teeth, then interpolate across frequency.
    std::vector<std::pair<int, std::vector<cd>>> columns;
    for (int s : rs.rs_symbols) {
        std::vector<std::pair<int, cd>> teeth;
        for (Eigen::Index r = 0; r < m; ++r)
            if (rs.mask(r, s) && eff.valid(r, s))
                teeth.emplace_back(static_cast<int>(r),
                                   y_tf.samples(r, s) / eff.values(r, s));
        std::vector<cd> col;
        detail::interp_line(teeth, m, col);
        columns.emplace_back(s, std::move(col));
    }

    ChannelEstimate est{Grid::zeros(Domain::TimeFrequency, static_cast<int>(m),
                                    static_cast<int>(n)),
                        mode};
    // Interpolate across time between RS symbols, replicate at the edges.
    for (Eigen::Index c = 0; c < n; ++c) {
        size_t hi = 0;
        while (hi + 1 < columns.size() && columns[hi + 1].first < c) ++hi;
        for (Eigen::Index r = 0; r < m; ++r) {
            cd v;
            if (columns.size() == 1 || c <= columns.front().first) {
                v = columns.front().second[static_cast<size_t>(r)];
            } else if (c >= columns.back().first) {
                v = columns.back().second[static_cast<size_t>(r)];
            } else {
                const auto& [x0, col0] = columns[hi];
                const auto& [x1, col1] = columns[hi + 1];
                const double t = static_cast<double>(c - x0) / (x1 - x0);
                v = col0[static_cast<size_t>(r)] +
                    t * (col1[static_cast<size_t>(r)] - col0[static_cast<size_t>(r)]);
            }
            est.h_tf.samples(r, c) = v;
        }
    }
    return est;
}

/**
 * Sensing-pilot cancellation followed by MMSE one-tap equalization:
 *
 *   D_hat = conj(H) .* (Y - pilot .* H) ./ (|H|^2 + sigma2)
 *
 * With sigma2 = 0 this degenerates to zero-forcing; a zero-channel cell at
 * sigma2 = 0 is erased to 0.
 */
inline Grid cancel_and_equalize(const Grid& y_tf, const ChannelEstimate& est,
                                const Grid& scaled_pilot_tf, double sigma2) {
    require_domain(y_tf, Domain::TimeFrequency, "cancel_and_equalize");
    if (sigma2 < 0.0)
        throw std::invalid_argument("cancel_and_equalize: sigma2 must be >= 0");
    Grid out = Grid::zeros(Domain::TimeFrequency, static_cast<int>(y_tf.rows()),
                           static_cast<int>(y_tf.cols()));
    for (Eigen::Index n = 0; n < y_tf.cols(); ++n)
        for (Eigen::Index m = 0; m < y_tf.rows(); ++m) {
            const cd h = est.h_tf.samples(m, n);
            const double den = std::norm(h) + sigma2;
            if (den == 0.0) continue;  // erased cell
            const cd resid = y_tf.samples(m, n) - scaled_pilot_tf.samples(m, n) * h;
            out.samples(m, n) = std::conj(h) * resid / den;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline double ber(const std::vector<std::uint8_t>& tx, const std::vector<std::uint8_t>& rx) {
    if (tx.size() != rx.size())
        throw std::invalid_argument("ber: bit vector length mismatch");
    if (tx.empty()) throw std::invalid_argument("ber: empty input");
    size_t errors = 0;
    for (size_t i = 0; i < tx.size(); ++i) errors += tx[i] != rx[i];
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

/// NMSE in dB, 10*log10(||est - truth||_F^2 / ||truth||_F^2); -inf when exact.
inline double nmse_db(const Grid& est, const Grid& truth) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols())
        throw std::invalid_argument("nmse_db: dimension mismatch");
    const double num = (est.samples - truth.samples).squaredNorm();
    const double den = truth.samples.squaredNorm();
    if (den == 0.0) throw std::invalid_argument("nmse_db: zero reference");
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
}

inline double nmse_linear(const Grid& est, const Grid& truth) {
    const double den = truth.samples.squaredNorm();
    return (est.samples - truth.samples).squaredNorm() / den;
}

}  // namespace isac
