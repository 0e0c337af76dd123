#pragma once

#include <cmath>
#include <stdexcept>

#include "isac/fft.hpp"
#include "isac/grid.hpp"

namespace isac {

namespace detail {

/// Unitary column transforms: each column through an M-point DFT (sign < 0)
/// or inverse DFT (sign > 0), scaled by 1/sqrt(M).
inline void unitary_cols(Eigen::MatrixXcd& g, int sign) {
    const int m = static_cast<int>(g.rows());
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        if (sign < 0)
            fft_forward(g.col(c).data(), m);
        else
            fft_backward(g.col(c).data(), m);
        g.col(c) *= scale;
    }
}

/// Same along rows (N-point transforms).
inline void unitary_rows(Eigen::MatrixXcd& g, int sign) {
    const int n = static_cast<int>(g.cols());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXcd row(n);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
        row = g.row(r).transpose();
        if (sign < 0)
            fft_forward(row.data(), n);
        else
            fft_backward(row.data(), n);
        g.row(r) = row.transpose() * scale;
    }
}

}  // namespace detail

/**
 * ISFFT: delay-Doppler -> time-frequency, X = F_M * P * F_N^H with unitary
 * DFT matrices. Norm-preserving.
 */
inline Grid isfft(const Grid& dd, const FrameGeometry& geom) {
    require_domain(dd, Domain::DelayDoppler, "isfft");
    require_dims(dd, geom, "isfft");
    Grid out{Domain::TimeFrequency, dd.samples};
    detail::unitary_cols(out.samples, -1);
    detail::unitary_rows(out.samples, +1);
    return out;
}

/// SFFT: time-frequency -> delay-Doppler, exact inverse of isfft.
inline Grid sfft(const Grid& tf, const FrameGeometry& geom) {
    require_domain(tf, Domain::TimeFrequency, "sfft");
    require_dims(tf, geom, "sfft");
    Grid out{Domain::DelayDoppler, tf.samples};
    detail::unitary_cols(out.samples, +1);
    detail::unitary_rows(out.samples, -1);
    return out;
}

/**
 * Pilot/data superposition X = sqrt(rho) * pilot + data. With unit average
 * power per element on both inputs, the pilot contributes rho times the data
 * power.
 */
inline Grid superimpose(const Grid& pilot_tf, const Grid& data_tf, double power_ratio) {
    require_domain(pilot_tf, Domain::TimeFrequency, "superimpose");
    require_domain(data_tf, Domain::TimeFrequency, "superimpose");
    if (pilot_tf.rows() != data_tf.rows() || pilot_tf.cols() != data_tf.cols())
        throw std::invalid_argument("superimpose: grid dimensions differ");
    if (power_ratio < 0.0)
        throw std::invalid_argument("superimpose: power ratio must be >= 0");
    return {Domain::TimeFrequency,
            std::sqrt(power_ratio) * pilot_tf.samples + data_tf.samples};
}

/**
 * OFDM modulation: per symbol (column) an M-point unitary inverse DFT,
 * prepend the last cp_length samples as CP, concatenate the N symbols.
 */
inline TimeSignal ofdm_modulate(const Grid& tf, const FrameGeometry& geom) {
    require_domain(tf, Domain::TimeFrequency, "ofdm_modulate");
    require_dims(tf, geom, "ofdm_modulate");
    const int m = geom.m();
    const int n = geom.n();
    const int cp = geom.cp_length;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    TimeSignal out{Eigen::VectorXcd(geom.frame_samples()), geom};
    Eigen::VectorXcd sym(m);
    for (int c = 0; c < n; ++c) {
        sym = tf.samples.col(c);
        detail::fft_backward(sym.data(), m);
        sym *= scale;
        auto block = out.samples.segment(static_cast<Eigen::Index>(c) * (m + cp), m + cp);
        block.head(cp) = sym.tail(cp);
        block.tail(m) = sym;
    }
    return out;
}

/**
 * OFDM demodulation: per symbol drop the CP and apply the M-point unitary
 * DFT. Exact inverse of ofdm_modulate.
 */
inline Grid ofdm_demodulate(const TimeSignal& sig, const FrameGeometry& geom) {
    if (sig.samples.size() != geom.frame_samples())
        throw std::invalid_argument("ofdm_demodulate: signal length " +
                                    std::to_string(sig.samples.size()) + " != N*(M+Lcp) = " +
                                    std::to_string(geom.frame_samples()));
    const int m = geom.m();
    const int n = geom.n();
    const int cp = geom.cp_length;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    Grid out = Grid::zeros(Domain::TimeFrequency, geom);
    Eigen::VectorXcd sym(m);
    for (int c = 0; c < n; ++c) {
        sym = sig.samples.segment(static_cast<Eigen::Index>(c) * (m + cp) + cp, m);
        detail::fft_forward(sym.data(), m);
        out.samples.col(c) = sym * scale;
    }
    return out;
}

}  // namespace isac
