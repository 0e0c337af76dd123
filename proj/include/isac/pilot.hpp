#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>

#include "isac/geometry.hpp"
#include "isac/grid.hpp"
#include "isac/rng.hpp"
#include "isac/sequences.hpp"

namespace isac {

/**
 * 2D delay-Doppler pilot P = b * a^T: outer product of a delay-axis
 * sequence b (length M) and a Doppler-axis sequence a (length N).
 * With +/-1 components every element has unit power, so the pilot spreads
 * its energy uniformly over the DD plane.
 */
struct Pilot2D {
    Grid matrix;              ///< DD-domain M x N samples
    ComponentSequence doppler_seq;  ///< a, length N
    ComponentSequence delay_seq;    ///< b, length M
};

inline Pilot2D build_pilot(const ComponentSequence& a, const ComponentSequence& b,
                           const FrameGeometry& geom) {
    if (a.length() != geom.n())
        throw std::invalid_argument("build_pilot: Doppler sequence length != N");
    if (b.length() != geom.m())
        throw std::invalid_argument("build_pilot: delay sequence length != M");
    Pilot2D p{Grid::zeros(Domain::DelayDoppler, geom), a, b};
    p.matrix.samples = (b.values * a.values.transpose()).cast<cd>();
    return p;
}

/// Pilot fitted to the geometry from the two default m-sequence generators.
inline Pilot2D default_pilot(const FrameGeometry& geom) {
    return build_pilot(sequence_for_dimension(geom.n(), 1),
                       sequence_for_dimension(geom.m(), 0), geom);
}

/**
 * 2D cyclic shift: out[l, k] = in[(l - delay_shift) mod M, (k - doppler_shift) mod N].
 * For an outer-product pilot this equals the outer product of the
 * individually shifted component sequences.
 */
inline Grid cyclic_shift_2d(const Grid& in, int doppler_shift, int delay_shift) {
    const int m = static_cast<int>(in.rows());
    const int n = static_cast<int>(in.cols());
    const int p = ((delay_shift % m) + m) % m;
    const int q = ((doppler_shift % n) + n) % n;
    Grid out{in.domain, Eigen::MatrixXcd(m, n)};
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < m; ++l)
            out.samples(l, k) = in.samples((l - p + m) % m, (k - q + n) % n);
    return out;
}

inline Grid cyclic_shift_2d(const Pilot2D& pilot, int doppler_shift, int delay_shift) {
    return cyclic_shift_2d(pilot.matrix, doppler_shift, delay_shift);
}

/**
 * Normalized matrix inner product (1/(MN)) * tr(A^H B), conjugate-linear in
 * A. For m-sequence pilots at natural lengths the values follow the
 * two-level correlation algebra: 1 at matched shifts, and magnitudes
 * 1/L_a, 1/L_b or 1/(L_a*L_b) otherwise.
 */
inline cd inner_product_2d(const Grid& a, const Grid& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("inner_product_2d: dimension mismatch");
    const cd raw = (a.samples.conjugate().cwiseProduct(b.samples)).sum();
    return raw / static_cast<double>(a.rows() * a.cols());
}

/**
 * DD-domain phase offset matrix Xi_<k_d, l_d> for a path (or detector
 * hypothesis) at integer Doppler k_d and delay l_d:
 *
 *   entries[l, k] = alpha(l, k) * exp(j 2 pi (Lcp + l - l_d) k_d / (N (M + Lcp)))
 *
 * When the CP covers the delay (l_d <= Lcp) the relation between the
 * transmitted and received DD pilot is exact with alpha = 1 everywhere;
 * this is validated against the end-to-end time-domain chain to 1e-9.
 * Only the rows the CP cannot protect (l < l_d - Lcp) take the rectangular-
 * pulse branch alpha = ((N-1)/N) * exp(-j 2 pi ((k - k_d) mod N) / N),
 * which is the standard approximation for delays beyond the CP.
 */
struct PhaseMatrix {
    Eigen::MatrixXcd entries;
    int doppler_tap = 0;
    int delay_tap = 0;
};

inline PhaseMatrix phase_matrix(int doppler_tap, int delay_tap, const FrameGeometry& geom) {
    const int m = geom.m();
    const int n = geom.n();
    if (doppler_tap < 0 || doppler_tap >= n || delay_tap < 0 || delay_tap >= m)
        throw std::invalid_argument("phase_matrix: hypothesis out of range");

    PhaseMatrix out{Eigen::MatrixXcd(m, n), doppler_tap, delay_tap};
    const double denom = static_cast<double>(n) * geom.samples_per_symbol();
    const int spill = std::max(0, delay_tap - geom.cp_length);
    const double alpha_mag = (n - 1.0) / n;
    for (int l = 0; l < m; ++l) {
        const cd ramp = std::polar(1.0, kTwoPi * (geom.cp_length + l - delay_tap) *
                                            doppler_tap / denom);
        for (int k = 0; k < n; ++k) {
            if (l < spill) {
                const int dk = ((k - doppler_tap) % n + n) % n;
                out.entries(l, k) = alpha_mag * std::polar(1.0, -kTwoPi * dk / n) * ramp;
            } else {
                out.entries(l, k) = ramp;
            }
        }
    }
    return out;
}

}  // namespace isac
