#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/**
 * Frame geometry of the M x N delay-Doppler / time-frequency grid.
 *
 * M (num_delay_taps) doubles as the number of subcarriers, N
 * (num_doppler_taps) as the number of OFDM symbols per frame. The symbol
 * time T = 1/delta_f excludes the cyclic prefix; with CP one symbol spans
 * M + cp_length samples at sample rate M * delta_f.
 *
 * Doppler bins used by the channel and the detector live on the
 * CP-inclusive frame duration: a path with Doppler f_d sits at tap
 * k = f_d * N * (M + cp_length) / (M * delta_f). This matches the phase
 * accumulation per symbol (each OFDM symbol advances M + cp_length
 * samples), and differs from the nominal CP-free resolution 1/(N*T).
 */
struct FrameGeometry {
    int num_delay_taps = 0;            ///< M: delay bins / subcarriers
    int num_doppler_taps = 0;          ///< N: Doppler bins / OFDM symbols
    double subcarrier_spacing_hz = 0;  ///< delta_f
    int cp_length = 0;                 ///< CP samples per OFDM symbol

    FrameGeometry() = default;
    FrameGeometry(int m, int n, double scs_hz, int cp)
        : num_delay_taps(m), num_doppler_taps(n),
          subcarrier_spacing_hz(scs_hz), cp_length(cp) {
        if (m <= 0 || n <= 0)
            throw std::invalid_argument("FrameGeometry: M and N must be positive");
        if (scs_hz <= 0.0)
            throw std::invalid_argument("FrameGeometry: subcarrier spacing must be positive");
        if (cp < 0 || cp >= m)
            throw std::invalid_argument("FrameGeometry: need 0 <= cp_length < M");
    }

    int m() const { return num_delay_taps; }
    int n() const { return num_doppler_taps; }

    double symbol_time_s() const { return 1.0 / subcarrier_spacing_hz; }
    double sample_rate_hz() const { return num_delay_taps * subcarrier_spacing_hz; }
    int samples_per_symbol() const { return num_delay_taps + cp_length; }
    int frame_samples() const { return num_doppler_taps * samples_per_symbol(); }
    double frame_duration_s() const { return frame_samples() / sample_rate_hz(); }

    /// Delay quantization tau = T/M (one sample).
    double delay_resolution_s() const { return symbol_time_s() / num_delay_taps; }
    /// Nominal CP-free Doppler quantization nu = 1/(N*T).
    double doppler_resolution_hz() const {
        return 1.0 / (num_doppler_taps * symbol_time_s());
    }

    /// Doppler tap <-> Hz on the CP-inclusive frame duration (see above).
    double doppler_tap_from_hz(double f_hz) const { return f_hz * frame_duration_s(); }
    double doppler_hz_from_tap(double tap) const { return tap / frame_duration_s(); }

    bool operator==(const FrameGeometry&) const = default;
};

}  // namespace isac
