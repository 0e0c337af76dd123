#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace isac {

/**
 * Real +/-1 component sequence for one axis of the 2D pilot.
 * m-sequences carry their LFSR feedback polynomial for reproducibility.
 */
struct ComponentSequence {
    Eigen::VectorXd values;  ///< entries in {+1, -1}
    std::uint32_t generator_poly = 0;  ///< 0 when not LFSR-generated
    std::string label;

    int length() const { return static_cast<int>(values.size()); }
};

/**
 * Maximal-length sequence from a Fibonacci LFSR.
 *
 * Conventions (fixed so sequences are bit-reproducible): the register holds
 * `degree` bits, the output is the register LSB, the feedback bit is the
 * XOR of the bits selected by the low `degree` bits of `poly` (the
 * polynomial x^m + ... + 1 written MSB-first as an integer, e.g. degree 3,
 * x^3 + x + 1 -> 0b1011) and is shifted in at the MSB. BPSK map: bit 0 ->
 * +1, bit 1 -> -1.
 *
 * A non-primitive polynomial is detected by a full-period check (the state
 * must return to init_state first after exactly 2^m - 1 steps).
 */
inline ComponentSequence generate_m_sequence(std::uint32_t poly, int degree,
                                             std::uint32_t init_state) {
    if (degree < 2 || degree > 24)
        throw std::invalid_argument("generate_m_sequence: degree out of range");
    const std::uint32_t mask = (1u << degree) - 1u;
    if ((init_state & mask) == 0u)
        throw std::invalid_argument("generate_m_sequence: init state must be nonzero");
    const std::uint32_t taps = poly & mask;
    const int period = (1 << degree) - 1;

    ComponentSequence seq;
    seq.values.resize(period);
    seq.generator_poly = poly;
    seq.label = "m" + std::to_string(degree);

    std::uint32_t state = init_state & mask;
    const std::uint32_t start = state;
    for (int i = 0; i < period; ++i) {
        seq.values[i] = (state & 1u) ? -1.0 : 1.0;
        const std::uint32_t fb = static_cast<std::uint32_t>(std::popcount(state & taps) & 1);
        state = (state >> 1) | (fb << (degree - 1));
        if (state == start && i + 1 != period)
            throw std::invalid_argument("generate_m_sequence: polynomial is not primitive "
                                        "(period " + std::to_string(i + 1) + " < " +
                                        std::to_string(period) + ")");
    }
    if (state != start)
        throw std::invalid_argument("generate_m_sequence: polynomial is not primitive");
    return seq;
}

/// out[i] = seq[(i - s) mod L]; shifting by 0 or by L is the identity.
inline ComponentSequence cyclic_shift(const ComponentSequence& seq, int s) {
    const int len = seq.length();
    ComponentSequence out = seq;
    const int shift = ((s % len) + len) % len;
    for (int i = 0; i < len; ++i)
        out.values[i] = seq.values[(i - shift + len) % len];
    return out;
}

/// Normalized periodic correlation (1/L) * sum_i x[i] * y[(i - s) mod L].
/// For an m-sequence against itself: 1 at s = 0 mod L, exactly -1/L otherwise.
inline double periodic_correlation(const ComponentSequence& x, const ComponentSequence& y,
                                   int s) {
    const int len = x.length();
    if (len != y.length())
        throw std::invalid_argument("periodic_correlation: length mismatch");
    const int shift = ((s % len) + len) % len;
    double acc = 0.0;
    for (int i = 0; i < len; ++i)
        acc += x.values[i] * y.values[(i - shift + len) % len];
    return acc / len;
}

/// Repeat the sequence cyclically and truncate to target_len. Used to fit
/// natural m-sequence lengths 2^m - 1 onto power-of-two grid dimensions.
inline ComponentSequence cyclic_extend(const ComponentSequence& seq, int target_len) {
    if (target_len <= 0)
        throw std::invalid_argument("cyclic_extend: target length must be positive");
    ComponentSequence out = seq;
    out.values.resize(target_len);
    for (int i = 0; i < target_len; ++i)
        out.values[i] = seq.values[i % seq.length()];
    return out;
}

/// Primitive feedback polynomials per degree; index 0 and its reciprocal as
/// index 1 so the two pilot axes can use different generators.
inline std::uint32_t default_primitive_poly(int degree, int which = 0) {
    static constexpr std::uint32_t kPolys[][2] = {
        {0x7, 0x7},          // 2: x^2+x+1 (self-reciprocal)
        {0xB, 0xD},          // 3: x^3+x+1, x^3+x^2+1
        {0x13, 0x19},        // 4: x^4+x+1, x^4+x^3+1
        {0x25, 0x29},        // 5
        {0x43, 0x61},        // 6
        {0x89, 0x91},        // 7
        {0x11D, 0x171},      // 8
        {0x211, 0x221},      // 9
        {0x409, 0x481},      // 10
    };
    if (degree < 2 || degree > 10)
        throw std::invalid_argument("default_primitive_poly: degree out of range");
    return kPolys[degree - 2][which ? 1 : 0];
}

/**
 * Component sequence fitted to a grid dimension: the longest m-sequence with
 * 2^m - 1 <= dim, cyclically extended to dim. `which` selects between the
 * two default generator polynomials (use different ones per axis).
 */
inline ComponentSequence sequence_for_dimension(int dim, int which = 0) {
    int degree = 2;
    while ((1 << (degree + 1)) - 1 <= dim && degree < 10) ++degree;
    if ((1 << degree) - 1 > dim)
        throw std::invalid_argument("sequence_for_dimension: dimension too small (< 3)");
    const std::uint32_t poly = default_primitive_poly(degree, which);
    ComponentSequence seq = generate_m_sequence(poly, degree, (1u << degree) - 1u);
    return seq.length() == dim ? seq : cyclic_extend(seq, dim);
}

}  // namespace isac
