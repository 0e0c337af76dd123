#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "isac/rng.hpp"
#include "isac/sequences.hpp"

using namespace isac;

namespace {

// Oracle: enumerate the LFSR state sequence directly.
std::vector<std::uint32_t> lfsr_states(std::uint32_t poly, int degree, std::uint32_t init,
                                       int steps) {
    const std::uint32_t mask = (1u << degree) - 1u;
    const std::uint32_t taps = poly & mask;
    std::vector<std::uint32_t> states;
    std::uint32_t s = init & mask;
    for (int i = 0; i < steps; ++i) {
        states.push_back(s);
        std::uint32_t fb = 0;
        for (int b = 0; b < degree; ++b)
            if (taps & (1u << b)) fb ^= (s >> b) & 1u;
        s = (s >> 1) | (fb << (degree - 1));
    }
    return states;
}

}  // namespace

TEST_CASE("degree-3 m-sequence visits all 7 nonzero LFSR states") {
    const auto states = lfsr_states(0b1011, 3, 0b111, 7);
    const std::set<std::uint32_t> unique(states.begin(), states.end());
    REQUIRE(unique.size() == 7);
    REQUIRE(unique.count(0) == 0);

    const ComponentSequence seq = generate_m_sequence(0b1011, 3, 0b111);
    REQUIRE(seq.length() == 7);
    for (int i = 0; i < 7; ++i) {
        const double expect = (states[i] & 1u) ? -1.0 : 1.0;
        REQUIRE(seq.values[i] == expect);
    }
}

TEST_CASE("m-sequence lengths are 2^m - 1") {
    REQUIRE(generate_m_sequence(0b10011, 4, 0b1111).length() == 15);
    REQUIRE(generate_m_sequence(0x43, 6, 0x3F).length() == 63);
}

TEST_CASE("m-sequence generation validates its inputs") {
    REQUIRE_THROWS_AS(generate_m_sequence(0b1011, 3, 0), std::invalid_argument);
    // x^4 + x^2 + 1 is reducible; the period check must reject it
    REQUIRE_THROWS_AS(generate_m_sequence(0b10101, 4, 0b1111), std::invalid_argument);
}

TEST_CASE("cyclic shift identities") {
    ComponentSequence s;
    s.values.resize(3);
    s.values << 1, -1, 1;
    REQUIRE(cyclic_shift(s, 0).values == s.values);
    REQUIRE(cyclic_shift(s, 3).values == s.values);

    ComponentSequence t;
    t.values.resize(3);
    t.values << 1, -1, -1;
    const ComponentSequence r = cyclic_shift(t, 1);
    REQUIRE(r.values[0] == -1);
    REQUIRE(r.values[1] == 1);
    REQUIRE(r.values[2] == -1);
}

TEST_CASE("cyclic shifts compose additively") {
    const ComponentSequence s = generate_m_sequence(0x43, 6, 0x3F);
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        const int a = rng.uniform_int(200) - 100;
        const int b = rng.uniform_int(200) - 100;
        REQUIRE(cyclic_shift(cyclic_shift(s, a), b).values ==
                cyclic_shift(s, a + b).values);
    }
}

TEST_CASE("periodic correlation basics") {
    const ComponentSequence s3 = generate_m_sequence(0b1011, 3, 0b111);
    REQUIRE_THAT(periodic_correlation(s3, s3, 0), Catch::Matchers::WithinAbs(1.0, 1e-15));

    // brute-force over all shifts: two-level autocorrelation
    for (int s = 1; s < 7; ++s) {
        double acc = 0;
        for (int i = 0; i < 7; ++i) acc += s3.values[i] * s3.values[(i - s + 7) % 7];
        REQUIRE_THAT(acc / 7.0, Catch::Matchers::WithinAbs(-1.0 / 7.0, 1e-15));
        REQUIRE_THAT(periodic_correlation(s3, s3, s),
                     Catch::Matchers::WithinAbs(-1.0 / 7.0, 1e-15));
    }

    const ComponentSequence s4 = generate_m_sequence(0b10011, 4, 0b1111);
    for (int s = 1; s < 15; ++s)
        REQUIRE_THAT(periodic_correlation(s4, s4, s),
                     Catch::Matchers::WithinAbs(-1.0 / 15.0, 1e-15));

    ComponentSequence shorter;
    shorter.values.resize(3);
    shorter.values << 1, 1, 1;
    REQUIRE_THROWS_AS(periodic_correlation(s3, shorter, 0), std::invalid_argument);
}

TEST_CASE("two-level autocorrelation holds exhaustively for degrees 3-8") {
    for (int deg = 3; deg <= 8; ++deg) {
        for (int which = 0; which < 2; ++which) {
            const ComponentSequence s =
                generate_m_sequence(default_primitive_poly(deg, which), deg,
                                    (1u << deg) - 1u);
            const int len = s.length();
            for (int shift = 0; shift < len; ++shift) {
                const double c = periodic_correlation(s, s, shift);
                if (shift == 0)
                    REQUIRE(c == 1.0);
                else
                    REQUIRE_THAT(c, Catch::Matchers::WithinAbs(-1.0 / len, 1e-15));
            }
        }
    }
}

TEST_CASE("m-sequences map 2^(m-1) one-bits to -1") {
    // BPSK map is bit 0 -> +1, bit 1 -> -1; m-sequences carry one extra
    // one-bit per period, so -1 outnumbers +1 by exactly one.
    for (int deg = 3; deg <= 8; ++deg) {
        const ComponentSequence s =
            generate_m_sequence(default_primitive_poly(deg), deg, (1u << deg) - 1u);
        int plus = 0, minus = 0;
        for (int i = 0; i < s.length(); ++i) (s.values[i] > 0 ? plus : minus)++;
        REQUIRE(minus == plus + 1);
    }
}

TEST_CASE("cyclic extension repeats the sequence") {
    const ComponentSequence s = generate_m_sequence(0x43, 6, 0x3F);
    const ComponentSequence e = cyclic_extend(s, 64);
    REQUIRE(e.length() == 64);
    for (int i = 0; i < 63; ++i) REQUIRE(e.values[i] == s.values[i]);
    REQUIRE(e.values[63] == s.values[0]);
}

TEST_CASE("sequence_for_dimension picks the longest fitting m-sequence") {
    REQUIRE(sequence_for_dimension(63).length() == 63);
    REQUIRE(sequence_for_dimension(64).length() == 64);
    REQUIRE(sequence_for_dimension(512).length() == 512);
    REQUIRE(sequence_for_dimension(64).generator_poly ==
            default_primitive_poly(6, 0));
    REQUIRE(sequence_for_dimension(512, 1).generator_poly ==
            default_primitive_poly(9, 1));
    REQUIRE_THROWS_AS(sequence_for_dimension(2), std::invalid_argument);
}

TEST_CASE("the two default polynomials per degree differ and are primitive") {
    for (int deg = 3; deg <= 10; ++deg) {
        const auto p0 = default_primitive_poly(deg, 0);
        const auto p1 = default_primitive_poly(deg, 1);
        REQUIRE(p0 != p1);
        REQUIRE_NOTHROW(generate_m_sequence(p0, deg, 1));
        REQUIRE_NOTHROW(generate_m_sequence(p1, deg, 1));
    }
}
