#include <catch2/catch_amalgamated.hpp>

#include "isac/rng.hpp"
#include "isac/transforms.hpp"

using namespace isac;

namespace {

Grid random_dd_grid(const FrameGeometry& geom, std::uint64_t seed) {
    Rng rng(seed);
    Grid g = Grid::zeros(Domain::DelayDoppler, geom);
    for (int c = 0; c < geom.n(); ++c)
        for (int r = 0; r < geom.m(); ++r) g.samples(r, c) = rng.cn01();
    return g;
}

// Oracle: dense unitary DFT matrix product, independent of the FFT path.
Eigen::MatrixXcd dft_matrix(int n) {
    Eigen::MatrixXcd f(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            f(r, c) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 -kTwoPi * r * c / n);
    return f;
}

}  // namespace

TEST_CASE("isfft of an impulse is flat") {
    const FrameGeometry geom(2, 2, 15e3, 0);
    Grid dd = Grid::zeros(Domain::DelayDoppler, geom);
    dd.samples(0, 0) = 1.0;
    const Grid tf = isfft(dd, geom);
    REQUIRE(tf.domain == Domain::TimeFrequency);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            REQUIRE(std::abs(tf.samples(r, c) - cd(0.5, 0.0)) < 1e-15);
}

TEST_CASE("isfft of zeros is zeros") {
    const FrameGeometry geom(4, 4, 15e3, 0);
    const Grid tf = isfft(Grid::zeros(Domain::DelayDoppler, geom), geom);
    REQUIRE(tf.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("isfft matches the dense DFT-matrix oracle and preserves norm") {
    const FrameGeometry geom(4, 4, 15e3, 0);
    const Grid dd = random_dd_grid(geom, 11);
    const Grid tf = isfft(dd, geom);

    const Eigen::MatrixXcd f4 = dft_matrix(4);
    const Eigen::MatrixXcd expected = f4 * dd.samples * f4.adjoint();
    REQUIRE((tf.samples - expected).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(std::abs(tf.samples.norm() - dd.samples.norm()) < 1e-12);
}

TEST_CASE("isfft rejects dimension and domain mismatches") {
    const FrameGeometry geom(4, 4, 15e3, 0);
    REQUIRE_THROWS_AS(isfft(Grid::zeros(Domain::DelayDoppler, 3, 4), geom),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(isfft(Grid::zeros(Domain::TimeFrequency, geom), geom),
                      std::invalid_argument);
}

TEST_CASE("sfft inverts isfft") {
    const FrameGeometry geom(8, 8, 15e3, 0);
    const Grid dd = random_dd_grid(geom, 3);
    const Grid back = sfft(isfft(dd, geom), geom);
    REQUIRE((back.samples - dd.samples).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(back.domain == Domain::DelayDoppler);
}

TEST_CASE("sfft of a flat grid is an impulse") {
    const FrameGeometry geom(2, 2, 15e3, 0);
    Grid tf{Domain::TimeFrequency, Eigen::MatrixXcd::Constant(2, 2, cd(0.5, 0.0))};
    const Grid dd = sfft(tf, geom);
    REQUIRE(std::abs(dd.samples(0, 0) - cd(1.0, 0.0)) < 1e-15);
    REQUIRE(std::abs(dd.samples(0, 1)) < 1e-15);
    REQUIRE(std::abs(dd.samples(1, 0)) < 1e-15);
    REQUIRE(std::abs(dd.samples(1, 1)) < 1e-15);
}

TEST_CASE("isfft/sfft stay mutually inverse and norm-preserving on odd sizes") {
    // property over a few non-power-of-two shapes
    for (auto [m, n] : {std::pair{7, 5}, std::pair{6, 10}, std::pair{15, 15}}) {
        const FrameGeometry geom(m, n, 15e3, 0);
        const Grid dd = random_dd_grid(geom, 100 + m * n);
        const Grid tf = isfft(dd, geom);
        REQUIRE(std::abs(tf.samples.norm() - dd.samples.norm()) < 1e-10);
        REQUIRE((sfft(tf, geom).samples - dd.samples).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("superimpose scales the pilot by sqrt(rho)") {
    const FrameGeometry geom(8, 4, 15e3, 0);
    Grid pilot = Grid::zeros(Domain::TimeFrequency, geom);
    Grid data = Grid::zeros(Domain::TimeFrequency, geom);
    Rng rng(5);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 8; ++r) {
            pilot.samples(r, c) = std::polar(1.0, rng.uniform(0.0, kTwoPi));
            data.samples(r, c) = rng.cn01();
        }

    SECTION("rho = 0 returns the data unchanged") {
        const Grid x = superimpose(pilot, data, 0.0);
        REQUIRE((x.samples - data.samples).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("rho = 0.2 with zero data leaves average power 0.2") {
        const Grid x = superimpose(pilot, Grid::zeros(Domain::TimeFrequency, geom), 0.2);
        const double avg = x.samples.squaredNorm() / (8 * 4);
        REQUIRE_THAT(avg, Catch::Matchers::WithinAbs(0.2, 1e-12));
    }
    SECTION("rho = 1 with all-ones inputs gives all twos") {
        Grid ones{Domain::TimeFrequency, Eigen::MatrixXcd::Constant(8, 4, cd(1.0, 0.0))};
        const Grid x = superimpose(ones, ones, 1.0);
        REQUIRE((x.samples.array() - cd(2.0, 0.0)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("negative rho is rejected") {
        REQUIRE_THROWS_AS(superimpose(pilot, data, -0.1), std::invalid_argument);
    }
    SECTION("linear in both arguments") {
        const Grid x1 = superimpose(pilot, data, 0.3);
        Grid pilot2{Domain::TimeFrequency, 2.0 * pilot.samples};
        Grid data2{Domain::TimeFrequency, 2.0 * data.samples};
        const Grid x2 = superimpose(pilot2, data2, 0.3);
        REQUIRE((x2.samples - 2.0 * x1.samples).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ofdm modulate: single-sample frame passes through") {
    const FrameGeometry geom(1, 1, 15e3, 0);
    Grid tf = Grid::zeros(Domain::TimeFrequency, geom);
    tf.samples(0, 0) = cd(0.3, -0.7);
    const TimeSignal sig = ofdm_modulate(tf, geom);
    REQUIRE(sig.samples.size() == 1);
    REQUIRE(std::abs(sig.samples[0] - cd(0.3, -0.7)) < 1e-15);
}

TEST_CASE("ofdm modulate: CP replicates each symbol tail") {
    const FrameGeometry geom(4, 3, 15e3, 2);
    Rng rng(9);
    Grid tf = Grid::zeros(Domain::TimeFrequency, geom);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 4; ++r) tf.samples(r, c) = rng.cn01();
    const TimeSignal sig = ofdm_modulate(tf, geom);
    REQUIRE(sig.samples.size() == 3 * 6);
    for (int c = 0; c < 3; ++c) {
        const auto block = sig.samples.segment(c * 6, 6);
        REQUIRE(std::abs(block[0] - block[4]) < 1e-15);
        REQUIRE(std::abs(block[1] - block[5]) < 1e-15);
    }
}

TEST_CASE("ofdm demodulate inverts modulate") {
    const FrameGeometry geom(16, 8, 15e3, 2);
    const Grid tf{Domain::TimeFrequency, random_dd_grid(geom, 17).samples};
    const Grid back = ofdm_demodulate(ofdm_modulate(tf, geom), geom);
    REQUIRE((back.samples - tf.samples).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ofdm demodulate validates the signal length") {
    const FrameGeometry geom(16, 8, 15e3, 2);
    TimeSignal sig{Eigen::VectorXcd::Zero(10), geom};
    REQUIRE_THROWS_AS(ofdm_demodulate(sig, geom), std::invalid_argument);
}

TEST_CASE("ofdm demodulate: zero signal, impulse symbol") {
    const FrameGeometry geom(8, 1, 15e3, 0);
    SECTION("all-zero signal gives the all-zero grid") {
        TimeSignal sig{Eigen::VectorXcd::Zero(8), geom};
        REQUIRE(ofdm_demodulate(sig, geom).samples.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("time impulse becomes a flat column") {
        TimeSignal sig{Eigen::VectorXcd::Zero(8), geom};
        sig.samples[0] = 1.0;
        const Grid y = ofdm_demodulate(sig, geom);
        for (int r = 0; r < 8; ++r)
            REQUIRE(std::abs(y.samples(r, 0) - cd(1.0 / std::sqrt(8.0), 0.0)) < 1e-15);
    }
}

TEST_CASE("composition: full transmit chain is the identity without a channel") {
    const FrameGeometry geom(16, 8, 15e3, 2);
    const Grid p = random_dd_grid(geom, 23);
    const Grid round =
        sfft(ofdm_demodulate(ofdm_modulate(isfft(p, geom), geom), geom), geom);
    REQUIRE((round.samples - p.samples).cwiseAbs().maxCoeff() < 1e-12);
}
