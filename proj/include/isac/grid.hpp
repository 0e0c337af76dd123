#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "isac/geometry.hpp"

namespace isac {

using cd = std::complex<double>;

/// Which plane an M x N sample matrix lives in. Transitions happen only
/// through the transform operations.
enum class Domain { DelayDoppler, TimeFrequency, TimeDelay };

inline const char* domain_name(Domain d) {
    switch (d) {
        case Domain::DelayDoppler: return "delay-Doppler";
        case Domain::TimeFrequency: return "time-frequency";
        case Domain::TimeDelay: return "time-delay";
    }
    return "?";
}

/**
 * Domain-tagged M x N complex sample matrix.
 * Rows index delay / subcarrier (l or m), columns index Doppler / OFDM
 * symbol (k or n); every module shares this orientation.
 */
struct Grid {
    Domain domain = Domain::DelayDoppler;
    Eigen::MatrixXcd samples;

    Grid() = default;
    Grid(Domain d, Eigen::MatrixXcd s) : domain(d), samples(std::move(s)) {}

    static Grid zeros(Domain d, int m, int n) {
        return {d, Eigen::MatrixXcd::Zero(m, n)};
    }
    static Grid zeros(Domain d, const FrameGeometry& g) {
        return zeros(d, g.m(), g.n());
    }

    Eigen::Index rows() const { return samples.rows(); }
    Eigen::Index cols() const { return samples.cols(); }
};

inline void require_dims(const Grid& g, const FrameGeometry& geom, const char* where) {
    if (g.rows() != geom.m() || g.cols() != geom.n())
        throw std::invalid_argument(std::string(where) + ": grid is " +
                                    std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                                    ", geometry wants " + std::to_string(geom.m()) + "x" +
                                    std::to_string(geom.n()));
}

inline void require_domain(const Grid& g, Domain d, const char* where) {
    if (g.domain != d)
        throw std::invalid_argument(std::string(where) + ": expected a " + domain_name(d) +
                                    " grid, got " + domain_name(g.domain));
}

/// One frame of discrete baseband samples, length N * (M + cp_length).
struct TimeSignal {
    Eigen::VectorXcd samples;
    FrameGeometry geometry;

    double energy() const { return samples.squaredNorm(); }
};

}  // namespace isac
