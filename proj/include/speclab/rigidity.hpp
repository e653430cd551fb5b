#pragma once

#include <vector>

#include "speclab/bundle.hpp"

namespace speclab {

struct EdgeCoefficients {
    int edge = 0;
    // du = a u + b v, dv = c u + d v at the edge tail, least squares
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double fit_residual = 0.0; // normalized LS residual of the 2x2 system
    bool degenerate_gram = false;
};

enum class InfinitesimalMode { IncidentSum, PerDirection };

struct RigidityReport {
    double res_wedge = 0.0;
    double res_rigid = 0.0;
    double res_infinitesimal = 0.0;
    double res_bc = 0.0; // max |b + c| over non-degenerate edges
    std::vector<EdgeCoefficients> coeffs;
    std::vector<int> degenerate_gram_vertices;
};

RigidityReport rigidity_report(const DiscreteSection &u, const DiscreteSection &v,
                               const DiscreteConnection &conn, const LatticeBase &base,
                               InfinitesimalMode mode = InfinitesimalMode::IncidentSum);

struct ParallelCoefficients {
    std::vector<double> alpha; // per canonical edge
    double max_residual = 0.0; // normalized; ~0 certifies du parallel to u
};

ParallelCoefficients parallel_coefficient_check(const DiscreteSection &u,
                                                const DiscreteConnection &conn,
                                                const LatticeBase &base);

struct RotationFit {
    Eigen::Matrix2d rotation; // best T in O(2) with phi ~= T psi
    double residual = 0.0;    // normalized weighted misfit
    bool is_reflection = false;
};

RotationFit constant_rotation_fit(const DiscreteSection &phi, const DiscreteSection &psi,
                                  const LatticeBase &base);

} // namespace speclab
