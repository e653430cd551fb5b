#pragma once

#include <Eigen/Dense>
#include <vector>

#include "speclab/bundle.hpp"
#include "speclab/lattice.hpp"

namespace speclab {

struct AssembledLaplacian {
    int dim = 0;
    Eigen::MatrixXd matrix;
};

struct EigenPairs {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns
};

struct SpectralCluster {
    double mean_eigenvalue = 0.0;
    int multiplicity = 0;
    int first_index = 0;      // position in the sorted spectrum
    double spread = 0.0;      // max - min inside the cluster
    Eigen::MatrixXd basis;    // dim x multiplicity, orthonormal
};

struct EigenCurves {
    std::vector<double> t_grid;
    // branches[b][k] = eigenvalue of branch b at t_grid[k]
    std::vector<std::vector<double>> branches;
    // min matching overlap seen per step, for diagnostics
    std::vector<double> step_overlaps;
};

inline constexpr double kClusterTolRel = 1e-8;
inline constexpr double kClusterTolAbs = 1e-10;
inline constexpr int kEigensolveDimCap = 6000;

// OpenMP-parallel assembly of the transport-twisted graph Laplacian,
// (L u)_i = sum_{e=(i->j)} (u_i - U_e u_j) / len_e^2.
AssembledLaplacian assemble_laplacian(const LatticeBase &base, const DiscreteConnection &conn);

// Serial reference kept for testing and benchmarking against the
// parallel kernel; loops naively over all directed edges.
AssembledLaplacian assemble_laplacian_serial(const LatticeBase &base,
                                             const DiscreteConnection &conn);

EigenPairs eigensolve(const AssembledLaplacian &lap);

std::vector<SpectralCluster> cluster(const EigenPairs &eigs, double tol_rel = kClusterTolRel,
                                     double tol_abs = kClusterTolAbs);

// Dirichlet energy sum_edges |u_i - U_e u_j|^2 / (2 len^2) * vol; equals
// <L u, u> in the volume-weighted inner product.
double dirichlet_energy(const LatticeBase &base, const DiscreteConnection &conn,
                        const DiscreteSection &u);

EigenCurves track_curves(const LatticeBase &base, const DiscreteConnection &conn,
                         const SkewField &field, const std::vector<double> &t_grid,
                         int window_lo, int window_hi, double overlap_floor = 0.7);

} // namespace speclab
