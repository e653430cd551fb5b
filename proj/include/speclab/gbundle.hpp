#pragma once

#include <cstdint>
#include <vector>

#include "speclab/spectral.hpp"

namespace speclab {

// Rotation angle of an SO(2) transport; throws UnsupportedStructureGroup if
// the matrix is not a rotation to 1e-10.
double rotation_angle(const Eigen::MatrixXd &transport);

struct EquivariantSpectrum {
    int weight = 0;
    double fiber_radius = 1.0;
    std::vector<double> horizontal_eigs; // twisted scalar Laplacian, sorted
    std::vector<double> total_eigs;      // horizontal + k^2 / r^2
};

// Weight-k block of the total-space Laplacian. Fiber dependence is handled
// exactly by the Fourier weight: the vertical part is the constant k^2/r^2
// and the horizontal part is the phase-twisted lattice Laplacian, realified
// to a 2N x 2N symmetric matrix (each complex eigenvalue appears twice).
AssembledLaplacian equivariant_laplacian(const LatticeBase &base, const DiscreteConnection &conn,
                                         int weight, double fiber_radius = 1.0);

EquivariantSpectrum equivariant_spectrum(const LatticeBase &base, const DiscreteConnection &conn,
                                         int weight, double fiber_radius = 1.0);

// Compares the rank-2 section spectrum against the union of the weight +1 and
// weight -1 total-space spectra shifted down by 1/r^2; returns the max
// entrywise deviation after sorting.
double xi_correspondence_check(const DiscreteConnection &conn, const LatticeBase &base,
                               double fiber_radius = 1.0);

// per-index deviations of the sorted comparison above
std::vector<double> xi_correspondence_deviations(const DiscreteConnection &conn,
                                                 const LatticeBase &base,
                                                 double fiber_radius = 1.0);

struct GSimplicityCluster {
    double eigenvalue = 0.0;
    int real_multiplicity = 0;
    int complex_multiplicity = 0;
    bool g_simple = false;
};

struct GSimplicityReport {
    std::vector<GSimplicityCluster> clusters;
};

GSimplicityReport g_simplicity_report(const DiscreteConnection &conn, const LatticeBase &base,
                                      int count);

struct WeightSplitResult {
    DiscreteConnection connection;
    int iterations = 0;
    bool simplified = false;
};

// Random angle-space perturbations of an SO(2) connection until the leading
// complex (weight-1) eigenvalues are all simple with gaps above target_gap.
WeightSplitResult split_weight_space(const LatticeBase &base, const DiscreteConnection &conn,
                                     int leading_count, double target_gap, int budget,
                                     std::uint64_t seed);

} // namespace speclab
