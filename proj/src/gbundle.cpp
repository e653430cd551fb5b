#include "speclab/gbundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "speclab/perturbation.hpp"
#include "speclab/rng.hpp"

namespace speclab {

double rotation_angle(const Eigen::MatrixXd &transport) {
    if (transport.rows() != 2 || transport.cols() != 2)
        throw UnsupportedStructureGroup("SO(2) reduction needs rank-2 transports");
    const double theta = std::atan2(transport(1, 0), transport(0, 0));
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    if ((transport - r).cwiseAbs().maxCoeff() > 1e-10)
        throw UnsupportedStructureGroup("transport is not a rotation");
    return theta;
}

AssembledLaplacian equivariant_laplacian(const LatticeBase &base, const DiscreteConnection &conn,
                                         int weight, double fiber_radius) {
    if (!(fiber_radius > 0.0)) throw InvalidInput("fiber radius must be positive");
    std::vector<double> theta(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e)
        theta[e] = rotation_angle(conn.transport_canonical[e]);

    const int dim = 2 * base.vertex_count;
    AssembledLaplacian lap;
    lap.dim = dim;
    lap.matrix = Eigen::MatrixXd::Zero(dim, dim);
    const double vertical = static_cast<double>(weight) * weight / (fiber_radius * fiber_radius);

    for (int e = 0; e < base.canonical_count; ++e) {
        const Edge &edge = base.edges[e];
        const double w = 1.0 / (edge.length * edge.length);
        const double a = weight * theta[e];
        Eigen::Matrix2d phase;
        phase << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        lap.matrix.block(2 * edge.tail, 2 * edge.tail, 2, 2) += w * Eigen::Matrix2d::Identity();
        lap.matrix.block(2 * edge.head, 2 * edge.head, 2, 2) += w * Eigen::Matrix2d::Identity();
        lap.matrix.block(2 * edge.tail, 2 * edge.head, 2, 2) -= w * phase;
        lap.matrix.block(2 * edge.head, 2 * edge.tail, 2, 2) -= w * phase.transpose();
    }
    lap.matrix += vertical * Eigen::MatrixXd::Identity(dim, dim);
    return lap;
}

EquivariantSpectrum equivariant_spectrum(const LatticeBase &base, const DiscreteConnection &conn,
                                         int weight, double fiber_radius) {
    const double vertical = static_cast<double>(weight) * weight / (fiber_radius * fiber_radius);
    AssembledLaplacian lap = equivariant_laplacian(base, conn, weight, fiber_radius);
    // remove the vertical constant so the pair split below is on horizontal values
    lap.matrix -= vertical * Eigen::MatrixXd::Identity(lap.dim, lap.dim);
    const EigenPairs eigs = eigensolve(lap);

    EquivariantSpectrum spec;
    spec.weight = weight;
    spec.fiber_radius = fiber_radius;
    spec.horizontal_eigs.reserve(base.vertex_count);
    // realification doubles every complex eigenvalue
    for (int k = 0; k < base.vertex_count; ++k)
        spec.horizontal_eigs.push_back(0.5 * (eigs.values[2 * k] + eigs.values[2 * k + 1]));
    spec.total_eigs = spec.horizontal_eigs;
    for (auto &x : spec.total_eigs) x += vertical;
    return spec;
}

std::vector<double> xi_correspondence_deviations(const DiscreteConnection &conn,
                                                 const LatticeBase &base, double fiber_radius) {
    if (conn.rank != 2) throw UnsupportedStructureGroup("correspondence check needs rank 2");
    const double shift = 1.0 / (fiber_radius * fiber_radius);

    const EigenPairs section = eigensolve(assemble_laplacian(base, conn));
    const auto plus = equivariant_spectrum(base, conn, +1, fiber_radius);
    const auto minus = equivariant_spectrum(base, conn, -1, fiber_radius);

    std::vector<double> shifted;
    shifted.reserve(plus.total_eigs.size() + minus.total_eigs.size());
    for (double x : plus.total_eigs) shifted.push_back(x - shift);
    for (double x : minus.total_eigs) shifted.push_back(x - shift);
    std::sort(shifted.begin(), shifted.end());

    if (static_cast<long>(shifted.size()) != section.values.size())
        throw StructureViolation("spectrum sizes disagree");
    std::vector<double> deviations(shifted.size());
    for (std::size_t k = 0; k < shifted.size(); ++k)
        deviations[k] = std::abs(shifted[k] - section.values[k]);
    return deviations;
}

double xi_correspondence_check(const DiscreteConnection &conn, const LatticeBase &base,
                               double fiber_radius) {
    const auto deviations = xi_correspondence_deviations(conn, base, fiber_radius);
    return *std::max_element(deviations.begin(), deviations.end());
}

GSimplicityReport g_simplicity_report(const DiscreteConnection &conn, const LatticeBase &base,
                                      int count) {
    if (conn.rank != 2) throw UnsupportedStructureGroup("G-simplicity report needs rank 2");
    for (const auto &u : conn.transport_canonical) rotation_angle(u);

    const EigenPairs eigs = eigensolve(assemble_laplacian(base, conn));
    const auto clusters = cluster(eigs);
    const double scale = std::max(1.0, std::abs(eigs.values[eigs.values.size() - 1]));

    GSimplicityReport report;
    for (const auto &c : clusters) {
        if (c.first_index >= count) break;
        GSimplicityCluster gc;
        gc.eigenvalue = c.mean_eigenvalue;
        gc.real_multiplicity = c.multiplicity;
        if (c.multiplicity % 2 != 0 && std::abs(c.mean_eigenvalue) > 1e-8 * scale)
            throw StructureViolation("odd real multiplicity on a nonzero eigenvalue");
        gc.complex_multiplicity = c.multiplicity / 2;
        gc.g_simple = gc.complex_multiplicity == 1;
        report.clusters.push_back(gc);
    }
    return report;
}

WeightSplitResult split_weight_space(const LatticeBase &base, const DiscreteConnection &conn,
                                     int leading_count, double target_gap, int budget,
                                     std::uint64_t seed) {
    if (conn.rank != 2) throw UnsupportedStructureGroup("weight-space splitting needs rank 2");
    WeightSplitResult result;
    result.connection = conn;
    Xoshiro256 seeder(seed);

    for (int iter = 0; iter < budget; ++iter) {
        const auto spec = equivariant_spectrum(base, result.connection, +1, 1.0);
        const auto &vals = spec.horizontal_eigs;
        const int n = std::min<int>(leading_count, static_cast<int>(vals.size()));

        // cluster the complex leading values
        bool simple = true;
        double merge_gap = std::numeric_limits<double>::infinity();
        int degen_lo = -1, degen_hi = -1;
        int k = 0;
        while (k < n) {
            int end = k + 1;
            while (end < static_cast<int>(vals.size()) &&
                   vals[end] - vals[end - 1] <=
                       kClusterTolAbs + kClusterTolRel * std::max(1.0, std::abs(vals[end])))
                ++end;
            if (end - k > 1 && degen_lo < 0) {
                degen_lo = k;
                degen_hi = end;
            }
            if (end - k > 1) simple = false;
            k = end;
        }
        for (int j = 1; j < n; ++j) merge_gap = std::min(merge_gap, vals[j] - vals[j - 1]);
        if (simple && merge_gap > target_gap) {
            result.simplified = true;
            result.iterations = iter;
            return result;
        }

        // step along a random angle-space direction, Weyl-guarded as in the
        // real splitting loop
        const SkewField field = random_skew_field(base, 2, seeder.next_u64(), 1.0);
        double gap = std::numeric_limits<double>::infinity();
        if (degen_lo > 0) gap = std::min(gap, vals[degen_lo] - vals[degen_lo - 1]);
        if (degen_hi > 0 && degen_hi < static_cast<int>(vals.size()))
            gap = std::min(gap, vals[degen_hi] - vals[degen_hi - 1]);
        if (!std::isfinite(gap) || gap <= 0.0) gap = std::max(target_gap, 1e-3);

        const Eigen::MatrixXd ldot = laplacian_derivative(base, result.connection, field);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(ldot, Eigen::EigenvaluesOnly);
        const double ldot_norm = s.eigenvalues().cwiseAbs().maxCoeff();
        const double t = 0.1 * gap / std::max(ldot_norm, 1e-300);
        result.connection = perturb(base, result.connection, field, t);
    }
    result.iterations = budget;
    return result;
}

} // namespace speclab
