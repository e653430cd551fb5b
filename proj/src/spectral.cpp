#include "speclab/spectral.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace speclab {

namespace {

std::vector<std::vector<int>> outgoing_edges(const LatticeBase &base) {
    std::vector<std::vector<int>> out(base.vertex_count);
    for (int e = 0; e < static_cast<int>(base.edges.size()); ++e)
        out[base.edges[e].tail].push_back(e);
    return out;
}

void check_structures(const LatticeBase &base, const DiscreteConnection &conn) {
    if (static_cast<int>(conn.transport_canonical.size()) != base.canonical_count)
        throw ShapeMismatch("connection does not match lattice");
}

} // namespace

AssembledLaplacian assemble_laplacian(const LatticeBase &base, const DiscreteConnection &conn) {
    check_structures(base, conn);
    const int m = conn.rank;
    const int dim = m * base.vertex_count;
    AssembledLaplacian lap;
    lap.dim = dim;
    lap.matrix = Eigen::MatrixXd::Zero(dim, dim);
    const auto out = outgoing_edges(base);

    // each vertex writes only its own row block, so no write conflicts
#pragma omp parallel for schedule(static)
    for (int i = 0; i < base.vertex_count; ++i) {
        for (int e : out[i]) {
            const Edge &edge = base.edges[e];
            const double w = 1.0 / (edge.length * edge.length);
            lap.matrix.block(i * m, i * m, m, m) +=
                w * Eigen::MatrixXd::Identity(m, m);
            lap.matrix.block(i * m, edge.head * m, m, m) -=
                w * conn.transport(base, e);
        }
    }
    return lap;
}

AssembledLaplacian assemble_laplacian_serial(const LatticeBase &base,
                                             const DiscreteConnection &conn) {
    check_structures(base, conn);
    const int m = conn.rank;
    const int dim = m * base.vertex_count;
    AssembledLaplacian lap;
    lap.dim = dim;
    lap.matrix = Eigen::MatrixXd::Zero(dim, dim);
    for (int e = 0; e < static_cast<int>(base.edges.size()); ++e) {
        const Edge &edge = base.edges[e];
        const double w = 1.0 / (edge.length * edge.length);
        lap.matrix.block(edge.tail * m, edge.tail * m, m, m) +=
            w * Eigen::MatrixXd::Identity(m, m);
        lap.matrix.block(edge.tail * m, edge.head * m, m, m) -= w * conn.transport(base, e);
    }
    return lap;
}

EigenPairs eigensolve(const AssembledLaplacian &lap) {
    if (lap.dim > kEigensolveDimCap) throw TooLarge("laplacian dimension exceeds solver cap");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.matrix);
    if (solver.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed");
    EigenPairs pairs;
    pairs.values = solver.eigenvalues();
    pairs.vectors = solver.eigenvectors();
    // sign convention for reporting: largest-magnitude component positive
    for (int k = 0; k < pairs.vectors.cols(); ++k) {
        int imax = 0;
        pairs.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        if (pairs.vectors(imax, k) < 0.0) pairs.vectors.col(k) = -pairs.vectors.col(k);
    }
    return pairs;
}

std::vector<SpectralCluster> cluster(const EigenPairs &eigs, double tol_rel, double tol_abs) {
    std::vector<SpectralCluster> clusters;
    const int n = static_cast<int>(eigs.values.size());
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n) {
            const double gap = eigs.values[end] - eigs.values[end - 1];
            if (gap > tol_abs + tol_rel * std::max(1.0, std::abs(eigs.values[end]))) break;
            ++end;
        }
        SpectralCluster c;
        c.first_index = start;
        c.multiplicity = end - start;
        c.mean_eigenvalue = eigs.values.segment(start, end - start).mean();
        c.spread = eigs.values[end - 1] - eigs.values[start];
        c.basis = eigs.vectors.middleCols(start, end - start);
        clusters.push_back(std::move(c));
        start = end;
    }
    return clusters;
}

double dirichlet_energy(const LatticeBase &base, const DiscreteConnection &conn,
                        const DiscreteSection &u) {
    check_structures(base, conn);
    const int m = conn.rank;
    if (u.rank != m) throw ShapeMismatch("section rank does not match connection");
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (int e = 0; e < static_cast<int>(base.edges.size()); ++e) {
        const Edge &edge = base.edges[e];
        const Eigen::VectorXd d =
            u.at(edge.tail) - conn.transport(base, e) * u.at(edge.head);
        sum += d.squaredNorm() / (2.0 * edge.length * edge.length);
    }
    return sum * base.vertex_volume;
}

EigenCurves track_curves(const LatticeBase &base, const DiscreteConnection &conn,
                         const SkewField &field, const std::vector<double> &t_grid,
                         int window_lo, int window_hi, double overlap_floor) {
    if (t_grid.empty()) throw UsageError("empty t grid");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw UsageError("t grid must be strictly increasing");

    const int width = window_hi - window_lo;
    if (width <= 0) throw UsageError("empty eigenvalue window");

    EigenCurves curves;
    curves.t_grid = t_grid;
    curves.branches.assign(width, {});

    Eigen::MatrixXd prev_vecs;
    std::vector<int> branch_of(width); // branch id -> column in current window
    for (std::size_t step = 0; step < t_grid.size(); ++step) {
        const auto lap = assemble_laplacian(base, perturb(base, conn, field, t_grid[step]));
        const auto eigs = eigensolve(lap);
        if (window_hi > eigs.values.size()) throw UsageError("window outside solved range");
        Eigen::MatrixXd vecs = eigs.vectors.middleCols(window_lo, width);

        if (step == 0) {
            for (int b = 0; b < width; ++b) branch_of[b] = b;
        } else {
            // greedy maximal-overlap assignment between consecutive samples
            Eigen::MatrixXd overlap = (prev_vecs.transpose() * vecs).cwiseAbs();
            std::vector<int> new_col(width, -1);
            std::vector<bool> row_used(width, false), col_used(width, false);
            double min_assigned = 1.0;
            for (int count = 0; count < width; ++count) {
                int bi = -1, bj = -1;
                double best = -1.0;
                for (int i = 0; i < width; ++i) {
                    if (row_used[i]) continue;
                    for (int j = 0; j < width; ++j) {
                        if (col_used[j]) continue;
                        if (overlap(i, j) > best) {
                            best = overlap(i, j);
                            bi = i;
                            bj = j;
                        }
                    }
                }
                row_used[bi] = true;
                col_used[bj] = true;
                min_assigned = std::min(min_assigned, best);
                // row bi of prev corresponds to the branch whose previous
                // column was bi
                for (int b = 0; b < width; ++b)
                    if (branch_of[b] == bi) new_col[b] = bj;
            }
            if (min_assigned < overlap_floor)
                throw MatchingFailure("eigenvector overlap below floor; refine the t grid");
            curves.step_overlaps.push_back(min_assigned);
            branch_of = new_col;
        }
        for (int b = 0; b < width; ++b)
            curves.branches[b].push_back(eigs.values[window_lo + branch_of[b]]);
        prev_vecs = vecs;
    }
    return curves;
}

} // namespace speclab
