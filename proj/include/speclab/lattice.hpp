#pragma once

#include <Eigen/Dense>
#include <vector>

#include "speclab/errors.hpp"

namespace speclab {

enum class LatticeKind { Cycle, Torus2 };

struct Edge {
    int tail;
    int head;
    double length;
    int reverse; // index of the opposite orientation
};

// Uniform discretization of a closed flat base (cycle or flat torus).
// Directed edges come in pairs; the first canonical_count entries are the
// canonical orientations and edges[k + canonical_count] is the reverse of
// edges[k]. Immutable after construction.
struct LatticeBase {
    LatticeKind kind;
    int vertex_count;
    std::vector<Edge> edges;
    double vertex_volume;
    double total_measure; // circumference, or lx*ly
    int canonical_count;

    // torus row-major index helpers (part of the file-format contract)
    int nx = 0, ny = 0;

    bool is_canonical(int e) const { return e < canonical_count; }
    int canonical_id(int e) const { return e < canonical_count ? e : e - canonical_count; }
};

LatticeBase build_cycle(int n, double circumference);
LatticeBase build_torus(int nx, int ny, double lx, double ly);

// Per-vertex fiber data; rank m vectors stacked vertex-major into one
// flat column of size m * vertex_count.
struct DiscreteSection {
    int rank = 0;
    Eigen::VectorXd values;

    int vertex_count() const { return rank > 0 ? static_cast<int>(values.size()) / rank : 0; }
    Eigen::VectorBlock<Eigen::VectorXd> at(int vertex) { return values.segment(vertex * rank, rank); }
    Eigen::VectorBlock<const Eigen::VectorXd> at(int vertex) const {
        return values.segment(vertex * rank, rank);
    }
};

DiscreteSection make_section(const LatticeBase &base, int rank);

double l2_inner(const DiscreteSection &a, const DiscreteSection &b, const LatticeBase &base);

} // namespace speclab
