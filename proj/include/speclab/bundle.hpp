#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "speclab/lattice.hpp"

namespace speclab {

// Matrix exponential by scaling-and-squaring with a Taylor core.
// Accurate to ~1e-15 relative for skew arguments with norm up to ~10.
Eigen::MatrixXd expm(const Eigen::MatrixXd &a);

// Metric-compatible connection stored as one SO(m) transport per canonical
// edge; the reverse orientation carries the transpose. U_e maps the fiber at
// the head to the fiber at the tail of e.
struct DiscreteConnection {
    int rank = 0;
    std::vector<Eigen::MatrixXd> transport_canonical;

    Eigen::MatrixXd transport(const LatticeBase &base, int edge) const {
        const Eigen::MatrixXd &u = transport_canonical[base.canonical_id(edge)];
        if (base.is_canonical(edge)) return u;
        return u.transpose();
    }
};

// Skew-endomorphism-valued 1-form: one skew matrix per canonical edge.
// The reverse-edge value is induced, A_{-e} = -U_e^T A_e U_e, never stored.
struct SkewField {
    int rank = 0;
    std::vector<Eigen::MatrixXd> value_canonical;

    Eigen::MatrixXd value(const LatticeBase &base, const DiscreteConnection &conn, int edge) const {
        const Eigen::MatrixXd &a = value_canonical[base.canonical_id(edge)];
        if (base.is_canonical(edge)) return a;
        const Eigen::MatrixXd &u = conn.transport_canonical[base.canonical_id(edge)];
        return (-u.transpose() * a * u).eval();
    }
};

DiscreteConnection trivial_connection(const LatticeBase &base, int rank);
DiscreteConnection constant_connection_cycle(const LatticeBase &base, const Eigen::MatrixXd &form);
DiscreteConnection random_connection(const LatticeBase &base, int rank, std::uint64_t seed,
                                     double magnitude);
SkewField random_skew_field(const LatticeBase &base, int rank, std::uint64_t seed, double magnitude);

DiscreteConnection perturb(const LatticeBase &base, const DiscreteConnection &conn,
                           const SkewField &field, double t);

Eigen::MatrixXd holonomy(const LatticeBase &base, const DiscreteConnection &conn,
                         const std::vector<int> &loop);

// Fiberwise tensor algebra
double hs_inner(const Eigen::MatrixXd &h, const Eigen::MatrixXd &k);
Eigen::MatrixXd rank_one(const Eigen::VectorXd &a, const Eigen::VectorXd &b);
Eigen::MatrixXd wedge(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

// Covariant difference quotient along edge e = (i -> j): (U_e u_j - u_i) / len
Eigen::VectorXd covariant_difference(const LatticeBase &base, const DiscreteConnection &conn,
                                     const DiscreteSection &u, int edge);

// Per-vertex gauge transformation g: U_e -> g_tail U_e g_head^T
DiscreteConnection gauge_transform(const LatticeBase &base, const DiscreteConnection &conn,
                                   const std::vector<Eigen::MatrixXd> &g);

} // namespace speclab
