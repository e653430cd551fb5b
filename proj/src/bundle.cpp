#include "speclab/bundle.hpp"

#include <cmath>

#include "speclab/rng.hpp"

namespace speclab {

Eigen::MatrixXd expm(const Eigen::MatrixXd &a) {
    const int n = static_cast<int>(a.rows());
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff(); // inf-norm
    int squarings = 0;
    if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    const double scale = std::ldexp(1.0, -squarings);

    Eigen::MatrixXd b = a * scale;
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 30; ++k) {
        term = (term * b / static_cast<double>(k)).eval();
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int k = 0; k < squarings; ++k) result = (result * result).eval();
    return result;
}

DiscreteConnection trivial_connection(const LatticeBase &base, int rank) {
    if (rank < 1) throw InvalidInput("rank must be >= 1");
    DiscreteConnection conn;
    conn.rank = rank;
    conn.transport_canonical.assign(base.canonical_count,
                                    Eigen::MatrixXd::Identity(rank, rank));
    return conn;
}

DiscreteConnection constant_connection_cycle(const LatticeBase &base, const Eigen::MatrixXd &form) {
    if (base.kind != LatticeKind::Cycle) throw InvalidInput("constant connection requires a cycle base");
    if ((form + form.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidInput("connection form must be skew-symmetric");
    DiscreteConnection conn;
    conn.rank = static_cast<int>(form.rows());
    const double h = base.edges[0].length;
    const Eigen::MatrixXd u = expm(h * form);
    conn.transport_canonical.assign(base.canonical_count, u);
    return conn;
}

namespace {

// Draw order contract: canonical edges in order; per edge, strict upper
// triangle row-major.
Eigen::MatrixXd draw_skew(int rank, Xoshiro256 &rng, double magnitude) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(rank, rank);
    for (int i = 0; i < rank; ++i)
        for (int j = i + 1; j < rank; ++j) {
            const double x = magnitude * rng.next_normal();
            s(i, j) = x;
            s(j, i) = -x;
        }
    return s;
}

} // namespace

DiscreteConnection random_connection(const LatticeBase &base, int rank, std::uint64_t seed,
                                     double magnitude) {
    if (rank < 1) throw InvalidInput("rank must be >= 1");
    if (magnitude < 0.0) throw InvalidInput("magnitude must be >= 0");
    DiscreteConnection conn;
    conn.rank = rank;
    conn.transport_canonical.reserve(base.canonical_count);
    Xoshiro256 rng(seed);
    for (int e = 0; e < base.canonical_count; ++e) {
        const Eigen::MatrixXd s = draw_skew(rank, rng, magnitude);
        conn.transport_canonical.push_back(expm(base.edges[e].length * s));
    }
    return conn;
}

SkewField random_skew_field(const LatticeBase &base, int rank, std::uint64_t seed,
                            double magnitude) {
    if (rank < 1) throw InvalidInput("rank must be >= 1");
    if (magnitude < 0.0) throw InvalidInput("magnitude must be >= 0");
    SkewField field;
    field.rank = rank;
    field.value_canonical.reserve(base.canonical_count);
    Xoshiro256 rng(seed);
    for (int e = 0; e < base.canonical_count; ++e)
        field.value_canonical.push_back(draw_skew(rank, rng, magnitude));
    return field;
}

DiscreteConnection perturb(const LatticeBase &base, const DiscreteConnection &conn,
                           const SkewField &field, double t) {
    if (conn.rank != field.rank) throw ShapeMismatch("connection and field ranks differ");
    if (static_cast<int>(conn.transport_canonical.size()) != base.canonical_count ||
        static_cast<int>(field.value_canonical.size()) != base.canonical_count)
        throw ShapeMismatch("connection or field does not match lattice");
    DiscreteConnection out;
    out.rank = conn.rank;
    out.transport_canonical.resize(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e) {
        out.transport_canonical[e] =
            expm(t * base.edges[e].length * field.value_canonical[e]) *
            conn.transport_canonical[e];
    }
    return out;
}

Eigen::MatrixXd holonomy(const LatticeBase &base, const DiscreteConnection &conn,
                         const std::vector<int> &loop) {
    if (loop.size() < 2 || loop.front() != loop.back())
        throw InvalidLoop("loop must be closed (first vertex repeated at the end)");
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(conn.rank, conn.rank);
    for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
        const int i = loop[k];
        const int j = loop[k + 1];
        int found = -1;
        for (int e = 0; e < static_cast<int>(base.edges.size()); ++e)
            if (base.edges[e].tail == i && base.edges[e].head == j) {
                found = e;
                break;
            }
        if (found < 0) throw InvalidLoop("vertices are not adjacent");
        h = (h * conn.transport(base, found)).eval();
    }
    return h;
}

double hs_inner(const Eigen::MatrixXd &h, const Eigen::MatrixXd &k) {
    if (h.rows() != k.rows() || h.cols() != k.cols())
        throw ShapeMismatch("hs_inner shape mismatch");
    return (h.array() * k.array()).sum(); // tr(H K^T)
}

Eigen::MatrixXd rank_one(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    if (a.size() != b.size()) throw ShapeMismatch("rank_one length mismatch");
    return a * b.transpose();
}

Eigen::MatrixXd wedge(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    if (a.size() != b.size()) throw ShapeMismatch("wedge length mismatch");
    return a * b.transpose() - b * a.transpose();
}

Eigen::VectorXd covariant_difference(const LatticeBase &base, const DiscreteConnection &conn,
                                     const DiscreteSection &u, int edge) {
    const Edge &e = base.edges[edge];
    return (conn.transport(base, edge) * u.at(e.head) - u.at(e.tail)) / e.length;
}

DiscreteConnection gauge_transform(const LatticeBase &base, const DiscreteConnection &conn,
                                   const std::vector<Eigen::MatrixXd> &g) {
    if (static_cast<int>(g.size()) != base.vertex_count)
        throw ShapeMismatch("one gauge matrix per vertex required");
    DiscreteConnection out;
    out.rank = conn.rank;
    out.transport_canonical.resize(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e) {
        const Edge &edge = base.edges[e];
        out.transport_canonical[e] =
            g[edge.tail] * conn.transport_canonical[e] * g[edge.head].transpose();
    }
    return out;
}

} // namespace speclab
