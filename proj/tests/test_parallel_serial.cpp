#include <doctest.h>

#include <cmath>

#include "speclab/perturbation.hpp"
#include "speclab/rng.hpp"

using namespace speclab;

// The parallel kernels partition work so each thread writes disjoint blocks;
// their output must match the serial references bit-for-bit.

TEST_CASE("parallel assembly equals the serial reference") {
    for (int rank : {1, 2, 3}) {
        const auto cyc = build_cycle(24, 2.0 * M_PI);
        const auto conn_c = random_connection(cyc, rank, 100 + rank, 0.7);
        CHECK((assemble_laplacian(cyc, conn_c).matrix -
               assemble_laplacian_serial(cyc, conn_c).matrix)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);

        const auto tor = build_torus(7, 5, 2.0, 3.0);
        const auto conn_t = random_connection(tor, rank, 200 + rank, 0.7);
        CHECK((assemble_laplacian(tor, conn_t).matrix -
               assemble_laplacian_serial(tor, conn_t).matrix)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}

TEST_CASE("parallel derivative equals the serial reference") {
    for (int rank : {2, 3, 4}) {
        const auto tor = build_torus(6, 6, 2.0 * M_PI, 2.0 * M_PI);
        const auto conn = random_connection(tor, rank, 300 + rank, 0.5);
        const auto field = random_skew_field(tor, rank, 310 + rank, 1.0);
        CHECK((laplacian_derivative(tor, conn, field) -
               laplacian_derivative_serial(tor, conn, field))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}

TEST_CASE("dirichlet energy reduction matches a naive loop") {
    const auto base = build_torus(8, 8, 2.0 * M_PI, 2.0 * M_PI);
    const auto conn = random_connection(base, 3, 17, 0.6);
    Xoshiro256 rng(99);
    auto u = make_section(base, 3);
    for (long i = 0; i < u.values.size(); ++i) u.values[i] = rng.next_normal();

    double naive = 0.0;
    for (int edge = 0; edge < static_cast<int>(base.edges.size()); ++edge) {
        const Edge &e = base.edges[edge];
        const Eigen::VectorXd diff =
            u.at(e.tail) - conn.transport(base, edge) * u.at(e.head);
        naive += diff.squaredNorm() / (2.0 * e.length * e.length);
    }
    naive *= base.vertex_volume;
    CHECK(std::abs(dirichlet_energy(base, conn, u) - naive) <=
          1e-12 * std::max(1.0, std::abs(naive)));
}
