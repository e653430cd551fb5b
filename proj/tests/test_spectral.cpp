#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "speclab/rng.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

std::vector<double> circulant(int n, double h, double alpha) {
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k)
        v[k] = (2.0 - 2.0 * std::cos(2.0 * M_PI * k / n + h * alpha)) / (h * h);
    return v;
}

} // namespace

TEST_CASE("assembled Laplacian is symmetric PSD") {
    const auto base = build_torus(4, 5, 2.0, 3.0);
    const auto conn = random_connection(base, 3, 6, 0.8);
    const auto lap = assemble_laplacian(base, conn);
    CHECK((lap.matrix - lap.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const auto eigs = eigensolve(lap);
    CHECK(eigs.values[0] >= -1e-10);
}

TEST_CASE("rank-1 cycle spectrum matches the circulant formula") {
    // h = 1 on cycle(4, 4): eigenvalues {0, 2, 2, 4}
    const auto small = build_cycle(4, 4.0);
    const auto eig4 = eigensolve(assemble_laplacian(small, trivial_connection(small, 1)));
    CHECK(std::abs(eig4.values[0] - 0.0) <= 1e-12);
    CHECK(std::abs(eig4.values[1] - 2.0) <= 1e-12);
    CHECK(std::abs(eig4.values[2] - 2.0) <= 1e-12);
    CHECK(std::abs(eig4.values[3] - 4.0) <= 1e-12);

    const int n = 16;
    const auto base = build_cycle(n, 2.0 * M_PI);
    const double h = 2.0 * M_PI / n;
    const auto eigs = eigensolve(assemble_laplacian(base, trivial_connection(base, 1)));
    auto expected = circulant(n, h, 0.0);
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < n; ++k) CHECK(std::abs(eigs.values[k] - expected[k]) <= 1e-10);

    // kernel eigenvector is constant
    const Eigen::VectorXd ground = eigs.vectors.col(0);
    CHECK((ground.array() - ground[0]).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("twisted circulant spectrum for the constant rotation connection") {
    const int n = 16;
    const auto base = build_cycle(n, 2.0 * M_PI);
    const double h = 2.0 * M_PI / n;
    const double alpha = 0.3;
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    const auto eigs =
        eigensolve(assemble_laplacian(base, constant_connection_cycle(base, alpha * j)));
    auto expected = circulant(n, h, alpha);
    auto minus = circulant(n, h, -alpha);
    expected.insert(expected.end(), minus.begin(), minus.end());
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < 2 * n; ++k) CHECK(std::abs(eigs.values[k] - expected[k]) <= 1e-10);
}

TEST_CASE("eigensolve basics and error paths") {
    AssembledLaplacian diag;
    diag.dim = 3;
    diag.matrix = Eigen::Vector3d(3, 1, 2).asDiagonal();
    const auto eigs = eigensolve(diag);
    CHECK(eigs.values[0] == doctest::Approx(1.0));
    CHECK(eigs.values[1] == doctest::Approx(2.0));
    CHECK(eigs.values[2] == doctest::Approx(3.0));
    CHECK(std::abs(eigs.vectors.col(0)[1]) == doctest::Approx(1.0));

    AssembledLaplacian big;
    big.dim = kEigensolveDimCap + 1;
    CHECK_THROWS_AS(eigensolve(big), TooLarge);
}

TEST_CASE("cluster grouping") {
    EigenPairs eigs;
    eigs.values = Eigen::Vector4d(0.0, 2.0, 2.0, 4.0);
    eigs.vectors = Eigen::MatrixXd::Identity(4, 4);
    const auto groups = cluster(eigs);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].multiplicity == 1);
    CHECK(groups[1].multiplicity == 2);
    CHECK(groups[1].basis.cols() == 2);
    CHECK(groups[2].multiplicity == 1);

    EigenPairs distinct;
    distinct.values = Eigen::Vector3d(0.0, 1.0, 2.5);
    distinct.vectors = Eigen::MatrixXd::Identity(3, 3);
    for (const auto &g : cluster(distinct)) CHECK(g.multiplicity == 1);

    // rank-2 trivial cycle: every nonzero cluster has even multiplicity
    const auto base = build_cycle(12, 2.0 * M_PI);
    const auto e = eigensolve(assemble_laplacian(base, trivial_connection(base, 2)));
    for (const auto &g : cluster(e))
        if (g.mean_eigenvalue > 1e-8) CHECK(g.multiplicity % 2 == 0);
}

TEST_CASE("dirichlet identity matches the quadratic form") {
    const auto base = build_torus(4, 4, 2.0 * M_PI, 2.0 * M_PI);
    const auto conn = random_connection(base, 2, 14, 0.7);
    const auto lap = assemble_laplacian(base, conn);
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        auto u = make_section(base, 2);
        for (long i = 0; i < u.values.size(); ++i) u.values[i] = rng.next_normal();
        const double quad = base.vertex_volume * u.values.dot(lap.matrix * u.values);
        const double edge_sum = dirichlet_energy(base, conn, u);
        CHECK(std::abs(quad - edge_sum) <= 1e-10 * std::max(1.0, u.values.squaredNorm()));
        CHECK(edge_sum >= 0.0);
    }
}

TEST_CASE("track_curves constant branches for zero field") {
    const auto base = build_cycle(10, 2.0 * M_PI);
    const auto conn = random_connection(base, 2, 3, 0.5);
    SkewField zero;
    zero.rank = 2;
    zero.value_canonical.assign(base.canonical_count, Eigen::MatrixXd::Zero(2, 2));
    const auto curves = track_curves(base, conn, zero, {-0.5, 0.0, 0.5}, 0, 6);
    for (const auto &branch : curves.branches) {
        CHECK(std::abs(branch[0] - branch[1]) <= 1e-10);
        CHECK(std::abs(branch[1] - branch[2]) <= 1e-10);
    }
}

TEST_CASE("track_curves follows the twisted circulant family") {
    const int n = 12;
    const auto base = build_cycle(n, 2.0 * M_PI);
    const double h = 2.0 * M_PI / n;
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    SkewField constant;
    constant.rank = 2;
    constant.value_canonical.assign(base.canonical_count, j);

    const std::vector<double> grid{0.05, 0.1, 0.15, 0.2};
    const auto curves =
        track_curves(base, trivial_connection(base, 2), constant, grid, 0, 2 * n);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        auto expected = circulant(n, h, grid[s]);
        auto minus = circulant(n, h, -grid[s]);
        expected.insert(expected.end(), minus.begin(), minus.end());
        std::sort(expected.begin(), expected.end());
        std::vector<double> got;
        for (const auto &branch : curves.branches) got.push_back(branch[s]);
        std::sort(got.begin(), got.end());
        for (int k = 0; k < 2 * n; ++k) CHECK(std::abs(got[k] - expected[k]) <= 1e-9);
    }
}

TEST_CASE("track_curves rejects bad grids") {
    const auto base = build_cycle(6, 1.0);
    const auto conn = trivial_connection(base, 2);
    const auto field = random_skew_field(base, 2, 1, 1.0);
    CHECK_THROWS_AS(track_curves(base, conn, field, {0.1, 0.1}, 0, 3), UsageError);
    CHECK_THROWS_AS(track_curves(base, conn, field, {}, 0, 3), UsageError);
}
