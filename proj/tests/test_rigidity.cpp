#include <doctest.h>

#include <cmath>

#include "speclab/rigidity.hpp"
#include "speclab/rng.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

DiscreteSection normalized_eigsection(const EigenPairs &eigs, int index, int rank,
                                      const LatticeBase &base) {
    DiscreteSection u;
    u.rank = rank;
    u.values = eigs.vectors.col(index) / std::sqrt(base.vertex_volume);
    return u;
}

} // namespace

TEST_CASE("rigidity report vanishes for identical sections") {
    const auto base = build_cycle(12, 2.0 * M_PI);
    const auto conn = random_connection(base, 3, 8, 0.6);
    const auto eigs = eigensolve(assemble_laplacian(base, conn));
    for (int index : {0, 3, 7}) {
        const auto u = normalized_eigsection(eigs, index, 3, base);
        const auto rep = rigidity_report(u, u, conn, base);
        CHECK(rep.res_wedge == 0.0);
        CHECK(rep.res_rigid == 0.0);
        CHECK(rep.res_infinitesimal == 0.0);
        // u against itself is parallel everywhere
        CHECK(static_cast<int>(rep.degenerate_gram_vertices.size()) == base.vertex_count);
    }
}

TEST_CASE("rank-2 J-doublet is rigid in all three senses yet non-parallel") {
    const auto base = build_cycle(16, 2.0 * M_PI);
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    const auto conn = constant_connection_cycle(base, 0.3 * j);
    const auto eigs = eigensolve(assemble_laplacian(base, conn));
    const auto clusters = cluster(eigs);

    const SpectralCluster *doublet = nullptr;
    for (const auto &c : clusters)
        if (c.multiplicity == 2 && c.mean_eigenvalue > 1e-8) {
            doublet = &c;
            break;
        }
    REQUIRE(doublet != nullptr);

    auto u = normalized_eigsection(eigs, doublet->first_index, 2, base);
    // v = J u is the partner eigensection
    DiscreteSection v = u;
    for (int i = 0; i < base.vertex_count; ++i) v.at(i) = j * u.at(i);

    const auto rep = rigidity_report(u, v, conn, base);
    CHECK(rep.res_wedge <= 1e-10);
    CHECK(rep.res_rigid <= 1e-10);
    CHECK(rep.res_infinitesimal <= 1e-10);
    CHECK(rep.degenerate_gram_vertices.empty());
    // the b+c constraint follows wherever the wedge identity holds
    CHECK(rep.res_bc <= 1e-8);
}

TEST_CASE("split-ready rank-3 doublet violates at least one rigidity identity") {
    const auto base = build_torus(8, 8, 2.0 * M_PI, 2.0 * M_PI);
    const auto conn = trivial_connection(base, 3);
    const auto eigs = eigensolve(assemble_laplacian(base, conn));
    const auto clusters = cluster(eigs);
    REQUIRE(clusters.size() >= 2);
    const auto &c = clusters[1];
    REQUIRE(c.multiplicity >= 2);
    const auto u = normalized_eigsection(eigs, c.first_index, 3, base);
    const auto v = normalized_eigsection(eigs, c.first_index + 1, 3, base);
    const auto rep = rigidity_report(u, v, conn, base);
    CHECK(std::max({rep.res_wedge, rep.res_rigid, rep.res_infinitesimal}) > 1e-6);
}

TEST_CASE("per-direction infinitesimal mode is exposed") {
    const auto base = build_torus(4, 4, 2.0, 2.0);
    const auto conn = random_connection(base, 2, 5, 0.4);
    const auto eigs = eigensolve(assemble_laplacian(base, conn));
    const auto u = normalized_eigsection(eigs, 1, 2, base);
    const auto v = normalized_eigsection(eigs, 2, 2, base);
    const auto a = rigidity_report(u, v, conn, base, InfinitesimalMode::IncidentSum);
    const auto b = rigidity_report(u, v, conn, base, InfinitesimalMode::PerDirection);
    CHECK(a.res_infinitesimal >= 0.0);
    CHECK(b.res_infinitesimal >= 0.0);
    CHECK(a.res_wedge == b.res_wedge);
}

TEST_CASE("parallel coefficient check") {
    const auto base = build_cycle(64, 2.0 * M_PI);

    // constant section under the trivial connection: alpha = 0, residual 0
    const auto conn2 = trivial_connection(base, 2);
    DiscreteSection parallel = make_section(base, 2);
    for (int i = 0; i < base.vertex_count; ++i) parallel.at(i) << 1.0, 0.5;
    const auto pc = parallel_coefficient_check(parallel, conn2, base);
    for (double a : pc.alpha) CHECK(a == 0.0);
    CHECK(pc.max_residual == 0.0);

    // cycle eigenfunction is far from the parallel-coefficient case
    const auto conn1 = trivial_connection(base, 1);
    const auto eigs = eigensolve(assemble_laplacian(base, conn1));
    DiscreteSection u;
    u.rank = 1;
    u.values = eigs.vectors.col(1);
    const auto res = parallel_coefficient_check(u, conn1, base);
    CHECK(res.max_residual > 0.1);

    // scale invariance
    DiscreteSection u2 = u;
    u2.values *= 2.0;
    const auto res2 = parallel_coefficient_check(u2, conn1, base);
    CHECK(res2.max_residual == doctest::Approx(res.max_residual).epsilon(1e-12));
    for (std::size_t e = 0; e < res.alpha.size(); ++e)
        CHECK(res2.alpha[e] == doctest::Approx(res.alpha[e]).epsilon(1e-10));

    DiscreteSection zero = make_section(base, 1);
    CHECK_THROWS_AS(parallel_coefficient_check(zero, conn1, base), UsageError);
}

TEST_CASE("constant rotation fit") {
    const auto base = build_cycle(32, 2.0 * M_PI);
    DiscreteSection phi = make_section(base, 2);
    for (int i = 0; i < base.vertex_count; ++i) {
        const double th = 2.0 * M_PI * i / base.vertex_count;
        phi.at(i) << std::cos(th) + 0.4, std::sin(2.0 * th);
    }

    Eigen::Matrix2d r07;
    r07 << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);

    DiscreteSection psi = make_section(base, 2);
    for (int i = 0; i < base.vertex_count; ++i) psi.at(i) = r07 * phi.at(i);
    const auto fit = constant_rotation_fit(phi, psi, base);
    CHECK((fit.rotation - r07.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(fit.residual <= 1e-12);
    CHECK_FALSE(fit.is_reflection);

    // pointwise-varying rotation
    DiscreteSection psi_var = make_section(base, 2);
    for (int i = 0; i < base.vertex_count; ++i) {
        const double a = std::sin(2.0 * M_PI * i / base.vertex_count);
        Eigen::Matrix2d r;
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        psi_var.at(i) = r * phi.at(i);
    }
    CHECK(constant_rotation_fit(phi, psi_var, base).residual > 1e-3);

    // conjugation recovers a reflection
    DiscreteSection psi_conj = make_section(base, 2);
    for (int i = 0; i < base.vertex_count; ++i)
        psi_conj.at(i) << phi.at(i)[0], -phi.at(i)[1];
    const auto conj_fit = constant_rotation_fit(phi, psi_conj, base);
    CHECK(conj_fit.is_reflection);
    CHECK(conj_fit.residual <= 1e-12);

    DiscreteSection zero = make_section(base, 2);
    CHECK_THROWS_AS(constant_rotation_fit(zero, psi, base), UsageError);
}

TEST_CASE("rotation fit is covariant under a global rotation") {
    const auto base = build_cycle(20, 2.0 * M_PI);
    Xoshiro256 rng(23);
    DiscreteSection phi = make_section(base, 2), psi = make_section(base, 2);
    for (long i = 0; i < phi.values.size(); ++i) {
        phi.values[i] = rng.next_normal();
        psi.values[i] = rng.next_normal();
    }
    const auto fit = constant_rotation_fit(phi, psi, base);

    Eigen::Matrix2d r;
    r << std::cos(1.1), -std::sin(1.1), std::sin(1.1), std::cos(1.1);
    DiscreteSection rphi = phi, rpsi = psi;
    for (int i = 0; i < base.vertex_count; ++i) {
        rphi.at(i) = r * phi.at(i);
        rpsi.at(i) = r * psi.at(i);
    }
    const auto rfit = constant_rotation_fit(rphi, rpsi, base);
    CHECK((rfit.rotation - r * fit.rotation * r.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(rfit.residual - fit.residual) <= 1e-10);
}
