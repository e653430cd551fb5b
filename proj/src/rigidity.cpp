#include "speclab/rigidity.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

void check_pair(const DiscreteSection &u, const DiscreteSection &v, const DiscreteConnection &conn,
                const LatticeBase &base) {
    if (u.rank != v.rank || u.rank != conn.rank) throw ShapeMismatch("rank mismatch");
    if (u.values.size() != static_cast<long>(u.rank) * base.vertex_count ||
        v.values.size() != u.values.size())
        throw ShapeMismatch("sections do not match lattice");
}

} // namespace

RigidityReport rigidity_report(const DiscreteSection &u, const DiscreteSection &v,
                               const DiscreteConnection &conn, const LatticeBase &base,
                               InfinitesimalMode mode) {
    check_pair(u, v, conn, base);
    RigidityReport report;

    std::vector<Eigen::VectorXd> du(base.canonical_count), dv(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e) {
        du[e] = covariant_difference(base, conn, u, e);
        dv[e] = covariant_difference(base, conn, v, e);
    }

    // wedge residual, scale-free
    double wedge_scale = 0.0, wedge_dev = 0.0;
    for (int e = 0; e < base.canonical_count; ++e) {
        const int i = base.edges[e].tail;
        const Eigen::MatrixXd wu = wedge(du[e], Eigen::VectorXd(u.at(i)));
        const Eigen::MatrixXd wv = wedge(dv[e], Eigen::VectorXd(v.at(i)));
        wedge_dev = std::max(wedge_dev, (wu - wv).norm());
        wedge_scale = std::max(wedge_scale, std::max(wu.norm(), wv.norm()));
        wedge_scale = std::max(wedge_scale,
                               du[e].norm() * u.at(i).norm() + dv[e].norm() * v.at(i).norm());
    }
    report.res_wedge = wedge_scale > 0.0 ? wedge_dev / wedge_scale : 0.0;

    // pointwise norm residual
    double rigid_scale = 0.0, rigid_dev = 0.0;
    for (int i = 0; i < base.vertex_count; ++i) {
        const double nu = u.at(i).squaredNorm();
        const double nv = v.at(i).squaredNorm();
        rigid_dev = std::max(rigid_dev, std::abs(nu - nv));
        rigid_scale = std::max(rigid_scale, nu + nv);
    }
    report.res_rigid = rigid_scale > 0.0 ? rigid_dev / rigid_scale : 0.0;

    // covariant-derivative norm residual
    if (mode == InfinitesimalMode::IncidentSum) {
        std::vector<double> su(base.vertex_count, 0.0), sv(base.vertex_count, 0.0);
        for (int e = 0; e < base.canonical_count; ++e) {
            // both orientations carry the same squared difference quotient
            const int i = base.edges[e].tail;
            const int j = base.edges[e].head;
            su[i] += du[e].squaredNorm();
            su[j] += du[e].squaredNorm();
            sv[i] += dv[e].squaredNorm();
            sv[j] += dv[e].squaredNorm();
        }
        double dev = 0.0, scale = 0.0;
        for (int i = 0; i < base.vertex_count; ++i) {
            dev = std::max(dev, std::abs(su[i] - sv[i]));
            scale = std::max(scale, su[i] + sv[i]);
        }
        report.res_infinitesimal = scale > 0.0 ? dev / scale : 0.0;
    } else {
        double dev = 0.0, scale = 0.0;
        for (int e = 0; e < base.canonical_count; ++e) {
            dev = std::max(dev, std::abs(du[e].squaredNorm() - dv[e].squaredNorm()));
            scale = std::max(scale, du[e].squaredNorm() + dv[e].squaredNorm());
        }
        report.res_infinitesimal = scale > 0.0 ? dev / scale : 0.0;
    }

    // per-edge coefficient system du = a u + b v, dv = c u + d v
    std::vector<bool> degenerate(base.vertex_count, false);
    report.coeffs.reserve(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e) {
        const int i = base.edges[e].tail;
        EdgeCoefficients c;
        c.edge = e;
        const Eigen::VectorXd ui = u.at(i);
        const Eigen::VectorXd vi = v.at(i);
        Eigen::Matrix2d gram;
        gram << ui.squaredNorm(), ui.dot(vi), ui.dot(vi), vi.squaredNorm();
        const double scale = ui.norm() * vi.norm();
        const double det_normalized =
            scale > 0.0 ? gram.determinant() / (scale * scale) : 0.0; // sin^2 of the angle
        if (det_normalized < 1e-12) {
            c.degenerate_gram = true;
            if (!degenerate[i]) {
                degenerate[i] = true;
                report.degenerate_gram_vertices.push_back(i);
            }
        } else {
            const Eigen::Vector2d ab =
                gram.ldlt().solve(Eigen::Vector2d(du[e].dot(ui), du[e].dot(vi)));
            const Eigen::Vector2d cd =
                gram.ldlt().solve(Eigen::Vector2d(dv[e].dot(ui), dv[e].dot(vi)));
            c.a = ab[0];
            c.b = ab[1];
            c.c = cd[0];
            c.d = cd[1];
            const double ru = (du[e] - c.a * ui - c.b * vi).norm();
            const double rv = (dv[e] - c.c * ui - c.d * vi).norm();
            const double dscale = std::max(du[e].norm() + dv[e].norm(), 1e-300);
            c.fit_residual = (ru + rv) / dscale;
            report.res_bc =
                std::max(report.res_bc, std::abs(c.b + c.c) / (1.0 + std::abs(c.b) + std::abs(c.c)));
        }
        report.coeffs.push_back(c);
    }
    return report;
}

ParallelCoefficients parallel_coefficient_check(const DiscreteSection &u,
                                                const DiscreteConnection &conn,
                                                const LatticeBase &base) {
    if (u.rank != conn.rank) throw ShapeMismatch("rank mismatch");
    if (u.values.cwiseAbs().maxCoeff() == 0.0) throw UsageError("zero section");

    double sup_u2 = 0.0;
    for (int i = 0; i < base.vertex_count; ++i)
        sup_u2 = std::max(sup_u2, u.at(i).squaredNorm());

    std::vector<Eigen::VectorXd> du(base.canonical_count);
    double sup_du = 0.0;
    for (int e = 0; e < base.canonical_count; ++e) {
        du[e] = covariant_difference(base, conn, u, e);
        sup_du = std::max(sup_du, du[e].norm());
    }

    // Tikhonov-regularized least squares: the continuum coefficient is a
    // bounded 1-form, so a fit that only works with a diverging alpha near a
    // zero of u must register as a failure, not as an exact solve.
    const double reg = 1e-8 * sup_u2;

    ParallelCoefficients result;
    result.alpha.resize(base.canonical_count);
    for (int e = 0; e < base.canonical_count; ++e) {
        const int i = base.edges[e].tail;
        const Eigen::VectorXd ui = u.at(i);
        const double alpha = du[e].dot(ui) / (ui.squaredNorm() + reg);
        result.alpha[e] = alpha;
        if (sup_du > 0.0)
            result.max_residual =
                std::max(result.max_residual, (du[e] - alpha * ui).norm() / sup_du);
    }
    return result;
}

RotationFit constant_rotation_fit(const DiscreteSection &phi, const DiscreteSection &psi,
                                  const LatticeBase &base) {
    if (phi.rank != 2 || psi.rank != 2) throw UsageError("rotation fit requires rank-2 sections");
    if (phi.values.cwiseAbs().maxCoeff() == 0.0 || psi.values.cwiseAbs().maxCoeff() == 0.0)
        throw UsageError("zero section");

    Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
    double phi_energy = 0.0;
    for (int i = 0; i < base.vertex_count; ++i) {
        cross += base.vertex_volume * phi.at(i) * psi.at(i).transpose();
        phi_energy += base.vertex_volume * phi.at(i).squaredNorm();
    }

    // orthogonal Procrustes over all of O(2), reflections included
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RotationFit fit;
    fit.rotation = svd.matrixU() * svd.matrixV().transpose();
    fit.is_reflection = fit.rotation.determinant() < 0.0;

    double misfit = 0.0;
    for (int i = 0; i < base.vertex_count; ++i)
        misfit += base.vertex_volume * (phi.at(i) - fit.rotation * psi.at(i)).squaredNorm();
    fit.residual = misfit / phi_energy;
    return fit;
}

} // namespace speclab
