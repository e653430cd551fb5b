#include "speclab/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "speclab/rng.hpp"

namespace speclab {

namespace {

void check(const LatticeBase &base, const DiscreteConnection &conn, const SkewField &field) {
    if (conn.rank != field.rank) throw ShapeMismatch("connection and field ranks differ");
    if (static_cast<int>(conn.transport_canonical.size()) != base.canonical_count ||
        static_cast<int>(field.value_canonical.size()) != base.canonical_count)
        throw ShapeMismatch("structure does not match lattice");
}

double operator_two_norm(const Eigen::MatrixXd &sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(sym, Eigen::EigenvaluesOnly);
    return s.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

Eigen::MatrixXd laplacian_derivative(const LatticeBase &base, const DiscreteConnection &conn,
                                     const SkewField &field) {
    check(base, conn, field);
    const int m = conn.rank;
    Eigen::MatrixXd ldot = Eigen::MatrixXd::Zero(m * base.vertex_count, m * base.vertex_count);

    // d/dt U_e(t)|0 = len_e A_e U_e on canonical edges, the transpose on
    // reversed ones; only off-diagonal blocks move. Each canonical edge owns
    // a distinct (i,j) block pair, so the loop is parallel over edges.
#pragma omp parallel for schedule(static)
    for (int e = 0; e < base.canonical_count; ++e) {
        const Edge &edge = base.edges[e];
        const Eigen::MatrixXd block =
            -(field.value_canonical[e] * conn.transport_canonical[e]) / edge.length;
        ldot.block(edge.tail * m, edge.head * m, m, m) += block;
        ldot.block(edge.head * m, edge.tail * m, m, m) += block.transpose();
    }
    return ldot;
}

Eigen::MatrixXd laplacian_derivative_serial(const LatticeBase &base,
                                            const DiscreteConnection &conn,
                                            const SkewField &field) {
    check(base, conn, field);
    const int m = conn.rank;
    Eigen::MatrixXd ldot = Eigen::MatrixXd::Zero(m * base.vertex_count, m * base.vertex_count);
    for (int e = 0; e < static_cast<int>(base.edges.size()); ++e) {
        const Edge &edge = base.edges[e];
        const Eigen::MatrixXd &u = conn.transport_canonical[base.canonical_id(e)];
        const Eigen::MatrixXd &a = field.value_canonical[base.canonical_id(e)];
        Eigen::MatrixXd dtransport = a * u;
        if (!base.is_canonical(e)) dtransport = dtransport.transpose().eval();
        ldot.block(edge.tail * m, edge.head * m, m, m) -= dtransport / edge.length;
    }
    return ldot;
}

FirstOrderMatrix first_order_matrix(const SpectralCluster &clus, const Eigen::MatrixXd &ldot) {
    if (clus.basis.rows() != ldot.rows()) throw ShapeMismatch("cluster basis does not match ldot");
    FirstOrderMatrix fom;
    fom.matrix = clus.basis.transpose() * ldot * clus.basis;
    fom.matrix = 0.5 * (fom.matrix + fom.matrix.transpose().eval()); // kill rounding asymmetry
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(fom.matrix);
    if (s.info() != Eigen::Success) throw SolverFailure("first-order matrix eigensolve failed");
    fom.slopes = s.eigenvalues();
    return fom;
}

VariationResult variation_formula_geometric(const DiscreteSection &u, const SkewField &field,
                                            const DiscreteConnection &conn,
                                            const LatticeBase &base) {
    check(base, conn, field);
    if (u.rank != conn.rank) throw ShapeMismatch("section rank does not match connection");
    VariationResult result;
    const double norm2 = l2_inner(u, u, base);
    result.input_normalized = std::abs(norm2 - 1.0) <= 1e-8;
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (int e = 0; e < base.canonical_count; ++e) {
        const Edge &edge = base.edges[e];
        const Eigen::VectorXd du = covariant_difference(base, conn, u, e);
        sum += hs_inner(field.value_canonical[e], wedge(du, u.at(edge.tail)));
    }
    result.value = base.vertex_volume * sum;
    return result;
}

std::optional<ProbeResult> nontriviality_probe(const SpectralCluster &clus, const LatticeBase &base,
                                               const DiscreteConnection &conn, int trials,
                                               std::uint64_t seed, double field_magnitude) {
    if (clus.multiplicity < 2) throw UsageError("probe requires a degenerate cluster");
    if (conn.rank < 2) throw StructurallyZero("skew endomorphisms of a line bundle vanish");
    if (trials < 1) throw UsageError("at least one trial required");

    Xoshiro256 seeder(seed);
    std::vector<std::uint64_t> sub_seeds(trials);
    for (auto &s : sub_seeds) s = seeder.next_u64();

    std::vector<double> non_scalarity(trials), spread(trials);
#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < trials; ++trial) {
        const SkewField field =
            random_skew_field(base, conn.rank, sub_seeds[trial], field_magnitude);
        const Eigen::MatrixXd ldot = laplacian_derivative(base, conn, field);
        const FirstOrderMatrix fom = first_order_matrix(clus, ldot);
        const int l = clus.multiplicity;
        const Eigen::MatrixXd deviat =
            fom.matrix - (fom.matrix.trace() / l) * Eigen::MatrixXd::Identity(l, l);
        non_scalarity[trial] = operator_two_norm(deviat);
        spread[trial] = fom.slopes.maxCoeff() - fom.slopes.minCoeff();
    }

    int best = 0;
    for (int trial = 1; trial < trials; ++trial)
        if (non_scalarity[trial] > non_scalarity[best]) best = trial;

    ProbeResult result;
    result.field = random_skew_field(base, conn.rank, sub_seeds[best], field_magnitude);
    result.non_scalarity = non_scalarity[best];
    result.slope_spread = spread[best];
    return result;
}

namespace {

struct LeadingView {
    std::vector<SpectralCluster> clusters; // only those touching the leading window
    int simple_count = 0;
    int max_multiplicity = 1;
    double min_gap = 0.0;
    Eigen::VectorXd values;
};

LeadingView leading_view(const EigenPairs &eigs, int n) {
    LeadingView view;
    view.values = eigs.values;
    auto all = cluster(eigs);
    for (const auto &c : all) {
        if (c.first_index >= n) break;
        view.clusters.push_back(c);
    }
    view.min_gap = std::numeric_limits<double>::infinity();
    for (const auto &c : view.clusters) {
        view.max_multiplicity = std::max(view.max_multiplicity, c.multiplicity);
        if (c.multiplicity == 1) ++view.simple_count;
    }
    for (std::size_t k = 1; k < view.clusters.size(); ++k) {
        const auto &a = view.clusters[k - 1];
        const auto &b = view.clusters[k];
        view.min_gap = std::min(view.min_gap,
                                eigs.values[b.first_index] -
                                    eigs.values[a.first_index + a.multiplicity - 1]);
    }
    return view;
}

} // namespace

SplitReport simplify_spectrum(const LatticeBase &base, const DiscreteConnection &conn,
                              const SplitOptions &opts) {
    if (opts.leading_count < 1 || opts.target_gap <= 0.0 || opts.budget < 1)
        throw UsageError("invalid splitting parameters");

    SplitReport report;
    DiscreteConnection current = conn;
    Xoshiro256 seeder(opts.seed);

    for (int iter = 0; iter < opts.budget; ++iter) {
        const auto eigs = eigensolve(assemble_laplacian(base, current));
        const auto view = leading_view(eigs, opts.leading_count);

        const bool all_simple = view.max_multiplicity == 1;
        if (all_simple && view.min_gap > opts.target_gap) {
            report.status = SplitStatus::Simplified;
            report.final_min_gap = view.min_gap;
            break;
        }

        // lowest degenerate cluster with a non-scalar first-order response
        std::optional<ProbeResult> chosen;
        std::uint64_t probe_seed = 0;
        int chosen_cluster = -1;
        for (std::size_t k = 0; k < view.clusters.size(); ++k) {
            const auto &c = view.clusters[k];
            if (c.multiplicity < 2) continue;
            const std::uint64_t s = seeder.next_u64();
            std::optional<ProbeResult> probe;
            try {
                probe = nontriviality_probe(c, base, current, opts.probe_trials, s);
            } catch (const StructurallyZero &) {
                probe.reset();
            }
            if (probe) {
                const Eigen::MatrixXd probe_ldot =
                    laplacian_derivative(base, current, probe->field);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(
                    first_order_matrix(c, probe_ldot).matrix, Eigen::EigenvaluesOnly);
                const double scale = ms.eigenvalues().cwiseAbs().maxCoeff();
                // the absolute floor keeps pure-roundoff responses (e.g. on a
                // kernel of parallel sections, where scale itself is ~0) from
                // passing the relative test
                if (probe->non_scalarity >
                        opts.non_scalarity_rel_tol * std::max(scale, 1e-300) &&
                    probe->non_scalarity > 1e-12 * probe_ldot.norm()) {
                    chosen = probe;
                    probe_seed = s;
                    chosen_cluster = static_cast<int>(k);
                    break;
                }
            }
        }
        if (!chosen && all_simple) {
            // simple but gaps below target and no degenerate cluster to work
            // on; nothing more a first-order step can do
            report.status = SplitStatus::BudgetExhausted;
            report.final_min_gap = view.min_gap;
            break;
        }
        if (!chosen) {
            report.status = SplitStatus::IrreducibleStructure;
            report.final_min_gap = view.min_gap;
            break;
        }

        const auto &target = view.clusters[chosen_cluster];
        double gap = std::numeric_limits<double>::infinity();
        if (chosen_cluster > 0) {
            const auto &prev = view.clusters[chosen_cluster - 1];
            gap = std::min(gap, view.values[target.first_index] -
                                    view.values[prev.first_index + prev.multiplicity - 1]);
        }
        const int after = target.first_index + target.multiplicity;
        if (after < view.values.size())
            gap = std::min(gap, view.values[after] - view.values[after - 1]);
        if (!std::isfinite(gap)) gap = 1.0;

        const Eigen::MatrixXd ldot = laplacian_derivative(base, current, chosen->field);
        const double ldot_norm = operator_two_norm(ldot);
        double t = std::min(0.1 * gap / std::max(ldot_norm, 1e-300), opts.t_user_max);

        // Weyl-guarded step: retry with a halved step if a coincidence ever
        // reduces the count of simple leading eigenvalues
        SplitIteration it;
        it.seed = probe_seed;
        it.max_multiplicity_before = view.max_multiplicity;
        it.target_cluster_index = chosen_cluster;
        it.probe_spread = chosen->slope_spread;
        bool stepped = false;
        for (int attempt = 0; attempt < 10; ++attempt) {
            DiscreteConnection candidate = perturb(base, current, chosen->field, t);
            const auto new_view =
                leading_view(eigensolve(assemble_laplacian(base, candidate)), opts.leading_count);
            if (new_view.simple_count >= view.simple_count) {
                current = std::move(candidate);
                it.t_step = t;
                it.max_multiplicity_after = new_view.max_multiplicity;
                it.min_gap = new_view.min_gap;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if (!stepped) throw SolverFailure("splitting step kept losing simple eigenvalues");
        report.iterations.push_back(it);
    }

    if (report.status == SplitStatus::BudgetExhausted && report.final_min_gap == 0.0) {
        const auto view =
            leading_view(eigensolve(assemble_laplacian(base, current)), opts.leading_count);
        report.final_min_gap = view.min_gap;
    }
    report.final_connection = std::move(current);
    return report;
}

} // namespace speclab
