#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speclab/spectral.hpp"

namespace speclab {

struct FirstOrderMatrix {
    Eigen::MatrixXd matrix;   // l x l, B^T Ldot B in the volume-weighted pairing
    Eigen::VectorXd slopes;   // ascending eigenvalues, the predicted branch slopes
};

enum class SplitStatus { Simplified, IrreducibleStructure, BudgetExhausted };

struct SplitIteration {
    std::uint64_t seed = 0;
    double t_step = 0.0;
    int max_multiplicity_before = 0;
    int max_multiplicity_after = 0;
    double min_gap = 0.0;
    int target_cluster_index = 0;
    double probe_spread = 0.0;
};

struct SplitReport {
    std::vector<SplitIteration> iterations;
    DiscreteConnection final_connection;
    SplitStatus status = SplitStatus::BudgetExhausted;
    double final_min_gap = 0.0;
};

struct ProbeResult {
    SkewField field;
    double non_scalarity = 0.0; // |M - (tr M / l) I|_2
    double slope_spread = 0.0;  // max slope - min slope
};

// Analytic d/dt at t=0 of the Laplacian along U_e(t) = exp(t len_e A_e) U_e.
Eigen::MatrixXd laplacian_derivative(const LatticeBase &base, const DiscreteConnection &conn,
                                     const SkewField &field);
Eigen::MatrixXd laplacian_derivative_serial(const LatticeBase &base,
                                            const DiscreteConnection &conn,
                                            const SkewField &field);

FirstOrderMatrix first_order_matrix(const SpectralCluster &clus, const Eigen::MatrixXd &ldot);

struct VariationResult {
    double value = 0.0;
    bool input_normalized = true; // false when |u|_L2 deviates from 1 by > 1e-8
};

// Edge-sum form of the eigenvalue slope: vol * sum_e <<A_e, du_e ^ u_tail>>
// over canonical edges, algebraically equal to <Ldot u, u> for any u.
VariationResult variation_formula_geometric(const DiscreteSection &u, const SkewField &field,
                                            const DiscreteConnection &conn,
                                            const LatticeBase &base);

std::optional<ProbeResult> nontriviality_probe(const SpectralCluster &clus, const LatticeBase &base,
                                               const DiscreteConnection &conn, int trials,
                                               std::uint64_t seed,
                                               double field_magnitude = 1.0);

struct SplitOptions {
    int leading_count = 6;
    double target_gap = 1e-6;
    int budget = 50;
    std::uint64_t seed = 1;
    int probe_trials = 32;
    double t_user_max = 1.0;
    double non_scalarity_rel_tol = 1e-10;
};

SplitReport simplify_spectrum(const LatticeBase &base, const DiscreteConnection &conn,
                              const SplitOptions &opts);

} // namespace speclab
