#pragma once

#include <string>
#include <vector>

#include "speclab/perturbation.hpp"

namespace speclab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    // floats that must reproduce bit-identically across reruns with the
    // same seeds; the determinism criterion compares these
    std::vector<double> digest;
};

CriterionResult check_hs_identity();
CriterionResult check_circulant_oracle();
CriterionResult check_variation_formula();
CriterionResult check_constructive_splitting(SplitReport &report_out);
CriterionResult check_rank2_obstruction();
CriterionResult check_casimir_shift();
CriterionResult check_rigidity_trichotomy(const SplitReport &split_report);
CriterionResult check_rotation_fit();

// Criteria 1-8 in order; 4 and 7 share one splitting run.
std::vector<CriterionResult> run_all_criteria();

} // namespace speclab
