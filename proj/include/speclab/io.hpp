#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "speclab/bundle.hpp"
#include "speclab/gbundle.hpp"
#include "speclab/perturbation.hpp"
#include "speclab/rigidity.hpp"

namespace speclab::io {

using nlohmann::json;

// shortest round-trip decimal (17 significant digits)
std::string format_double(double x);

// rejects unknown keys; throws ConfigError
LatticeBase parse_base(const json &descriptor);

// {rank, connection:{type: trivial|constant|random|file, ...}}
DiscreteConnection parse_bundle(const json &bundle, const LatticeBase &base);

json connection_to_json(const DiscreteConnection &conn);
DiscreteConnection connection_from_json(const json &j, const LatticeBase &base);
json skew_field_to_json(const SkewField &field);
SkewField skew_field_from_json(const json &j, const LatticeBase &base);

std::string spectrum_csv(const EigenPairs &eigs);
std::string curves_csv(const EigenCurves &curves);
std::string gsimplicity_csv(const GSimplicityReport &report);
json split_report_to_json(const SplitReport &report);
json rigidity_report_to_json(const RigidityReport &report, bool verbose_coeffs);

// temp file + rename
void write_atomic(const std::string &path, const std::string &content);

void require_keys(const json &obj, std::initializer_list<const char *> allowed,
                  const std::string &where);

} // namespace speclab::io
