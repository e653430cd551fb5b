#include "speclab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace speclab::io {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void require_keys(const json &obj, std::initializer_list<const char *> allowed,
                  const std::string &where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto &item : obj.items()) {
        bool found = false;
        for (const char *key : allowed)
            if (item.key() == key) {
                found = true;
                break;
            }
        if (!found) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

LatticeBase parse_base(const json &descriptor) {
    if (!descriptor.contains("type")) throw ConfigError("base: missing 'type'");
    const std::string type = descriptor.at("type");
    try {
        if (type == "cycle") {
            require_keys(descriptor, {"type", "n", "length"}, "base");
            return build_cycle(descriptor.at("n").get<int>(),
                               descriptor.at("length").get<double>());
        }
        if (type == "torus") {
            require_keys(descriptor, {"type", "nx", "ny", "lx", "ly"}, "base");
            return build_torus(descriptor.at("nx").get<int>(), descriptor.at("ny").get<int>(),
                               descriptor.at("lx").get<double>(),
                               descriptor.at("ly").get<double>());
        }
    } catch (const InvalidGeometry &e) {
        throw ConfigError(std::string("base: ") + e.what());
    } catch (const json::exception &e) {
        throw ConfigError(std::string("base: ") + e.what());
    }
    throw ConfigError("base: unknown type '" + type + "'");
}

DiscreteConnection parse_bundle(const json &bundle, const LatticeBase &base) {
    require_keys(bundle, {"rank", "connection"}, "bundle");
    if (!bundle.contains("rank") || !bundle.contains("connection"))
        throw ConfigError("bundle: 'rank' and 'connection' are required");
    int rank = 0;
    try {
        rank = bundle.at("rank").get<int>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bundle: ") + e.what());
    }
    const json &conn = bundle.at("connection");
    if (!conn.contains("type")) throw ConfigError("connection: missing 'type'");
    const std::string type = conn.at("type");
    try {
        if (type == "trivial") {
            require_keys(conn, {"type"}, "connection");
            return trivial_connection(base, rank);
        }
        if (type == "constant") {
            require_keys(conn, {"type", "form"}, "connection");
            const auto entries = conn.at("form").get<std::vector<double>>();
            if (static_cast<int>(entries.size()) != rank * rank)
                throw ConfigError("connection: 'form' must have rank*rank row-major entries");
            Eigen::MatrixXd form(rank, rank);
            for (int i = 0; i < rank; ++i)
                for (int j = 0; j < rank; ++j) form(i, j) = entries[i * rank + j];
            return constant_connection_cycle(base, form);
        }
        if (type == "random") {
            require_keys(conn, {"type", "seed", "magnitude"}, "connection");
            return random_connection(base, rank, conn.at("seed").get<std::uint64_t>(),
                                     conn.at("magnitude").get<double>());
        }
        if (type == "file") {
            require_keys(conn, {"type", "path"}, "connection");
            std::ifstream in(conn.at("path").get<std::string>());
            if (!in) throw ConfigError("connection: cannot open file");
            json j;
            in >> j;
            DiscreteConnection loaded = connection_from_json(j, base);
            if (loaded.rank != rank) throw ConfigError("connection: file rank mismatch");
            return loaded;
        }
    } catch (const InvalidInput &e) {
        throw ConfigError(std::string("connection: ") + e.what());
    } catch (const json::exception &e) {
        throw ConfigError(std::string("connection: ") + e.what());
    }
    throw ConfigError("connection: unknown type '" + type + "'");
}

namespace {

json matrix_to_json(const Eigen::MatrixXd &m) {
    json entries = json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) entries.push_back(m(i, j));
    return entries;
}

Eigen::MatrixXd matrix_from_json(const json &entries, int rank, const std::string &where) {
    if (static_cast<int>(entries.size()) != rank * rank)
        throw ConfigError(where + ": wrong entry count");
    Eigen::MatrixXd m(rank, rank);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) m(i, j) = entries.at(i * rank + j).get<double>();
    return m;
}

} // namespace

json connection_to_json(const DiscreteConnection &conn) {
    json edges = json::object();
    for (std::size_t e = 0; e < conn.transport_canonical.size(); ++e)
        edges[std::to_string(e)] = matrix_to_json(conn.transport_canonical[e]);
    return json{{"rank", conn.rank}, {"transport", edges}};
}

DiscreteConnection connection_from_json(const json &j, const LatticeBase &base) {
    require_keys(j, {"rank", "transport"}, "connection file");
    DiscreteConnection conn;
    conn.rank = j.at("rank").get<int>();
    conn.transport_canonical.resize(base.canonical_count);
    const json &edges = j.at("transport");
    if (static_cast<int>(edges.size()) != base.canonical_count)
        throw ConfigError("connection file: canonical edge count mismatch");
    for (int e = 0; e < base.canonical_count; ++e) {
        const Eigen::MatrixXd u =
            matrix_from_json(edges.at(std::to_string(e)), conn.rank, "transport");
        if ((u.transpose() * u - Eigen::MatrixXd::Identity(conn.rank, conn.rank))
                .cwiseAbs()
                .maxCoeff() > 1e-12)
            throw ConfigError("connection file: transport " + std::to_string(e) +
                              " is not orthogonal");
        conn.transport_canonical[e] = u;
    }
    return conn;
}

json skew_field_to_json(const SkewField &field) {
    json edges = json::object();
    for (std::size_t e = 0; e < field.value_canonical.size(); ++e)
        edges[std::to_string(e)] = matrix_to_json(field.value_canonical[e]);
    return json{{"rank", field.rank}, {"values", edges}};
}

SkewField skew_field_from_json(const json &j, const LatticeBase &base) {
    require_keys(j, {"rank", "values"}, "skew field file");
    SkewField field;
    field.rank = j.at("rank").get<int>();
    field.value_canonical.resize(base.canonical_count);
    const json &edges = j.at("values");
    if (static_cast<int>(edges.size()) != base.canonical_count)
        throw ConfigError("skew field file: canonical edge count mismatch");
    for (int e = 0; e < base.canonical_count; ++e) {
        const Eigen::MatrixXd a =
            matrix_from_json(edges.at(std::to_string(e)), field.rank, "values");
        if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-14)
            throw ConfigError("skew field file: value " + std::to_string(e) + " is not skew");
        field.value_canonical[e] = a;
    }
    return field;
}

std::string spectrum_csv(const EigenPairs &eigs) {
    const auto clusters = cluster(eigs);
    std::string out = "index,eigenvalue,cluster_id,multiplicity\n";
    int cluster_id = 0;
    for (const auto &c : clusters) {
        for (int k = 0; k < c.multiplicity; ++k) {
            const int index = c.first_index + k;
            out += std::to_string(index) + "," + format_double(eigs.values[index]) + "," +
                   std::to_string(cluster_id) + "," + std::to_string(c.multiplicity) + "\n";
        }
        ++cluster_id;
    }
    return out;
}

std::string curves_csv(const EigenCurves &curves) {
    std::string out = "t,branch_id,eigenvalue,overlap\n";
    for (std::size_t k = 0; k < curves.t_grid.size(); ++k) {
        const double overlap = k == 0 ? 1.0 : curves.step_overlaps[k - 1];
        for (std::size_t b = 0; b < curves.branches.size(); ++b)
            out += format_double(curves.t_grid[k]) + "," + std::to_string(b) + "," +
                   format_double(curves.branches[b][k]) + "," + format_double(overlap) + "\n";
    }
    return out;
}

std::string gsimplicity_csv(const GSimplicityReport &report) {
    std::string out = "eigenvalue,real_mult,complex_mult,g_simple\n";
    for (const auto &c : report.clusters)
        out += format_double(c.eigenvalue) + "," + std::to_string(c.real_multiplicity) + "," +
               std::to_string(c.complex_multiplicity) + "," + (c.g_simple ? "1" : "0") + "\n";
    return out;
}

json split_report_to_json(const SplitReport &report) {
    json iterations = json::array();
    for (const auto &it : report.iterations)
        iterations.push_back({{"seed", it.seed},
                              {"t_step", it.t_step},
                              {"max_multiplicity_before", it.max_multiplicity_before},
                              {"max_multiplicity_after", it.max_multiplicity_after},
                              {"min_gap", it.min_gap},
                              {"target_cluster_index", it.target_cluster_index},
                              {"probe_spread", it.probe_spread}});
    const char *status = report.status == SplitStatus::Simplified ? "Simplified"
                         : report.status == SplitStatus::IrreducibleStructure
                             ? "IrreducibleStructure"
                             : "BudgetExhausted";
    return json{{"iterations", iterations},
                {"status", status},
                {"final_min_gap", report.final_min_gap},
                {"final_connection", connection_to_json(report.final_connection)}};
}

json rigidity_report_to_json(const RigidityReport &report, bool verbose_coeffs) {
    json out{{"res_wedge", report.res_wedge},
             {"res_rigid", report.res_rigid},
             {"res_infinitesimal", report.res_infinitesimal},
             {"res_bc", report.res_bc},
             {"degenerate_gram_vertices", report.degenerate_gram_vertices}};
    if (verbose_coeffs) {
        json coeffs = json::array();
        for (const auto &c : report.coeffs)
            coeffs.push_back({{"edge", c.edge},
                              {"a", c.a},
                              {"b", c.b},
                              {"c", c.c},
                              {"d", c.d},
                              {"fit_residual", c.fit_residual},
                              {"degenerate_gram", c.degenerate_gram}});
        out["coefficients"] = coeffs;
    }
    return out;
}

void write_atomic(const std::string &path, const std::string &content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace speclab::io
