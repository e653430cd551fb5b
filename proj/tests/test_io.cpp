#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "speclab/io.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;
using speclab::io::json;

TEST_CASE("format_double round-trips exactly") {
    for (double x : {0.0, 1.0, -2.5, M_PI, 1e-17, 3.0e300, 0.1 + 0.2}) {
        const std::string s = io::format_double(x);
        CHECK(std::stod(s) == x);
    }
}

TEST_CASE("parse_base accepts cycle and torus, rejects junk") {
    const auto cyc = io::parse_base(json{{"type", "cycle"}, {"n", 4}, {"length", 4.0}});
    CHECK(cyc.vertex_count == 4);
    CHECK(cyc.edges[0].length == doctest::Approx(1.0));

    const auto tor = io::parse_base(
        json{{"type", "torus"}, {"nx", 3}, {"ny", 4}, {"lx", 1.0}, {"ly", 2.0}});
    CHECK(tor.vertex_count == 12);

    CHECK_THROWS_AS(io::parse_base(json{{"type", "sphere"}}), ConfigError);
    CHECK_THROWS_AS(io::parse_base(json{{"n", 4}, {"length", 4.0}}), ConfigError);
    CHECK_THROWS_AS(io::parse_base(json{{"type", "cycle"}, {"n", 4}}), ConfigError);
    CHECK_THROWS_AS(
        io::parse_base(json{{"type", "cycle"}, {"n", 4}, {"length", 4.0}, {"extra", 1}}),
        ConfigError);
    CHECK_THROWS_AS(io::parse_base(json{{"type", "cycle"}, {"n", 2}, {"length", 4.0}}),
                    ConfigError);
    CHECK_THROWS_AS(io::parse_base(json{{"type", "cycle"}, {"n", "four"}, {"length", 4.0}}),
                    ConfigError);
}

TEST_CASE("parse_bundle connection variants") {
    const auto base = io::parse_base(json{{"type", "cycle"}, {"n", 8}, {"length", 4.0}});

    const auto triv = io::parse_bundle(
        json{{"rank", 2}, {"connection", json{{"type", "trivial"}}}}, base);
    CHECK(triv.rank == 2);
    CHECK(triv.transport_canonical[0].isIdentity(1e-15));

    const auto constant = io::parse_bundle(
        json{{"rank", 2},
             {"connection", json{{"type", "constant"}, {"form", {0.0, -0.3, 0.3, 0.0}}}}},
        base);
    CHECK(constant.transport_canonical[0](0, 0) == doctest::Approx(std::cos(0.3 * 0.5)));

    const auto rnd = io::parse_bundle(
        json{{"rank", 3},
             {"connection", json{{"type", "random"}, {"seed", 7}, {"magnitude", 0.5}}}},
        base);
    const auto rnd2 = random_connection(base, 3, 7, 0.5);
    for (int e = 0; e < base.canonical_count; ++e)
        CHECK((rnd.transport_canonical[e] - rnd2.transport_canonical[e]).cwiseAbs().maxCoeff() ==
              0.0);

    CHECK_THROWS_AS(io::parse_bundle(json{{"rank", 2}}, base), ConfigError);
    CHECK_THROWS_AS(
        io::parse_bundle(json{{"rank", 2}, {"connection", json{{"type", "nope"}}}}, base),
        ConfigError);
    CHECK_THROWS_AS(
        io::parse_bundle(
            json{{"rank", 2},
                 {"connection", json{{"type", "constant"}, {"form", {0.0, -0.3, 0.3}}}}},
            base),
        ConfigError);
    // non-skew constant form
    CHECK_THROWS_AS(
        io::parse_bundle(
            json{{"rank", 2},
                 {"connection", json{{"type", "constant"}, {"form", {1.0, 0.0, 0.0, 1.0}}}}},
            base),
        ConfigError);
}

TEST_CASE("connection json round trip") {
    const auto base = build_torus(3, 3, 2.0, 2.0);
    const auto conn = random_connection(base, 3, 42, 0.7);
    const json j = io::connection_to_json(conn);
    const auto back = io::connection_from_json(j, base);
    CHECK(back.rank == 3);
    for (int e = 0; e < base.canonical_count; ++e)
        CHECK((back.transport_canonical[e] - conn.transport_canonical[e]).cwiseAbs().maxCoeff() <=
              1e-15);

    json bad = j;
    bad["transport"]["0"][0] = 2.0; // breaks orthogonality
    CHECK_THROWS_AS(io::connection_from_json(bad, base), ConfigError);

    json wrong_count = j;
    wrong_count["transport"].erase("0");
    CHECK_THROWS_AS(io::connection_from_json(wrong_count, base), ConfigError);
}

TEST_CASE("skew field json round trip") {
    const auto base = build_cycle(6, 2.0 * M_PI);
    const auto field = random_skew_field(base, 3, 9, 1.0);
    const auto back = io::skew_field_from_json(io::skew_field_to_json(field), base);
    CHECK(back.rank == 3);
    for (int e = 0; e < base.canonical_count; ++e)
        CHECK((back.value_canonical[e] - field.value_canonical[e]).cwiseAbs().maxCoeff() <= 1e-15);

    json bad = io::skew_field_to_json(field);
    bad["values"]["0"][0] = 1.0; // nonzero diagonal entry breaks skewness
    CHECK_THROWS_AS(io::skew_field_from_json(bad, base), ConfigError);
}

TEST_CASE("spectrum csv carries cluster structure") {
    const auto base = build_cycle(4, 4.0);
    const auto eigs = eigensolve(assemble_laplacian(base, trivial_connection(base, 1)));
    const std::string csv = io::spectrum_csv(eigs);
    CHECK(csv.rfind("index,eigenvalue,cluster_id,multiplicity\n", 0) == 0);
    CHECK(csv.find(",1,2\n") != std::string::npos);  // middle doublet rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("curves csv shape") {
    EigenCurves curves;
    curves.t_grid = {0.0, 0.5};
    curves.branches = {{1.0, 1.5}, {2.0, 2.25}};
    curves.step_overlaps = {0.99};
    const std::string csv = io::curves_csv(curves);
    CHECK(csv.rfind("t,branch_id,eigenvalue,overlap\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("0.5,1,2.25,0.98999999999999999") != std::string::npos);
}

TEST_CASE("write_atomic leaves no temp file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "speclab_io_test";
    fs::create_directories(dir);
    const std::string target = (dir / "out.txt").string();
    io::write_atomic(target, "hello\n");
    std::ifstream in(target);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "hello\n");
    CHECK_FALSE(fs::exists(target + ".tmp"));
    io::write_atomic(target, "second\n");
    std::ifstream in2(target);
    std::string content2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
    CHECK(content2 == "second\n");
    fs::remove_all(dir);
}
