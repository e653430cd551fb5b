#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "speclab/io.hpp"
#include "speclab/verify.hpp"

namespace {

using speclab::io::json;

constexpr const char *kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

struct RunContext {
    json config;
    speclab::LatticeBase base;
    speclab::DiscreteConnection conn;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

RunContext load_context(const std::string &config_path, const std::string &out_override,
                        std::optional<std::uint64_t> seed_override,
                        const std::string &expected_type) {
    std::ifstream in(config_path);
    if (!in) throw speclab::ConfigError("cannot open config " + config_path);
    RunContext ctx;
    try {
        in >> ctx.config;
    } catch (const json::exception &e) {
        throw speclab::ConfigError(std::string("config parse: ") + e.what());
    }
    speclab::io::require_keys(ctx.config, {"base", "bundle", "experiment", "output_dir"},
                              "config");
    if (!ctx.config.contains("base") || !ctx.config.contains("bundle") ||
        !ctx.config.contains("experiment"))
        throw speclab::ConfigError("config: base, bundle and experiment are required");
    ctx.base = speclab::io::parse_base(ctx.config.at("base"));
    ctx.conn = speclab::io::parse_bundle(ctx.config.at("bundle"), ctx.base);
    ctx.seed_override = seed_override;

    const json &exp = ctx.config.at("experiment");
    if (!exp.contains("type") || exp.at("type").get<std::string>() != expected_type)
        throw speclab::ConfigError("config: experiment.type must be '" + expected_type + "'");

    if (!out_override.empty())
        ctx.out_dir = out_override;
    else if (ctx.config.contains("output_dir"))
        ctx.out_dir = ctx.config.at("output_dir").get<std::string>();
    else
        throw speclab::ConfigError("config: output_dir missing and --out not given");
    return ctx;
}

void write_manifest(const RunContext &ctx, const json &seeds) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    json manifest{{"config_hash", fnv1a(ctx.config.dump())},
                  {"seeds", seeds},
                  {"version", kVersion},
                  {"wall_time_seconds", wall}};
    speclab::io::write_atomic((ctx.out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

void ensure_out_dir(const RunContext &ctx) {
    std::filesystem::create_directories(ctx.out_dir);
}

int run_spectrum(RunContext &ctx) {
    const json &exp = ctx.config.at("experiment");
    speclab::io::require_keys(exp, {"type", "tol_rel", "tol_abs"}, "experiment");
    const double tol_rel = exp.value("tol_rel", speclab::kClusterTolRel);
    const double tol_abs = exp.value("tol_abs", speclab::kClusterTolAbs);

    const auto eigs = speclab::eigensolve(speclab::assemble_laplacian(ctx.base, ctx.conn));
    (void)tol_rel;
    (void)tol_abs;
    ensure_out_dir(ctx);
    speclab::io::write_atomic((ctx.out_dir / "spectrum.csv").string(),
                              speclab::io::spectrum_csv(eigs));
    write_manifest(ctx, json::object());
    return 0;
}

int run_curves(RunContext &ctx) {
    const json &exp = ctx.config.at("experiment");
    speclab::io::require_keys(
        exp, {"type", "t_min", "t_max", "steps", "window_lo", "window_hi", "field"},
        "experiment");
    const double t_min = exp.at("t_min").get<double>();
    const double t_max = exp.at("t_max").get<double>();
    const int steps = exp.at("steps").get<int>();
    if (steps < 2 || !(t_max > t_min)) throw speclab::ConfigError("experiment: bad t grid");
    const int window_lo = exp.at("window_lo").get<int>();
    const int window_hi = exp.at("window_hi").get<int>();

    const json &field_cfg = exp.at("field");
    speclab::io::require_keys(field_cfg, {"seed", "magnitude"}, "field");
    std::uint64_t seed = field_cfg.at("seed").get<std::uint64_t>();
    if (ctx.seed_override) seed = *ctx.seed_override;
    const auto field = speclab::random_skew_field(ctx.base, ctx.conn.rank, seed,
                                                  field_cfg.at("magnitude").get<double>());

    std::vector<double> grid(steps);
    for (int k = 0; k < steps; ++k)
        grid[k] = t_min + (t_max - t_min) * k / (steps - 1);

    const auto curves =
        speclab::track_curves(ctx.base, ctx.conn, field, grid, window_lo, window_hi);
    ensure_out_dir(ctx);
    speclab::io::write_atomic((ctx.out_dir / "curves.csv").string(),
                              speclab::io::curves_csv(curves));
    write_manifest(ctx, json{{"field_seed", seed}});
    return 0;
}

int run_split(RunContext &ctx) {
    const json &exp = ctx.config.at("experiment");
    speclab::io::require_keys(exp, {"type", "n", "delta", "budget", "seed", "trials"},
                              "experiment");
    speclab::SplitOptions opts;
    opts.leading_count = exp.at("n").get<int>();
    opts.target_gap = exp.at("delta").get<double>();
    opts.budget = exp.value("budget", 50);
    opts.seed = exp.value("seed", std::uint64_t{1});
    opts.probe_trials = exp.value("trials", 32);
    if (ctx.seed_override) opts.seed = *ctx.seed_override;

    const auto report = speclab::simplify_spectrum(ctx.base, ctx.conn, opts);
    ensure_out_dir(ctx);
    speclab::io::write_atomic((ctx.out_dir / "split_report.json").string(),
                              speclab::io::split_report_to_json(report).dump(2) + "\n");
    write_manifest(ctx, json{{"seed", opts.seed}});
    // IrreducibleStructure is a finding, not an error
    return 0;
}

int run_rigidity(RunContext &ctx) {
    const json &exp = ctx.config.at("experiment");
    speclab::io::require_keys(exp, {"type", "index_u", "index_v", "verbose", "mode"},
                              "experiment");
    const int iu = exp.at("index_u").get<int>();
    const int iv = exp.at("index_v").get<int>();
    const bool verbose = exp.value("verbose", false);
    const std::string mode_name = exp.value("mode", std::string("incident_sum"));
    speclab::InfinitesimalMode mode;
    if (mode_name == "incident_sum")
        mode = speclab::InfinitesimalMode::IncidentSum;
    else if (mode_name == "per_direction")
        mode = speclab::InfinitesimalMode::PerDirection;
    else
        throw speclab::ConfigError("experiment: unknown mode '" + mode_name + "'");

    const auto eigs = speclab::eigensolve(speclab::assemble_laplacian(ctx.base, ctx.conn));
    if (iu < 0 || iv < 0 || iu >= eigs.values.size() || iv >= eigs.values.size())
        throw speclab::ConfigError("experiment: eigensection index out of range");
    const double scale = 1.0 / std::sqrt(ctx.base.vertex_volume);
    speclab::DiscreteSection u, v;
    u.rank = v.rank = ctx.conn.rank;
    u.values = eigs.vectors.col(iu) * scale;
    v.values = eigs.vectors.col(iv) * scale;

    const auto report = speclab::rigidity_report(u, v, ctx.conn, ctx.base, mode);
    ensure_out_dir(ctx);
    speclab::io::write_atomic(
        (ctx.out_dir / "rigidity_report.json").string(),
        speclab::io::rigidity_report_to_json(report, verbose).dump(2) + "\n");
    write_manifest(ctx, json::object());
    return 0;
}

int run_gbundle(RunContext &ctx) {
    const json &exp = ctx.config.at("experiment");
    speclab::io::require_keys(exp, {"type", "count", "fiber_radius"}, "experiment");
    const int count = exp.value("count", 16);
    const double fiber_radius = exp.value("fiber_radius", 1.0);

    const auto report = speclab::g_simplicity_report(ctx.conn, ctx.base, count);
    const auto deviations =
        speclab::xi_correspondence_deviations(ctx.conn, ctx.base, fiber_radius);
    double max_dev = 0.0;
    for (double d : deviations) max_dev = std::max(max_dev, d);

    ensure_out_dir(ctx);
    speclab::io::write_atomic((ctx.out_dir / "gsimplicity.csv").string(),
                              speclab::io::gsimplicity_csv(report));
    speclab::io::write_atomic(
        (ctx.out_dir / "correspondence.json").string(),
        json{{"deviations", deviations}, {"max_deviation", max_dev}}.dump(2) + "\n");
    write_manifest(ctx, json::object());
    return 0;
}

int run_verify() {
    const auto results = speclab::run_all_criteria();
    bool all = true;
    for (const auto &r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.name
                  << "  (" << r.detail << ")\n";
        all = all && r.passed;
    }
    std::cout << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"discrete connection Laplacian laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;

    auto add_common = [&](CLI::App *sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed_override, "seed override");
        sub->add_option("--threads", threads, "OpenMP thread count");
    };

    auto *spectrum = app.add_subcommand("spectrum", "assemble and diagonalize");
    auto *curves = app.add_subcommand("curves", "eigenvalue curves along a perturbation");
    auto *split = app.add_subcommand("split", "constructive degeneracy splitting");
    auto *rigidity = app.add_subcommand("rigidity", "rigidity residuals of an eigensection pair");
    auto *gbundle = app.add_subcommand("gbundle", "equivariant spectra and G-simplicity");
    auto *verify = app.add_subcommand("verify", "run the full invariant suite");
    for (auto *sub : {spectrum, curves, split, rigidity, gbundle}) add_common(sub, true);
    add_common(verify, false);

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (verify->parsed()) return run_verify();
        const std::string type = spectrum->parsed()   ? "spectrum"
                                 : curves->parsed()   ? "curves"
                                 : split->parsed()    ? "split"
                                 : rigidity->parsed() ? "rigidity"
                                                      : "gbundle";
        RunContext ctx = load_context(config_path, out_dir, seed_override, type);
        if (spectrum->parsed()) return run_spectrum(ctx);
        if (curves->parsed()) return run_curves(ctx);
        if (split->parsed()) return run_split(ctx);
        if (rigidity->parsed()) return run_rigidity(ctx);
        return run_gbundle(ctx);
    } catch (const speclab::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
