// Driver for single solves, convergence/scaling studies and subdivision dumps.
#include "nlfeti/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace nlfeti;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> settings;
    int workers = 0;
    bool paper_scale = false;
    std::string dump_mesh;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", c.settings, "override a config key, key=value (repeatable)");
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--paper-scale", c.paper_scale, "use the published problem sizes");
    app->add_option("--dump-mesh", c.dump_mesh, "write <prefix>.nodes and <prefix>.elements");
}

ExperimentConfig make_config(const Common& c, std::vector<std::pair<std::string, std::string>> flags)
{
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : c.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.workers > 0)
        overrides.emplace_back("workers", std::to_string(c.workers));
    overrides.insert(overrides.end(), flags.begin(), flags.end());
    ExperimentConfig cfg = load_config(c.config, {});
    // The preset replaces sizes; explicit overrides still win.
    if (c.paper_scale)
        apply_published_scale(cfg);
    for (const auto& [k, v] : overrides)
        apply_setting(cfg, k, v);
    cfg.validate();
    if (!c.dump_mesh.empty()) {
        const Mesh mesh = build_structured_mesh(cfg.n, cfg.delta);
        write_mesh(mesh, c.dump_mesh + ".nodes", c.dump_mesh + ".elements");
    }
    return cfg;
}

int report(const std::vector<std::string>& failures)
{
    for (const auto& f : failures)
        std::printf("FAIL %s\n", f.c_str());
    if (failures.empty())
        std::printf("PASS all checks\n");
    return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FETI solver for nonlocal diffusion and peridynamics"};
    app.require_subcommand(1);

    Common solve_opts, study_opts, dump_opts;
    std::string solver, export_dir, solution;
    auto* solve = app.add_subcommand("solve", "solve one manufactured problem");
    add_common(solve, solve_opts);
    solve->add_option("--solver", solver, "feti, cg, both or direct")
        ->check(CLI::IsMember({"feti", "cg", "both", "direct"}));
    solve->add_option("--export-mm", export_dir, "directory for Matrix Market and CSV exports");
    solve->add_option("--solution", solution, "solution CSV path");

    std::string study_out;
    auto* study = app.add_subcommand("study", "run a convergence or scaling study");
    add_common(study, study_opts);
    study->add_option("--out", study_out, "study CSV")->required();

    std::string dump_out;
    auto* dump = app.add_subcommand("dump-subdivision", "write the overlapping subdivision as CSV");
    add_common(dump, dump_opts);
    dump->add_option("--out", dump_out, "subdivision CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            std::vector<std::pair<std::string, std::string>> flags;
            if (!solver.empty())
                flags.emplace_back("solver", solver);
            if (!solution.empty())
                flags.emplace_back("output.solution", solution);
            const ExperimentConfig cfg = make_config(solve_opts, flags);
            const SolveOutcome out = run_single(cfg, export_dir);
            for (const auto& r : out.records)
                std::printf("%-6s dofs=%d iterations=%d residual=%.3e l2_error=%.6e seconds=%.2f status=%s\n",
                            r.solver.c_str(), r.dofs, r.iterations, r.residual, r.l2_error, r.seconds,
                            r.status.c_str());
            if (out.energy_difference)
                std::printf("energy norm difference feti vs single-domain: %.3e\n", *out.energy_difference);
            return report(out.failures);
        }
        if (*study) {
            const ExperimentConfig cfg = make_config(study_opts, {});
            const StudyOutcome out = run_study(cfg, &std::cout);
            write_study_csv(out.records, study_out);
            return report(out.failures);
        }
        if (*dump) {
            const ExperimentConfig cfg = make_config(dump_opts, {});
            const Mesh mesh = build_structured_mesh(cfg.n, cfg.delta);
            const InteractionIndex index(mesh, cfg.delta, cfg.kernel().norm);
            const Subdivision sub = build_subdivision(mesh, cfg.k1, cfg.k2, index, cfg.workers);
            check_coverage(mesh, sub, index);
            write_subdivision_csv(mesh, sub, dump_out);
            int floating = 0;
            for (char f : sub.floating)
                floating += f;
            std::printf("subdomains=%d floating=%d radius=%.6g\n", sub.count(), floating, sub.radius);
            return report({});
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
