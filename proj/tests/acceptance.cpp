// One PASS/FAIL line per acceptance criterion; exit code 0 iff all pass.
#include "nlfeti/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace nlfeti;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;
    std::vector<std::string> problems;
    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (problems.size() < 8)
                problems.push_back(what);
        }
    }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double max_abs(std::span<const double> v)
{
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

std::string kname(int k1, int k2) { return std::to_string(k1) + "x" + std::to_string(k2); }

constexpr KernelFamily families[] = {KernelFamily::constant, KernelFamily::fractional, KernelFamily::peridynamic};
constexpr std::pair<int, int> partitions[] = {{2, 1}, {2, 2}, {3, 3}};

// FETI against a sparse direct solve of the single-domain system.
Verdict equivalence()
{
    Verdict v;
    const auto t0 = Clock::now();
    double worst = 0;
    int runs = 0, floating = 0;
    for (int n : {8, 16, 32})
        for (int ratio : {2, 4})
            for (auto family : families) {
                const double delta = static_cast<double>(ratio) / n;
                const Mesh mesh = build_structured_mesh(n, delta);
                const auto prob = manufactured_problem(family);
                const Assembler as(mesh, KernelSpec::make(family, delta), default_ball_strategy(family), {});
                const auto sys = as.assemble_global(prob.data);
                const auto reference = direct_solve(sys);
                for (auto [k1, k2] : partitions) {
                    const std::string tag = to_string(family) + " n=" + std::to_string(n) +
                                            " ratio=" + std::to_string(ratio) + " K=" + kname(k1, k2);
                    try {
                        const auto sub = build_subdivision(mesh, k1, k2, as.interactions());
                        floating += static_cast<int>(std::count(sub.floating.begin(), sub.floating.end(), true));
                        const FetiSolver feti(mesh, sub, as.assemble_subdomains(sub, prob.data), {});
                        const auto r = feti.solve();
                        v.require(r.converged, tag + ": FETI did not converge");
                        const auto u = interior_part(mesh, prob.components, feti.gather(r, sys.g));
                        const double d = energy_norm_difference(sys.A, u, reference);
                        worst = std::max(worst, d);
                        v.require(d <= 1e-7, tag + ": energy difference " + fmt("%.2e", d));
                    } catch (const std::exception& e) {
                        v.require(false, tag + ": " + e.what());
                    }
                    ++runs;
                }
            }
    const double secs = seconds_since(t0);
    v.require(floating > 0, "no floating subdomain was exercised");
    v.require(secs <= 300, "runtime " + fmt("%.0f", secs) + " s exceeds 5 min");
    v.detail = std::to_string(runs) + " runs, " + std::to_string(floating) +
               " floating subdomains, max relative energy difference " + fmt("%.2e", worst) + ", " +
               fmt("%.1f", secs) + " s";
    return v;
}

// Rates of convergence at fixed delta = 0.0625, h = delta/2, delta/4, delta/8.
Verdict convergence_rates()
{
    Verdict v;
    const auto t0 = Clock::now();
    const std::map<KernelFamily, std::pair<double, double>> bands = {{KernelFamily::constant, {1.8, 2.2}},
                                                                      {KernelFamily::peridynamic, {1.7, 2.2}},
                                                                      {KernelFamily::fractional, {1.9, 2.3}}};
    std::string detail;
    for (auto family : families) {
        ExperimentConfig cfg;
        cfg.family = family;
        cfg.delta = 0.0625;
        cfg.n = 32;
        cfg.k1 = cfg.k2 = 2;
        cfg.levels = 3;
        cfg.study = StudyKind::fixed_horizon;
        cfg.solver = SolverChoice::cg;
        const auto out = run_study(cfg);
        for (const auto& f : out.failures)
            v.require(false, to_string(family) + ": " + f);
        if (out.records.empty() || !out.records.back().roc) {
            v.require(false, to_string(family) + ": no rate computed");
            continue;
        }
        const double roc = *out.records.back().roc;
        const auto [lo, hi] = bands.at(family);
        v.require(roc >= lo && roc <= hi, to_string(family) + ": finest RoC " + fmt("%.3f", roc) + " outside [" +
                                              fmt("%.1f", lo) + ", " + fmt("%.1f", hi) + "]");
        detail += (detail.empty() ? "" : ", ") + to_string(family) + " L2 ";
        for (const auto& r : out.records)
            detail += fmt("%.3e ", r.l2_error);
        detail += "RoC " + fmt("%.3f", roc);
    }
    const double secs = seconds_since(t0);
    v.require(secs <= 900, "runtime exceeds 15 min");
    v.detail = detail + ", " + fmt("%.1f", secs) + " s";
    return v;
}

// Published problem size: h = 0.004, delta = 0.008, 6x6 subdomains.
Verdict published_value()
{
    Verdict v;
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.family = KernelFamily::constant;
    cfg.solver = SolverChoice::feti;
    apply_published_scale(cfg);
    const auto out = run_single(cfg);
    for (const auto& f : out.failures)
        v.require(false, f);
    if (!out.records.empty()) {
        const double l2 = out.records.back().l2_error;
        v.detail = "n=" + std::to_string(cfg.n) + " K=" + kname(cfg.k1, cfg.k2) + " L2 " + fmt("%.4e", l2) +
                   " vs 3.47e-06 (" + fmt("%+.1f", 100 * (l2 - 3.47e-6) / 3.47e-6) + "%), FETI iterations " +
                   std::to_string(out.records.back().iterations);
    }
    v.detail += ", " + fmt("%.1f", seconds_since(t0)) + " s";
    return v;
}

// delta/h = 4, n = 32, 64, 128 with 2x2, 4x4, 8x8 subdomains.
Verdict iteration_scalability()
{
    Verdict v;
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.delta = 0.125;
    cfg.n = 32;
    cfg.k1 = cfg.k2 = 2;
    cfg.levels = 3;
    cfg.study = StudyKind::fixed_ratio;
    cfg.solver = SolverChoice::both;
    const auto out = run_study(cfg);
    for (const auto& f : out.failures)
        v.require(false, f);
    std::string feti = "FETI", cg = "CG";
    for (const auto& r : out.records)
        (r.solver == "feti" ? feti : cg) += " " + std::to_string(r.iterations);
    const double secs = seconds_since(t0);
    v.require(secs <= 1200, "runtime exceeds 20 min");
    v.detail = feti + "; " + cg + ", " + fmt("%.1f", secs) + " s";
    return v;
}

// Structural invariants on every subdivision of the equivalence sweep at n = 16.
Verdict invariants()
{
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    int subdivisions = 0;
    double worst_p = 0, worst_pg = 0, worst_ssps = 0, worst_sym = 0, worst_null = 0;
    for (int n : {8, 16})
        for (int ratio : {2, 4})
            for (auto family : families) {
                const double delta = static_cast<double>(ratio) / n;
                const Mesh mesh = build_structured_mesh(n, delta);
                const auto spec = KernelSpec::make(family, delta);
                const auto prob = manufactured_problem(family);
                const Assembler as(mesh, spec, default_ball_strategy(family), {});
                const int comps = spec.components();
                for (auto [k1, k2] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 3}}) {
                    if (k1 > n / 4)
                        continue;
                    const std::string tag = to_string(family) + " n=" + std::to_string(n) +
                                            " ratio=" + std::to_string(ratio) + " K=" + kname(k1, k2);
                    ++subdivisions;
                    const auto sub = build_subdivision(mesh, k1, k2, as.interactions());
                    try {
                        check_coverage(mesh, sub, as.interactions());
                    } catch (const std::exception& e) {
                        v.require(false, tag + ": " + e.what());
                    }
                    // zeta counts the subdomains holding a pair, and every
                    // interacting pair is held by at least one.
                    const auto holds = [&](int k, int e) {
                        return std::binary_search(sub.extended[k].begin(), sub.extended[k].end(), e) ||
                               std::binary_search(sub.dirichlet[k].begin(), sub.dirichlet[k].end(), e);
                    };
                    const BallNorm norm = spec.norm;
                    int uncovered = 0, mismatched = 0;
                    for (int e = 0; e < mesh.num_elements(); ++e)
                        for (int f = e; f < mesh.num_elements(); ++f) {
                            if (mesh.region[e] == Region::dirichlet && mesh.region[f] == Region::dirichlet)
                                continue;
                            if (!elements_interact(mesh.triangle(e), mesh.triangle(f), delta, norm))
                                continue;
                            int common = 0;
                            for (int k = 0; k < sub.count(); ++k)
                                common += holds(k, e) && holds(k, f);
                            uncovered += common == 0;
                            mismatched += common != sub.zeta_elements(e, f);
                        }
                    v.require(uncovered == 0, tag + ": " + std::to_string(uncovered) + " uncovered pairs");
                    v.require(mismatched == 0, tag + ": " + std::to_string(mismatched) + " zeta mismatches");

                    const FetiSolver feti(mesh, sub, as.assemble_subdomains(sub, prob.data), {});
                    const auto& cs = feti.constraints();
                    int expected = 0;
                    for (int node : mesh.interior_nodes)
                        expected += (sub.zeta_nodes(node, node) - 1) * comps;
                    v.require(cs.num_rows() == expected, tag + ": constraint count");
                    const int nl = cs.num_rows();
                    if (nl == 0)
                        continue;
                    // B B_D^T = I, so B has full row rank.
                    {
                        const auto lambda = random_vector(nl, rng);
                        std::vector<double> u(cs.gamma_size()), back(nl);
                        cs.apply_bdt(lambda, u);
                        cs.apply_b(u, back);
                        for (int i = 0; i < nl; ++i)
                            v.require(std::abs(back[i] - lambda[i]) <= 1e-12, tag + ": B B_D^T != I");
                    }
                    // Projection.
                    {
                        const auto lambda = random_vector(nl, rng);
                        std::vector<double> p1(nl), p2(nl);
                        feti.apply_p(lambda, p1);
                        feti.apply_p(p1, p2);
                        double d = 0;
                        for (int i = 0; i < nl; ++i)
                            d = std::max(d, std::abs(p2[i] - p1[i]));
                        worst_p = std::max(worst_p, d / max_abs(lambda));
                        const auto& g = feti.g_matrix();
                        for (int c = 0; c < feti.coarse_size(); ++c) {
                            std::span<const double> col(g.data() + static_cast<std::size_t>(c) * nl, nl);
                            std::vector<double> pg(nl);
                            feti.apply_p(col, pg);
                            worst_pg = std::max(worst_pg, max_abs(pg) / max_abs(g));
                        }
                    }
                    // Preconditioner symmetry.
                    {
                        const auto a = random_vector(nl, rng), b = random_vector(nl, rng);
                        std::vector<double> ma(nl), mb(nl);
                        feti.apply_preconditioner(a, ma);
                        feti.apply_preconditioner(b, mb);
                        const double scale = std::sqrt(dot(ma, ma) * dot(b, b));
                        worst_sym = std::max(worst_sym, std::abs(dot(ma, b) - dot(a, mb)) / scale);
                    }
                    // Local Schur complements.
                    for (int k = 0; k < feti.num_subdomains(); ++k) {
                        const SubdomainSolver& s = feti.local(k);
                        const int ng = s.interface_dofs();
                        if (ng == 0)
                            continue;
                        const auto w = random_vector(ng, rng);
                        std::vector<double> sw(ng), psw(ng), spsw(ng);
                        s.schur_apply(w, sw);
                        s.schur_pinv_apply(sw, psw);
                        s.schur_apply(psw, spsw);
                        double d = 0;
                        for (int i = 0; i < ng; ++i)
                            d = std::max(d, std::abs(spsw[i] - sw[i]));
                        worst_ssps = std::max(worst_ssps, d / max_abs(sw));
                        if (!s.floating())
                            continue;
                        const int nz = cs.z_count[k];
                        for (int c = 0; c < nz; ++c) {
                            // Rigid modes / constants on the interface, scaled to unit max.
                            std::vector<double> z(ng);
                            for (int i = 0; i < ng / comps; ++i) {
                                const Point p = mesh.vertices[sub.interface_nodes[k][i]];
                                if (comps == 1) {
                                    z[i] = 1;
                                } else {
                                    const double vals[3][2] = {{1, 0}, {0, 1}, {-p.y, p.x}};
                                    z[2 * i] = vals[c][0];
                                    z[2 * i + 1] = vals[c][1];
                                }
                            }
                            std::vector<double> sz(ng);
                            s.schur_apply(z, sz);
                            worst_null = std::max(worst_null, max_abs(sz) / (max_abs(sw) / max_abs(w)) / max_abs(z));
                        }
                    }
                }
            }
    v.require(worst_p <= 1e-12, "P^2 - P = " + fmt("%.2e", worst_p));
    v.require(worst_pg <= 1e-12, "P G = " + fmt("%.2e", worst_pg));
    v.require(worst_ssps <= 1e-8, "S S+ S - S = " + fmt("%.2e", worst_ssps));
    v.require(worst_sym <= 1e-10, "preconditioner asymmetry " + fmt("%.2e", worst_sym));
    v.require(worst_null <= 1e-9, "null-space residual " + fmt("%.2e", worst_null));
    const double secs = seconds_since(t0);
    v.require(secs <= 180, "runtime exceeds 3 min");
    v.detail = std::to_string(subdivisions) + " subdivisions; |P^2-P| " + fmt("%.1e", worst_p) + ", |PG| " +
               fmt("%.1e", worst_pg) + ", |SS+S-S| " + fmt("%.1e", worst_ssps) + ", asym " + fmt("%.1e", worst_sym) +
               ", null " + fmt("%.1e", worst_null) + ", " + fmt("%.1f", secs) + " s";
    return v;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

// Two identical solves write byte-identical solution files.
Verdict determinism()
{
    Verdict v;
    const auto dir = fs::temp_directory_path() / "nlfeti_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    int compared = 0;
    for (auto family : families)
        for (int workers : {1, 3}) {
            ExperimentConfig cfg;
            cfg.family = family;
            cfg.n = 16;
            cfg.delta = 0.125;
            cfg.k1 = cfg.k2 = 3;
            cfg.solver = SolverChoice::feti;
            cfg.workers = workers;
            std::string first;
            for (int run = 0; run < 2; ++run) {
                cfg.solution_path = (dir / ("u" + std::to_string(run) + ".csv")).string();
                const auto out = run_single(cfg);
                for (const auto& f : out.failures)
                    v.require(false, f);
                const auto text = slurp(cfg.solution_path);
                v.require(!text.empty(), "empty solution file");
                if (run == 0)
                    first = text;
                else
                    v.require(text == first, to_string(family) + " workers=" + std::to_string(workers) +
                                                 ": solution files differ");
            }
            ++compared;
        }
    fs::remove_all(dir);
    v.detail = std::to_string(compared) + " repeated solves compared byte for byte";
    return v;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    bool paper_scale = false;
    std::vector<int> only;
    app.add_flag("--paper-scale", paper_scale, "run the published-size spot check (criterion 3) only");
    app.add_option("--criterion", only, "run only these criteria")->check(CLI::Range(1, 6));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, Verdict (*)()>> all = {
        {1, equivalence}, {2, convergence_rates}, {3, published_value},
        {4, iteration_scalability}, {5, invariants}, {6, determinism}};
    const std::map<int, std::string> names = {{1, "equivalence"},         {2, "convergence rates"},
                                              {3, "published L2 value"},  {4, "iteration scalability"},
                                              {5, "invariants"},          {6, "determinism"}};
    std::set<int> selected(only.begin(), only.end());
    if (selected.empty())
        selected = paper_scale ? std::set<int>{3} : std::set<int>{1, 2, 4, 5, 6};

    bool ok = true;
    for (const auto& [id, fn] : all) {
        if (!selected.count(id))
            continue;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.pass = false;
            v.problems.push_back(e.what());
        }
        std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, names.at(id).c_str(),
                    v.detail.c_str());
        for (const auto& p : v.problems)
            std::printf("    %s\n", p.c_str());
        std::fflush(stdout);
        ok = ok && v.pass;
    }
    return ok ? 0 : 1;
}
