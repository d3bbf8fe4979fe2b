#include "nlfeti/harness.hpp"

#include "nlfeti/cholesky.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace nlfeti {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

RunRecord base_record(const ExperimentConfig& cfg, const std::string& study, const std::string& solver, int dofs)
{
    RunRecord r;
    r.study = study;
    r.kernel = to_string(cfg.family);
    r.k1 = cfg.k1;
    r.k2 = cfg.k2;
    r.h = 1.0 / cfg.n;
    r.delta = cfg.delta;
    r.solver = solver;
    r.dofs = dofs;
    return r;
}

double relative_residual(const AssembledSystem& sys, std::span<const double> u)
{
    const auto b = sys.rhs();
    std::vector<double> r(b);
    sys.A.multiply_add(u, r, -1.0);
    const double nb = norm2(b);
    return nb > 0 ? norm2(r) / nb : norm2(r);
}

void write_trace(std::ofstream& os, const std::string& solver, const std::vector<double>& history)
{
    for (std::size_t i = 0; i < history.size(); ++i)
        os << solver << ',' << i << ',' << format("%.17g", history[i]) << '\n';
}

}  // namespace

ManufacturedProblem manufactured_problem(KernelFamily family, Orientation orientation)
{
    ManufacturedProblem p;
    if (family == KernelFamily::peridynamic) {
        p.components = 2;
        p.exact = [](Point x) { return std::array<double, 2>{x.y * x.y, x.x * x.x * x.y}; };
        p.data.f = [](Point x) {
            const double c = -std::numbers::pi / 2;
            return std::array<double, 2>{c * (1 + 2 * x.x), c * x.y};
        };
    } else {
        p.exact = [](Point x) { return std::array<double, 2>{x.x * x.x * x.y + x.y * x.y, 0.0}; };
        if (orientation == Orientation::consistent)
            p.data.f = [](Point x) { return std::array<double, 2>{-2 * (1 + x.y), 0.0}; };
        else
            p.data.f = [](Point x) { return std::array<double, 2>{-2 * (1 + x.x), 0.0}; };
    }
    p.data.g = p.exact;
    return p;
}

KrylovResult baseline_cg(const AssembledSystem& sys, const KrylovOptions& opts)
{
    const auto d = sys.A.diagonal();
    std::vector<double> inv(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        inv[i] = 1.0 / d[i];
    auto a = [&](std::span<const double> x, std::span<double> y) { sys.A.multiply(x, y); };
    auto m = [&](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = inv[i] * x[i];
    };
    return pcg(a, m, sys.rhs(), opts);
}

std::vector<double> direct_solve(const AssembledSystem& sys)
{
    const SparseCholesky chol(sys.A);
    return chol.solve(sys.rhs());
}

std::vector<double> nodal_solution(const Mesh& mesh, const AssembledSystem& sys, std::span<const double> u)
{
    const int c = sys.components;
    std::vector<double> out(static_cast<std::size_t>(mesh.num_vertices()) * c);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& src = mesh.node_kind[v] == NodeKind::interior ? u : std::span<const double>(sys.g);
        for (int q = 0; q < c; ++q)
            out[static_cast<std::size_t>(v) * c + q] = src[static_cast<std::size_t>(mesh.dof_index[v]) * c + q];
    }
    return out;
}

std::vector<double> interior_part(const Mesh& mesh, int components, std::span<const double> nodal)
{
    std::vector<double> out(mesh.interior_nodes.size() * components);
    for (int v : mesh.interior_nodes)
        for (int q = 0; q < components; ++q)
            out[static_cast<std::size_t>(mesh.dof_index[v]) * components + q] =
                nodal[static_cast<std::size_t>(v) * components + q];
    return out;
}

double energy_norm_difference(const CsrMatrix& a, std::span<const double> x, std::span<const double> reference)
{
    std::vector<double> d(x.size()), ad(x.size()), ar(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = x[i] - reference[i];
    a.multiply(d, ad);
    a.multiply(reference, ar);
    const double den = dot(reference, ar);
    const double num = dot(d, ad);
    return den > 0 ? std::sqrt(std::max(num, 0.0) / den) : std::sqrt(std::max(num, 0.0));
}

double l2_error(const Mesh& mesh, int components, std::span<const double> nodal, const VectorField& exact)
{
    if (components == 2)
        return l2_error(mesh, nodal, exact);
    return l2_error(mesh, nodal, ScalarField([&](Point p) { return exact(p)[0]; }));
}

void write_solution_csv(const Mesh& mesh, int components, std::span<const double> nodal, const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw std::runtime_error("cannot write " + path);
    std::fputs(components == 1 ? "node,x,y,u\n" : "node,x,y,u1,u2\n", f);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point p = mesh.vertices[v];
        std::fprintf(f, "%d,%.17g,%.17g", v, p.x, p.y);
        for (int q = 0; q < components; ++q)
            std::fprintf(f, ",%.17g", nodal[static_cast<std::size_t>(v) * components + q]);
        std::fputc('\n', f);
    }
    if (std::fclose(f) != 0)
        throw std::runtime_error("cannot write " + path);
}

void export_artifacts(const Mesh& mesh, const AssembledSystem& sys, const Subdivision* sub,
                      const ConstraintSet* constraints, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create " + dir + ": " + ec.message());
    const fs::path d(dir);
    write_matrix_market(sys.A, (d / "A.mtx").string(), true);
    write_matrix_market(sys.B, (d / "B_coupling.mtx").string(), false);
    write_vector_csv(sys.f, (d / "f.csv").string());
    write_vector_csv(sys.g, (d / "g.csv").string());
    if (sub)
        write_subdivision_csv(mesh, *sub, (d / "subdivision.csv").string());
    if (constraints)
        write_matrix_market(constraints->b_matrix(), (d / "B_constraints.mtx").string(), false);
}

SolveOutcome run_single(const ExperimentConfig& cfg, const std::string& export_dir, const std::string& study)
{
    cfg.validate();
    SolveOutcome out;
    const Mesh mesh = build_structured_mesh(cfg.n, cfg.delta);
    const KernelSpec spec = cfg.kernel();
    const ManufacturedProblem prob = manufactured_problem(cfg.family, cfg.orientation);
    out.components = prob.components;
    const Assembler assembler(mesh, spec, cfg.ball(), cfg.quad, cfg.workers);
    const AssembledSystem sys = assembler.assemble_global(prob.data);
    const int dofs = sys.A.rows;

    std::ofstream trace;
    if (!cfg.trace_path.empty()) {
        trace.open(cfg.trace_path);
        if (!trace)
            throw std::runtime_error("cannot write " + cfg.trace_path);
        trace << "solver,iteration,residual\n";
    }

    std::vector<double> reference;  // single-domain solution on I
    double reference_l2 = 0.0;
    const bool run_cg = cfg.solver == SolverChoice::cg || cfg.solver == SolverChoice::both;
    const bool run_feti = cfg.solver == SolverChoice::feti || cfg.solver == SolverChoice::both;
    if (run_cg) {
        const auto t0 = Clock::now();
        KrylovOptions opts = cfg.cg;
        opts.keep_history = trace.is_open();
        const KrylovResult kr = baseline_cg(sys, opts);
        RunRecord r = base_record(cfg, study, "cg", dofs);
        r.seconds = seconds_since(t0);
        r.iterations = kr.iterations;
        r.residual = kr.residual;
        out.solution = nodal_solution(mesh, sys, kr.x);
        r.l2_error = reference_l2 = l2_error(mesh, prob.components, out.solution, prob.exact);
        if (!kr.converged) {
            r.status = "not_converged";
            out.failures.push_back("cg did not converge in " + std::to_string(kr.iterations) + " iterations");
        }
        if (trace.is_open())
            write_trace(trace, "cg", kr.history);
        reference = kr.x;
        out.records.push_back(r);
    }
    if (cfg.solver == SolverChoice::direct) {
        const auto t0 = Clock::now();
        reference = direct_solve(sys);
        RunRecord r = base_record(cfg, study, "direct", dofs);
        r.seconds = seconds_since(t0);
        r.residual = relative_residual(sys, reference);
        out.solution = nodal_solution(mesh, sys, reference);
        r.l2_error = reference_l2 = l2_error(mesh, prob.components, out.solution, prob.exact);
        out.records.push_back(r);
    }

    std::optional<Subdivision> sub;
    std::optional<FetiSolver> feti;
    if (run_feti) {
        RunRecord r = base_record(cfg, study, "feti", dofs);
        try {
            sub = build_subdivision(mesh, cfg.k1, cfg.k2, assembler.interactions(), cfg.workers);
            check_coverage(mesh, *sub, assembler.interactions());
            auto systems = assembler.assemble_subdomains(*sub, prob.data);
            const auto t0 = Clock::now();
            FetiOptions opts = cfg.feti;
            opts.workers = cfg.workers;
            feti.emplace(mesh, *sub, std::move(systems), opts);
            const FetiResult fr = feti->solve();
            r.iterations = fr.iterations;
            r.residual = fr.residual;
            if (trace.is_open())
                write_trace(trace, "feti", fr.history);
            if (!fr.converged) {
                r.status = "not_converged";
                out.failures.push_back("feti did not converge in " + std::to_string(fr.iterations) + " iterations");
            }
            out.solution = feti->gather(fr, sys.g, cfg.copy_tol, &out.max_jump);
            r.seconds = seconds_since(t0);
            r.l2_error = l2_error(mesh, prob.components, out.solution, prob.exact);
            if (!reference.empty()) {
                const auto u = interior_part(mesh, prob.components, out.solution);
                out.energy_difference = energy_norm_difference(sys.A, u, reference);
                if (*out.energy_difference > cfg.equivalence_tol)
                    out.failures.push_back("feti and single-domain solutions differ by " +
                                           format("%.3e", *out.energy_difference) + " in the energy norm");
                if (std::abs(r.l2_error - reference_l2) > 1e-6 * reference_l2)
                    out.failures.push_back("feti and single-domain L2 errors disagree");
            }
        } catch (const std::exception& e) {
            r.status = std::string("error: ") + e.what();
            out.failures.push_back(r.status);
        }
        out.records.push_back(r);
    }

    if (cfg.l2_reference) {
        for (const auto& r : out.records) {
            const double rel = std::abs(r.l2_error - *cfg.l2_reference) / *cfg.l2_reference;
            if (rel > cfg.l2_reference_tol)
                out.failures.push_back(r.solver + " L2 error " + format("%.3e", r.l2_error) + " is " +
                                       format("%.1f", 100 * rel) + "% away from the reference " +
                                       format("%.3e", *cfg.l2_reference));
        }
    }
    if (!cfg.solution_path.empty() && !out.solution.empty())
        write_solution_csv(mesh, prob.components, out.solution, cfg.solution_path);
    if (!export_dir.empty())
        export_artifacts(mesh, sys, sub ? &*sub : nullptr, feti ? &feti->constraints() : nullptr, export_dir);
    return out;
}

std::vector<ExperimentConfig> study_ladder(const ExperimentConfig& cfg)
{
    if (cfg.study == StudyKind::single)
        return {cfg};
    std::vector<ExperimentConfig> rungs;
    const double ratio = cfg.ratio > 0 ? cfg.ratio : cfg.delta * cfg.n;
    for (int i = 0; i < cfg.levels; ++i) {
        ExperimentConfig r = cfg;
        r.solution_path.clear();
        r.trace_path.clear();
        const int scale = 1 << i;
        r.k1 = cfg.k1 * scale;
        r.k2 = cfg.k2 * scale;
        if (cfg.study != StudyKind::strong_scaling)
            r.n = cfg.n * scale;
        if (cfg.study == StudyKind::fixed_ratio)
            r.delta = ratio / r.n;
        rungs.push_back(r);
    }
    return rungs;
}

StudyOutcome run_study(const ExperimentConfig& cfg, std::ostream* log)
{
    StudyOutcome out;
    const auto rungs = study_ladder(cfg);
    const std::string name = to_string(cfg.study);
    std::vector<double> first_solution;
    double first_seconds = 0.0;
    for (std::size_t i = 0; i < rungs.size(); ++i) {
        const auto& rc = rungs[i];
        const std::string tag = "rung " + std::to_string(i) + " (n=" + std::to_string(rc.n) + ", K=" +
                                std::to_string(rc.k1) + "x" + std::to_string(rc.k2) + ")";
        SolveOutcome so;
        try {
            so = run_single(rc, {}, name);
        } catch (const std::exception& e) {
            RunRecord r = base_record(rc, name, to_string(rc.solver), 0);
            r.status = std::string("error: ") + e.what();
            so.records.push_back(r);
            so.failures.push_back(r.status);
        }
        for (const auto& f : so.failures)
            out.failures.push_back(tag + ": " + f);
        if (cfg.study == StudyKind::strong_scaling && !so.solution.empty()) {
            if (first_solution.empty()) {
                first_solution = so.solution;
            } else {
                double diff = 0.0, scale = 0.0;
                for (std::size_t q = 0; q < first_solution.size(); ++q) {
                    diff = std::max(diff, std::abs(so.solution[q] - first_solution[q]));
                    scale = std::max(scale, std::abs(first_solution[q]));
                }
                if (diff > 1e-6 * scale)
                    out.failures.push_back(tag + ": solution differs from the first rung by " + format("%.3e", diff));
            }
        }
        for (auto& r : so.records) {
            for (auto it = out.records.rbegin(); it != out.records.rend(); ++it)
                if (it->solver == r.solver && it->status == "ok" && r.status == "ok" && it->h != r.h) {
                    r.roc = std::log(it->l2_error / r.l2_error) / std::log(it->h / r.h);
                    break;
                }
            if (log) {
                *log << name << ' ' << r.solver << " n=" << rc.n << " K=" << r.k1 << 'x' << r.k2
                     << " its=" << r.iterations << " l2=" << format("%.4e", r.l2_error)
                     << (r.roc ? " roc=" + format("%.3f", *r.roc) : std::string()) << " time="
                     << format("%.2f", r.seconds) << "s";
                if (cfg.study == StudyKind::strong_scaling && r.solver == "feti") {
                    if (i == 0)
                        first_seconds = r.seconds;
                    else if (r.seconds > 0)
                        *log << " speedup=" << format("%.2f", first_seconds / r.seconds);
                }
                *log << " [" << r.status << "]\n";
            }
            out.records.push_back(r);
        }
    }

    auto series = [&](const std::string& solver) {
        std::vector<const RunRecord*> s;
        for (const auto& r : out.records)
            if (r.solver == solver)
                s.push_back(&r);
        return s;
    };
    if (cfg.study == StudyKind::fixed_horizon && rungs.size() >= 2 && rungs.back().delta * rungs.back().n >= 4 - 1e-9) {
        double lo = 1.8, hi = 2.2;
        if (cfg.family == KernelFamily::peridynamic)
            lo = 1.7;
        else if (cfg.family == KernelFamily::fractional)
            lo = 1.9, hi = 2.3;
        for (const char* solver : {"feti", "cg", "direct"}) {
            const auto s = series(solver);
            if (s.empty() || !s.back()->roc)
                continue;
            const double roc = *s.back()->roc;
            if (roc < lo || roc > hi)
                out.failures.push_back(std::string(solver) + ": finest rate of convergence " + format("%.3f", roc) +
                                       " outside [" + format("%.1f", lo) + ", " + format("%.1f", hi) + "]");
        }
    }
    if (cfg.study == StudyKind::fixed_ratio) {
        const auto f = series("feti");
        if (!f.empty()) {
            // A band of +-5 around the median count.
            std::vector<int> its;
            for (const auto* r : f)
                its.push_back(r->iterations);
            std::sort(its.begin(), its.end());
            const int median = its[(its.size() - 1) / 2];
            for (const auto* r : f)
                if (std::abs(r->iterations - median) > 5)
                    out.failures.push_back("feti iterations " + std::to_string(r->iterations) +
                                           " more than 5 away from the median " + std::to_string(median));
        }
        const auto c = series("cg");
        for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i]->iterations < 1.6 * c[i - 1]->iterations)
                out.failures.push_back("cg iterations grow by less than 1.6x at rung " + std::to_string(i));
    }
    return out;
}

std::string study_csv_header()
{
    return "study,kernel,K,h,delta,solver,iterations,residual,l2_error,roc,seconds,status";
}

void write_study_csv(const std::vector<RunRecord>& records, std::ostream& os)
{
    os << study_csv_header() << '\n';
    for (const auto& r : records) {
        std::string status = r.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n')
                ch = ';';
        os << r.study << ',' << r.kernel << ',' << r.k1 << 'x' << r.k2 << ',' << format("%.10g", r.h) << ','
           << format("%.10g", r.delta) << ',' << r.solver << ',' << r.iterations << ',' << format("%.6e", r.residual)
           << ',' << format("%.6e", r.l2_error) << ',' << (r.roc ? format("%.4f", *r.roc) : std::string()) << ','
           << format("%.3f", r.seconds) << ',' << status << '\n';
    }
}

void write_study_csv(const std::vector<RunRecord>& records, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    write_study_csv(records, os);
}

}  // namespace nlfeti
