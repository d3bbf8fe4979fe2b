#pragma once

#include "nlfeti/assembly.hpp"
#include "nlfeti/config.hpp"
#include "nlfeti/feti.hpp"
#include "nlfeti/krylov.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nlfeti {

// Source, Dirichlet data and exact solution; the exact solution is the
// Dirichlet data on the collar. Scalar problems use component 0.
struct ManufacturedProblem {
    int components = 1;
    ProblemData data;
    VectorField exact;
};

// Diffusion: u = x1^2 x2 + x2^2; peridynamics: u = (x2^2, x1^2 x2) with
// f = -pi/2 (1 + 2 x1, x2).
ManufacturedProblem manufactured_problem(KernelFamily family, Orientation orientation = Orientation::consistent);

struct RunRecord {
    std::string study = "single";
    std::string kernel;
    int k1 = 1, k2 = 1;
    double h = 0.0;  // grid spacing 1/n
    double delta = 0.0;
    std::string solver;
    int dofs = 0;
    int iterations = 0;
    double residual = 0.0;
    double l2_error = 0.0;
    std::optional<double> roc;
    double seconds = 0.0;
    std::string status = "ok";
};

struct SolveOutcome {
    std::vector<RunRecord> records;
    int components = 1;
    std::vector<double> solution;  // all vertices; FETI when it ran
    std::optional<double> energy_difference;  // FETI against the single-domain solve
    double max_jump = 0.0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

struct StudyOutcome {
    std::vector<RunRecord> records;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

// Jacobi-preconditioned CG on A u = f - B g.
KrylovResult baseline_cg(const AssembledSystem& sys, const KrylovOptions& opts);
std::vector<double> direct_solve(const AssembledSystem& sys);

// Values on all vertices: u on I, g on B.
std::vector<double> nodal_solution(const Mesh& mesh, const AssembledSystem& sys, std::span<const double> u);
// Restriction of a nodal vector to the I dofs.
std::vector<double> interior_part(const Mesh& mesh, int components, std::span<const double> nodal);
// sqrt((a-b)^T A (a-b) / b^T A b)
double energy_norm_difference(const CsrMatrix& a, std::span<const double> x, std::span<const double> reference);
double l2_error(const Mesh& mesh, int components, std::span<const double> nodal, const VectorField& exact);

void write_solution_csv(const Mesh& mesh, int components, std::span<const double> nodal, const std::string& path);

// A.mtx (symmetric), B_coupling.mtx, f.csv, g.csv; with a subdivision also
// subdivision.csv and B_constraints.mtx.
void export_artifacts(const Mesh& mesh, const AssembledSystem& sys, const Subdivision* sub,
                      const ConstraintSet* constraints, const std::string& dir);

SolveOutcome run_single(const ExperimentConfig& cfg, const std::string& export_dir = {},
                        const std::string& study = "single");

// Rungs of a study: fixed_horizon halves h at fixed delta, fixed_ratio halves
// h and delta together, both doubling the subdomains per direction;
// strong_scaling keeps the mesh and doubles the subdomains.
std::vector<ExperimentConfig> study_ladder(const ExperimentConfig& cfg);
StudyOutcome run_study(const ExperimentConfig& cfg, std::ostream* log = nullptr);

std::string study_csv_header();
void write_study_csv(const std::vector<RunRecord>& records, std::ostream& os);
void write_study_csv(const std::vector<RunRecord>& records, const std::string& path);

}  // namespace nlfeti
