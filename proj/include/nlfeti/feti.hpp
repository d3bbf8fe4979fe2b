#pragma once

#include "nlfeti/assembly.hpp"
#include "nlfeti/cholesky.hpp"
#include "nlfeti/krylov.hpp"
#include "nlfeti/subdivision.hpp"

#include <span>
#include <string>
#include <vector>

namespace nlfeti {

class FetiError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Interface dofs of all subdomains are concatenated: subdomain k owns
// [gamma_offset[k], gamma_offset[k+1]); inside, node-major with interleaved
// components in the order of Subdivision::interface_nodes[k].
//
// Every interface node with copies k_1 < ... < k_m gets the m-1 constraints
// u_{k_1} - u_{k_j} = 0 per component.
struct ConstraintSet {
    int components = 1;
    std::vector<int> gamma_offset{0};
    std::vector<int> row_plus, row_minus;      // gamma indices of each row
    std::vector<double> multiplicity;          // per gamma index
    // Scaled rows (B D^-1 B^T)^-1 B D^-1, block diagonal per node/component.
    std::vector<int> bd_offsets{0};
    std::vector<int> bd_index;
    std::vector<double> bd_value;
    // Null space of floating subdomains: per subdomain column-major bases on
    // the interface and on all local dofs, orthonormal on the interface.
    std::vector<int> z_count;
    std::vector<std::vector<double>> z_gamma, z_full;

    int num_rows() const { return static_cast<int>(row_plus.size()); }
    int gamma_size() const { return gamma_offset.back(); }
    void apply_b(std::span<const double> u, std::span<double> lambda) const;
    void apply_bt(std::span<const double> lambda, std::span<double> u) const;  // overwrites u
    void apply_bd(std::span<const double> u, std::span<double> lambda) const;
    void apply_bdt(std::span<const double> lambda, std::span<double> u) const;  // overwrites u
    CsrMatrix b_matrix() const;
    CsrMatrix bd_matrix() const;
};

ConstraintSet build_constraints(const Mesh& mesh, const Subdivision& sub, int components);

enum class Preconditioner { dirichlet, none };

// Local operators of one subdomain: Schur complement on the interface, its
// Moore-Penrose pseudo-inverse, and interior recovery.
class SubdomainSolver {
public:
    SubdomainSolver(const Mesh& mesh, const SubdomainSystem& sys, bool floating, std::span<const double> z_gamma,
                    std::span<const double> z_full, int z_count);

    int interior_dofs() const { return n_o_; }
    int interface_dofs() const { return n_g_; }
    bool floating() const { return z_count_ > 0; }
    const std::vector<int>& pinned() const { return pinned_; }

    void schur_apply(std::span<const double> v, std::span<double> out) const;
    void schur_pinv_apply(std::span<const double> v, std::span<double> out) const;
    // f_G - A_GO A_OO^-1 f_O
    std::vector<double> condensed_rhs() const;
    std::vector<double> recover_interior(std::span<const double> u_gamma) const;

private:
    void project_out_null(std::span<double> v) const;

    int n_o_ = 0, n_g_ = 0, z_count_ = 0;
    CsrMatrix a_oo_, a_og_, a_go_, a_gg_;
    std::vector<double> f_o_, f_g_;
    SparseCholesky chol_oo_;
    SparseCholesky chol_full_;          // full or pinned local matrix
    std::vector<int> free_dofs_;        // dofs kept in chol_full_
    std::vector<int> pinned_;
    std::vector<double> z_gamma_;
};

struct FetiOptions {
    double tol = 1e-10;
    int max_iterations = 1000;
    Preconditioner preconditioner = Preconditioner::dirichlet;
    bool reorthogonalize = false;
    int workers = 1;
};

struct FetiResult {
    std::vector<double> lambda;
    std::vector<double> alpha;
    std::vector<std::vector<double>> local;  // per subdomain [interior; interface]
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

class FetiSolver {
public:
    FetiSolver(const Mesh& mesh, const Subdivision& sub, std::vector<SubdomainSystem> systems,
               const FetiOptions& opts);

    const ConstraintSet& constraints() const { return constraints_; }
    const SubdomainSolver& local(int k) const { return solvers_[k]; }
    int num_subdomains() const { return static_cast<int>(solvers_.size()); }
    int coarse_size() const { return nz_; }

    // Operators on the multiplier space.
    void apply_f(std::span<const double> lambda, std::span<double> out) const;
    void apply_p(std::span<const double> lambda, std::span<double> out) const;
    void apply_preconditioner(std::span<const double> lambda, std::span<double> out) const;
    const std::vector<double>& g_matrix() const { return g_; }  // column-major, rows x coarse_size
    const std::vector<double>& reduced_rhs() const { return d_; }
    const std::vector<double>& coarse_rhs() const { return e_; }

    FetiResult solve() const;

    // Nodal vector over all vertices (Dirichlet values on B) taking each I
    // node from its lowest-numbered copy. Throws FetiError when two copies
    // differ by more than copy_tol relative to the largest nodal value;
    // reports the largest jump.
    std::vector<double> gather(const FetiResult& r, std::span<const double> g_boundary, double copy_tol = 1e-7,
                               double* max_jump = nullptr) const;

private:
    void scatter_apply(std::span<const double> lambda, std::span<double> out, bool pinv) const;

    const Mesh& mesh_;
    const Subdivision& sub_;
    std::vector<SubdomainSystem> systems_;
    FetiOptions opts_;
    ConstraintSet constraints_;
    std::vector<SubdomainSolver> solvers_;
    int nz_ = 0;
    std::vector<int> z_offset_;
    std::vector<double> g_;
    DenseCholesky gtg_;
    std::vector<std::vector<double>> rhs_gamma_;
    std::vector<double> d_, e_;
};

}  // namespace nlfeti
