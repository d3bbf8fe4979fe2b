#pragma once

#include "nlfeti/interaction.hpp"
#include "nlfeti/mesh.hpp"
#include "nlfeti/pair_integrator.hpp"
#include "nlfeti/sparse.hpp"
#include "nlfeti/subdivision.hpp"

#include <memory>
#include <vector>

namespace nlfeti {

// Global system over the dofs of I: A u = f - B g, with B coupling I to the
// Dirichlet dofs of B. Vector problems interleave components per node.
struct AssembledSystem {
    int components = 1;
    CsrMatrix A;
    CsrMatrix B;
    std::vector<double> f;
    std::vector<double> g;
    std::vector<double> rhs() const;
};

// One subdomain: local dofs are the interior nodes (zeta = 1) followed by the
// interface nodes; pair contributions are weighted by 1/zeta so that the
// subdomain energies sum to the global one.
struct SubdomainSystem {
    int k = 0;
    int components = 1;
    std::vector<int> interior_nodes;
    std::vector<int> interface_nodes;
    CsrMatrix A;               // full local matrix
    std::vector<double> rhs;   // weighted load minus weighted Dirichlet lift

    int interior_dofs() const { return static_cast<int>(interior_nodes.size()) * components; }
    int interface_dofs() const { return static_cast<int>(interface_nodes.size()) * components; }
    int dofs() const { return interior_dofs() + interface_dofs(); }
};

// Dirichlet data and source term; scalar problems use component 0.
struct ProblemData {
    VectorField f;
    VectorField g;
};

// Owns the pair integrals of a mesh. Pairs that are translates of each other
// on the lattice share one element matrix, computed once in relative
// coordinates; results do not depend on the number of workers.
class Assembler {
public:
    Assembler(const Mesh& mesh, const KernelSpec& spec, BallStrategy strategy, const QuadratureOptions& quad,
              int workers = 1);
    ~Assembler();

    const Mesh& mesh() const { return mesh_; }
    const KernelSpec& kernel() const { return spec_; }
    const InteractionIndex& interactions() const { return index_; }
    std::size_t num_pairs() const { return num_pairs_; }
    std::size_t distinct_pair_matrices() const;

    // Element matrix of the ordered pair (e, ehat), e <= ehat.
    const LocalMatrix& pair_matrix(int e, int ehat) const;

    AssembledSystem assemble_global(const ProblemData& data) const;
    SubdomainSystem assemble_subdomain(const Subdivision& sub, int k, const ProblemData& data) const;
    std::vector<SubdomainSystem> assemble_subdomains(const Subdivision& sub, const ProblemData& data) const;

private:
    struct Cache;
    const Mesh& mesh_;
    KernelSpec spec_;
    BallStrategy strategy_;
    QuadratureOptions quad_;
    int workers_;
    InteractionIndex index_;
    std::size_t num_pairs_ = 0;
    std::unique_ptr<Cache> cache_;
};

}  // namespace nlfeti
