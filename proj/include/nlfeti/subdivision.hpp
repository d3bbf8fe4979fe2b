#pragma once

#include "nlfeti/interaction.hpp"
#include "nlfeti/mesh.hpp"

#include <stdexcept>
#include <vector>

namespace nlfeti {

class SubdivisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Overlapping subdomains: k1 x k2 rectangles (owned sets) extended by the
// elements of neighbours that lie within delta/2 (+ slack), plus the
// Dirichlet collar elements each owned set can reach.
struct Subdivision {
    int k1 = 1, k2 = 1;
    double radius = 0.0;  // extension radius delta/2 + slack
    std::vector<int> owner;                       // per element, -1 in the collar
    std::vector<std::vector<int>> owned;          // sorted
    std::vector<std::vector<int>> extended;       // owned + received, sorted
    std::vector<std::vector<int>> dirichlet;      // collar elements, sorted
    Csr element_subdomains;                       // S(E)
    Csr node_subdomains;                          // subdomains whose elements touch a vertex
    std::vector<std::vector<int>> interior_nodes;   // I nodes with zeta == 1, sorted by id
    std::vector<std::vector<int>> interface_nodes;  // I nodes with zeta >= 2, sorted by id
    std::vector<char> floating;                   // no Dirichlet dof in reach

    int count() const { return k1 * k2; }
    // Number of subdomains containing both elements (both vertices).
    int zeta_elements(int e, int f) const;
    int zeta_nodes(int u, int v) const;
};

Subdivision build_subdivision(const Mesh& mesh, int k1, int k2, const InteractionIndex& index, int workers = 1);

// Every interacting pair with a dof in I lies in at least one subdomain;
// throws SubdivisionError naming the first uncovered pair.
void check_coverage(const Mesh& mesh, const Subdivision& sub, const InteractionIndex& index);

// One line per element: id, barycenter, region, owner, zeta and subdomain list.
void write_subdivision_csv(const Mesh& mesh, const Subdivision& sub, const std::string& path);

}  // namespace nlfeti
