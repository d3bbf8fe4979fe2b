#pragma once

#include "nlfeti/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlfeti {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Elements of Omega-hat carry the source term, elements of Gamma^D carry
// Dirichlet data only.
enum class Region : std::uint8_t { interior, dirichlet };
// I = nodes strictly inside the unit square, B = everything else.
enum class NodeKind : std::uint8_t { interior, boundary };

struct Csr {
    std::vector<int> offsets{0};
    std::vector<int> items;
    std::span<const int> row(int i) const
    {
        return {items.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    int rows() const { return static_cast<int>(offsets.size()) - 1; }
};

// Uniform triangulation of [-delta, 1+delta]^2; every grid square is cut
// along the same diagonal. Built once, never modified.
struct Mesh {
    int n = 0;              // cells per unit length
    int layers = 0;         // cells across the Dirichlet collar (delta * n)
    double delta = 0.0;
    double spacing = 0.0;   // 1/n
    double h = 0.0;         // largest element diameter
    std::vector<Point> vertices;
    std::vector<std::array<int, 2>> lattice;  // integer grid coordinates of vertices
    std::vector<std::array<int, 3>> elements;  // counter-clockwise
    std::vector<Region> region;
    std::vector<NodeKind> node_kind;
    std::vector<int> dof_index;  // position of a vertex within I or within B
    std::vector<int> interior_nodes;
    std::vector<int> boundary_nodes;
    Csr vertex_elements;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }
    Triangle triangle(int e) const
    {
        const auto& el = elements[e];
        return {vertices[el[0]], vertices[el[1]], vertices[el[2]]};
    }
};

Mesh build_structured_mesh(int n, double delta);

// Edge-neighbour graph of the elements.
Csr element_adjacency_graph(const Mesh& mesh);

using ScalarField = std::function<double(Point)>;
using VectorField = std::function<std::array<double, 2>(Point)>;

// L2(Omega-hat) error of a P1 function given by nodal values on all vertices
// (interleaved by component for vector fields).
double l2_error(const Mesh& mesh, std::span<const double> coeffs, const ScalarField& exact);
double l2_error(const Mesh& mesh, std::span<const double> coeffs, const VectorField& exact);

// Plain text dumps: "x y label" per vertex and "i j k label" per element.
void write_mesh(const Mesh& mesh, const std::string& vertex_path, const std::string& element_path);

}  // namespace nlfeti
