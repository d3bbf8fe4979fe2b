#include "nlfeti/mesh.hpp"

#include "nlfeti/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace nlfeti {

Mesh build_structured_mesh(int n, double delta)
{
    if (n < 2)
        throw MeshError("mesh: n must be at least 2 so that the unit square has interior nodes");
    if (!(delta > 0.0))
        throw MeshError("mesh: delta must be positive");
    const double layers_real = delta * n;
    const double layers_round = std::round(layers_real);
    if (std::abs(layers_real - layers_round) > 1e-9 * std::max(1.0, layers_real) || layers_round < 1)
        throw MeshError("mesh: delta * n must be a positive integer (got " + std::to_string(layers_real) + ")");

    Mesh m;
    m.n = n;
    m.layers = static_cast<int>(layers_round);
    m.delta = delta;
    m.spacing = 1.0 / n;
    m.h = std::sqrt(2.0) / n;

    const int cells = n + 2 * m.layers;
    const int nv = cells + 1;
    m.vertices.reserve(static_cast<std::size_t>(nv) * nv);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nv; ++i) {
            const int gi = i - m.layers;
            const int gj = j - m.layers;
            m.lattice.push_back({gi, gj});
            m.vertices.push_back({static_cast<double>(gi) / n, static_cast<double>(gj) / n});
            const bool inside = gi > 0 && gi < n && gj > 0 && gj < n;
            m.node_kind.push_back(inside ? NodeKind::interior : NodeKind::boundary);
        }

    auto vid = [nv](int i, int j) { return j * nv + i; };
    for (int j = 0; j < cells; ++j)
        for (int i = 0; i < cells; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            const bool inside = i >= m.layers && i < m.layers + n && j >= m.layers && j < m.layers + n;
            const Region r = inside ? Region::interior : Region::dirichlet;
            // Cut along the b-d diagonal; the a-c cut roughly doubles the
            // interpolation error constant of the manufactured solutions.
            m.elements.push_back({a, b, d});
            m.region.push_back(r);
            m.elements.push_back({b, c, d});
            m.region.push_back(r);
        }

    m.dof_index.assign(m.vertices.size(), -1);
    for (int v = 0; v < m.num_vertices(); ++v) {
        auto& list = m.node_kind[v] == NodeKind::interior ? m.interior_nodes : m.boundary_nodes;
        m.dof_index[v] = static_cast<int>(list.size());
        list.push_back(v);
    }

    std::vector<int> count(m.vertices.size() + 1, 0);
    for (const auto& el : m.elements)
        for (int v : el)
            ++count[v + 1];
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        count[v + 1] += count[v];
    m.vertex_elements.offsets = count;
    m.vertex_elements.items.resize(count.back());
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (int e = 0; e < m.num_elements(); ++e)
        for (int v : m.elements[e])
            m.vertex_elements.items[fill[v]++] = e;
    return m;
}

Csr element_adjacency_graph(const Mesh& mesh)
{
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        for (int k = 0; k < 3; ++k) {
            const int a = el[k], b = el[(k + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}].push_back(e);
        }
    }
    std::vector<std::vector<int>> nb(mesh.elements.size());
    for (const auto& [edge, els] : edges)
        if (els.size() == 2) {
            nb[els[0]].push_back(els[1]);
            nb[els[1]].push_back(els[0]);
        }
    Csr g;
    for (auto& list : nb) {
        std::sort(list.begin(), list.end());
        g.items.insert(g.items.end(), list.begin(), list.end());
        g.offsets.push_back(static_cast<int>(g.items.size()));
    }
    return g;
}

namespace {

template <int C, class Exact>
double l2_error_impl(const Mesh& mesh, std::span<const double> coeffs, const Exact& exact)
{
    if (coeffs.size() != mesh.vertices.size() * C)
        throw MeshError("l2_error: coefficient vector does not cover all vertices");
    // Exact for the squared error of cubic fields.
    const TriangleRule& rule = collapsed_gauss(4);
    double sum = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (mesh.region[e] != Region::interior)
            continue;
        const Triangle t = mesh.triangle(e);
        const auto& el = mesh.elements[e];
        for (const QuadPoint& q : map_rule(t, rule)) {
            const auto lam = barycentric(t, q.x);
            std::array<double, 2> ex{};
            if constexpr (C == 1)
                ex[0] = exact(q.x);
            else
                ex = exact(q.x);
            for (int c = 0; c < C; ++c) {
                double uh = 0.0;
                for (int k = 0; k < 3; ++k)
                    uh += lam[k] * coeffs[static_cast<std::size_t>(el[k]) * C + c];
                const double d = uh - ex[c];
                sum += q.w * d * d;
            }
        }
    }
    return std::sqrt(sum);
}

}  // namespace

double l2_error(const Mesh& mesh, std::span<const double> coeffs, const ScalarField& exact)
{
    return l2_error_impl<1>(mesh, coeffs, exact);
}

double l2_error(const Mesh& mesh, std::span<const double> coeffs, const VectorField& exact)
{
    return l2_error_impl<2>(mesh, coeffs, exact);
}

void write_mesh(const Mesh& mesh, const std::string& vertex_path, const std::string& element_path)
{
    std::ofstream vs(vertex_path);
    std::ofstream es(element_path);
    if (!vs || !es)
        throw MeshError("write_mesh: cannot open output files");
    vs.precision(17);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        vs << mesh.vertices[v].x << ' ' << mesh.vertices[v].y << ' '
           << (mesh.node_kind[v] == NodeKind::interior ? 'I' : 'B') << '\n';
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        es << el[0] << ' ' << el[1] << ' ' << el[2] << ' '
           << (mesh.region[e] == Region::interior ? "interior" : "dirichlet") << '\n';
    }
}

}  // namespace nlfeti
