#include "nlfeti/assembly.hpp"

#include "nlfeti/parallel.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace nlfeti {

namespace {

using Key = std::array<int, 10>;

struct KeyHash {
    std::size_t operator()(const Key& k) const
    {
        std::size_t h = 1469598103934665603ull;
        for (int v : k) {
            h ^= static_cast<std::size_t>(static_cast<unsigned>(v));
            h *= 1099511628211ull;
        }
        return h;
    }
};

Key pair_key(const Mesh& m, int e, int f)
{
    const auto& ee = m.elements[e];
    const auto& ff = m.elements[f];
    const auto o = m.lattice[ee[0]];
    Key k{};
    int p = 0;
    for (int i = 1; i < 3; ++i) {
        k[p++] = m.lattice[ee[i]][0] - o[0];
        k[p++] = m.lattice[ee[i]][1] - o[1];
    }
    for (int i = 0; i < 3; ++i) {
        k[p++] = m.lattice[ff[i]][0] - o[0];
        k[p++] = m.lattice[ff[i]][1] - o[1];
    }
    return k;
}

bool skip_pair(const Mesh& m, int e, int f)
{
    return m.region[e] == Region::dirichlet && m.region[f] == Region::dirichlet;
}

// Rows of a matrix indexed by vertices; columns are vertex ids, each node
// entry holds a comps x comps block.
struct RowBlock {
    int comps = 1;
    std::vector<int> row_vertex;
    std::vector<int> vertex_row;
    Csr cols;
    std::vector<double> values;

    std::size_t block_offset(int r, int ci) const
    {
        const std::size_t ncols = cols.offsets[r + 1] - cols.offsets[r];
        return static_cast<std::size_t>(cols.offsets[r]) * comps * comps + static_cast<std::size_t>(ci) * ncols * comps;
    }
};

}  // namespace

struct Assembler::Cache {
    std::vector<int> config;  // per partner slot, -1 when the slot is not assembled
    std::vector<LocalMatrix> matrices;
};

Assembler::Assembler(const Mesh& mesh, const KernelSpec& spec, BallStrategy strategy, const QuadratureOptions& quad,
                     int workers)
    : mesh_(mesh), spec_(spec), strategy_(strategy), quad_(quad), workers_(std::max(1, workers)),
      index_(mesh, spec.delta, spec.norm), cache_(std::make_unique<Cache>())
{
    check_compatible(spec_, strategy_);
    if (std::abs(spec.delta - mesh.delta) > 1e-12 * mesh.delta)
        throw KernelError("assembly: kernel horizon differs from the mesh collar width");

    std::unordered_map<Key, int, KeyHash> ids;
    std::vector<std::pair<int, int>> representative;
    cache_->config.assign(index_.num_entries(), -1);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto part = index_.partners(e);
        for (std::size_t s = 0; s < part.size(); ++s) {
            const int f = part[s];
            if (f < e || skip_pair(mesh, e, f))
                continue;
            ++num_pairs_;
            const Key key = pair_key(mesh, e, f);
            auto [it, fresh] = ids.try_emplace(key, static_cast<int>(representative.size()));
            if (fresh)
                representative.emplace_back(e, f);
            cache_->config[index_.offset(e) + s] = it->second;
        }
    }

    cache_->matrices.resize(representative.size());
    const double sp = mesh.spacing;
    parallel_for(static_cast<int>(representative.size()), workers_, [&](int id) {
        const auto [e, f] = representative[id];
        const auto o = mesh.lattice[mesh.elements[e][0]];
        auto rel = [&](int v) {
            return Point{(mesh.lattice[v][0] - o[0]) * sp, (mesh.lattice[v][1] - o[1]) * sp};
        };
        Triangle te, tf;
        for (int i = 0; i < 3; ++i) {
            te[i] = rel(mesh.elements[e][i]);
            tf[i] = rel(mesh.elements[f][i]);
        }
        cache_->matrices[id] = assemble_pair(te, tf, spec_, strategy_, quad_);
    });
}

Assembler::~Assembler() = default;

std::size_t Assembler::distinct_pair_matrices() const { return cache_->matrices.size(); }

const LocalMatrix& Assembler::pair_matrix(int e, int ehat) const
{
    const auto part = index_.partners(e);
    const auto it = std::lower_bound(part.begin(), part.end(), ehat);
    if (it == part.end() || *it != ehat)
        throw KernelError("assembly: elements do not interact");
    const int id = cache_->config[index_.offset(e) + (it - part.begin())];
    if (id < 0)
        throw KernelError("assembly: pair is not assembled (order or collar pair)");
    return cache_->matrices[id];
}

namespace {

RowBlock accumulate(const Mesh& mesh, const InteractionIndex& index, const std::vector<int>& config,
                    const std::vector<LocalMatrix>& matrices, const std::vector<char>& elem_in,
                    std::vector<int> rows, int comps, const std::function<double(int, int)>& weight)
{
    RowBlock rb;
    rb.comps = comps;
    rb.row_vertex = std::move(rows);
    rb.vertex_row.assign(mesh.num_vertices(), -1);
    for (std::size_t r = 0; r < rb.row_vertex.size(); ++r)
        rb.vertex_row[rb.row_vertex[r]] = static_cast<int>(r);

    // Pattern: vertices of all assembled pairs that touch the row vertex.
    std::vector<int> stamp(mesh.num_vertices(), -1);
    std::vector<int> list;
    for (std::size_t r = 0; r < rb.row_vertex.size(); ++r) {
        list.clear();
        const int v = rb.row_vertex[r];
        auto add = [&](int e) {
            for (int w : mesh.elements[e])
                if (stamp[w] != static_cast<int>(r)) {
                    stamp[w] = static_cast<int>(r);
                    list.push_back(w);
                }
        };
        for (int e : mesh.vertex_elements.row(v)) {
            if (!elem_in[e])
                continue;
            for (int f : index.partners(e))
                if (elem_in[f] && !skip_pair(mesh, e, f))
                    add(f);
        }
        std::sort(list.begin(), list.end());
        rb.cols.items.insert(rb.cols.items.end(), list.begin(), list.end());
        rb.cols.offsets.push_back(static_cast<int>(rb.cols.items.size()));
    }
    rb.values.assign(rb.cols.items.size() * comps * comps, 0.0);

    std::array<int, 6> node_vertex{};
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!elem_in[e])
            continue;
        const auto part = index.partners(e);
        for (std::size_t s = 0; s < part.size(); ++s) {
            const int f = part[s];
            const int id = config[index.offset(e) + s];
            if (id < 0 || !elem_in[f])
                continue;
            const LocalMatrix& lm = matrices[id];
            const double w = weight(e, f) * (e == f ? 1.0 : 2.0);
            for (int i = 0; i < 3; ++i)
                node_vertex[i] = mesh.elements[e][i];
            for (int i = 0; i < 3; ++i)
                node_vertex[lm.ehat_local[i]] = mesh.elements[f][i];
            const int dim = lm.dim();
            for (int i = 0; i < lm.nodes; ++i) {
                const int r = rb.vertex_row[node_vertex[i]];
                if (r < 0)
                    continue;
                const auto crow = rb.cols.row(r);
                for (int j = 0; j < lm.nodes; ++j) {
                    const int p = static_cast<int>(std::lower_bound(crow.begin(), crow.end(), node_vertex[j]) - crow.begin());
                    for (int ci = 0; ci < comps; ++ci) {
                        double* row = rb.values.data() + rb.block_offset(r, ci);
                        const double* src = lm.values.data() + static_cast<std::size_t>(i * comps + ci) * dim + j * comps;
                        for (int cj = 0; cj < comps; ++cj)
                            row[p * comps + cj] += w * src[cj];
                    }
                }
            }
        }
    }
    return rb;
}

// Load vector contribution of one element: integral of f psi_i.
void element_load(const Mesh& mesh, int e, const VectorField& f, int comps, double scale,
                  const std::function<void(int vertex, int comp, double value)>& sink)
{
    const Triangle t = mesh.triangle(e);
    std::array<std::array<double, 2>, 3> acc{};
    for (const QuadPoint& q : map_rule(t, collapsed_gauss(4))) {
        const auto lam = barycentric(t, q.x);
        const auto fv = f(q.x);
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < comps; ++c)
                acc[k][c] += q.w * fv[c] * lam[k];
    }
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < comps; ++c)
            sink(mesh.elements[e][k], c, scale * acc[k][c]);
}

}  // namespace

std::vector<double> AssembledSystem::rhs() const
{
    std::vector<double> r = f;
    B.multiply_add(g, r, -1.0);
    return r;
}

AssembledSystem Assembler::assemble_global(const ProblemData& data) const
{
    const Mesh& m = mesh_;
    const int c = spec_.components();
    std::vector<char> all(m.num_elements(), 1);
    const RowBlock rb = accumulate(m, index_, cache_->config, cache_->matrices, all, m.interior_nodes, c,
                                   [](int, int) { return 1.0; });

    AssembledSystem sys;
    sys.components = c;
    const int ni = static_cast<int>(m.interior_nodes.size()) * c;
    const int nb = static_cast<int>(m.boundary_nodes.size()) * c;
    sys.A = CsrMatrix::zeros(ni, ni);
    sys.B = CsrMatrix::zeros(ni, nb);
    for (std::size_t r = 0; r < rb.row_vertex.size(); ++r) {
        const auto crow = rb.cols.row(static_cast<int>(r));
        for (int ci = 0; ci < c; ++ci) {
            const double* vals = rb.values.data() + rb.block_offset(static_cast<int>(r), ci);
            for (std::size_t p = 0; p < crow.size(); ++p) {
                const int v = crow[p];
                CsrMatrix& target = m.node_kind[v] == NodeKind::interior ? sys.A : sys.B;
                for (int cj = 0; cj < c; ++cj) {
                    target.col_idx.push_back(m.dof_index[v] * c + cj);
                    target.values.push_back(vals[p * c + cj]);
                }
            }
            const int row = static_cast<int>(r) * c + ci;
            sys.A.row_ptr[row + 1] = static_cast<int>(sys.A.col_idx.size());
            sys.B.row_ptr[row + 1] = static_cast<int>(sys.B.col_idx.size());
        }
    }

    sys.f.assign(ni, 0.0);
    for (int e = 0; e < m.num_elements(); ++e)
        if (m.region[e] == Region::interior)
            element_load(m, e, data.f, c, 1.0, [&](int v, int comp, double val) {
                if (m.node_kind[v] == NodeKind::interior)
                    sys.f[m.dof_index[v] * c + comp] += val;
            });
    sys.g.assign(nb, 0.0);
    for (int v : m.boundary_nodes) {
        const auto gv = data.g(m.vertices[v]);
        for (int comp = 0; comp < c; ++comp)
            sys.g[m.dof_index[v] * c + comp] = gv[comp];
    }
    return sys;
}

SubdomainSystem Assembler::assemble_subdomain(const Subdivision& sub, int k, const ProblemData& data) const
{
    const Mesh& m = mesh_;
    const int c = spec_.components();
    SubdomainSystem s;
    s.k = k;
    s.components = c;
    s.interior_nodes = sub.interior_nodes[k];
    s.interface_nodes = sub.interface_nodes[k];

    std::vector<char> member(m.num_elements(), 0);
    for (int e : sub.extended[k])
        member[e] = 1;
    for (int e : sub.dirichlet[k])
        member[e] = 1;
    std::vector<int> rows = s.interior_nodes;
    rows.insert(rows.end(), s.interface_nodes.begin(), s.interface_nodes.end());
    const RowBlock rb = accumulate(m, index_, cache_->config, cache_->matrices, member, rows, c,
                                   [&](int e, int f) { return 1.0 / sub.zeta_elements(e, f); });

    std::vector<double> gval(static_cast<std::size_t>(m.num_vertices()) * c, 0.0);
    for (int v : m.boundary_nodes) {
        const auto gv = data.g(m.vertices[v]);
        for (int comp = 0; comp < c; ++comp)
            gval[static_cast<std::size_t>(v) * c + comp] = gv[comp];
    }

    const int n = static_cast<int>(rows.size()) * c;
    s.A = CsrMatrix::zeros(n, n);
    s.rhs.assign(n, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto crow = rb.cols.row(static_cast<int>(r));
        for (int ci = 0; ci < c; ++ci) {
            const int row = static_cast<int>(r) * c + ci;
            const double* vals = rb.values.data() + rb.block_offset(static_cast<int>(r), ci);
            for (std::size_t p = 0; p < crow.size(); ++p) {
                const int v = crow[p];
                const int lr = rb.vertex_row[v];
                for (int cj = 0; cj < c; ++cj) {
                    if (m.node_kind[v] == NodeKind::interior) {
                        if (lr < 0)
                            throw SubdivisionError("assembly: subdomain row couples to a node outside the subdomain");
                        s.A.col_idx.push_back(lr * c + cj);
                        s.A.values.push_back(vals[p * c + cj]);
                    } else {
                        s.rhs[row] -= vals[p * c + cj] * gval[static_cast<std::size_t>(v) * c + cj];
                    }
                }
            }
            s.A.row_ptr[row + 1] = static_cast<int>(s.A.col_idx.size());
        }
    }
    // Columns of interior and interface nodes interleave by vertex id; sort each row.
    for (int row = 0; row < n; ++row) {
        const int b = s.A.row_ptr[row], e = s.A.row_ptr[row + 1];
        std::vector<std::pair<int, double>> tmp;
        tmp.reserve(e - b);
        for (int p = b; p < e; ++p)
            tmp.emplace_back(s.A.col_idx[p], s.A.values[p]);
        std::sort(tmp.begin(), tmp.end(), [](auto& x, auto& y) { return x.first < y.first; });
        for (int p = b; p < e; ++p) {
            s.A.col_idx[p] = tmp[p - b].first;
            s.A.values[p] = tmp[p - b].second;
        }
    }

    for (int e : sub.extended[k]) {
        const double scale = 1.0 / sub.zeta_elements(e, e);
        element_load(m, e, data.f, c, scale, [&](int v, int comp, double val) {
            const int lr = rb.vertex_row[v];
            if (lr >= 0)
                s.rhs[lr * c + comp] += val;
        });
    }
    return s;
}

std::vector<SubdomainSystem> Assembler::assemble_subdomains(const Subdivision& sub, const ProblemData& data) const
{
    std::vector<SubdomainSystem> out(sub.count());
    parallel_for(sub.count(), workers_, [&](int k) { out[k] = assemble_subdomain(sub, k, data); });
    return out;
}

}  // namespace nlfeti
