#include "nlfeti/subdivision.hpp"

#include "nlfeti/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace nlfeti {

namespace {

int count_common(std::span<const int> a, std::span<const int> b)
{
    int c = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++c;
            ++i;
            ++j;
        }
    }
    return c;
}

std::vector<int> split_points(int n, int k)
{
    std::vector<int> b(k + 1);
    for (int p = 0; p <= k; ++p)
        b[p] = static_cast<int>((static_cast<long long>(p) * n + k / 2) / k);
    return b;
}

}  // namespace

int Subdivision::zeta_elements(int e, int f) const
{
    return count_common(element_subdomains.row(e), element_subdomains.row(f));
}

int Subdivision::zeta_nodes(int u, int v) const
{
    return count_common(node_subdomains.row(u), node_subdomains.row(v));
}

Subdivision build_subdivision(const Mesh& mesh, int k1, int k2, const InteractionIndex& index, int workers)
{
    if (k1 < 1 || k2 < 1)
        throw SubdivisionError("subdivision: k1 and k2 must be positive");
    if (k1 > mesh.n || k2 > mesh.n)
        throw SubdivisionError("subdivision: more subdomains per direction than grid cells");
    Subdivision sub;
    sub.k1 = k1;
    sub.k2 = k2;
    const int K = k1 * k2;
    const int ne = mesh.num_elements();
    const BallNorm norm = index.norm();
    const double delta = index.delta();
    const double slack = index.max_slack();
    sub.radius = 0.5 * delta + slack;

    // Owned rectangles, snapped to grid lines.
    const auto bx = split_points(mesh.n, k1);
    const auto by = split_points(mesh.n, k2);
    sub.owner.assign(ne, -1);
    sub.owned.assign(K, {});
    std::vector<Point> bary(ne);
    for (int e = 0; e < ne; ++e) {
        bary[e] = barycenter(mesh.triangle(e));
        if (mesh.region[e] != Region::interior)
            continue;
        const int ci = static_cast<int>(std::floor(bary[e].x * mesh.n));
        const int cj = static_cast<int>(std::floor(bary[e].y * mesh.n));
        const int p = static_cast<int>(std::upper_bound(bx.begin(), bx.end(), ci) - bx.begin()) - 1;
        const int q = static_cast<int>(std::upper_bound(by.begin(), by.end(), cj) - by.begin()) - 1;
        sub.owner[e] = q * k1 + p;
        sub.owned[q * k1 + p].push_back(e);
    }

    // Grid over owned barycenters for neighbour queries.
    std::vector<int> interior_ids;
    std::vector<Point> interior_pts;
    for (int e = 0; e < ne; ++e)
        if (sub.owner[e] >= 0) {
            interior_ids.push_back(e);
            interior_pts.push_back(bary[e]);
        }
    const double r = sub.radius * (1.0 + 1e-12);
    BucketGrid grid(interior_pts, r);
    const Csr adj = element_adjacency_graph(mesh);

    // Each subdomain decides which of its elements its neighbours need: a
    // breadth-first search from the elements on its rim, expanding through
    // elements within r of the neighbour, stopping when a layer adds none.
    std::vector<std::vector<std::vector<int>>> outbox(K, std::vector<std::vector<int>>(K));
    parallel_for(K, workers, [&](int k) {
        std::vector<std::vector<int>> seeds(K);
        for (int e : sub.owned[k]) {
            bool rim = false;
            for (int v : mesh.elements[e])
                for (int f : mesh.vertex_elements.row(v))
                    if (sub.owner[f] != k)
                        rim = true;
            if (!rim)
                continue;
            std::set<int> near;
            grid.query(bary[e], r, norm, [&](int q) {
                const int l = sub.owner[interior_ids[q]];
                if (l != k)
                    near.insert(l);
            });
            for (int l : near)
                seeds[l].push_back(e);
        }
        std::vector<int> visited(ne, -1);
        for (int l = 0; l < K; ++l) {
            if (seeds[l].empty())
                continue;
            auto qualifies = [&](int e) {
                bool hit = false;
                grid.query(bary[e], r, norm, [&](int q) {
                    if (sub.owner[interior_ids[q]] == l)
                        hit = true;
                });
                return hit;
            };
            std::vector<int> frontier = seeds[l];
            std::vector<int>& out = outbox[k][l];
            for (int e : frontier)
                visited[e] = l;
            out = frontier;
            while (!frontier.empty()) {
                std::vector<int> next;
                for (int e : frontier)
                    for (int f : adj.row(e)) {
                        if (sub.owner[f] != k || visited[f] == l)
                            continue;
                        visited[f] = l;
                        if (qualifies(f))
                            next.push_back(f);
                    }
                out.insert(out.end(), next.begin(), next.end());
                frontier = std::move(next);
            }
            std::sort(out.begin(), out.end());
        }
    });

    // Delivery round.
    sub.extended.assign(K, {});
    for (int l = 0; l < K; ++l) {
        auto& ext = sub.extended[l];
        ext = sub.owned[l];
        for (int k = 0; k < K; ++k)
            ext.insert(ext.end(), outbox[k][l].begin(), outbox[k][l].end());
        std::sort(ext.begin(), ext.end());
        ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
    }

    // Collar elements within reach of an owned set.
    sub.dirichlet.assign(K, {});
    {
        const double rd = (delta + slack) * (1.0 + 1e-12);
        BucketGrid wide(interior_pts, rd);
        for (int e = 0; e < ne; ++e) {
            if (mesh.region[e] == Region::interior)
                continue;
            std::set<int> near;
            wide.query(bary[e], rd, norm, [&](int q) { near.insert(sub.owner[interior_ids[q]]); });
            for (int k : near)
                sub.dirichlet[k].push_back(e);
        }
    }

    // S(E) and node memberships.
    std::vector<std::vector<int>> es(ne), ns(mesh.num_vertices());
    for (int k = 0; k < K; ++k) {
        for (const auto* list : {&sub.extended[k], &sub.dirichlet[k]})
            for (int e : *list) {
                es[e].push_back(k);
                for (int v : mesh.elements[e])
                    if (ns[v].empty() || ns[v].back() != k)
                        ns[v].push_back(k);
            }
    }
    for (auto& s : ns) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    for (int e = 0; e < ne; ++e) {
        sub.element_subdomains.items.insert(sub.element_subdomains.items.end(), es[e].begin(), es[e].end());
        sub.element_subdomains.offsets.push_back(static_cast<int>(sub.element_subdomains.items.size()));
    }
    for (const auto& s : ns) {
        sub.node_subdomains.items.insert(sub.node_subdomains.items.end(), s.begin(), s.end());
        sub.node_subdomains.offsets.push_back(static_cast<int>(sub.node_subdomains.items.size()));
    }

    sub.interior_nodes.assign(K, {});
    sub.interface_nodes.assign(K, {});
    for (int v : mesh.interior_nodes) {
        const auto s = sub.node_subdomains.row(v);
        for (int k : s)
            (s.size() >= 2 ? sub.interface_nodes : sub.interior_nodes)[k].push_back(v);
    }
    sub.floating.assign(K, 1);
    for (int v : mesh.boundary_nodes)
        for (int k : sub.node_subdomains.row(v))
            sub.floating[k] = 0;
    return sub;
}

void check_coverage(const Mesh& mesh, const Subdivision& sub, const InteractionIndex& index)
{
    for (int e = 0; e < mesh.num_elements(); ++e)
        for (int f : index.partners(e)) {
            if (f < e)
                continue;
            if (mesh.region[e] == Region::dirichlet && mesh.region[f] == Region::dirichlet)
                continue;
            if (sub.zeta_elements(e, f) == 0)
                throw SubdivisionError("subdivision: interacting elements " + std::to_string(e) + " and " +
                                       std::to_string(f) + " share no subdomain");
        }
}

void write_subdivision_csv(const Mesh& mesh, const Subdivision& sub, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw SubdivisionError("cannot write " + path);
    os.precision(17);
    os << "element,x,y,region,owner,zeta,subdomains\n";
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Point b = barycenter(mesh.triangle(e));
        const auto s = sub.element_subdomains.row(e);
        os << e << ',' << b.x << ',' << b.y << ',' << (mesh.region[e] == Region::interior ? "interior" : "dirichlet")
           << ',' << sub.owner[e] << ',' << s.size() << ',';
        for (std::size_t i = 0; i < s.size(); ++i)
            os << (i ? " " : "") << s[i];
        os << '\n';
    }
}

}  // namespace nlfeti
