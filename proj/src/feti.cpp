#include "nlfeti/feti.hpp"

#include "nlfeti/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace nlfeti {

namespace {

int position(const std::vector<int>& sorted, int v)
{
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    return (it != sorted.end() && *it == v) ? static_cast<int>(it - sorted.begin()) : -1;
}

std::vector<int> local_nodes(const Subdivision& sub, int k)
{
    std::vector<int> nodes = sub.interior_nodes[k];
    nodes.insert(nodes.end(), sub.interface_nodes[k].begin(), sub.interface_nodes[k].end());
    return nodes;
}

}  // namespace

void ConstraintSet::apply_b(std::span<const double> u, std::span<double> lambda) const
{
    for (int r = 0; r < num_rows(); ++r)
        lambda[r] = u[row_plus[r]] - u[row_minus[r]];
}

void ConstraintSet::apply_bt(std::span<const double> lambda, std::span<double> u) const
{
    std::fill(u.begin(), u.end(), 0.0);
    for (int r = 0; r < num_rows(); ++r) {
        u[row_plus[r]] += lambda[r];
        u[row_minus[r]] -= lambda[r];
    }
}

void ConstraintSet::apply_bd(std::span<const double> u, std::span<double> lambda) const
{
    for (int r = 0; r < num_rows(); ++r) {
        double s = 0.0;
        for (int p = bd_offsets[r]; p < bd_offsets[r + 1]; ++p)
            s += bd_value[p] * u[bd_index[p]];
        lambda[r] = s;
    }
}

void ConstraintSet::apply_bdt(std::span<const double> lambda, std::span<double> u) const
{
    std::fill(u.begin(), u.end(), 0.0);
    for (int r = 0; r < num_rows(); ++r)
        for (int p = bd_offsets[r]; p < bd_offsets[r + 1]; ++p)
            u[bd_index[p]] += bd_value[p] * lambda[r];
}

CsrMatrix ConstraintSet::b_matrix() const
{
    std::vector<Triplet> t;
    for (int r = 0; r < num_rows(); ++r) {
        t.push_back({r, row_plus[r], 1.0});
        t.push_back({r, row_minus[r], -1.0});
    }
    return csr_from_triplets(num_rows(), gamma_size(), std::move(t));
}

CsrMatrix ConstraintSet::bd_matrix() const
{
    std::vector<Triplet> t;
    for (int r = 0; r < num_rows(); ++r)
        for (int p = bd_offsets[r]; p < bd_offsets[r + 1]; ++p)
            t.push_back({r, bd_index[p], bd_value[p]});
    return csr_from_triplets(num_rows(), gamma_size(), std::move(t));
}

ConstraintSet build_constraints(const Mesh& mesh, const Subdivision& sub, int components)
{
    const int c = components;
    const int K = sub.count();
    ConstraintSet cs;
    cs.components = c;
    for (int k = 0; k < K; ++k)
        cs.gamma_offset.push_back(cs.gamma_offset.back() + static_cast<int>(sub.interface_nodes[k].size()) * c);
    cs.multiplicity.assign(cs.gamma_size(), 0.0);

    for (int v : mesh.interior_nodes) {
        const auto copies = sub.node_subdomains.row(v);
        const int m = static_cast<int>(copies.size());
        if (m < 2)
            continue;
        std::vector<int> base(m);
        for (int j = 0; j < m; ++j) {
            const int a = position(sub.interface_nodes[copies[j]], v);
            if (a < 0)
                throw FetiError("constraints: shared node missing from an interface list");
            base[j] = cs.gamma_offset[copies[j]] + a * c;
        }
        // (B D^-1 B^T) for one node/component block is (J + I)/m.
        std::vector<double> mb(static_cast<std::size_t>(m - 1) * (m - 1));
        for (int i = 0; i < m - 1; ++i)
            for (int j = 0; j < m - 1; ++j)
                mb[i * (m - 1) + j] = (1.0 + (i == j ? 1.0 : 0.0)) / m;
        const DenseCholesky mbc(mb, m - 1);
        // Column q of B_blk D^-1 solved against mb gives column q of B_D.
        std::vector<std::vector<double>> bd_cols(m, std::vector<double>(m - 1, 0.0));
        for (int q = 0; q < m; ++q) {
            auto& col = bd_cols[q];
            for (int i = 0; i < m - 1; ++i)
                col[i] = (q == 0 ? 1.0 : (q == i + 1 ? -1.0 : 0.0)) / m;
            mbc.solve_in_place(col);
        }
        for (int comp = 0; comp < c; ++comp) {
            for (int j = 0; j < m; ++j)
                cs.multiplicity[base[j] + comp] = m;
            for (int j = 1; j < m; ++j) {
                cs.row_plus.push_back(base[0] + comp);
                cs.row_minus.push_back(base[j] + comp);
                for (int q = 0; q < m; ++q) {
                    cs.bd_index.push_back(base[q] + comp);
                    cs.bd_value.push_back(bd_cols[q][j - 1]);
                }
                cs.bd_offsets.push_back(static_cast<int>(cs.bd_index.size()));
            }
        }
    }

    // Rigid modes of floating subdomains.
    cs.z_count.assign(K, 0);
    cs.z_gamma.assign(K, {});
    cs.z_full.assign(K, {});
    for (int k = 0; k < K; ++k) {
        if (!sub.floating[k])
            continue;
        const auto nodes = local_nodes(sub, k);
        const int nn = static_cast<int>(nodes.size());
        const int n_o = static_cast<int>(sub.interior_nodes[k].size());
        const int ng = nn - n_o;
        if (ng == 0)
            throw FetiError("constraints: floating subdomain without interface");
        const int r = c == 1 ? 1 : 3;
        const int nf = nn * c;
        const int nG = ng * c;
        std::vector<double> zf(static_cast<std::size_t>(nf) * r, 0.0);
        if (c == 1) {
            std::fill(zf.begin(), zf.end(), 1.0);
        } else {
            Point centre{0, 0};
            for (int a = n_o; a < nn; ++a)
                centre = centre + (1.0 / ng) * mesh.vertices[nodes[a]];
            for (int a = 0; a < nn; ++a) {
                const Point p = mesh.vertices[nodes[a]] - centre;
                zf[0 * nf + 2 * a] = 1.0;
                zf[1 * nf + 2 * a + 1] = 1.0;
                zf[2 * nf + 2 * a] = -p.y;
                zf[2 * nf + 2 * a + 1] = p.x;
            }
        }
        // Modified Gram-Schmidt on the interface part, mirrored on all dofs.
        const int off = n_o * c;
        for (int j = 0; j < r; ++j) {
            double* zj = zf.data() + static_cast<std::size_t>(j) * nf;
            for (int i = 0; i < j; ++i) {
                const double* zi = zf.data() + static_cast<std::size_t>(i) * nf;
                double s = 0.0;
                for (int q = 0; q < nG; ++q)
                    s += zi[off + q] * zj[off + q];
                for (int q = 0; q < nf; ++q)
                    zj[q] -= s * zi[q];
            }
            double nrm = 0.0;
            for (int q = 0; q < nG; ++q)
                nrm += zj[off + q] * zj[off + q];
            nrm = std::sqrt(nrm);
            if (nrm < 1e-12)
                throw FetiError("constraints: rigid modes are not independent on the interface");
            for (int q = 0; q < nf; ++q)
                zj[q] /= nrm;
        }
        std::vector<double> zg(static_cast<std::size_t>(nG) * r);
        for (int j = 0; j < r; ++j)
            for (int q = 0; q < nG; ++q)
                zg[static_cast<std::size_t>(j) * nG + q] = zf[static_cast<std::size_t>(j) * nf + off + q];
        cs.z_count[k] = r;
        cs.z_gamma[k] = std::move(zg);
        cs.z_full[k] = std::move(zf);
    }
    return cs;
}

SubdomainSolver::SubdomainSolver(const Mesh& mesh, const SubdomainSystem& sys, bool floating,
                                 std::span<const double> z_gamma, std::span<const double> z_full, int z_count)
    : n_o_(sys.interior_dofs()), n_g_(sys.interface_dofs()), z_count_(floating ? z_count : 0),
      z_gamma_(z_gamma.begin(), z_gamma.end())
{
    const int n = sys.dofs();
    std::vector<int> rows_o(n_o_), rows_g(n_g_), map_o(n, -1), map_g(n, -1);
    for (int i = 0; i < n_o_; ++i)
        rows_o[i] = map_o[i] = i;
    for (int i = 0; i < n_g_; ++i) {
        rows_g[i] = n_o_ + i;
        map_g[n_o_ + i] = i;
    }
    a_oo_ = extract_block(sys.A, rows_o, map_o, n_o_);
    a_og_ = extract_block(sys.A, rows_o, map_g, n_g_);
    a_go_ = extract_block(sys.A, rows_g, map_o, n_o_);
    a_gg_ = extract_block(sys.A, rows_g, map_g, n_g_);
    f_o_.assign(sys.rhs.begin(), sys.rhs.begin() + n_o_);
    f_g_.assign(sys.rhs.begin() + n_o_, sys.rhs.end());
    if (n_o_ > 0)
        chol_oo_ = SparseCholesky(a_oo_);

    if (floating) {
        const int c = sys.components;
        std::vector<int> nodes = sys.interior_nodes;
        nodes.insert(nodes.end(), sys.interface_nodes.begin(), sys.interface_nodes.end());
        if (c == 1) {
            pinned_ = {0};
        } else {
            const Point pa = mesh.vertices[nodes[0]];
            int b = 0;
            double best = -1.0;
            for (std::size_t q = 1; q < nodes.size(); ++q) {
                const double d = norm_l2(mesh.vertices[nodes[q]] - pa);
                if (d > best) {
                    best = d;
                    b = static_cast<int>(q);
                }
            }
            const Point pb = mesh.vertices[nodes[b]];
            pinned_ = {0, 1, 2 * b + (pb.y != pa.y ? 0 : 1)};
            // The rigid modes restricted to the pins must be invertible.
            const int nf = n;
            auto z = [&](int row, int col) { return z_full[static_cast<std::size_t>(col) * nf + pinned_[row]]; };
            const double det = z(0, 0) * (z(1, 1) * z(2, 2) - z(1, 2) * z(2, 1)) -
                               z(0, 1) * (z(1, 0) * z(2, 2) - z(1, 2) * z(2, 0)) +
                               z(0, 2) * (z(1, 0) * z(2, 1) - z(1, 1) * z(2, 0));
            double scale = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    scale = std::max(scale, std::abs(z(i, j)));
            if (std::abs(det) <= 1e-10 * scale * scale * scale)
                throw FetiError("subdomain " + std::to_string(sys.k) + ": pinned dofs do not fix the rigid modes");
        }
        std::sort(pinned_.begin(), pinned_.end());
    }
    std::vector<int> map(n, -1);
    for (int i = 0; i < n; ++i)
        if (!std::binary_search(pinned_.begin(), pinned_.end(), i)) {
            map[i] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(i);
        }
    chol_full_ = SparseCholesky(extract_block(sys.A, free_dofs_, map, static_cast<int>(free_dofs_.size())));
}

void SubdomainSolver::project_out_null(std::span<double> v) const
{
    for (int j = 0; j < z_count_; ++j) {
        const double* z = z_gamma_.data() + static_cast<std::size_t>(j) * n_g_;
        double s = 0.0;
        for (int q = 0; q < n_g_; ++q)
            s += z[q] * v[q];
        for (int q = 0; q < n_g_; ++q)
            v[q] -= s * z[q];
    }
}

void SubdomainSolver::schur_apply(std::span<const double> v, std::span<double> out) const
{
    a_gg_.multiply(v, out);
    if (n_o_ == 0)
        return;
    std::vector<double> t(n_o_);
    a_og_.multiply(v, t);
    chol_oo_.solve_in_place(t);
    a_go_.multiply_add(t, out, -1.0);
}

void SubdomainSolver::schur_pinv_apply(std::span<const double> v, std::span<double> out) const
{
    std::vector<double> w(v.begin(), v.end());
    project_out_null(w);
    const int n = n_o_ + n_g_;
    std::vector<double> full(n, 0.0);
    std::copy(w.begin(), w.end(), full.begin() + n_o_);
    std::vector<double> reduced(free_dofs_.size());
    for (std::size_t i = 0; i < free_dofs_.size(); ++i)
        reduced[i] = full[free_dofs_[i]];
    chol_full_.solve_in_place(reduced);
    std::fill(full.begin(), full.end(), 0.0);
    for (std::size_t i = 0; i < free_dofs_.size(); ++i)
        full[free_dofs_[i]] = reduced[i];
    std::copy(full.begin() + n_o_, full.end(), out.begin());
    project_out_null(out);
}

std::vector<double> SubdomainSolver::condensed_rhs() const
{
    std::vector<double> r = f_g_;
    if (n_o_ > 0) {
        std::vector<double> t = chol_oo_.solve(f_o_);
        a_go_.multiply_add(t, r, -1.0);
    }
    return r;
}

std::vector<double> SubdomainSolver::recover_interior(std::span<const double> u_gamma) const
{
    std::vector<double> t = f_o_;
    if (n_o_ == 0)
        return t;
    a_og_.multiply_add(u_gamma, t, -1.0);
    chol_oo_.solve_in_place(t);
    return t;
}

FetiSolver::FetiSolver(const Mesh& mesh, const Subdivision& sub, std::vector<SubdomainSystem> systems,
                       const FetiOptions& opts)
    : mesh_(mesh), sub_(sub), systems_(std::move(systems)), opts_(opts)
{
    const int K = sub.count();
    if (static_cast<int>(systems_.size()) != K)
        throw FetiError("feti: one subdomain system per subdomain expected");
    const int c = systems_.empty() ? 1 : systems_[0].components;
    constraints_ = build_constraints(mesh, sub, c);

    std::vector<std::optional<SubdomainSolver>> built(K);
    parallel_for(K, opts_.workers, [&](int k) {
        built[k].emplace(mesh, systems_[k], sub.floating[k] != 0, constraints_.z_gamma[k], constraints_.z_full[k],
                         constraints_.z_count[k]);
    });
    solvers_.reserve(K);
    for (auto& s : built)
        solvers_.push_back(std::move(*s));

    rhs_gamma_.resize(K);
    parallel_for(K, opts_.workers, [&](int k) { rhs_gamma_[k] = solvers_[k].condensed_rhs(); });

    z_offset_.assign(K + 1, 0);
    for (int k = 0; k < K; ++k)
        z_offset_[k + 1] = z_offset_[k] + constraints_.z_count[k];
    nz_ = z_offset_[K];

    const int nl = constraints_.num_rows();
    const int ng = constraints_.gamma_size();
    g_.assign(static_cast<std::size_t>(nl) * nz_, 0.0);
    e_.assign(nz_, 0.0);
    std::vector<double> u(ng, 0.0);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < constraints_.z_count[k]; ++j) {
            const int col = z_offset_[k] + j;
            const int off = constraints_.gamma_offset[k];
            const int len = constraints_.gamma_offset[k + 1] - off;
            const double* z = constraints_.z_gamma[k].data() + static_cast<std::size_t>(j) * len;
            std::fill(u.begin(), u.end(), 0.0);
            std::copy(z, z + len, u.begin() + off);
            constraints_.apply_b(u, std::span<double>(g_.data() + static_cast<std::size_t>(col) * nl, nl));
            e_[col] = dot(std::span<const double>(z, len), rhs_gamma_[k]);
        }
    if (nz_ > 0) {
        std::vector<double> gtg(static_cast<std::size_t>(nz_) * nz_, 0.0);
        for (int i = 0; i < nz_; ++i)
            for (int j = 0; j <= i; ++j) {
                const double s = dot(std::span<const double>(g_.data() + static_cast<std::size_t>(i) * nl, nl),
                                     std::span<const double>(g_.data() + static_cast<std::size_t>(j) * nl, nl));
                gtg[i * nz_ + j] = gtg[j * nz_ + i] = s;
            }
        gtg_ = DenseCholesky(std::move(gtg), nz_);
    }

    // d = B S^+ f
    std::vector<double> v(ng, 0.0);
    parallel_for(K, opts_.workers, [&](int k) {
        const int off = constraints_.gamma_offset[k];
        solvers_[k].schur_pinv_apply(rhs_gamma_[k],
                                     std::span<double>(v.data() + off, constraints_.gamma_offset[k + 1] - off));
    });
    d_.assign(nl, 0.0);
    constraints_.apply_b(v, d_);
}

void FetiSolver::scatter_apply(std::span<const double> lambda, std::span<double> out, bool pinv) const
{
    const int K = num_subdomains();
    const int ng = constraints_.gamma_size();
    std::vector<double> u(ng), v(ng, 0.0);
    if (pinv)
        constraints_.apply_bt(lambda, u);
    else
        constraints_.apply_bdt(lambda, u);
    parallel_for(K, opts_.workers, [&](int k) {
        const int off = constraints_.gamma_offset[k];
        const int len = constraints_.gamma_offset[k + 1] - off;
        std::span<const double> in(u.data() + off, len);
        std::span<double> o(v.data() + off, len);
        if (pinv)
            solvers_[k].schur_pinv_apply(in, o);
        else
            solvers_[k].schur_apply(in, o);
    });
    if (pinv)
        constraints_.apply_b(v, out);
    else
        constraints_.apply_bd(v, out);
}

void FetiSolver::apply_f(std::span<const double> lambda, std::span<double> out) const
{
    scatter_apply(lambda, out, true);
}

void FetiSolver::apply_preconditioner(std::span<const double> lambda, std::span<double> out) const
{
    if (opts_.preconditioner == Preconditioner::none) {
        std::copy(lambda.begin(), lambda.end(), out.begin());
        return;
    }
    scatter_apply(lambda, out, false);
}

void FetiSolver::apply_p(std::span<const double> lambda, std::span<double> out) const
{
    std::copy(lambda.begin(), lambda.end(), out.begin());
    if (nz_ == 0)
        return;
    const int nl = constraints_.num_rows();
    std::vector<double> t(nz_);
    for (int j = 0; j < nz_; ++j)
        t[j] = dot(std::span<const double>(g_.data() + static_cast<std::size_t>(j) * nl, nl), lambda);
    gtg_.solve_in_place(t);
    for (int j = 0; j < nz_; ++j)
        axpy(-t[j], std::span<const double>(g_.data() + static_cast<std::size_t>(j) * nl, nl), out);
}

FetiResult FetiSolver::solve() const
{
    const int K = num_subdomains();
    const int nl = constraints_.num_rows();
    std::vector<double> lambda0(nl, 0.0);
    if (nz_ > 0) {
        std::vector<double> t = e_;
        gtg_.solve_in_place(t);
        for (int j = 0; j < nz_; ++j)
            axpy(t[j], std::span<const double>(g_.data() + static_cast<std::size_t>(j) * nl, nl), lambda0);
    }
    KrylovOptions ko;
    ko.tol = opts_.tol;
    ko.max_iterations = opts_.max_iterations;
    ko.reorthogonalize = opts_.reorthogonalize;
    ko.keep_history = true;
    auto f = [this](std::span<const double> in, std::span<double> out) { apply_f(in, out); };
    auto p = [this](std::span<const double> in, std::span<double> out) { apply_p(in, out); };
    auto m = [this](std::span<const double> in, std::span<double> out) { apply_preconditioner(in, out); };
    KrylovResult kr = projected_pcg(f, p, m, d_, lambda0, ko);

    FetiResult res;
    res.lambda = std::move(kr.x);
    res.iterations = kr.iterations;
    res.residual = kr.residual;
    res.converged = kr.converged;
    res.history = std::move(kr.history);

    // alpha = (G^T G)^-1 G^T (d - F lambda)
    std::vector<double> r(nl);
    apply_f(res.lambda, r);
    for (int i = 0; i < nl; ++i)
        r[i] = d_[i] - r[i];
    res.alpha.assign(nz_, 0.0);
    for (int j = 0; j < nz_; ++j)
        res.alpha[j] = dot(std::span<const double>(g_.data() + static_cast<std::size_t>(j) * nl, nl), r);
    if (nz_ > 0)
        gtg_.solve_in_place(res.alpha);

    const int ng = constraints_.gamma_size();
    std::vector<double> btl(ng);
    constraints_.apply_bt(res.lambda, btl);
    res.local.resize(K);
    parallel_for(K, opts_.workers, [&](int k) {
        const int off = constraints_.gamma_offset[k];
        const int len = constraints_.gamma_offset[k + 1] - off;
        std::vector<double> rhs(len), ug(len);
        for (int q = 0; q < len; ++q)
            rhs[q] = rhs_gamma_[k][q] - btl[off + q];
        solvers_[k].schur_pinv_apply(rhs, ug);
        for (int j = 0; j < constraints_.z_count[k]; ++j) {
            const double* z = constraints_.z_gamma[k].data() + static_cast<std::size_t>(j) * len;
            for (int q = 0; q < len; ++q)
                ug[q] -= res.alpha[z_offset_[k] + j] * z[q];
        }
        std::vector<double> uo = solvers_[k].recover_interior(ug);
        uo.insert(uo.end(), ug.begin(), ug.end());
        res.local[k] = std::move(uo);
    });
    return res;
}

std::vector<double> FetiSolver::gather(const FetiResult& r, std::span<const double> g_boundary, double copy_tol,
                                       double* max_jump) const
{
    const int c = constraints_.components;
    std::vector<double> u(static_cast<std::size_t>(mesh_.num_vertices()) * c, 0.0);
    double jump = 0.0, scale = 0.0;
    int worst = -1;
    auto value = [&](int k, int v, int comp) {
        int a = position(sub_.interior_nodes[k], v);
        if (a < 0) {
            const int b = position(sub_.interface_nodes[k], v);
            if (b < 0)
                throw FetiError("gather: node not found in its subdomain");
            a = static_cast<int>(sub_.interior_nodes[k].size()) + b;
        }
        return r.local[k][static_cast<std::size_t>(a) * c + comp];
    };
    for (int v : mesh_.interior_nodes) {
        const auto copies = sub_.node_subdomains.row(v);
        for (int comp = 0; comp < c; ++comp) {
            const double first = value(copies[0], v, comp);
            u[static_cast<std::size_t>(v) * c + comp] = first;
            scale = std::max(scale, std::abs(first));
            for (std::size_t j = 1; j < copies.size(); ++j) {
                const double d = std::abs(value(copies[j], v, comp) - first);
                if (d > jump) {
                    jump = d;
                    worst = v;
                }
            }
        }
    }
    for (int v : mesh_.boundary_nodes)
        for (int comp = 0; comp < c; ++comp)
            u[static_cast<std::size_t>(v) * c + comp] = g_boundary[static_cast<std::size_t>(mesh_.dof_index[v]) * c + comp];
    if (max_jump)
        *max_jump = jump;
    if (jump > copy_tol * std::max(scale, 1e-300))
        throw FetiError("gather: copies of node " + std::to_string(worst) + " differ by " + std::to_string(jump));
    return u;
}

}  // namespace nlfeti
