#include "nlfeti/krylov.hpp"

#include "nlfeti/sparse.hpp"

#include <cmath>

namespace nlfeti {

namespace {

// Shared loop: the projection is the identity for plain PCG.
KrylovResult run(const LinearOperator& a, const LinearOperator* project, const LinearOperator& precond,
                 std::span<const double> b, std::span<const double> x0, const KrylovOptions& opts)
{
    const std::size_t n = b.size();
    KrylovResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty())
        res.x.assign(x0.begin(), x0.end());

    std::vector<double> r(b.begin(), b.end()), tmp(n), w(n), z(n), y(n), p(n), q(n);
    if (!x0.empty()) {
        a(res.x, tmp);
        axpy(-1.0, tmp, r);
    }
    auto precondition = [&](std::span<const double> rr) {
        if (project) {
            (*project)(rr, w);
            precond(w, z);
            (*project)(z, y);
        } else {
            precond(rr, y);
        }
    };
    precondition(r);
    const double y0 = norm2(y);
    res.residual = 1.0;
    if (opts.keep_history)
        res.history.push_back(1.0);
    if (y0 == 0.0) {
        res.converged = true;
        res.residual = 0.0;
        return res;
    }

    std::vector<std::vector<double>> dirs, fdirs;
    std::vector<double> dir_curv;
    double rho = dot(project ? w : std::span<const double>(r), y);
    p = y;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        a(p, q);
        const double curv = dot(p, q);
        if (!(curv > 0.0))
            break;
        const double alpha = rho / curv;
        axpy(alpha, p, res.x);
        axpy(-alpha, q, r);
        if (opts.reorthogonalize) {
            dirs.push_back(p);
            fdirs.push_back(q);
            dir_curv.push_back(curv);
        }
        precondition(r);
        res.iterations = it;
        res.residual = norm2(y) / y0;
        if (opts.keep_history)
            res.history.push_back(res.residual);
        if (res.residual <= opts.tol) {
            res.converged = true;
            break;
        }
        const double rho_new = dot(project ? w : std::span<const double>(r), y);
        if (opts.reorthogonalize) {
            p = y;
            for (std::size_t k = 0; k < dirs.size(); ++k)
                axpy(-dot(y, fdirs[k]) / dir_curv[k], dirs[k], p);
        } else {
            const double beta = rho_new / rho;
            for (std::size_t i = 0; i < n; ++i)
                p[i] = y[i] + beta * p[i];
        }
        rho = rho_new;
    }
    return res;
}

}  // namespace

KrylovResult pcg(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                 const KrylovOptions& opts, std::span<const double> x0)
{
    return run(a, nullptr, precond, b, x0, opts);
}

KrylovResult projected_pcg(const LinearOperator& f, const LinearOperator& project, const LinearOperator& precond,
                           std::span<const double> d, std::span<const double> lambda0, const KrylovOptions& opts)
{
    return run(f, &project, precond, d, lambda0, opts);
}

}  // namespace nlfeti
