#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nlfeti {

using LinearOperator = std::function<void(std::span<const double> in, std::span<double> out)>;

struct KrylovOptions {
    double tol = 1e-10;      // on the preconditioned residual, relative to the start
    int max_iterations = 10000;
    bool reorthogonalize = false;
    bool keep_history = false;
};

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;   // final relative preconditioned residual
    bool converged = false;
    std::vector<double> history;
};

// Preconditioned conjugate gradients from x0 (zero when empty).
KrylovResult pcg(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                 const KrylovOptions& opts, std::span<const double> x0 = {});

// Conjugate gradients on the projected system P F lambda = P d started at
// lambda0: r = d - F lambda, w = P r, z = M^-1 w, y = P z.
KrylovResult projected_pcg(const LinearOperator& f, const LinearOperator& project, const LinearOperator& precond,
                           std::span<const double> d, std::span<const double> lambda0, const KrylovOptions& opts);

}  // namespace nlfeti
