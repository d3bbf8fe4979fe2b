#include "nlfeti/cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <cmath>

namespace nlfeti {

std::vector<int> amd_ordering(const CsrMatrix& a)
{
    using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    std::vector<Eigen::Triplet<double, int>> t;
    t.reserve(a.nnz());
    for (int i = 0; i < a.rows; ++i)
        for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            t.emplace_back(a.col_idx[p], i, 1.0);
    SpMat m(a.rows, a.cols);
    m.setFromTriplets(t.begin(), t.end());
    Eigen::AMDOrdering<int> amd;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
    amd(m, pinv);
    // pinv maps new positions to original indices
    return {pinv.indices().data(), pinv.indices().data() + pinv.indices().size()};
}

namespace {

// Nonzero pattern of row k of L (excluding the diagonal), topologically
// ordered in s[top..n). Marks use a stamp array.
int ereach(const std::vector<int>& cp, const std::vector<int>& ci, int k, const std::vector<int>& parent,
           std::vector<int>& s, std::vector<int>& stamp)
{
    const int n = static_cast<int>(parent.size());
    int top = n;
    stamp[k] = k;
    for (int p = cp[k]; p < cp[k + 1]; ++p) {
        int i = ci[p];
        if (i > k)
            continue;
        int len = 0;
        for (; stamp[i] != k; i = parent[i]) {
            s[len++] = i;
            stamp[i] = k;
        }
        while (len > 0)
            s[--top] = s[--len];
    }
    return top;
}

}  // namespace

SparseCholesky::SparseCholesky(const CsrMatrix& a) : n_(a.rows)
{
    if (a.rows != a.cols)
        throw SparseError("Cholesky: matrix is not square");
    const int n = n_;
    perm_ = amd_ordering(a);
    std::vector<int> pinv(n);
    for (int k = 0; k < n; ++k)
        pinv[perm_[k]] = k;

    // Upper triangle of P A P^T in compressed columns.
    std::vector<int> cp(n + 1, 0), ci;
    std::vector<double> cx;
    std::vector<double> diag(n, 0.0);
    for (int k = 0; k < n; ++k) {
        const int o = perm_[k];
        for (int p = a.row_ptr[o]; p < a.row_ptr[o + 1]; ++p) {
            const int i = pinv[a.col_idx[p]];
            if (i <= k) {
                ci.push_back(i);
                cx.push_back(a.values[p]);
                if (i == k)
                    diag[k] = a.values[p];
            }
        }
        cp[k + 1] = static_cast<int>(ci.size());
    }

    // Elimination tree.
    std::vector<int> parent(n, -1), ancestor(n, -1);
    for (int k = 0; k < n; ++k)
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            int i = ci[p];
            while (i != -1 && i < k) {
                const int next = ancestor[i];
                ancestor[i] = k;
                if (next == -1)
                    parent[i] = k;
                i = next;
            }
        }

    // Column counts from the row patterns.
    std::vector<int> s(n), stamp(n, -1), counts(n, 1);
    for (int k = 0; k < n; ++k)
        for (int top = ereach(cp, ci, k, parent, s, stamp); top < n; ++top)
            ++counts[s[top]];
    lp_.assign(n + 1, 0);
    for (int k = 0; k < n; ++k)
        lp_[k + 1] = lp_[k] + counts[k];
    li_.assign(lp_[n], 0);
    lx_.assign(lp_[n], 0.0);

    // Up-looking numeric factorization.
    std::vector<int> next(lp_.begin(), lp_.end() - 1);
    std::vector<double> x(n, 0.0);
    std::fill(stamp.begin(), stamp.end(), -1);
    for (int k = 0; k < n; ++k) {
        int top = ereach(cp, ci, k, parent, s, stamp);
        x[k] = 0.0;
        for (int p = cp[k]; p < cp[k + 1]; ++p)
            x[ci[p]] += cx[p];
        double d = x[k];
        x[k] = 0.0;
        for (; top < n; ++top) {
            const int i = s[top];
            const double lki = x[i] / lx_[lp_[i]];
            x[i] = 0.0;
            for (int p = lp_[i] + 1; p < next[i]; ++p)
                x[li_[p]] -= lx_[p] * lki;
            d -= lki * lki;
            const int p = next[i]++;
            li_[p] = k;
            lx_[p] = lki;
        }
        if (!(d > 1e-13 * std::abs(diag[k])) || !(d > 0.0))
            throw SingularMatrixError(perm_[k], "Cholesky: non-positive pivot at row " + std::to_string(perm_[k]));
        const int p = next[k]++;
        li_[p] = k;
        lx_[p] = std::sqrt(d);
    }
}

void SparseCholesky::solve_in_place(std::span<double> b) const
{
    const int n = n_;
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k)
        x[k] = b[perm_[k]];
    for (int j = 0; j < n; ++j) {
        x[j] /= lx_[lp_[j]];
        const double xj = x[j];
        for (int p = lp_[j] + 1; p < lp_[j + 1]; ++p)
            x[li_[p]] -= lx_[p] * xj;
    }
    for (int j = n - 1; j >= 0; --j) {
        double v = x[j];
        for (int p = lp_[j] + 1; p < lp_[j + 1]; ++p)
            v -= lx_[p] * x[li_[p]];
        x[j] = v / lx_[lp_[j]];
    }
    for (int k = 0; k < n; ++k)
        b[perm_[k]] = x[k];
}

std::vector<double> SparseCholesky::solve(std::span<const double> b) const
{
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

}  // namespace nlfeti
