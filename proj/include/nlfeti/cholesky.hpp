#pragma once

#include "nlfeti/sparse.hpp"

#include <span>
#include <vector>

namespace nlfeti {

class SingularMatrixError : public SparseError {
public:
    SingularMatrixError(int index, const std::string& what) : SparseError(what), pivot(index) {}
    int pivot;  // row of the original matrix where factorization broke down
};

// Sparse Cholesky A = P^T L L^T P: fill-reducing AMD ordering, elimination
// tree, row-wise symbolic pattern, up-looking numeric factorization.
class SparseCholesky {
public:
    SparseCholesky() = default;
    explicit SparseCholesky(const CsrMatrix& a);

    void solve_in_place(std::span<double> b) const;
    std::vector<double> solve(std::span<const double> b) const;
    int size() const { return n_; }
    std::size_t factor_nnz() const { return lx_.size(); }
    const std::vector<int>& permutation() const { return perm_; }

private:
    int n_ = 0;
    std::vector<int> perm_;  // new -> old
    std::vector<int> lp_, li_;
    std::vector<double> lx_;
};

// Fill-reducing ordering of a symmetric pattern, new -> old.
std::vector<int> amd_ordering(const CsrMatrix& a);

}  // namespace nlfeti
