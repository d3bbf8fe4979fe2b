#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlfeti {

class SparseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Compressed sparse row matrix. Symmetric matrices store both triangles.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col_idx;
    std::vector<double> values;

    static CsrMatrix zeros(int rows, int cols);
    std::size_t nnz() const { return values.size(); }
    double at(int i, int j) const;
    void multiply(std::span<const double> x, std::span<double> y) const;            // y = A x
    void multiply_add(std::span<const double> x, std::span<double> y, double alpha) const;  // y += alpha A x
    void multiply_transpose_add(std::span<const double> x, std::span<double> y, double alpha) const;
    std::vector<double> diagonal() const;
    CsrMatrix transpose() const;
    bool is_symmetric(double rel_tol = 0.0) const;
    std::vector<double> to_dense() const;  // row-major
};

struct Triplet {
    int row;
    int col;
    double value;
};
// Duplicates are summed in input order.
CsrMatrix csr_from_triplets(int rows, int cols, std::vector<Triplet> triplets);

// Rows `r` and columns `c` of A; `c_map[j]` gives the new column of old column
// j or -1 to drop it.
CsrMatrix extract_block(const CsrMatrix& a, std::span<const int> r, std::span<const int> c_map, int new_cols);

void write_matrix_market(const CsrMatrix& a, const std::string& path, bool symmetric);
CsrMatrix read_matrix_market(const std::string& path);
void write_vector_csv(std::span<const double> v, const std::string& path);

// Small dense helpers (row-major storage).
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Cholesky factorization of a small dense SPD matrix; throws on a
// non-positive pivot.
class DenseCholesky {
public:
    DenseCholesky() = default;
    DenseCholesky(std::vector<double> a, int n);
    void solve_in_place(std::span<double> b) const;
    int size() const { return n_; }

private:
    int n_ = 0;
    std::vector<double> l_;
};

std::vector<double> dense_spd_solve(std::vector<double> a, int n, std::vector<double> b);

}  // namespace nlfeti
