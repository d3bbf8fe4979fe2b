#include "nlfeti/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace nlfeti {

CsrMatrix CsrMatrix::zeros(int rows, int cols)
{
    CsrMatrix a;
    a.rows = rows;
    a.cols = cols;
    a.row_ptr.assign(rows + 1, 0);
    return a;
}

double CsrMatrix::at(int i, int j) const
{
    const auto b = col_idx.begin() + row_ptr[i];
    const auto e = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? values[it - col_idx.begin()] : 0.0;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            s += values[p] * x[col_idx[p]];
        y[i] = s;
    }
}

void CsrMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            s += values[p] * x[col_idx[p]];
        y[i] += alpha * s;
    }
}

void CsrMatrix::multiply_transpose_add(std::span<const double> x, std::span<double> y, double alpha) const
{
    for (int i = 0; i < rows; ++i) {
        const double xi = alpha * x[i];
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            y[col_idx[p]] += values[p] * xi;
    }
}

std::vector<double> CsrMatrix::diagonal() const
{
    std::vector<double> d(std::min(rows, cols), 0.0);
    for (int i = 0; i < static_cast<int>(d.size()); ++i)
        d[i] = at(i, i);
    return d;
}

CsrMatrix CsrMatrix::transpose() const
{
    CsrMatrix t = zeros(cols, rows);
    for (int j : col_idx)
        ++t.row_ptr[j + 1];
    for (int i = 0; i < cols; ++i)
        t.row_ptr[i + 1] += t.row_ptr[i];
    t.col_idx.resize(nnz());
    t.values.resize(nnz());
    std::vector<int> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int i = 0; i < rows; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const int q = fill[col_idx[p]]++;
            t.col_idx[q] = i;
            t.values[q] = values[p];
        }
    return t;
}

bool CsrMatrix::is_symmetric(double rel_tol) const
{
    if (rows != cols)
        return false;
    double scale = 0.0;
    for (double v : values)
        scale = std::max(scale, std::abs(v));
    const CsrMatrix t = transpose();
    if (t.col_idx != col_idx)
        return false;
    for (std::size_t p = 0; p < values.size(); ++p)
        if (std::abs(values[p] - t.values[p]) > rel_tol * scale)
            return false;
    return true;
}

std::vector<double> CsrMatrix::to_dense() const
{
    std::vector<double> d(static_cast<std::size_t>(rows) * cols, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            d[static_cast<std::size_t>(i) * cols + col_idx[p]] += values[p];
    return d;
}

CsrMatrix csr_from_triplets(int rows, int cols, std::vector<Triplet> triplets)
{
    for (const Triplet& t : triplets)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw SparseError("csr_from_triplets: index out of range");
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    CsrMatrix a = CsrMatrix::zeros(rows, cols);
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const Triplet& t = triplets[k];
        if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
            a.values.back() += t.value;
            continue;
        }
        a.col_idx.push_back(t.col);
        a.values.push_back(t.value);
        ++a.row_ptr[t.row + 1];
    }
    for (int i = 0; i < rows; ++i)
        a.row_ptr[i + 1] += a.row_ptr[i];
    return a;
}

CsrMatrix extract_block(const CsrMatrix& a, std::span<const int> r, std::span<const int> c_map, int new_cols)
{
    CsrMatrix b = CsrMatrix::zeros(static_cast<int>(r.size()), new_cols);
    std::vector<std::pair<int, double>> row;
    for (std::size_t i = 0; i < r.size(); ++i) {
        row.clear();
        for (int p = a.row_ptr[r[i]]; p < a.row_ptr[r[i] + 1]; ++p) {
            const int j = c_map[a.col_idx[p]];
            if (j >= 0)
                row.emplace_back(j, a.values[p]);
        }
        std::sort(row.begin(), row.end(), [](auto& x, auto& y) { return x.first < y.first; });
        for (auto [j, v] : row) {
            b.col_idx.push_back(j);
            b.values.push_back(v);
        }
        b.row_ptr[i + 1] = static_cast<int>(b.col_idx.size());
    }
    return b;
}

void write_matrix_market(const CsrMatrix& a, const std::string& path, bool symmetric)
{
    std::ofstream os(path);
    if (!os)
        throw SparseError("cannot write " + path);
    std::size_t count = 0;
    for (int i = 0; i < a.rows; ++i)
        for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            if (!symmetric || a.col_idx[p] <= i)
                ++count;
    os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    os << a.rows << ' ' << a.cols << ' ' << count << '\n';
    os.precision(17);
    for (int i = 0; i < a.rows; ++i)
        for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            if (!symmetric || a.col_idx[p] <= i)
                os << i + 1 << ' ' << a.col_idx[p] + 1 << ' ' << a.values[p] << '\n';
}

CsrMatrix read_matrix_market(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw SparseError("cannot read " + path);
    std::string line;
    std::getline(is, line);
    if (line.rfind("%%MatrixMarket", 0) != 0)
        throw SparseError(path + ": missing Matrix Market banner");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {
    }
    int rows = 0, cols = 0;
    std::size_t count = 0;
    std::istringstream(line) >> rows >> cols >> count;
    std::vector<Triplet> t;
    t.reserve(symmetric ? 2 * count : count);
    for (std::size_t k = 0; k < count; ++k) {
        int i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v))
            throw SparseError(path + ": truncated entry list");
        t.push_back({i - 1, j - 1, v});
        if (symmetric && i != j)
            t.push_back({j - 1, i - 1, v});
    }
    return csr_from_triplets(rows, cols, std::move(t));
}

void write_vector_csv(std::span<const double> v, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw SparseError("cannot write " + path);
    os.precision(17);
    os << "value\n";
    for (double x : v)
        os << x << '\n';
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

DenseCholesky::DenseCholesky(std::vector<double> a, int n) : n_(n), l_(std::move(a))
{
    for (int j = 0; j < n; ++j) {
        double d = l_[j * n + j];
        for (int k = 0; k < j; ++k)
            d -= l_[j * n + k] * l_[j * n + k];
        if (!(d > 0.0))
            throw SparseError("dense Cholesky: non-positive pivot at " + std::to_string(j));
        d = std::sqrt(d);
        l_[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = l_[i * n + j];
            for (int k = 0; k < j; ++k)
                s -= l_[i * n + k] * l_[j * n + k];
            l_[i * n + j] = s / d;
        }
    }
}

void DenseCholesky::solve_in_place(std::span<double> b) const
{
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k)
            s -= l_[i * n + k] * b[k];
        b[i] = s / l_[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k)
            s -= l_[k * n + i] * b[k];
        b[i] = s / l_[i * n + i];
    }
}

std::vector<double> dense_spd_solve(std::vector<double> a, int n, std::vector<double> b)
{
    DenseCholesky c(std::move(a), n);
    c.solve_in_place(b);
    return b;
}

}  // namespace nlfeti
