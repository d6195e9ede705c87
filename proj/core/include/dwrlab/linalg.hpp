#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "dwrlab/errors.hpp"

namespace dwrlab {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double inf_norm(const Vector& v);
/// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);
bool all_finite(const Vector& v);

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; duplicate triplets are summed on construction.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int n_rows, int n_cols, std::vector<Triplet> triplets);

    static SparseMatrix identity(int n);

    int rows() const { return n_rows_; }
    int cols() const { return n_cols_; }
    bool square() const { return n_rows_ == n_cols_; }

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry lookup (zero when not stored).
    double coeff(int row, int col) const;

    Vector matvec(const Vector& x) const;
    /// A^T x without materializing the transpose.
    Vector matvec_transpose(const Vector& x) const;

    SparseMatrix transposed() const;
    std::vector<std::vector<double>> to_dense() const;

    /// Max |i-j| over stored entries; 0 for diagonal / empty.
    int bandwidth() const;

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<int> row_offsets_;
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

/// LU factorization with partial pivoting. Banded storage is used when the
/// matrix profile makes it worthwhile, dense storage for small systems
/// (below 500 unknowns) or nearly-full bands. The factorization is reused
/// for transpose solves.
class LuFactorization {
public:
    explicit LuFactorization(const SparseMatrix& a);

    int size() const { return n_; }
    Vector solve(const Vector& b) const;
    Vector solve_transpose(const Vector& b) const;

private:
    void factor_dense(const SparseMatrix& a);
    void factor_banded(const SparseMatrix& a, int kl, int ku);

    int n_ = 0;
    bool banded_ = false;
    // dense storage, row-major n x n
    std::vector<double> dense_;
    // banded storage (LAPACK gbtrf layout): ldab = 2*kl+ku+1 rows per column
    int kl_ = 0, ku_ = 0, ldab_ = 0;
    std::vector<double> band_;
    std::vector<int> pivots_;
};

/// Solves A x = b with || A x - b ||_inf <= 1e-12 * max(1, ||b||_inf).
Vector solve(const SparseMatrix& a, const Vector& b);
/// Solves A^T x = b, reusing the factorization of A.
Vector solve_transpose(const SparseMatrix& a, const Vector& b);

Vector matvec(const SparseMatrix& a, const Vector& x);
Vector matvec_transpose(const SparseMatrix& a, const Vector& x);

} // namespace dwrlab
