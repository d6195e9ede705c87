#include "dwrlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace dwrlab {

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size())
        throw DimensionMismatch("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

SparseMatrix::SparseMatrix(int n_rows, int n_cols, std::vector<Triplet> triplets)
    : n_rows_(n_rows), n_cols_(n_cols) {
    if (n_rows < 0 || n_cols < 0)
        throw DimensionMismatch("SparseMatrix: negative dimension");
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw DimensionMismatch("SparseMatrix: triplet out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_offsets_.assign(n_rows + 1, 0);
    col_indices_.reserve(triplets.size());
    values_.reserve(triplets.size());
    std::size_t i = 0;
    for (int r = 0; r < n_rows; ++r) {
        row_offsets_[r] = static_cast<int>(col_indices_.size());
        while (i < triplets.size() && triplets[i].row == r) {
            int c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            col_indices_.push_back(c);
            values_.push_back(v);
        }
    }
    row_offsets_[n_rows] = static_cast<int>(col_indices_.size());
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix(n, n, std::move(t));
}

double SparseMatrix::coeff(int row, int col) const {
    for (int k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k)
        if (col_indices_[k] == col) return values_[k];
    return 0.0;
}

Vector SparseMatrix::matvec(const Vector& x) const {
    if (static_cast<int>(x.size()) != n_cols_)
        throw DimensionMismatch("matvec: size mismatch");
    Vector y(n_rows_, 0.0);
    for (int r = 0; r < n_rows_; ++r) {
        double s = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            s += values_[k] * x[col_indices_[k]];
        y[r] = s;
    }
    return y;
}

Vector SparseMatrix::matvec_transpose(const Vector& x) const {
    if (static_cast<int>(x.size()) != n_rows_)
        throw DimensionMismatch("matvec_transpose: size mismatch");
    Vector y(n_cols_, 0.0);
    for (int r = 0; r < n_rows_; ++r) {
        const double xr = x[r];
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            y[col_indices_[k]] += values_[k] * xr;
    }
    return y;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            t.push_back({col_indices_[k], r, values_[k]});
    return SparseMatrix(n_cols_, n_rows_, std::move(t));
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(n_rows_, std::vector<double>(n_cols_, 0.0));
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            d[r][col_indices_[k]] += values_[k];
    return d;
}

int SparseMatrix::bandwidth() const {
    int b = 0;
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            b = std::max(b, std::abs(r - col_indices_[k]));
    return b;
}

namespace {
constexpr double kPivotTol = 1e-14;
constexpr int kDenseLimit = 500;
} // namespace

LuFactorization::LuFactorization(const SparseMatrix& a) {
    if (!a.square())
        throw DimensionMismatch("LuFactorization: matrix must be square");
    n_ = a.rows();
    pivots_.assign(n_, 0);
    const int b = a.bandwidth();
    if (n_ < kDenseLimit || 3 * b + 1 >= n_) {
        banded_ = false;
        factor_dense(a);
    } else {
        banded_ = true;
        factor_banded(a, b, b);
    }
}

void LuFactorization::factor_dense(const SparseMatrix& a) {
    dense_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    const auto& off = a.row_offsets();
    const auto& col = a.col_indices();
    const auto& val = a.values();
    for (int r = 0; r < n_; ++r)
        for (int k = off[r]; k < off[r + 1]; ++k)
            dense_[static_cast<std::size_t>(r) * n_ + col[k]] += val[k];

    auto at = [&](int i, int j) -> double& {
        return dense_[static_cast<std::size_t>(i) * n_ + j];
    };
    double max_pivot = 0.0;
    for (int k = 0; k < n_; ++k) {
        int p = k;
        double best = std::abs(at(k, k));
        for (int i = k + 1; i < n_; ++i) {
            const double m = std::abs(at(i, k));
            if (m > best) { best = m; p = i; }
        }
        max_pivot = std::max(max_pivot, best);
        if (best <= kPivotTol * max_pivot || max_pivot == 0.0)
            throw SingularMatrix("LU: pivot " + std::to_string(k) + " is numerically zero");
        pivots_[k] = p;
        if (p != k)
            for (int j = 0; j < n_; ++j) std::swap(at(k, j), at(p, j));
        const double inv = 1.0 / at(k, k);
        for (int i = k + 1; i < n_; ++i) {
            const double m = at(i, k) * inv;
            at(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j < n_; ++j) at(i, j) -= m * at(k, j);
        }
    }
}

void LuFactorization::factor_banded(const SparseMatrix& a, int kl, int ku) {
    kl_ = kl;
    ku_ = ku;
    ldab_ = 2 * kl + ku + 1;
    band_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
    // entry (i, j) lives at band_[kl + ku + i - j + j*ldab]
    auto at = [&](int i, int j) -> double& {
        return band_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
    };
    const auto& off = a.row_offsets();
    const auto& col = a.col_indices();
    const auto& val = a.values();
    for (int r = 0; r < n_; ++r)
        for (int k = off[r]; k < off[r + 1]; ++k)
            at(r, col[k]) += val[k];

    const int ku_fill = kl_ + ku_;
    double max_pivot = 0.0;
    for (int k = 0; k < n_; ++k) {
        const int last_row = std::min(n_ - 1, k + kl_);
        int p = k;
        double best = std::abs(at(k, k));
        for (int i = k + 1; i <= last_row; ++i) {
            const double m = std::abs(at(i, k));
            if (m > best) { best = m; p = i; }
        }
        max_pivot = std::max(max_pivot, best);
        if (best <= kPivotTol * max_pivot || max_pivot == 0.0)
            throw SingularMatrix("banded LU: pivot " + std::to_string(k) + " is numerically zero");
        pivots_[k] = p;
        const int last_col = std::min(n_ - 1, k + ku_fill);
        if (p != k)
            for (int j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
        const double inv = 1.0 / at(k, k);
        for (int i = k + 1; i <= last_row; ++i) {
            const double m = at(i, k) * inv;
            at(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j <= last_col; ++j) at(i, j) -= m * at(k, j);
        }
    }
}

Vector LuFactorization::solve(const Vector& b) const {
    if (static_cast<int>(b.size()) != n_)
        throw DimensionMismatch("LU solve: rhs size mismatch");
    Vector x = b;
    if (!banded_) {
        auto at = [&](int i, int j) {
            return dense_[static_cast<std::size_t>(i) * n_ + j];
        };
        for (int k = 0; k < n_; ++k)
            if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
        for (int k = 0; k < n_; ++k)
            for (int i = k + 1; i < n_; ++i) x[i] -= at(i, k) * x[k];
        for (int k = n_ - 1; k >= 0; --k) {
            double s = x[k];
            for (int j = k + 1; j < n_; ++j) s -= at(k, j) * x[j];
            x[k] = s / at(k, k);
        }
    } else {
        auto at = [&](int i, int j) {
            return band_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
        };
        const int ku_fill = kl_ + ku_;
        for (int k = 0; k < n_; ++k) {
            if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
            const int last_row = std::min(n_ - 1, k + kl_);
            for (int i = k + 1; i <= last_row; ++i) x[i] -= at(i, k) * x[k];
        }
        for (int k = n_ - 1; k >= 0; --k) {
            double s = x[k];
            const int last_col = std::min(n_ - 1, k + ku_fill);
            for (int j = k + 1; j <= last_col; ++j) s -= at(k, j) * x[j];
            x[k] = s / at(k, k);
        }
    }
    return x;
}

Vector LuFactorization::solve_transpose(const Vector& b) const {
    if (static_cast<int>(b.size()) != n_)
        throw DimensionMismatch("LU solve_transpose: rhs size mismatch");
    Vector x = b;
    if (!banded_) {
        auto at = [&](int i, int j) {
            return dense_[static_cast<std::size_t>(i) * n_ + j];
        };
        // U^T y = b (forward), then L^T z = y (backward), then undo pivoting.
        for (int k = 0; k < n_; ++k) {
            double s = x[k];
            for (int j = 0; j < k; ++j) s -= at(j, k) * x[j];
            x[k] = s / at(k, k);
        }
        for (int k = n_ - 1; k >= 0; --k) {
            for (int i = k + 1; i < n_; ++i) x[k] -= at(i, k) * x[i];
            // row swaps are undone after the full backward pass
        }
        for (int k = n_ - 1; k >= 0; --k)
            if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
    } else {
        auto at = [&](int i, int j) {
            return band_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
        };
        const int ku_fill = kl_ + ku_;
        for (int k = 0; k < n_; ++k) {
            double s = x[k];
            const int first_row = std::max(0, k - ku_fill);
            for (int j = first_row; j < k; ++j) s -= at(j, k) * x[j];
            x[k] = s / at(k, k);
        }
        // the band factorization is a product of per-column eliminations and
        // swaps, so the transpose pass interleaves them in reverse order
        for (int k = n_ - 1; k >= 0; --k) {
            const int last_row = std::min(n_ - 1, k + kl_);
            for (int i = k + 1; i <= last_row; ++i) x[k] -= at(i, k) * x[i];
            if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
        }
    }
    return x;
}

namespace {

Vector refine_to_tolerance(const SparseMatrix& a, const LuFactorization& lu,
                           const Vector& b, bool transpose) {
    Vector x = transpose ? lu.solve_transpose(b) : lu.solve(b);
    // refine toward the roundoff floor; the contract is 1e-12 * max(1, |b|)
    const double floor = 4e-16 * std::max(1.0, inf_norm(b));
    double prev = std::numeric_limits<double>::max();
    for (int sweep = 0; sweep < 4; ++sweep) {
        Vector r = transpose ? a.matvec_transpose(x) : a.matvec(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
        const double rnorm = inf_norm(r);
        if (rnorm <= floor || rnorm >= 0.5 * prev) break;
        prev = rnorm;
        Vector d = transpose ? lu.solve_transpose(r) : lu.solve(r);
        axpy(1.0, d, x);
    }
    if (!all_finite(x))
        throw SingularMatrix("solve produced non-finite entries");
    return x;
}

} // namespace

Vector solve(const SparseMatrix& a, const Vector& b) {
    if (!a.square())
        throw DimensionMismatch("solve: matrix must be square");
    if (static_cast<int>(b.size()) != a.rows())
        throw DimensionMismatch("solve: rhs size mismatch");
    LuFactorization lu(a);
    return refine_to_tolerance(a, lu, b, false);
}

Vector solve_transpose(const SparseMatrix& a, const Vector& b) {
    if (!a.square())
        throw DimensionMismatch("solve_transpose: matrix must be square");
    if (static_cast<int>(b.size()) != a.rows())
        throw DimensionMismatch("solve_transpose: rhs size mismatch");
    LuFactorization lu(a);
    return refine_to_tolerance(a, lu, b, true);
}

Vector matvec(const SparseMatrix& a, const Vector& x) { return a.matvec(x); }

Vector matvec_transpose(const SparseMatrix& a, const Vector& x) {
    return a.matvec_transpose(x);
}

} // namespace dwrlab
