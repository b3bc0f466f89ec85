#pragma once

#include <utility>
#include <vector>

#include "koszul/field.hpp"

namespace koszul {

/// Sparse vector: index/value pairs, strictly increasing indices, no zeros.
using SparseVec = std::vector<std::pair<int, Scalar>>;

SparseVec sv_add(const SparseVec& a, const SparseVec& b);
SparseVec sv_axpy(const Scalar& alpha, const SparseVec& x, const SparseVec& y);  // alpha*x + y
SparseVec sv_scale(const Scalar& alpha, const SparseVec& x);

/// Sparse matrix in canonical triplet form: entries sorted by (row, col),
/// every stored value nonzero, indices in bounds.
class SparseMatrix {
public:
    struct Triplet {
        int row, col;
        Scalar val;
    };

    SparseMatrix() = default;
    SparseMatrix(Field f, int rows, int cols) : field_(f), rows_(rows), cols_(cols) {}

    static SparseMatrix zero(Field f, int rows, int cols) { return SparseMatrix(f, rows, cols); }
    static SparseMatrix identity(Field f, int n);
    /// Builds from arbitrary triplets: coalesces duplicates, drops zeros, sorts.
    static SparseMatrix from_triplets(Field f, int rows, int cols, std::vector<Triplet> ts);

    Field field() const { return field_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<Triplet>& entries() const { return entries_; }
    int nnz() const { return static_cast<int>(entries_.size()); }
    bool is_zero() const { return entries_.empty(); }

    Scalar at(int r, int c) const;

    SparseMatrix transpose() const;
    SparseMatrix operator*(const SparseMatrix& o) const;
    SparseMatrix operator+(const SparseMatrix& o) const;
    SparseMatrix operator-(const SparseMatrix& o) const;
    SparseMatrix operator-() const;
    SparseMatrix scaled(const Scalar& s) const;

    bool operator==(const SparseMatrix& o) const;
    bool operator!=(const SparseMatrix& o) const { return !(*this == o); }

    SparseVec row(int r) const;
    SparseVec col(int c) const;
    SparseVec apply(const SparseVec& x) const;  // matrix * column vector

    SparseMatrix column_submatrix(const std::vector<int>& cols) const;
    /// Horizontal concatenation [this | o].
    SparseMatrix hstack(const SparseMatrix& o) const;
    /// Places `block` at offset (r0, c0) of an all-zero frame of this size; additive.
    void add_block(int r0, int c0, const SparseMatrix& block);
    void add_entry(int r, int c, const Scalar& v);  // accumulating; call finalize() after
    void finalize();                                // coalesce/sort/drop zeros

private:
    Field field_ = Field::rationals();
    int rows_ = 0, cols_ = 0;
    std::vector<Triplet> entries_;
    bool dirty_ = false;
};

/// Incremental row-echelon accumulator. Rows are kept with unit pivots;
/// `add_row` reduces against current pivots and reports a rank increase.
class Echelon {
public:
    explicit Echelon(Field f, int cols) : field_(f), cols_(cols) {}

    bool add_row(SparseVec r);
    SparseVec reduce(const SparseVec& r) const;
    int rank() const { return static_cast<int>(rows_.size()); }
    int cols() const { return cols_; }
    const std::vector<SparseVec>& rows() const { return rows_; }
    std::vector<int> pivot_cols() const;  // sorted
    /// Full Gauss-Jordan pass: back-eliminates above pivots, sorts rows by pivot.
    void back_eliminate();

private:
    Field field_;
    int cols_;
    std::vector<SparseVec> rows_;             // row i has unit pivot at pivots_[i]
    std::vector<int> pivots_;                 // pivot column of each stored row
    std::vector<int> pivot_row_of_col_;       // lazily sized; -1 = none
    int row_of_pivot(int col) const;
};

struct RrefResult {
    int rank = 0;
    std::vector<int> pivot_cols;
    SparseMatrix R;  // the reduced row echelon form, same shape as the input
};

RrefResult rref(const SparseMatrix& m);
int rank(const SparseMatrix& m);

/// Columns form a basis of the null space; column count = cols - rank.
SparseMatrix kernel_basis(const SparseMatrix& m);

struct QuotientMaps {
    int dim = 0;            // dimension of the quotient
    SparseMatrix proj;      // ambient -> quotient
    SparseMatrix section;   // quotient -> ambient, proj*section = identity
};

/// Quotient of k^ambient_dim by the column span of sub_basis.
QuotientMaps quotient(Field f, int ambient_dim, const SparseMatrix& sub_basis);

/// Solves B X = V where the columns of B are linearly independent and every
/// column of V lies in their span; throws otherwise.
SparseMatrix solve_in_span(const SparseMatrix& B, const SparseMatrix& V);

}  // namespace koszul
