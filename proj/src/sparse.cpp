#include "koszul/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace koszul {

SparseVec sv_axpy(const Scalar& alpha, const SparseVec& x, const SparseVec& y) {
    SparseVec out;
    out.reserve(x.size() + y.size());
    size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
            Scalar v = alpha * x[i].second;
            if (!v.is_zero()) out.emplace_back(x[i].first, std::move(v));
            ++i;
        } else if (i == x.size() || y[j].first < x[i].first) {
            out.push_back(y[j]);
            ++j;
        } else {
            Scalar v = alpha * x[i].second + y[j].second;
            if (!v.is_zero()) out.emplace_back(x[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

SparseVec sv_add(const SparseVec& a, const SparseVec& b) {
    if (a.empty()) return b;
    Scalar one = Scalar::one(a.front().second.field());
    return sv_axpy(one, a, b);
}

SparseVec sv_scale(const Scalar& alpha, const SparseVec& x) {
    SparseVec out;
    if (alpha.is_zero()) return out;
    out.reserve(x.size());
    for (const auto& [i, v] : x) out.emplace_back(i, alpha * v);
    return out;
}

SparseMatrix SparseMatrix::identity(Field f, int n) {
    SparseMatrix m(f, n, n);
    m.entries_.reserve(n);
    for (int i = 0; i < n; ++i) m.entries_.push_back({i, i, Scalar::one(f)});
    return m;
}

SparseMatrix SparseMatrix::from_triplets(Field f, int rows, int cols, std::vector<Triplet> ts) {
    SparseMatrix m(f, rows, cols);
    m.entries_ = std::move(ts);
    m.dirty_ = true;
    m.finalize();
    return m;
}

void SparseMatrix::finalize() {
    if (!dirty_) return;
    for (const auto& t : entries_) {
        if (t.row < 0 || t.row >= rows_ || t.col < 0 || t.col >= cols_)
            throw std::out_of_range("SparseMatrix: entry out of bounds");
    }
    std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    merged.reserve(entries_.size());
    for (auto& t : entries_) {
        if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
            merged.back().val = merged.back().val + t.val;
        } else {
            merged.push_back(std::move(t));
        }
    }
    entries_.clear();
    for (auto& t : merged)
        if (!t.val.is_zero()) entries_.push_back(std::move(t));
    dirty_ = false;
}

void SparseMatrix::add_entry(int r, int c, const Scalar& v) {
    if (v.is_zero()) return;
    entries_.push_back({r, c, v});
    dirty_ = true;
}

Scalar SparseMatrix::at(int r, int c) const {
    if (dirty_) throw std::logic_error("SparseMatrix: finalize() before reading");
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(r, c),
                               [](const Triplet& t, const std::pair<int, int>& p) {
                                   return t.row != p.first ? t.row < p.first : t.col < p.second;
                               });
    if (it != entries_.end() && it->row == r && it->col == c) return it->val;
    return Scalar::zero(field_);
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix m(field_, cols_, rows_);
    m.entries_.reserve(entries_.size());
    for (const auto& t : entries_) m.entries_.push_back({t.col, t.row, t.val});
    m.dirty_ = true;
    m.finalize();
    return m;
}

SparseVec SparseMatrix::row(int r) const {
    SparseVec out;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), r,
                               [](const Triplet& t, int rr) { return t.row < rr; });
    for (; it != entries_.end() && it->row == r; ++it) out.emplace_back(it->col, it->val);
    return out;
}

SparseVec SparseMatrix::col(int c) const {
    SparseVec out;
    for (const auto& t : entries_)
        if (t.col == c) out.emplace_back(t.row, t.val);
    return out;
}

SparseVec SparseMatrix::apply(const SparseVec& x) const {
    // accumulate alpha_k * col_k lazily via transpose-free row scan
    std::vector<Scalar> dense;
    std::vector<int> touched;
    dense.resize(rows_, Scalar::zero(field_));
    std::vector<bool> seen(rows_, false);
    size_t xi = 0;
    // entries are row-major; walk per row intersecting with x
    for (size_t i = 0; i < entries_.size();) {
        int r = entries_[i].row;
        Scalar acc = Scalar::zero(field_);
        xi = 0;
        for (; i < entries_.size() && entries_[i].row == r; ++i) {
            while (xi < x.size() && x[xi].first < entries_[i].col) ++xi;
            if (xi < x.size() && x[xi].first == entries_[i].col)
                acc = acc + entries_[i].val * x[xi].second;
        }
        if (!acc.is_zero()) {
            dense[r] = acc;
            if (!seen[r]) {
                seen[r] = true;
                touched.push_back(r);
            }
        }
    }
    SparseVec out;
    std::sort(touched.begin(), touched.end());
    for (int r : touched) out.emplace_back(r, dense[r]);
    return out;
}

SparseMatrix SparseMatrix::operator*(const SparseMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("SparseMatrix: shape mismatch in product");
    SparseMatrix out(field_, rows_, o.cols_);
    // row-by-row: out.row(i) = sum_k this(i,k) * o.row(k)
    for (size_t i = 0; i < entries_.size();) {
        int r = entries_[i].row;
        SparseVec acc;
        for (; i < entries_.size() && entries_[i].row == r; ++i)
            acc = sv_axpy(entries_[i].val, o.row(entries_[i].col), acc);
        for (const auto& [c, v] : acc) out.entries_.push_back({r, c, v});
    }
    return out;
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("SparseMatrix: shape mismatch in sum");
    SparseMatrix out(field_, rows_, cols_);
    out.entries_ = entries_;
    out.entries_.insert(out.entries_.end(), o.entries_.begin(), o.entries_.end());
    out.dirty_ = true;
    out.finalize();
    return out;
}

SparseMatrix SparseMatrix::operator-() const { return scaled(-Scalar::one(field_)); }

SparseMatrix SparseMatrix::operator-(const SparseMatrix& o) const { return *this + (-o); }

SparseMatrix SparseMatrix::scaled(const Scalar& s) const {
    SparseMatrix out(field_, rows_, cols_);
    if (s.is_zero()) return out;
    out.entries_.reserve(entries_.size());
    for (const auto& t : entries_) out.entries_.push_back({t.row, t.col, s * t.val});
    return out;
}

bool SparseMatrix::operator==(const SparseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || entries_.size() != o.entries_.size()) return false;
    for (size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].row != o.entries_[i].row || entries_[i].col != o.entries_[i].col ||
            !(entries_[i].val == o.entries_[i].val))
            return false;
    }
    return true;
}

SparseMatrix SparseMatrix::column_submatrix(const std::vector<int>& cols) const {
    std::vector<int> pos(cols_, -1);
    for (size_t j = 0; j < cols.size(); ++j) pos[cols[j]] = static_cast<int>(j);
    SparseMatrix out(field_, rows_, static_cast<int>(cols.size()));
    for (const auto& t : entries_)
        if (pos[t.col] >= 0) out.entries_.push_back({t.row, pos[t.col], t.val});
    out.dirty_ = true;
    out.finalize();
    return out;
}

SparseMatrix SparseMatrix::hstack(const SparseMatrix& o) const {
    if (rows_ != o.rows_) throw std::invalid_argument("SparseMatrix: hstack row mismatch");
    SparseMatrix out(field_, rows_, cols_ + o.cols_);
    out.entries_ = entries_;
    for (const auto& t : o.entries_) out.entries_.push_back({t.row, t.col + cols_, t.val});
    out.dirty_ = true;
    out.finalize();
    return out;
}

void SparseMatrix::add_block(int r0, int c0, const SparseMatrix& block) {
    for (const auto& t : block.entries()) entries_.push_back({t.row + r0, t.col + c0, t.val});
    dirty_ = true;
}

int Echelon::row_of_pivot(int col) const {
    if (col >= static_cast<int>(pivot_row_of_col_.size())) return -1;
    return pivot_row_of_col_[col];
}

SparseVec Echelon::reduce(const SparseVec& r) const {
    SparseVec cur = r;
    while (!cur.empty()) {
        int lead = cur.front().first;
        int pr = row_of_pivot(lead);
        if (pr < 0) break;
        cur = sv_axpy(-cur.front().second, rows_[pr], cur);
    }
    return cur;
}

bool Echelon::add_row(SparseVec r) {
    SparseVec cur = reduce(r);
    if (cur.empty()) return false;
    Scalar inv = cur.front().second.inverse();
    cur = sv_scale(inv, cur);
    int lead = cur.front().first;
    if (static_cast<int>(pivot_row_of_col_.size()) <= lead) pivot_row_of_col_.resize(cols_, -1);
    pivot_row_of_col_[lead] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(cur));
    pivots_.push_back(lead);
    return true;
}

std::vector<int> Echelon::pivot_cols() const {
    std::vector<int> p = pivots_;
    std::sort(p.begin(), p.end());
    return p;
}

void Echelon::back_eliminate() {
    // sort rows by pivot column, then clear entries above each pivot
    std::vector<int> order(rows_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return pivots_[a] < pivots_[b]; });
    std::vector<SparseVec> sorted;
    std::vector<int> spiv;
    sorted.reserve(rows_.size());
    for (int i : order) {
        sorted.push_back(std::move(rows_[i]));
        spiv.push_back(pivots_[i]);
    }
    rows_ = std::move(sorted);
    pivots_ = std::move(spiv);
    std::fill(pivot_row_of_col_.begin(), pivot_row_of_col_.end(), -1);
    if (static_cast<int>(pivot_row_of_col_.size()) < cols_) pivot_row_of_col_.resize(cols_, -1);
    for (size_t i = 0; i < rows_.size(); ++i) pivot_row_of_col_[pivots_[i]] = static_cast<int>(i);
    for (int i = static_cast<int>(rows_.size()) - 1; i >= 0; --i) {
        SparseVec cur = rows_[i];
        // eliminate any non-own pivot columns appearing in this row
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [c, v] : cur) {
                int pr = row_of_pivot(c);
                if (pr >= 0 && pr != i) {
                    cur = sv_axpy(-v, rows_[pr], cur);
                    changed = true;
                    break;
                }
            }
        }
        rows_[i] = std::move(cur);
    }
}

RrefResult rref(const SparseMatrix& m) {
    Echelon e(m.field(), m.cols());
    std::vector<SparseVec> pending;
    pending.reserve(m.rows());
    for (int r = 0; r < m.rows(); ++r) pending.push_back(m.row(r));
    // pivot choice: among remaining rows prefer the one whose reduced leading
    // coefficient has the smallest numerator magnitude (keeps fractions tame
    // over the rationals; a no-op tie-break over a prime field)
    bool prefer_small = m.field().kind == Field::Kind::Rationals;
    if (prefer_small) {
        std::stable_sort(pending.begin(), pending.end(), [](const SparseVec& a, const SparseVec& b) {
            if (a.empty() || b.empty()) return b.empty() && !a.empty();
            return a.front().second.numerator_magnitude() < b.front().second.numerator_magnitude();
        });
    }
    for (auto& r : pending) e.add_row(std::move(r));
    e.back_eliminate();
    RrefResult out;
    out.rank = e.rank();
    out.pivot_cols = e.pivot_cols();
    out.R = SparseMatrix(m.field(), m.rows(), m.cols());
    for (size_t i = 0; i < e.rows().size(); ++i)
        for (const auto& [c, v] : e.rows()[i]) out.R.add_entry(static_cast<int>(i), c, v);
    out.R.finalize();
    return out;
}

int rank(const SparseMatrix& m) {
    Echelon e(m.field(), m.cols());
    for (int r = 0; r < m.rows(); ++r) e.add_row(m.row(r));
    return e.rank();
}

SparseMatrix kernel_basis(const SparseMatrix& m) {
    RrefResult rr = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (int c : rr.pivot_cols) is_pivot[c] = true;
    std::vector<int> free_cols;
    for (int c = 0; c < m.cols(); ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    SparseMatrix out(m.field(), m.cols(), static_cast<int>(free_cols.size()));
    Scalar one = Scalar::one(m.field());
    for (size_t j = 0; j < free_cols.size(); ++j) {
        int fc = free_cols[j];
        out.add_entry(fc, static_cast<int>(j), one);
        // pivot variable values: x_pivot = -R[pivot_row, fc]
        for (size_t i = 0; i < rr.pivot_cols.size(); ++i) {
            Scalar v = rr.R.at(static_cast<int>(i), fc);
            if (!v.is_zero()) out.add_entry(rr.pivot_cols[i], static_cast<int>(j), -v);
        }
    }
    out.finalize();
    return out;
}

QuotientMaps quotient(Field f, int ambient_dim, const SparseMatrix& sub_basis) {
    if (sub_basis.rows() != ambient_dim)
        throw std::invalid_argument("quotient: sub_basis ambient dimension mismatch");
    RrefResult rr = rref(sub_basis.transpose());  // echelon over ambient coordinates
    std::vector<bool> is_pivot(ambient_dim, false);
    for (int c : rr.pivot_cols) is_pivot[c] = true;
    std::vector<int> free_coords;
    for (int c = 0; c < ambient_dim; ++c)
        if (!is_pivot[c]) free_coords.push_back(c);
    QuotientMaps q;
    q.dim = static_cast<int>(free_coords.size());
    // section: the free coordinate vectors represent the quotient basis
    q.section = SparseMatrix(f, ambient_dim, q.dim);
    Scalar one = Scalar::one(f);
    for (int j = 0; j < q.dim; ++j) q.section.add_entry(free_coords[j], j, one);
    q.section.finalize();
    // proj: kill the subspace by rewriting each pivot coordinate via its
    // echelon row e_p = -(free tail), then read off free coordinates
    q.proj = SparseMatrix(f, q.dim, ambient_dim);
    for (int j = 0; j < q.dim; ++j) q.proj.add_entry(j, free_coords[j], one);
    for (size_t i = 0; i < rr.pivot_cols.size(); ++i) {
        int p = rr.pivot_cols[i];
        SparseVec r = rr.R.row(static_cast<int>(i));  // e_p + tail over free coords
        std::vector<int> free_pos(ambient_dim, -1);
        for (int j = 0; j < q.dim; ++j) free_pos[free_coords[j]] = j;
        for (const auto& [c, v] : r) {
            if (c == p) continue;
            if (free_pos[c] < 0)
                throw std::logic_error("quotient: rref tail hit a pivot column");
            q.proj.add_entry(free_pos[c], p, -v);
        }
    }
    q.proj.finalize();
    return q;
}

SparseMatrix solve_in_span(const SparseMatrix& B, const SparseMatrix& V) {
    if (B.rows() != V.rows()) throw std::invalid_argument("solve_in_span: row mismatch");
    SparseMatrix aug = B.hstack(V);
    RrefResult rr = rref(aug);
    for (int c : rr.pivot_cols)
        if (c >= B.cols())
            throw std::domain_error("solve_in_span: column outside the span");
    if (rr.rank != B.cols())
        throw std::domain_error("solve_in_span: columns of B are dependent");
    // pivots are exactly 0..B.cols()-1 in order; solution sits in the tail block
    SparseMatrix X(B.field(), B.cols(), V.cols());
    for (const auto& t : rr.R.entries())
        if (t.col >= B.cols() && t.row < B.cols()) X.add_entry(t.row, t.col - B.cols(), t.val);
    X.finalize();
    return X;
}

}  // namespace koszul
