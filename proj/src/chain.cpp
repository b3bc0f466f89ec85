#include "koszul/chain.hpp"

#include <stdexcept>
#include <string>

namespace koszul {

int ChainComplex::total_dim() const {
    int t = 0;
    for (const auto& [n, d] : dims) t += d;
    return t;
}

void ChainComplex::set_dim(int n, int dimension) {
    if (dimension < 0) throw std::invalid_argument("ChainComplex: negative dimension");
    if (dimension == 0)
        dims.erase(n);
    else
        dims[n] = dimension;
}

void ChainComplex::set_diff(int n, SparseMatrix m) {
    if (m.is_zero())
        d.erase(n);
    else
        d[n] = std::move(m);
}

void ChainComplex::prune() {
    for (auto it = d.begin(); it != d.end();)
        it = it->second.is_zero() ? d.erase(it) : std::next(it);
    for (auto it = dims.begin(); it != dims.end();)
        it = it->second == 0 ? dims.erase(it) : std::next(it);
}

ChainComplex ChainComplex::unit(Field f) {
    ChainComplex c;
    c.field = f;
    c.set_dim(0, 1);
    return c;
}

void validate(const ChainComplex& c) {
    for (const auto& [n, dim] : c.dims)
        if (dim <= 0) throw std::invalid_argument("ChainComplex: stored dim <= 0");
    for (const auto& [n, m] : c.d) {
        if (m.rows() != c.dim(n - 1) || m.cols() != c.dim(n))
            throw std::invalid_argument("ChainComplex: differential shape mismatch in degree " +
                                        std::to_string(n));
        if (!(m.field() == c.field))
            throw std::invalid_argument("ChainComplex: differential over the wrong field");
    }
    for (const auto& [n, m] : c.d)
        if (!(c.diff(n - 1) * m).is_zero())
            throw std::invalid_argument("ChainComplex: d*d != 0 out of degree " + std::to_string(n));
}

SparseMatrix ChainMap::at(Field f, const ChainComplex& C, const ChainComplex& D, int n) const {
    auto it = mats.find(n);
    if (it != mats.end()) return it->second;
    return SparseMatrix::zero(f, D.dim(n + degree), C.dim(n));
}

ChainMap identity_map(const ChainComplex& c) {
    ChainMap f;
    for (const auto& [n, dim] : c.dims) f.mats[n] = SparseMatrix::identity(c.field, dim);
    return f;
}

void validate_chain_map(const ChainMap& f, const ChainComplex& C, const ChainComplex& D) {
    Field k = C.field;
    for (const auto& [n, m] : f.mats)
        if (m.rows() != D.dim(n + f.degree) || m.cols() != C.dim(n))
            throw std::invalid_argument("ChainMap: shape mismatch in degree " + std::to_string(n));
    Scalar sign = f.degree % 2 == 0 ? Scalar::one(k) : -Scalar::one(k);
    int lo = C.min_degree(), hi = C.max_degree();
    for (int n = lo; n <= hi; ++n) {
        SparseMatrix lhs = D.diff(n + f.degree) * f.at(k, C, D, n);
        SparseMatrix rhs = (f.at(k, C, D, n - 1) * C.diff(n)).scaled(sign);
        if (lhs != rhs)
            throw std::invalid_argument("ChainMap: not a chain map in degree " + std::to_string(n));
    }
}

ChainMap compose(const ChainMap& g, const ChainMap& f, const ChainComplex& C,
                 const ChainComplex& Mid, const ChainComplex& D) {
    ChainMap h;
    h.degree = f.degree + g.degree;
    for (const auto& [n, fm] : f.mats) {
        SparseMatrix m = g.at(C.field, Mid, D, n + f.degree) * fm;
        if (!m.is_zero()) h.mats[n] = std::move(m);
    }
    return h;
}

Homology homology(const ChainComplex& c) {
    Homology h;
    for (const auto& [n, dim] : c.dims) {
        Echelon e(c.field, dim);
        SparseMatrix dn1 = c.diff(n + 1);
        for (int j = 0; j < dn1.cols(); ++j) e.add_row(dn1.col(j));
        int brank = e.rank();
        SparseMatrix Z = kernel_basis(c.diff(n));
        SparseMatrix reps(c.field, dim, 0);
        std::vector<int> keep;
        for (int j = 0; j < Z.cols(); ++j)
            if (e.add_row(Z.col(j))) keep.push_back(j);
        int hdim = e.rank() - brank;
        if (hdim > 0) {
            h.dims[n] = hdim;
            h.reps[n] = Z.column_submatrix(keep);
        }
    }
    return h;
}

std::map<int, int> homology_dims(const ChainComplex& c) { return homology(c).dims; }

TensorBlocks::TensorBlocks(const std::map<int, int>& left_dims,
                           const std::map<int, int>& right_dims, int n) {
    for (const auto& [a, dl] : left_dims) {
        auto it = right_dims.find(n - a);
        if (it == right_dims.end()) continue;
        blocks.push_back({a, dl, it->second, total});
        total += dl * it->second;
    }
}

const TensorBlocks::Block* TensorBlocks::block(int left_deg) const {
    for (const auto& b : blocks)
        if (b.left_deg == left_deg) return &b;
    return nullptr;
}

int TensorBlocks::index(int left_deg, int left_idx, int right_idx) const {
    const Block* b = block(left_deg);
    if (!b) throw std::out_of_range("TensorBlocks: no block in that degree");
    return b->offset + left_idx * b->right_dim + right_idx;
}

ChainComplex tensor(const ChainComplex& C, const ChainComplex& D) {
    ChainComplex T;
    T.field = C.field;
    int lo = C.min_degree() + D.min_degree(), hi = C.max_degree() + D.max_degree();
    std::map<int, TensorBlocks> tb;
    for (int n = lo; n <= hi; ++n) {
        tb[n] = TensorBlocks(C.dims, D.dims, n);
        T.set_dim(n, tb[n].total);
    }
    for (int n = lo; n <= hi; ++n) {
        if (tb[n].total == 0 || tb.find(n - 1) == tb.end() || tb[n - 1].total == 0) continue;
        SparseMatrix m(C.field, tb[n - 1].total, tb[n].total);
        for (const auto& blk : tb[n].blocks) {
            int a = blk.left_deg, b = n - a;
            SparseMatrix dc = C.diff(a), dd = D.diff(b);
            for (const auto& t : dc.entries())  // dx (x) y
                for (int j = 0; j < blk.right_dim; ++j)
                    m.add_entry(tb[n - 1].index(a - 1, t.row, j), tb[n].index(a, t.col, j), t.val);
            Scalar sgn = a % 2 == 0 ? Scalar::one(C.field) : -Scalar::one(C.field);
            for (const auto& t : dd.entries())  // (-1)^a x (x) dy
                for (int i = 0; i < blk.left_dim; ++i)
                    m.add_entry(tb[n - 1].index(a, i, t.row), tb[n].index(a, i, t.col),
                                sgn * t.val);
        }
        m.finalize();
        T.set_diff(n, std::move(m));
    }
    T.prune();
    return T;
}

HomBlocks::HomBlocks(const std::map<int, int>& dom_dims, const std::map<int, int>& cod_dims,
                     int n) {
    for (const auto& [a, dd] : dom_dims) {
        auto it = cod_dims.find(a + n);
        if (it == cod_dims.end()) continue;
        blocks.push_back({a, dd, it->second, total});
        total += dd * it->second;
    }
}

const HomBlocks::Block* HomBlocks::block(int dom_deg) const {
    for (const auto& b : blocks)
        if (b.dom_deg == dom_deg) return &b;
    return nullptr;
}

int HomBlocks::index(int dom_deg, int cod_idx, int dom_idx) const {
    const Block* b = block(dom_deg);
    if (!b) throw std::out_of_range("HomBlocks: no block in that degree");
    return b->offset + cod_idx * b->dom_dim + dom_idx;
}

ChainComplex hom_cx(const ChainComplex& C, const ChainComplex& D) {
    ChainComplex H;
    H.field = C.field;
    if (C.dims.empty() || D.dims.empty()) return H;
    int lo = D.min_degree() - C.max_degree(), hi = D.max_degree() - C.min_degree();
    std::map<int, HomBlocks> hb;
    for (int n = lo; n <= hi; ++n) {
        hb[n] = HomBlocks(C.dims, D.dims, n);
        H.set_dim(n, hb[n].total);
    }
    for (int n = lo; n <= hi; ++n) {
        if (hb[n].total == 0 || hb.find(n - 1) == hb.end() || hb[n - 1].total == 0) continue;
        SparseMatrix m(C.field, hb[n - 1].total, hb[n].total);
        Scalar msgn = n % 2 == 0 ? -Scalar::one(C.field) : Scalar::one(C.field);  // -(-1)^n
        for (const auto& blk : hb[n].blocks) {
            int a = blk.dom_deg;
            SparseMatrix dd = D.diff(a + n), dc = C.diff(a + 1);
            // d_D composed with f: block a of degree n-1
            if (hb[n - 1].block(a))
                for (const auto& t : dd.entries())
                    for (int j = 0; j < blk.dom_dim; ++j)
                        m.add_entry(hb[n - 1].index(a, t.row, j), hb[n].index(a, t.col, j), t.val);
            // -(-1)^n f composed with d_C: block a+1 of degree n-1
            if (hb[n - 1].block(a + 1))
                for (const auto& t : dc.entries())  // t: x_{col in C_{a+1}} -> x_{row in C_a}
                    for (int i = 0; i < blk.cod_dim; ++i)
                        m.add_entry(hb[n - 1].index(a + 1, i, t.col), hb[n].index(a, i, t.row),
                                    msgn * t.val);
        }
        m.finalize();
        H.set_diff(n, std::move(m));
    }
    H.prune();
    return H;
}

ChainComplex dual(const ChainComplex& c) { return hom_cx(c, ChainComplex::unit(c.field)); }

ChainComplex shift(const ChainComplex& c, int k) {
    ChainComplex s;
    s.field = c.field;
    for (const auto& [n, dim] : c.dims) s.set_dim(n + k, dim);
    Scalar sgn = k % 2 == 0 ? Scalar::one(c.field) : -Scalar::one(c.field);
    for (const auto& [n, m] : c.d) s.set_diff(n + k, m.scaled(sgn));
    return s;
}

ChainComplex direct_sum(const ChainComplex& C, const ChainComplex& D) {
    ChainComplex s;
    s.field = C.field;
    for (const auto& [n, dim] : C.dims) s.set_dim(n, dim);
    for (const auto& [n, dim] : D.dims) s.set_dim(n, s.dim(n) + dim);
    int lo = std::min(C.min_degree(), D.min_degree());
    int hi = std::max(C.max_degree(), D.max_degree());
    for (int n = lo; n <= hi; ++n) {
        if (s.dim(n) == 0 || s.dim(n - 1) == 0) continue;
        SparseMatrix m(s.field, s.dim(n - 1), s.dim(n));
        m.add_block(0, 0, C.diff(n));
        m.add_block(C.dim(n - 1), C.dim(n), D.diff(n));
        m.finalize();
        s.set_diff(n, std::move(m));
    }
    s.prune();
    return s;
}

ChainMap tensor_swap_iso(const ChainComplex& C, const ChainComplex& D) {
    ChainMap f;
    int lo = C.min_degree() + D.min_degree(), hi = C.max_degree() + D.max_degree();
    for (int n = lo; n <= hi; ++n) {
        TensorBlocks src(C.dims, D.dims, n), dst(D.dims, C.dims, n);
        if (src.total == 0) continue;
        SparseMatrix m(C.field, dst.total, src.total);
        for (const auto& blk : src.blocks) {
            int a = blk.left_deg, b = n - a;
            Scalar sgn = (a % 2 != 0 && b % 2 != 0) ? -Scalar::one(C.field) : Scalar::one(C.field);
            for (int i = 0; i < blk.left_dim; ++i)
                for (int j = 0; j < blk.right_dim; ++j)
                    m.add_entry(dst.index(b, j, i), src.index(a, i, j), sgn);
        }
        m.finalize();
        f.mats[n] = std::move(m);
    }
    return f;
}

ChainMap tensor_map(const ChainMap& f, const ChainComplex& C, const ChainComplex& D,
                    const ChainMap& g, const ChainComplex& E, const ChainComplex& F) {
    ChainMap out;
    out.degree = f.degree + g.degree;
    Field fld = C.field;
    int lo = C.min_degree() + E.min_degree(), hi = C.max_degree() + E.max_degree();
    for (int n = lo; n <= hi; ++n) {
        TensorBlocks src(C.dims, E.dims, n), dst(D.dims, F.dims, n + out.degree);
        if (src.total == 0 || dst.total == 0) continue;
        SparseMatrix m(fld, dst.total, src.total);
        for (const auto& blk : src.blocks) {
            int a = blk.left_deg, b = n - a;
            SparseMatrix fm = f.at(fld, C, D, a), gm = g.at(fld, E, F, b);
            if (fm.is_zero() || gm.is_zero()) continue;
            bool neg = (g.degree % 2 != 0) && (a % 2 != 0);
            for (const auto& tf : fm.entries())
                for (const auto& tg : gm.entries()) {
                    Scalar v = tf.val * tg.val;
                    m.add_entry(dst.index(a + f.degree, tf.row, tg.row),
                                src.index(a, tf.col, tg.col), neg ? -v : v);
                }
        }
        m.finalize();
        if (!m.is_zero()) out.mats[n] = std::move(m);
    }
    return out;
}

std::map<int, int> homology_map_rank(const ChainMap& f, const ChainComplex& C,
                                     const ChainComplex& D) {
    if (f.degree != 0) throw std::invalid_argument("homology_map_rank: degree 0 maps only");
    Homology hc = homology(C), hd = homology(D);
    std::map<int, int> out;
    for (int n = std::min(C.min_degree(), D.min_degree());
         n <= std::max(C.max_degree(), D.max_degree()); ++n) {
        auto itc = hc.dims.find(n);
        bool any = (itc != hc.dims.end() && itc->second > 0) || hd.dims.count(n);
        if (!any) continue;
        int r = 0;
        if (itc != hc.dims.end() && itc->second > 0 && D.dim(n) > 0) {
            SparseMatrix img = f.at(C.field, C, D, n) * hc.reps.at(n);
            SparseMatrix bnd = D.diff(n + 1);
            r = rank(bnd.hstack(img)) - rank(bnd);
        }
        out[n] = r;
    }
    return out;
}

bool is_quasi_iso(const ChainMap& f, const ChainComplex& C, const ChainComplex& D) {
    if (f.degree != 0) throw std::invalid_argument("is_quasi_iso: degree 0 maps only");
    ChainComplex cone;
    cone.field = C.field;
    int lo = std::min(C.min_degree() + 1, D.min_degree());
    int hi = std::max(C.max_degree() + 1, D.max_degree());
    for (int n = lo; n <= hi; ++n) cone.set_dim(n, C.dim(n - 1) + D.dim(n));
    for (int n = lo; n <= hi; ++n) {
        if (cone.dim(n) == 0 || cone.dim(n - 1) == 0) continue;
        SparseMatrix m(cone.field, cone.dim(n - 1), cone.dim(n));
        m.add_block(0, 0, C.diff(n - 1).scaled(-Scalar::one(cone.field)));
        m.add_block(C.dim(n - 2), 0, f.at(cone.field, C, D, n - 1));
        m.add_block(C.dim(n - 2), C.dim(n - 1), D.diff(n));
        m.finalize();
        cone.set_diff(n, std::move(m));
    }
    cone.prune();
    validate(cone);
    for (const auto& [n, h] : homology_dims(cone))
        if (h != 0) return false;
    return true;
}

}  // namespace koszul
