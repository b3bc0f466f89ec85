#include "koszul/word.hpp"

#include <algorithm>
#include <stdexcept>

namespace koszul {

bool word_elt_less(const WordBasisElt& a, const WordBasisElt& b) {
    if (a.path != b.path) return a.path < b.path;
    // left-nested key: prefix degree sums, longest prefix first
    int m = static_cast<int>(a.degs.size());
    int sa = 0, sb = 0;
    for (int t = 0; t < m; ++t) {
        sa += a.degs[t];
        sb += b.degs[t];
    }
    for (int t = m - 1; t >= 1; --t) {
        sa -= a.degs[t];
        sb -= b.degs[t];
        if (sa != sb) return sa < sb;
    }
    return a.idxs < b.idxs;
}

WordSpace::WordSpace(std::vector<const Graph*> factors, int i, int j, int n)
    : factors_(std::move(factors)), i_(i), j_(j), n_(n) {
    int m = static_cast<int>(factors_.size());
    if (m == 0) {
        if (i == j && n == 0) elts_.push_back({{i}, {}, {}});
        return;
    }
    // depth-first over paths, then degree tuples, then indices
    std::vector<int> path(m + 1), degs(m), idxs(m);
    path[0] = i;
    auto rec_idx = [&](auto&& self, int t) -> void {
        if (t == m) {
            elts_.push_back({path, degs, idxs});
            return;
        }
        const ChainComplex* c = factors_[t]->ptr(path[t], path[t + 1]);
        for (int x = 0; x < c->dim(degs[t]); ++x) {
            idxs[t] = x;
            self(self, t + 1);
        }
    };
    auto rec_deg = [&](auto&& self, int t, int rem) -> void {
        if (t == m) {
            if (rem == 0) rec_idx(rec_idx, 0);
            return;
        }
        const ChainComplex* c = factors_[t]->ptr(path[t], path[t + 1]);
        for (const auto& [a, dim] : c->dims) {
            degs[t] = a;
            self(self, t + 1, rem - a);
        }
    };
    auto rec_path = [&](auto&& self, int t) -> void {
        if (t == m) {
            if (path[m] == j_) rec_deg(rec_deg, 0, n_);
            return;
        }
        int lo = factors_[t]->lo(), hi = factors_[t]->hi();
        int last = (t == m - 1) ? j_ : hi;
        int first = (t == m - 1) ? j_ : lo;
        for (int k = first; k <= last; ++k) {
            if (!factors_[t]->ptr(path[t], k)) continue;
            path[t + 1] = k;
            self(self, t + 1);
        }
    };
    rec_path(rec_path, 0);
    std::sort(elts_.begin(), elts_.end(), word_elt_less);
}

int WordSpace::find(const WordBasisElt& e) const {
    auto it = std::lower_bound(elts_.begin(), elts_.end(), e, word_elt_less);
    if (it == elts_.end() || word_elt_less(e, *it)) return -1;
    return static_cast<int>(it - elts_.begin());
}

const WordSpace& WordComplex::space(int n) const {
    int pos = n - min_deg;
    if (pos < 0 || pos >= static_cast<int>(spaces.size()))
        throw std::out_of_range("WordComplex: degree outside range");
    return spaces[pos];
}

WordComplex word_complex(std::vector<const Graph*> factors, int i, int j) {
    WordComplex w;
    int nmin = 0, nmax = 0;
    for (const Graph* g : factors) {
        int fmin = 0, fmax = 0;
        bool first = true;
        for (const auto& [ij, c] : g->components()) {
            if (first || c.min_degree() < fmin) fmin = c.min_degree();
            if (first || c.max_degree() > fmax) fmax = c.max_degree();
            first = false;
        }
        if (first) {  // zero factor: whole word vanishes
            w.min_deg = 0;
            return w;
        }
        nmin += fmin;
        nmax += fmax;
    }
    w.min_deg = nmin;
    Field f = factors.empty() ? Field::rationals() : factors[0]->field();
    w.cx.field = f;
    for (int n = nmin; n <= nmax; ++n) {
        w.spaces.emplace_back(factors, i, j, n);
        w.cx.set_dim(n, w.spaces.back().dim());
    }
    for (int n = nmin + 1; n <= nmax; ++n)
        w.cx.set_diff(n, word_differential(w.space(n), w.space(n - 1)));
    w.cx.prune();
    return w;
}

SparseMatrix word_differential(const WordSpace& src, const WordSpace& dst) {
    Field f = src.factors().empty() ? Field::rationals() : src.factors()[0]->field();
    SparseMatrix m(f, dst.dim(), src.dim());
    int nfac = static_cast<int>(src.factors().size());
    Scalar one = Scalar::one(f);
    for (int s = 0; s < src.dim(); ++s) {
        const WordBasisElt& e = src[s];
        Scalar sgn = one;
        for (int t = 0; t < nfac; ++t) {
            const ChainComplex* c = src.factors()[t]->ptr(e.path[t], e.path[t + 1]);
            SparseMatrix dt = c->diff(e.degs[t]);
            for (const auto& tr : dt.entries()) {
                if (tr.col != e.idxs[t]) continue;
                WordBasisElt out = e;
                out.degs[t] -= 1;
                out.idxs[t] = tr.row;
                int r = dst.find(out);
                if (r < 0) throw std::logic_error("word_differential: missing target element");
                m.add_entry(r, s, sgn * tr.val);
            }
            if (e.degs[t] % 2 != 0) sgn = -sgn;
        }
    }
    m.finalize();
    return m;
}

SparseMatrix slot_merge(const WordSpace& src, const WordSpace& dst, int slot, const MergeFn& mu) {
    Field f = src.factors()[0]->field();
    SparseMatrix m(f, dst.dim(), src.dim());
    const Graph* X = src.factors()[slot];
    const Graph* Y = src.factors()[slot + 1];
    std::map<std::tuple<int, int, int, int>, TensorBlocks> tb_cache;
    for (int s = 0; s < src.dim(); ++s) {
        const WordBasisElt& e = src[s];
        int p = e.path[slot], q = e.path[slot + 1], r = e.path[slot + 2];
        const ChainMap* cm = mu(p, q, r);
        if (!cm) continue;
        int total = e.degs[slot] + e.degs[slot + 1];
        auto key = std::make_tuple(p, q, r, total);
        auto it = tb_cache.find(key);
        if (it == tb_cache.end())
            it = tb_cache.emplace(key, TensorBlocks(X->at(p, q).dims, Y->at(q, r).dims, total))
                     .first;
        int col = it->second.index(e.degs[slot], e.idxs[slot], e.idxs[slot + 1]);
        auto mm = cm->mats.find(total);
        if (mm == cm->mats.end()) continue;
        for (const auto& tr : mm->second.entries()) {
            if (tr.col != col) continue;
            WordBasisElt out;
            out.path = e.path;
            out.path.erase(out.path.begin() + slot + 1);
            out.degs = e.degs;
            out.degs.erase(out.degs.begin() + slot);
            out.degs[slot] = total;
            out.idxs = e.idxs;
            out.idxs.erase(out.idxs.begin() + slot);
            out.idxs[slot] = tr.row;
            int rr = dst.find(out);
            if (rr < 0) throw std::logic_error("slot_merge: missing target element");
            m.add_entry(rr, s, tr.val);
        }
    }
    m.finalize();
    return m;
}

SparseMatrix slot_apply(const WordSpace& src, const WordSpace& dst, int slot, const ApplyFn& fn) {
    Field f = src.factors()[0]->field();
    SparseMatrix m(f, dst.dim(), src.dim());
    for (int s = 0; s < src.dim(); ++s) {
        const WordBasisElt& e = src[s];
        int p = e.path[slot], q = e.path[slot + 1];
        const ChainMap* cm = fn(p, q);
        if (!cm) continue;
        auto mm = cm->mats.find(e.degs[slot]);
        if (mm == cm->mats.end()) continue;
        for (const auto& tr : mm->second.entries()) {
            if (tr.col != e.idxs[slot]) continue;
            WordBasisElt out = e;
            out.idxs[slot] = tr.row;
            int rr = dst.find(out);
            if (rr < 0) throw std::logic_error("slot_apply: missing target element");
            m.add_entry(rr, s, tr.val);
        }
    }
    m.finalize();
    return m;
}

namespace {

// shared cache of sub-word spaces per (p, q, deg)
struct SubCache {
    const std::vector<const Graph*>& factors;
    std::map<std::tuple<int, int, int>, WordSpace> cache;

    const WordSpace& get(int p, int q, int deg) {
        auto key = std::make_tuple(p, q, deg);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, WordSpace(factors, p, q, deg)).first;
        return it->second;
    }
};

WordBasisElt splice_elt(const WordBasisElt& e, int slot, int count, const WordBasisElt& sub) {
    // replaces factors [slot, slot+count) of e by the labels of sub
    WordBasisElt out;
    out.path.assign(e.path.begin(), e.path.begin() + slot + 1);
    out.path.insert(out.path.end(), sub.path.begin() + 1, sub.path.end());
    out.path.insert(out.path.end(), e.path.begin() + slot + count + 1, e.path.end());
    out.degs.assign(e.degs.begin(), e.degs.begin() + slot);
    out.degs.insert(out.degs.end(), sub.degs.begin(), sub.degs.end());
    out.degs.insert(out.degs.end(), e.degs.begin() + slot + count, e.degs.end());
    out.idxs.assign(e.idxs.begin(), e.idxs.begin() + slot);
    out.idxs.insert(out.idxs.end(), sub.idxs.begin(), sub.idxs.end());
    out.idxs.insert(out.idxs.end(), e.idxs.begin() + slot + count, e.idxs.end());
    return out;
}

}  // namespace

SparseMatrix slot_expand(const WordSpace& src, const WordSpace& dst, int slot,
                         const std::vector<const Graph*>& sub, const ExpandFn& fn) {
    Field f = dst.factors().empty() ? Field::rationals() : dst.factors()[0]->field();
    SparseMatrix m(f, dst.dim(), src.dim());
    SubCache sc{sub, {}};
    for (int s = 0; s < src.dim(); ++s) {
        const WordBasisElt& e = src[s];
        int p = e.path[slot], q = e.path[slot + 1], deg = e.degs[slot];
        const SparseMatrix* mat = fn(p, q, deg);
        if (!mat) continue;
        const WordSpace& ws = sc.get(p, q, deg);
        for (const auto& tr : mat->entries()) {
            if (tr.col != e.idxs[slot]) continue;
            WordBasisElt out = splice_elt(e, slot, 1, ws[tr.row]);
            int rr = dst.find(out);
            if (rr < 0) throw std::logic_error("slot_expand: missing target element");
            m.add_entry(rr, s, tr.val);
        }
    }
    m.finalize();
    return m;
}

SparseMatrix slot_contract(const WordSpace& src, const WordSpace& dst, int slot,
                           const std::vector<const Graph*>& sub, const ContractFn& fn) {
    Field f = src.factors().empty() ? Field::rationals() : src.factors()[0]->field();
    SparseMatrix m(f, dst.dim(), src.dim());
    int count = static_cast<int>(sub.size());
    SubCache sc{sub, {}};
    for (int s = 0; s < src.dim(); ++s) {
        const WordBasisElt& e = src[s];
        int p = e.path[slot], q = e.path[slot + count];
        int deg = 0;
        WordBasisElt inner;
        inner.path.assign(e.path.begin() + slot, e.path.begin() + slot + count + 1);
        inner.degs.assign(e.degs.begin() + slot, e.degs.begin() + slot + count);
        inner.idxs.assign(e.idxs.begin() + slot, e.idxs.begin() + slot + count);
        for (int a : inner.degs) deg += a;
        const SparseMatrix* mat = fn(p, q, deg);
        if (!mat) continue;
        const WordSpace& ws = sc.get(p, q, deg);
        int col = ws.find(inner);
        if (col < 0) throw std::logic_error("slot_contract: source element not in sub-word");
        for (const auto& tr : mat->entries()) {
            if (tr.col != col) continue;
            // target: single factor carrying index tr.row in degree deg
            WordBasisElt unit_sub;
            unit_sub.path = {p, q};
            unit_sub.degs = {deg};
            unit_sub.idxs = {tr.row};
            WordBasisElt out = splice_elt(e, slot, count, unit_sub);
            int rr = dst.find(out);
            if (rr < 0) throw std::logic_error("slot_contract: missing target element");
            m.add_entry(rr, s, tr.val);
        }
    }
    m.finalize();
    return m;
}

}  // namespace koszul
