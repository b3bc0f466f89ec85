#include "koszul/operad.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace koszul {

std::vector<Perm> all_perms(int n) {
    Perm p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::vector<Perm> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

int perm_index(const Perm& p) {
    // lexicographic rank via the factorial number system
    int n = static_cast<int>(p.size());
    int rank = 0;
    for (int i = 0; i < n; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < n; ++j)
            if (p[j] < p[i]) ++smaller;
        int fact = 1;
        for (int t = 2; t <= n - 1 - i; ++t) fact *= t;
        rank += smaller * fact;
    }
    return rank;
}

Perm perm_then(const Perm& s, const Perm& t) {
    Perm out(s.size());
    for (size_t x = 0; x < s.size(); ++x) out[x] = t[s[x]];
    return out;
}

Perm perm_inverse(const Perm& p) {
    Perm out(p.size());
    for (size_t x = 0; x < p.size(); ++x) out[p[x]] = static_cast<int>(x);
    return out;
}

int perm_sign(const Perm& p) {
    int inv = 0;
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
}

std::vector<int> adjacent_factorization(const Perm& p) {
    // bubble-sort the one-line word; each swap at position j right-divides by
    // s_j in function composition, so the recorded word multiplies back to p
    // in "then" order.
    Perm q = p;
    std::vector<int> word;
    bool moved = true;
    while (moved) {
        moved = false;
        for (size_t j = 0; j + 1 < q.size(); ++j)
            if (q[j] > q[j + 1]) {
                std::swap(q[j], q[j + 1]);
                word.push_back(static_cast<int>(j));
                moved = true;
            }
    }
    return word;
}

DgCategory k_sigma(Field f, int lo, int hi) {
    DgCategory c;
    c.cx = Graph(f, lo, hi);
    for (int n = lo; n <= hi; ++n) {
        auto perms = all_perms(n);
        int sz = static_cast<int>(perms.size());
        ChainComplex g;
        g.field = f;
        g.set_dim(0, sz);
        c.cx.set(n, n, std::move(g));
        SparseMatrix mult(f, sz, sz * sz);
        for (int a = 0; a < sz; ++a)
            for (int b = 0; b < sz; ++b)
                mult.add_entry(perm_index(perm_then(perms[a], perms[b])), a * sz + b,
                               Scalar::one(f));
        mult.finalize();
        ChainMap cm;
        cm.mats[0] = std::move(mult);
        c.mult[{n, n, n}] = std::move(cm);
        SparseMatrix u(f, sz, 1);
        u.add_entry(0, 0, Scalar::one(f));  // the identity permutation is lex-first
        u.finalize();
        c.unit[n] = std::move(u);
    }
    return c;
}

// ---------------------------------------------------------------------------

namespace {

bool tw_less(const std::pair<std::vector<int>, std::vector<int>>& a,
             const std::pair<std::vector<int>, std::vector<int>>& b) {
    int m = static_cast<int>(a.first.size());
    int sa = 0, sb = 0;
    for (int t = 0; t < m; ++t) {
        sa += a.first[t];
        sb += b.first[t];
    }
    for (int t = m - 1; t >= 1; --t) {
        sa -= a.first[t];
        sb -= b.first[t];
        if (sa != sb) return sa < sb;
    }
    return a.second < b.second;
}

}  // namespace

TensorWord::TensorWord(std::vector<const ChainComplex*> fs, int n)
    : factors(std::move(fs)), degree(n) {
    int r = static_cast<int>(factors.size());
    std::vector<int> degs(r), idxs(r);
    std::function<void(int, int)> rec = [&](int t, int rem) {
        if (t == r) {
            if (rem == 0) elts.push_back({degs, idxs});
            return;
        }
        for (const auto& [a, dim] : factors[t]->dims) {
            degs[t] = a;
            for (int u = 0; u < dim; ++u) {
                idxs[t] = u;
                rec(t + 1, rem - a);
            }
        }
    };
    if (r == 0) {
        if (n == 0) elts.push_back({{}, {}});
    } else {
        rec(0, n);
    }
    std::sort(elts.begin(), elts.end(), tw_less);
}

int TensorWord::find(const std::vector<int>& degs, const std::vector<int>& idxs) const {
    auto it = std::lower_bound(elts.begin(), elts.end(), std::make_pair(degs, idxs), tw_less);
    if (it == elts.end() || it->first != degs || it->second != idxs) return -1;
    return static_cast<int>(it - elts.begin());
}

ChainComplex tensor_word_complex(const std::vector<const ChainComplex*>& fs) {
    Field f = fs.empty() ? Field::rationals() : fs[0]->field;
    ChainComplex out;
    out.field = f;
    int lodeg = 0, hideg = 0;
    for (const auto* c : fs) {
        if (c->is_zero()) return out;
        lodeg += c->min_degree();
        hideg += c->max_degree();
    }
    std::map<int, TensorWord> words;
    for (int n = lodeg; n <= hideg; ++n) {
        TensorWord tw(fs, n);
        if (tw.dim() > 0) {
            out.set_dim(n, tw.dim());
            words.emplace(n, std::move(tw));
        }
    }
    for (auto& [n, tw] : words) {
        auto below = words.find(n - 1);
        if (below == words.end()) continue;
        SparseMatrix d(f, below->second.dim(), tw.dim());
        for (int v = 0; v < tw.dim(); ++v) {
            const auto& [degs, idxs] = tw.elts[v];
            int pre = 0;
            for (size_t t = 0; t < fs.size(); ++t) {
                SparseMatrix dt = fs[t]->diff(degs[t]);
                auto degs2 = degs;
                degs2[t] -= 1;
                for (const auto& tr : dt.entries()) {
                    if (tr.col != idxs[t]) continue;
                    auto idxs2 = idxs;
                    idxs2[t] = tr.row;
                    int row = below->second.find(degs2, idxs2);
                    if (row < 0) continue;
                    d.add_entry(row, v, pre % 2 == 0 ? tr.val : -tr.val);
                }
                pre += degs[t];
            }
        }
        d.finalize();
        if (!d.is_zero()) out.set_diff(n, std::move(d));
    }
    return out;
}

SparseMatrix tensor_word_permute(Field f, const std::vector<const ChainComplex*>& src_factors,
                                 const Perm& pi, int degree) {
    int r = static_cast<int>(src_factors.size());
    std::vector<const ChainComplex*> dst_factors(r);
    for (int s = 0; s < r; ++s) dst_factors[pi[s]] = src_factors[s];
    TensorWord src(src_factors, degree), dst(dst_factors, degree);
    SparseMatrix m(f, dst.dim(), src.dim());
    for (int v = 0; v < src.dim(); ++v) {
        const auto& [degs, idxs] = src.elts[v];
        std::vector<int> d2(r), i2(r);
        for (int s = 0; s < r; ++s) {
            d2[pi[s]] = degs[s];
            i2[pi[s]] = idxs[s];
        }
        int sgn = 0;
        for (int s = 0; s < r; ++s)
            for (int u = s + 1; u < r; ++u)
                if (pi[s] > pi[u]) sgn += degs[s] * degs[u];
        int row = dst.find(d2, i2);
        m.add_entry(row, v, sgn % 2 == 0 ? Scalar::one(f) : -Scalar::one(f));
    }
    m.finalize();
    return m;
}

// ---------------------------------------------------------------------------

const ChainComplex* SymSeq::at(int n) const {
    auto it = arities.find(n);
    return it == arities.end() || it->second.is_zero() ? nullptr : &it->second;
}

ChainMap SymSeq::action(int n, const Perm& p) const {
    const ChainComplex* c = at(n);
    ChainMap out;
    if (!c) return out;
    out = identity_map(*c);
    auto git = gens.find(n);
    for (int i : adjacent_factorization(p)) {
        const ChainMap& g = git->second.at(i);
        out = compose(out, g, *c, *c, *c);
    }
    return out;
}

bool SymSeq::reduced() const {
    if (at(0)) return false;
    const ChainComplex* one = at(1);
    return one && one->dims.size() == 1 && one->dim(0) == 1;
}

void validate_symseq(const SymSeq& x) {
    auto eq = [&](const ChainMap& a, const ChainMap& b, const ChainComplex& c,
                  const char* what, int n) {
        for (const auto& [deg, dim] : c.dims) {
            SparseMatrix d = a.at(x.field, c, c, deg) + (-b.at(x.field, c, c, deg));
            if (!d.is_zero())
                throw std::invalid_argument("symseq: " + std::string(what) + " fails at arity " +
                                            std::to_string(n));
        }
    };
    for (const auto& [n, c] : x.arities) {
        if (c.is_zero()) continue;
        validate(c);
        auto git = x.gens.find(n);
        int want = std::max(n - 1, 0);
        if ((git == x.gens.end() ? 0 : static_cast<int>(git->second.size())) != want)
            throw std::invalid_argument("symseq: arity " + std::to_string(n) + " needs " +
                                        std::to_string(want) + " generators");
        if (want == 0) continue;
        const auto& g = git->second;
        ChainMap id = identity_map(c);
        for (int i = 0; i < want; ++i) {
            validate_chain_map(g[i], c, c);
            if (g[i].degree != 0) throw std::invalid_argument("symseq: generator has degree");
            eq(compose(g[i], g[i], c, c, c), id, c, "s_i^2 = 1", n);
        }
        for (int i = 0; i + 1 < want; ++i) {
            ChainMap lhs = compose(g[i], compose(g[i + 1], g[i], c, c, c), c, c, c);
            ChainMap rhs = compose(g[i + 1], compose(g[i], g[i + 1], c, c, c), c, c, c);
            eq(lhs, rhs, c, "braid relation", n);
        }
        for (int i = 0; i < want; ++i)
            for (int j = i + 2; j < want; ++j)
                eq(compose(g[i], g[j], c, c, c), compose(g[j], g[i], c, c, c), c,
                   "distant generators commute", n);
    }
}

SymSeq unit_symseq(Field f, int cap) {
    SymSeq x;
    x.field = f;
    x.cap = cap;
    x.arities[1] = ChainComplex::unit(f);
    return x;
}

SymSeq dual_symseq(const SymSeq& x) {
    SymSeq out;
    out.field = x.field;
    out.cap = x.cap;
    for (const auto& [n, c] : x.arities) {
        if (c.is_zero()) continue;
        out.arities[n] = dual(c);
        auto git = x.gens.find(n);
        if (git == x.gens.end()) continue;
        std::vector<ChainMap> dgens;
        for (const ChainMap& g : git->second) {
            ChainMap dg;
            for (const auto& [deg, dim] : c.dims) dg.mats[-deg] = g.at(x.field, c, c, deg).transpose();
            dgens.push_back(std::move(dg));
        }
        out.gens[n] = std::move(dgens);
    }
    return out;
}

std::vector<std::vector<int>> all_functions(int m, int n) {
    std::vector<std::vector<int>> out;
    if (m == 0) {
        out.push_back({});
        return out;
    }
    if (n == 0) return out;
    std::vector<int> f(m, 0);
    while (true) {
        out.push_back(f);
        int t = m - 1;
        while (t >= 0 && f[t] == n - 1) f[t--] = 0;
        if (t < 0) break;
        ++f[t];
    }
    return out;
}

std::vector<std::vector<int>> surjections(int m, int n) {
    std::vector<std::vector<int>> out;
    for (auto& f : all_functions(m, n)) {
        std::vector<bool> hit(n, false);
        for (int v : f) hit[v] = true;
        if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) out.push_back(f);
    }
    return out;
}

std::vector<int> fiber_sizes(const std::vector<int>& f, int n) {
    std::vector<int> out(n, 0);
    for (int v : f) ++out[v];
    return out;
}

// ---------------------------------------------------------------------------

namespace {

/// sorted fiber f^-1(t) as positions in {0..m-1}
std::vector<int> fiber_of(const std::vector<int>& f, int t) {
    std::vector<int> out;
    for (size_t x = 0; x < f.size(); ++x)
        if (f[x] == t) out.push_back(static_cast<int>(x));
    return out;
}

/// position permutation of the relabeling along phi: the u-th element of the
/// (sorted) source fiber maps to position pi[u] of the sorted image fiber
Perm relabel_perm(const std::vector<int>& src_fiber, const std::vector<int>& img_fiber,
                  const std::function<int(int)>& phi) {
    Perm pi(src_fiber.size());
    for (size_t u = 0; u < src_fiber.size(); ++u) {
        int y = phi(src_fiber[u]);
        pi[u] = static_cast<int>(std::lower_bound(img_fiber.begin(), img_fiber.end(), y) -
                                 img_fiber.begin());
    }
    return pi;
}

/// matrix of f applied in one slot of a tensor word (degree-0 map only)
SparseMatrix apply_in_slot(Field field, const std::vector<const ChainComplex*>& src,
                           const std::vector<const ChainComplex*>& dst, int slot,
                           const ChainMap& f, int degree) {
    TensorWord sw(src, degree), dw(dst, degree);
    SparseMatrix m(field, dw.dim(), sw.dim());
    for (int v = 0; v < sw.dim(); ++v) {
        const auto& [degs, idxs] = sw.elts[v];
        auto fit = f.mats.find(degs[slot]);
        if (fit == f.mats.end()) continue;
        for (const auto& tr : fit->second.entries()) {
            if (tr.col != idxs[slot]) continue;
            auto i2 = idxs;
            i2[slot] = tr.row;
            int row = dw.find(degs, i2);
            if (row >= 0) m.add_entry(row, v, tr.val);
        }
    }
    m.finalize();
    return m;
}

}  // namespace

Prop prop_of(const SymSeq& x) {
    Prop p;
    p.x = x;
    p.cx = Graph(x.field, 0, x.cap);
    bool surj_only = x.at(0) == nullptr;
    for (int m = 0; m <= x.cap; ++m)
        for (int n = 0; n <= x.cap; ++n) {
            auto cands = surj_only ? surjections(m, n) : all_functions(m, n);
            std::vector<std::vector<int>> kept;
            ChainComplex sum;
            sum.field = x.field;
            for (auto& f : cands) {
                std::vector<const ChainComplex*> facs;
                bool ok = true;
                for (int sz : fiber_sizes(f, n)) {
                    const ChainComplex* c = x.at(sz);
                    if (!c) {
                        ok = false;
                        break;
                    }
                    facs.push_back(c);
                }
                if (!ok) continue;
                ChainComplex wc = tensor_word_complex(facs);
                if (wc.is_zero()) continue;
                kept.push_back(f);
                sum = sum.is_zero() ? std::move(wc) : direct_sum(sum, wc);
            }
            if (!kept.empty()) {
                p.fs[{m, n}] = std::move(kept);
                p.cx.set(m, n, std::move(sum));
            }
        }
    return p;
}

std::vector<const ChainComplex*> Prop::summand_factors(int m, int n, int fidx) const {
    std::vector<const ChainComplex*> facs;
    for (int sz : fiber_sizes(fs.at({m, n})[fidx], n)) facs.push_back(x.at(sz));
    return facs;
}

int Prop::block_offset(int m, int n, int fidx, int deg) const {
    int off = 0;
    for (int u = 0; u < fidx; ++u) off += TensorWord(summand_factors(m, n, u), deg).dim();
    return off;
}

ChainMap Prop::left_action(int m, int n, const Perm& g) const {
    ChainMap out;
    const ChainComplex* c = cx.ptr(m, n);
    auto it = fs.find({m, n});
    if (!c || it == fs.end()) return out;
    const auto& list = it->second;
    Perm ginv = perm_inverse(g);
    for (const auto& [deg, dim] : c->dims) {
        SparseMatrix mat(x.field, dim, dim);
        for (size_t fi = 0; fi < list.size(); ++fi) {
            const auto& f = list[fi];
            // "g then f" = f o g; fiber of t pulls back along g
            std::vector<int> fg(m);
            for (int e = 0; e < m; ++e) fg[e] = f[g[e]];
            int ti = static_cast<int>(std::lower_bound(list.begin(), list.end(), fg) -
                                      list.begin());
            auto facs = summand_factors(m, n, static_cast<int>(fi));
            TensorWord sw(facs, deg), dwt(facs, deg);
            int soff = block_offset(m, n, static_cast<int>(fi), deg);
            int toff = block_offset(m, n, ti, deg);
            // per-fiber relabeling along g^-1, realized through the X-actions
            SparseMatrix acc = SparseMatrix::identity(x.field, sw.dim());
            for (int t = 0; t < n; ++t) {
                auto src_fiber = fiber_of(f, t);
                auto img_fiber = fiber_of(fg, t);
                // the fiber bijection e -> g^-1(e); since the stored
                // generators realize rho(a then b) = rho(a) rho(b), the
                // functorial relabel applies rho of the inverse
                Perm pi = relabel_perm(src_fiber, img_fiber,
                                       [&](int e) { return ginv[e]; });
                bool idp = true;
                for (size_t u = 0; u < pi.size(); ++u)
                    if (pi[u] != static_cast<int>(u)) idp = false;
                if (idp) continue;
                ChainMap a = x.action(static_cast<int>(pi.size()), perm_inverse(pi));
                acc = apply_in_slot(x.field, facs, facs, t, a, deg) * acc;
            }
            for (const auto& tr : acc.entries())
                mat.add_entry(toff + tr.row, soff + tr.col, tr.val);
        }
        mat.finalize();
        if (!mat.is_zero()) out.mats[deg] = std::move(mat);
    }
    return out;
}

ChainMap Prop::right_action(int m, int n, const Perm& h) const {
    ChainMap out;
    const ChainComplex* c = cx.ptr(m, n);
    auto it = fs.find({m, n});
    if (!c || it == fs.end()) return out;
    const auto& list = it->second;
    for (const auto& [deg, dim] : c->dims) {
        SparseMatrix mat(x.field, dim, dim);
        for (size_t fi = 0; fi < list.size(); ++fi) {
            const auto& f = list[fi];
            // "f then h" = h o f; source factor s lands in target slot h(s)
            std::vector<int> hf(m);
            for (int e = 0; e < m; ++e) hf[e] = h[f[e]];
            int ti = static_cast<int>(std::lower_bound(list.begin(), list.end(), hf) -
                                      list.begin());
            auto facs = summand_factors(m, n, static_cast<int>(fi));
            SparseMatrix pm = tensor_word_permute(x.field, facs, h, deg);
            int soff = block_offset(m, n, static_cast<int>(fi), deg);
            int toff = block_offset(m, n, ti, deg);
            for (const auto& tr : pm.entries())
                mat.add_entry(toff + tr.row, soff + tr.col, tr.val);
        }
        mat.finalize();
        if (!mat.is_zero()) out.mats[deg] = std::move(mat);
    }
    return out;
}

Bimodule Prop::bimodule() const {
    Bimodule b;
    b.cx = cx;
    Field f = x.field;
    for (int m = 0; m <= x.cap; ++m)
        for (int n = 0; n <= x.cap; ++n) {
            const ChainComplex* c = cx.ptr(m, n);
            if (!c) continue;
            auto perms_m = all_perms(m);
            ChainMap lact;
            for (const auto& [deg, dim] : c->dims) {
                TensorBlocks tb(std::map<int, int>{{0, static_cast<int>(perms_m.size())}},
                                c->dims, deg);
                SparseMatrix mat(f, dim, tb.total);
                for (size_t a = 0; a < perms_m.size(); ++a) {
                    ChainMap act = left_action(m, n, perms_m[a]);
                    auto mit = act.mats.find(deg);
                    if (mit == act.mats.end()) continue;
                    for (const auto& tr : mit->second.entries())
                        mat.add_entry(tr.row, tb.index(0, static_cast<int>(a), tr.col), tr.val);
                }
                mat.finalize();
                lact.mats[deg] = std::move(mat);
            }
            b.lact[{m, m, n}] = std::move(lact);
            auto perms_n = all_perms(n);
            ChainMap ract;
            for (const auto& [deg, dim] : c->dims) {
                TensorBlocks tb(c->dims, std::map<int, int>{{0, static_cast<int>(perms_n.size())}},
                                deg);
                SparseMatrix mat(f, dim, tb.total);
                for (size_t a = 0; a < perms_n.size(); ++a) {
                    ChainMap act = right_action(m, n, perms_n[a]);
                    auto mit = act.mats.find(deg);
                    if (mit == act.mats.end()) continue;
                    for (const auto& tr : mit->second.entries())
                        mat.add_entry(tr.row, tb.index(deg, tr.col, static_cast<int>(a)), tr.val);
                }
                mat.finalize();
                ract.mats[deg] = std::move(mat);
            }
            b.ract[{m, n, n}] = std::move(ract);
        }
    return b;
}

// ---------------------------------------------------------------------------
// composition products as explicit coinvariant quotients

int CoinvProduct::find_summand(int i, int k, const std::vector<int>& f) const {
    const auto& sums = arity.at(i).sums;
    for (size_t s = 0; s < sums.size(); ++s)
        if (sums[s].k == k && sums[s].f == f) return static_cast<int>(s);
    throw std::logic_error("CoinvProduct::find_summand: no such summand");
}

namespace {

struct SummandBuild {
    int k;
    std::vector<int> f;
    std::vector<const ChainComplex*> facs;  // outer factors, middle last
    ChainComplex wc;
};

void assemble_ambient(CoinvProduct::Arity& ar, Field field,
                      const std::vector<SummandBuild>& sds) {
    ar.ambient.field = field;
    std::set<int> degs;
    for (const auto& sd : sds)
        for (const auto& [d, dim] : sd.wc.dims) degs.insert(d);
    for (int d : degs) {
        std::vector<int> off(sds.size() + 1, 0);
        for (size_t s = 0; s < sds.size(); ++s) off[s + 1] = off[s] + sds[s].wc.dim(d);
        ar.offs[d] = off;
        ar.ambient.set_dim(d, off.back());
    }
    for (int d : degs) {
        SparseMatrix dm(field, ar.ambient.dim(d - 1), ar.ambient.dim(d));
        for (size_t s = 0; s < sds.size(); ++s) {
            SparseMatrix b = sds[s].wc.diff(d);
            if (b.is_zero()) continue;
            for (const auto& tr : b.entries())
                dm.add_entry(ar.offs.at(d - 1)[s] + tr.row, ar.offs.at(d)[s] + tr.col,
                             tr.val);
        }
        dm.finalize();
        if (!dm.is_zero()) ar.ambient.set_diff(d, dm);
    }
}

// Quotient every degree by the collected relation columns and transport the
// differential through proj/section.
ChainComplex quotient_arity(CoinvProduct::Arity& ar, Field field,
                            std::map<int, std::vector<std::vector<SparseMatrix::Triplet>>>& rels) {
    for (const auto& [d, dim] : ar.ambient.dims) {
        auto it = rels.find(d);
        int ncols = it == rels.end() ? 0 : static_cast<int>(it->second.size());
        SparseMatrix r(field, dim, ncols);
        if (it != rels.end())
            for (int c = 0; c < ncols; ++c)
                for (const auto& tr : it->second[c]) r.add_entry(tr.row, c, tr.val);
        r.finalize();
        ar.q[d] = quotient(field, dim, r);
    }
    ChainComplex qc;
    qc.field = field;
    for (const auto& [d, qm] : ar.q) qc.set_dim(d, qm.dim);
    for (const auto& [d, qm] : ar.q) {
        auto below = ar.q.find(d - 1);
        if (below == ar.q.end() || below->second.dim == 0 || qm.dim == 0) continue;
        SparseMatrix dq = below->second.proj * ar.ambient.diff(d) * qm.section;
        if (!dq.is_zero()) qc.set_diff(d, dq);
    }
    qc.prune();
    return qc;
}

bool is_identity_perm(const Perm& p) {
    for (size_t u = 0; u < p.size(); ++u)
        if (p[u] != static_cast<int>(u)) return false;
    return true;
}

void check_coinv_char(Field field, int cap, const char* who) {
    if (field.kind == Field::Kind::Prime && field.p <= cap)
        throw std::invalid_argument(std::string(who) +
                                    ": coinvariants need characteristic 0 or p > arity cap");
}

}  // namespace

CoinvProduct circ_sigma_full(const SymSeq& m, const SymSeq& n) {
    Field field = m.field;
    check_coinv_char(field, std::max(m.cap, n.cap), "circ_sigma");
    CoinvProduct out;
    out.seq.field = field;
    out.seq.cap = m.cap;
    bool surj_only = (m.at(0) == nullptr);
    for (int i = 0; i <= m.cap; ++i) {
        std::vector<SummandBuild> sds;
        for (int k = 0; k <= n.cap; ++k) {
            if (!n.at(k)) continue;
            auto cands = surj_only ? surjections(i, k) : all_functions(i, k);
            for (auto& f : cands) {
                SummandBuild sd{k, f, {}, {}};
                bool ok = true;
                for (int sz : fiber_sizes(f, k)) {
                    const ChainComplex* c = m.at(sz);
                    if (!c) {
                        ok = false;
                        break;
                    }
                    sd.facs.push_back(c);
                }
                if (!ok) continue;
                sd.facs.push_back(n.at(k));
                sd.wc = tensor_word_complex(sd.facs);
                if (!sd.wc.is_zero()) sds.push_back(std::move(sd));
            }
        }
        if (sds.empty()) continue;
        CoinvProduct::Arity ar;
        for (const auto& sd : sds) ar.sums.push_back({sd.k, sd.f});
        assemble_ambient(ar, field, sds);
        auto find = [&](int k, const std::vector<int>& f) {
            for (size_t s = 0; s < sds.size(); ++s)
                if (sds[s].k == k && sds[s].f == f) return static_cast<int>(s);
            throw std::logic_error("circ_sigma: missing permuted summand");
        };
        // diagonal relations sigma.v - v for adjacent sigma in Sigma_k:
        // sigma post-composes f, block-permutes the M factors (Koszul signs)
        // and acts on N(k) in the last slot.
        std::map<int, std::vector<std::vector<SparseMatrix::Triplet>>> rels;
        for (size_t s = 0; s < sds.size(); ++s) {
            int k = sds[s].k;
            for (int j = 0; j + 1 < k; ++j) {
                Perm sig(k);
                for (int u = 0; u < k; ++u) sig[u] = u;
                std::swap(sig[j], sig[j + 1]);
                std::vector<int> f2(i);
                for (int e = 0; e < i; ++e) f2[e] = sig[sds[s].f[e]];
                int t = find(k, f2);
                Perm pi(k + 1);
                for (int u = 0; u < k; ++u) pi[u] = sig[u];
                pi[k] = k;
                ChainMap na = n.action(k, sig);
                for (const auto& [d, dim] : sds[s].wc.dims) {
                    SparseMatrix act =
                        apply_in_slot(field, sds[t].facs, sds[t].facs, k, na, d) *
                        tensor_word_permute(field, sds[s].facs, pi, d);
                    for (int v = 0; v < dim; ++v) {
                        std::vector<SparseMatrix::Triplet> col;
                        for (const auto& tr : act.entries())
                            if (tr.col == v)
                                col.push_back({ar.offs.at(d)[t] + tr.row, 0, tr.val});
                        col.push_back({ar.offs.at(d)[s] + v, 0, Scalar(field, -1)});
                        rels[d].push_back(std::move(col));
                    }
                }
            }
        }
        ChainComplex qc = quotient_arity(ar, field, rels);
        // residual Sigma_i generators: precomposition with per-fiber inner
        // relabelings, conjugated through proj/section.
        std::vector<ChainMap> gens;
        for (int j = 0; i >= 2 && j + 1 < i; ++j) {
            Perm sig(i);
            for (int u = 0; u < i; ++u) sig[u] = u;
            std::swap(sig[j], sig[j + 1]);
            ChainMap g;
            for (const auto& [d, qm] : ar.q) {
                if (qm.dim == 0) continue;
                SparseMatrix amb(field, ar.ambient.dim(d), ar.ambient.dim(d));
                for (size_t s = 0; s < sds.size(); ++s) {
                    int dims = sds[s].wc.dim(d);
                    if (dims == 0) continue;
                    int k = sds[s].k;
                    std::vector<int> f2(i);
                    for (int e = 0; e < i; ++e) f2[e] = sds[s].f[sig[e]];
                    int t = find(k, f2);
                    SparseMatrix acc = SparseMatrix::identity(field, dims);
                    for (int u = 0; u < k; ++u) {
                        auto src_fiber = fiber_of(sds[s].f, u);
                        auto img_fiber = fiber_of(f2, u);
                        Perm pi = relabel_perm(src_fiber, img_fiber,
                                               [&](int e) { return sig[e]; });
                        if (is_identity_perm(pi)) continue;
                        ChainMap a = m.action(static_cast<int>(pi.size()),
                                              perm_inverse(pi));
                        acc = apply_in_slot(field, sds[s].facs, sds[s].facs, u, a, d) *
                              acc;
                    }
                    for (const auto& tr : acc.entries())
                        amb.add_entry(ar.offs.at(d)[t] + tr.row,
                                      ar.offs.at(d)[s] + tr.col, tr.val);
                }
                amb.finalize();
                SparseMatrix gq = qm.proj * amb * qm.section;
                if (!gq.is_zero()) g.mats[d] = std::move(gq);
            }
            gens.push_back(std::move(g));
        }
        if (!qc.is_zero()) {
            out.seq.arities[i] = qc;
            if (i >= 2) out.seq.gens[i] = std::move(gens);
        }
        out.arity[i] = std::move(ar);
    }
    return out;
}

SymSeq circ_sigma(const SymSeq& m, const SymSeq& n) { return circ_sigma_full(m, n).seq; }

CoinvProduct bar_circ_full(const SymSeq& m, const SymSeq& n) {
    Field field = m.field;
    check_coinv_char(field, std::max(m.cap, n.cap), "bar_circ");
    CoinvProduct out;
    out.seq.field = field;
    out.seq.cap = m.cap;
    for (int i = 0; i <= m.cap; ++i) {
        std::vector<SummandBuild> sds;
        for (int k = 0; k <= n.cap; ++k) {
            if (!n.at(k)) continue;
            for (auto& f : all_functions(k, i)) {
                SummandBuild sd{k, f, {}, {}};
                bool ok = true;
                for (int sz : fiber_sizes(f, i)) {
                    const ChainComplex* c = m.at(sz);
                    if (!c) {
                        ok = false;
                        break;
                    }
                    sd.facs.push_back(c);
                }
                if (!ok) continue;
                sd.facs.push_back(n.at(k));
                sd.wc = tensor_word_complex(sd.facs);
                if (!sd.wc.is_zero()) sds.push_back(std::move(sd));
            }
        }
        if (sds.empty()) continue;
        CoinvProduct::Arity ar;
        for (const auto& sd : sds) ar.sums.push_back({sd.k, sd.f});
        assemble_ambient(ar, field, sds);
        auto find = [&](int k, const std::vector<int>& f) {
            for (size_t s = 0; s < sds.size(); ++s)
                if (sds[s].k == k && sds[s].f == f) return static_cast<int>(s);
            throw std::logic_error("bar_circ: missing permuted summand");
        };
        // diagonal relations: sigma precomposes f (per-fiber inner
        // relabelings on the M factors) and acts on N(k).
        std::map<int, std::vector<std::vector<SparseMatrix::Triplet>>> rels;
        for (size_t s = 0; s < sds.size(); ++s) {
            int k = sds[s].k;
            for (int j = 0; j + 1 < k; ++j) {
                Perm sig(k);
                for (int u = 0; u < k; ++u) sig[u] = u;
                std::swap(sig[j], sig[j + 1]);
                std::vector<int> f2(k);
                for (int e = 0; e < k; ++e) f2[e] = sds[s].f[sig[e]];
                int t = find(k, f2);
                for (const auto& [d, dim] : sds[s].wc.dims) {
                    SparseMatrix acc = SparseMatrix::identity(field, dim);
                    for (int u = 0; u < i; ++u) {
                        auto src_fiber = fiber_of(sds[s].f, u);
                        auto img_fiber = fiber_of(f2, u);
                        Perm pi = relabel_perm(src_fiber, img_fiber,
                                               [&](int e) { return sig[e]; });
                        if (is_identity_perm(pi)) continue;
                        ChainMap a = m.action(static_cast<int>(pi.size()),
                                              perm_inverse(pi));
                        acc = apply_in_slot(field, sds[s].facs, sds[s].facs, u, a, d) *
                              acc;
                    }
                    acc = apply_in_slot(field, sds[t].facs, sds[t].facs, i,
                                        n.action(k, sig), d) *
                          acc;
                    for (int v = 0; v < dim; ++v) {
                        std::vector<SparseMatrix::Triplet> col;
                        for (const auto& tr : acc.entries())
                            if (tr.col == v)
                                col.push_back({ar.offs.at(d)[t] + tr.row, 0, tr.val});
                        col.push_back({ar.offs.at(d)[s] + v, 0, Scalar(field, -1)});
                        rels[d].push_back(std::move(col));
                    }
                }
            }
        }
        ChainComplex qc = quotient_arity(ar, field, rels);
        // residual Sigma_i generators: post-composition block-permutes the M
        // factors with Koszul signs, N(k) untouched.
        std::vector<ChainMap> gens;
        for (int j = 0; i >= 2 && j + 1 < i; ++j) {
            Perm sig(i);
            for (int u = 0; u < i; ++u) sig[u] = u;
            std::swap(sig[j], sig[j + 1]);
            Perm pi(i + 1);
            for (int u = 0; u < i; ++u) pi[u] = sig[u];
            pi[i] = i;
            ChainMap g;
            for (const auto& [d, qm] : ar.q) {
                if (qm.dim == 0) continue;
                SparseMatrix amb(field, ar.ambient.dim(d), ar.ambient.dim(d));
                for (size_t s = 0; s < sds.size(); ++s) {
                    if (sds[s].wc.dim(d) == 0) continue;
                    std::vector<int> f2(sds[s].k);
                    for (int e = 0; e < sds[s].k; ++e) f2[e] = sig[sds[s].f[e]];
                    int t = find(sds[s].k, f2);
                    SparseMatrix pm = tensor_word_permute(field, sds[s].facs, pi, d);
                    for (const auto& tr : pm.entries())
                        amb.add_entry(ar.offs.at(d)[t] + tr.row,
                                      ar.offs.at(d)[s] + tr.col, tr.val);
                }
                amb.finalize();
                SparseMatrix gq = qm.proj * amb * qm.section;
                if (!gq.is_zero()) g.mats[d] = std::move(gq);
            }
            gens.push_back(std::move(g));
        }
        if (!qc.is_zero()) {
            out.seq.arities[i] = qc;
            if (i >= 2) out.seq.gens[i] = std::move(gens);
        }
        out.arity[i] = std::move(ar);
    }
    return out;
}

SymSeq bar_circ(const SymSeq& m, const SymSeq& n) { return bar_circ_full(m, n).seq; }

SymSeq random_symseq(Field f, int cap, std::mt19937& rng) {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    SymSeq x;
    x.field = f;
    x.cap = cap;
    for (int n = 1; n <= cap; ++n) {
        if (n > 1 && pick(4) == 0) continue;
        struct Block {
            int dim, deg;
            bool cone;
            std::vector<SparseMatrix> rep;  // one matrix per generator s_j
        };
        std::vector<Block> blocks;
        int nblocks = 1 + pick(2);
        for (int b = 0; b < nblocks; ++b) {
            Block bl;
            bl.deg = pick(4) - 1;
            bl.cone = pick(3) == 0;
            int type = pick(3);
            if (type == 2 && n >= 2) {
                bl.dim = n;  // permutation representation on basis vectors
                for (int j = 0; j + 1 < n; ++j) {
                    SparseMatrix r(f, n, n);
                    for (int u = 0; u < n; ++u) {
                        int v = u == j ? j + 1 : (u == j + 1 ? j : u);
                        r.add_entry(v, u, Scalar(f, 1));
                    }
                    r.finalize();
                    bl.rep.push_back(std::move(r));
                }
            } else {
                bl.dim = 1;
                long c = type == 1 ? -1 : 1;  // sign or trivial character
                for (int j = 0; j + 1 < n; ++j) {
                    SparseMatrix r(f, 1, 1);
                    r.add_entry(0, 0, Scalar(f, c));
                    r.finalize();
                    bl.rep.push_back(std::move(r));
                }
            }
            blocks.push_back(std::move(bl));
        }
        // assemble: each block sits in its degree, cones add a shifted copy
        // with the identity differential (equivariant since the
        // representation is repeated verbatim).
        std::map<int, int> dims;
        std::vector<std::pair<int, int>> pos0(blocks.size()), pos1(blocks.size());
        for (size_t b = 0; b < blocks.size(); ++b) {
            pos0[b] = {blocks[b].deg, dims[blocks[b].deg]};
            dims[blocks[b].deg] += blocks[b].dim;
            if (blocks[b].cone) {
                pos1[b] = {blocks[b].deg - 1, dims[blocks[b].deg - 1]};
                dims[blocks[b].deg - 1] += blocks[b].dim;
            }
        }
        ChainComplex c;
        c.field = f;
        for (const auto& [d, dim] : dims) c.set_dim(d, dim);
        for (const auto& [d, dim] : dims) {
            SparseMatrix dm(f, c.dim(d - 1), dim);
            for (size_t b = 0; b < blocks.size(); ++b)
                if (blocks[b].cone && blocks[b].deg == d)
                    for (int u = 0; u < blocks[b].dim; ++u)
                        dm.add_entry(pos1[b].second + u, pos0[b].second + u,
                                     Scalar(f, 1));
            dm.finalize();
            if (!dm.is_zero()) c.set_diff(d, dm);
        }
        x.arities[n] = std::move(c);
        if (n >= 2) {
            std::vector<ChainMap> gens(n - 1);
            for (int j = 0; j + 1 < n; ++j) {
                for (const auto& [d, dim] : dims) {
                    SparseMatrix g(f, dim, dim);
                    for (size_t b = 0; b < blocks.size(); ++b) {
                        auto put = [&](int off) {
                            for (const auto& tr : blocks[b].rep[j].entries())
                                g.add_entry(off + tr.row, off + tr.col, tr.val);
                        };
                        if (blocks[b].deg == d) put(pos0[b].second);
                        if (blocks[b].cone && blocks[b].deg - 1 == d) put(pos1[b].second);
                    }
                    g.finalize();
                    gens[j].mats[d] = std::move(g);
                }
            }
            x.gens[n] = std::move(gens);
        }
    }
    if (x.arities.empty()) x.arities[1] = ChainComplex::unit(f);
    return x;
}

// ---------------------------------------------------------------------------
// monoidality of prop

namespace {

// (summand index, inner word element) of basis index `idx` of p.cx.at(mm,nn)
// in degree `deg`
std::tuple<int, std::vector<int>, std::vector<int>> prop_decode(const Prop& p, int mm,
                                                                int nn, int deg,
                                                                int idx) {
    const auto& list = p.fs.at({mm, nn});
    int off = 0;
    for (size_t fi = 0; fi < list.size(); ++fi) {
        TensorWord tw(p.summand_factors(mm, nn, static_cast<int>(fi)), deg);
        if (idx < off + tw.dim()) {
            const auto& [degs, idxs] = tw.elts[idx - off];
            return {static_cast<int>(fi), degs, idxs};
        }
        off += tw.dim();
    }
    throw std::logic_error("prop_decode: index out of range");
}

// Koszul sign of reordering homogeneous factors: pos[s] is the target
// position of source factor s, degs[s] its degree.
int koszul_reorder_sign(const std::vector<int>& degs, const std::vector<int>& pos) {
    int inv = 0;
    for (size_t a = 0; a < degs.size(); ++a)
        for (size_t b = a + 1; b < degs.size(); ++b)
            if (pos[a] > pos[b] && (degs[a] & 1) && (degs[b] & 1)) ++inv;
    return inv % 2 == 0 ? 1 : -1;
}

}  // namespace

PropMonoidalReport prop_monoidal_iso(const SymSeq& m, const SymSeq& n) {
    PropMonoidalReport rep;
    Field field = m.field;
    CoinvProduct w = circ_sigma_full(m, n);
    Prop L = prop_of(w.seq);
    Prop pm = prop_of(m);
    Prop pn = prop_of(n);
    DgCategory sig = k_sigma(field, 0, m.cap);
    Bimodule bm = pm.bimodule();
    Bimodule bn = pn.bimodule();
    CircOver rhs = circ_over(pm.cx, pn.cx, sig.cx, bm.ract_fn(), bn.lact_fn());
    auto fail = [&](std::string s) { rep.failures.push_back(std::move(s)); };
    auto tag = [](int i, int j, int nd) {
        return "(" + std::to_string(i) + "," + std::to_string(j) + ") degree " +
               std::to_string(nd);
    };

    for (int i = 0; i <= m.cap; ++i)
        for (int j = 0; j <= m.cap; ++j) {
            const ChainComplex& rc = rhs.cx.at(i, j);
            const ChainComplex& lc = L.cx.at(i, j);
            if (rc.dims != lc.dims) {
                fail("dimension mismatch at (" + std::to_string(i) + "," +
                     std::to_string(j) + ")");
                continue;
            }
            if (rc.is_zero()) continue;
            std::map<int, SparseMatrix> iso;
            for (const auto& [nd, rdim] : rc.dims) {
                WordSpace amb({&pm.cx, &pn.cx}, i, j, nd);
                SparseMatrix phi(field, lc.dim(nd), amb.dim());
                for (int v = 0; v < amb.dim(); ++v) {
                    const WordBasisElt& e = amb[v];
                    int k = e.path[1];
                    auto [gi, xdegs, xidxs] = prop_decode(pm, i, k, e.degs[0], e.idxs[0]);
                    auto [fi, ydegs, yidxs] = prop_decode(pn, k, j, e.degs[1], e.idxs[1]);
                    const auto& g = pm.fs.at({i, k})[gi];  // g: i -> k
                    const auto& f = pn.fs.at({k, j})[fi];  // f: k -> j
                    std::vector<int> h(i);
                    for (int t = 0; t < i; ++t) h[t] = f[g[t]];
                    // regrouping sign: X factors interleave with the Y
                    // factor of their slot
                    std::vector<int> sdegs(k + j), spos(k + j);
                    {
                        std::vector<std::pair<std::pair<int, int>, int>> key(k + j);
                        for (int s = 0; s < k; ++s) {
                            sdegs[s] = xdegs[s];
                            key[s] = {{f[s], s}, s};
                        }
                        for (int l = 0; l < j; ++l) {
                            sdegs[k + l] = ydegs[l];
                            key[k + l] = {{l, k}, k + l};
                        }
                        std::sort(key.begin(), key.end());
                        for (int t = 0; t < k + j; ++t) spos[key[t].second] = t;
                    }
                    int sgn = koszul_reorder_sign(sdegs, spos);
                    // per-slot classes in W(|h^-1(l)|)
                    bool dead = false;
                    std::vector<std::vector<std::pair<int, Scalar>>> slots(j);
                    std::vector<int> sldeg(j);
                    for (int l = 0; l < j && !dead; ++l) {
                        auto fib = fiber_of(f, l);
                        auto dom = fiber_of(h, l);
                        int rl = static_cast<int>(dom.size());
                        int kl = static_cast<int>(fib.size());
                        std::vector<int> ul(rl);
                        for (int u = 0; u < rl; ++u)
                            ul[u] = static_cast<int>(
                                std::lower_bound(fib.begin(), fib.end(), g[dom[u]]) -
                                fib.begin());
                        std::vector<int> fdegs, fidxs;
                        std::vector<const ChainComplex*> facs;
                        for (int s : fib) {
                            fdegs.push_back(xdegs[s]);
                            fidxs.push_back(xidxs[s]);
                        }
                        for (int sz : fiber_sizes(ul, kl)) facs.push_back(m.at(sz));
                        facs.push_back(n.at(kl));
                        fdegs.push_back(ydegs[l]);
                        fidxs.push_back(yidxs[l]);
                        int dl = 0;
                        for (int dd : fdegs) dl += dd;
                        sldeg[l] = dl;
                        auto ait = w.arity.find(rl);
                        if (ait == w.arity.end()) {
                            dead = true;
                            break;
                        }
                        const auto& arl = ait->second;
                        int sidx = w.find_summand(rl, kl, ul);
                        auto qit = arl.q.find(dl);
                        if (qit == arl.q.end() || qit->second.dim == 0) {
                            dead = true;
                            break;
                        }
                        int aidx = arl.offs.at(dl)[sidx] +
                                   TensorWord(facs, dl).find(fdegs, fidxs);
                        for (const auto& tr : qit->second.proj.entries())
                            if (tr.col == aidx) slots[l].push_back({tr.row, tr.val});
                        if (slots[l].empty()) dead = true;
                    }
                    if (dead) continue;
                    const auto& hlist = L.fs.at({i, j});
                    int hidx = static_cast<int>(
                        std::lower_bound(hlist.begin(), hlist.end(), h) - hlist.begin());
                    auto lfacs = L.summand_factors(i, j, hidx);
                    TensorWord ltw(lfacs, nd);
                    int hoff = L.block_offset(i, j, hidx, nd);
                    // cartesian product over the slot classes
                    std::vector<size_t> cur(j, 0);
                    while (true) {
                        Scalar coef(field, sgn);
                        std::vector<int> tdegs(j), tidxs(j);
                        for (int l = 0; l < j; ++l) {
                            tdegs[l] = sldeg[l];
                            tidxs[l] = slots[l][cur[l]].first;
                            coef = coef * slots[l][cur[l]].second;
                        }
                        phi.add_entry(hoff + ltw.find(tdegs, tidxs), v, coef);
                        int l = j - 1;
                        while (l >= 0 && ++cur[l] == slots[l].size()) cur[l--] = 0;
                        if (l < 0) break;
                    }
                }
                phi.finalize();
                SparseMatrix pr = rhs.proj_at(pm.cx, pn.cx, i, j, nd);
                SparseMatrix se = rhs.section_at(pm.cx, pn.cx, i, j, nd);
                if (!(phi - phi * se * pr).is_zero())
                    fail("map not constant on coinvariant classes at " + tag(i, j, nd));
                SparseMatrix is = phi * se;
                if (rank(is) != rdim) fail("not invertible at " + tag(i, j, nd));
                iso[nd] = std::move(is);
            }
            // chain map
            for (const auto& [nd, mat] : iso) {
                auto below = iso.find(nd - 1);
                SparseMatrix lhs = lc.diff(nd) * mat;
                SparseMatrix rhs2 = below == iso.end()
                                        ? SparseMatrix::zero(field, lc.dim(nd - 1), rc.dim(nd))
                                        : below->second * rc.diff(nd);
                if (!(lhs - rhs2).is_zero())
                    fail("not a chain map at " + tag(i, j, nd));
            }
            // equivariance for both residual actions
            auto act_check = [&](int slot, int count, auto edge_act, auto l_act,
                                 const char* side) {
                for (int jj = 0; jj + 1 < count; ++jj) {
                    std::map<std::pair<int, int>, ChainMap> cache;
                    ApplyFn fn = [&](int p, int q) -> const ChainMap* {
                        auto key = std::make_pair(p, q);
                        auto it = cache.find(key);
                        if (it == cache.end())
                            it = cache.emplace(key, edge_act(p, q, jj)).first;
                        return &it->second;
                    };
                    ChainMap la = l_act(jj);
                    for (const auto& [nd, mat] : iso) {
                        WordSpace amb({&pm.cx, &pn.cx}, i, j, nd);
                        SparseMatrix ract = rhs.proj_at(pm.cx, pn.cx, i, j, nd) *
                                            slot_apply(amb, amb, slot, fn) *
                                            rhs.section_at(pm.cx, pn.cx, i, j, nd);
                        SparseMatrix lact = la.at(field, lc, lc, nd);
                        if (!((mat * ract - lact * mat)).is_zero())
                            fail(std::string(side) + " equivariance fails at " +
                                 tag(i, j, nd));
                    }
                }
            };
            if (i >= 2)
                act_check(
                    0, i,
                    [&](int p, int q, int jj) {
                        Perm s(p);
                        for (int u = 0; u < p; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return pm.left_action(p, q, s);
                    },
                    [&](int jj) {
                        Perm s(i);
                        for (int u = 0; u < i; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return L.left_action(i, j, s);
                    },
                    "left");
            if (j >= 2)
                act_check(
                    1, j,
                    [&](int p, int q, int jj) {
                        Perm s(q);
                        for (int u = 0; u < q; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return pn.right_action(p, q, s);
                    },
                    [&](int jj) {
                        Perm s(j);
                        for (int u = 0; u < j; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return L.right_action(i, j, s);
                    },
                    "right");
            rep.iso[{i, j}] = std::move(iso);
        }
    rep.ok = rep.failures.empty();
    return rep;
}

namespace {

// (summand index, inner word element) of an ambient basis index of one arity
// of a CoinvProduct presentation, with the factor list of that summand
std::tuple<int, std::vector<int>, std::vector<int>> coinv_ambient_decode(
    const CoinvProduct& w, const SymSeq& mm, const SymSeq& nn, int arity, int deg,
    int aidx) {
    const auto& ar = w.arity.at(arity);
    const auto& offs = ar.offs.at(deg);
    for (int s = static_cast<int>(ar.sums.size()) - 1; s >= 0; --s) {
        if (aidx < offs[s]) continue;
        std::vector<const ChainComplex*> facs;
        for (int sz : fiber_sizes(ar.sums[s].f, arity)) facs.push_back(mm.at(sz));
        facs.push_back(nn.at(ar.sums[s].k));
        TensorWord tw(facs, deg);
        int loc = aidx - offs[s];
        if (loc < tw.dim()) {
            const auto& [degs, idxs] = tw.elts[loc];
            return {s, degs, idxs};
        }
    }
    throw std::logic_error("coinv_ambient_decode: index out of range");
}

}  // namespace

PropMonoidalReport prop_bar_compat(const SymSeq& x, const SymSeq& y) {
    PropMonoidalReport rep;
    Field field = x.field;
    int cap = x.cap;
    CoinvProduct w = bar_circ_full(x, y);
    Prop L = prop_of(w.seq);
    Prop px = prop_of(x);
    Prop py = prop_of(y);
    Graph opx = opposite(px.cx);
    DgCategory sig = k_sigma(field, 0, cap);
    // materialized actions for the coequalizer: the op side becomes a right
    // module through v . sigma := (left action of sigma^-1) v
    std::map<std::pair<int, int>, ChainMap> ractop, lacty;
    for (int i = 0; i <= cap; ++i)
        for (int k = 0; k <= cap; ++k) {
            const ChainComplex* xc = px.cx.ptr(k, i);
            const ChainComplex* sc = sig.cx.ptr(k, k);
            if (xc && sc) {
                ChainMap cm;
                auto perms = all_perms(k);
                for (const auto& [n, dim] : xc->dims) {
                    TensorBlocks tb(xc->dims, sc->dims, n);
                    SparseMatrix mat(field, dim, tb.total);
                    for (size_t si = 0; si < perms.size(); ++si) {
                        ChainMap a = px.left_action(k, i, perm_inverse(perms[si]));
                        auto mit = a.mats.find(n);
                        if (mit == a.mats.end()) continue;
                        for (const auto& tr : mit->second.entries())
                            mat.add_entry(tr.row,
                                          tb.index(n, tr.col, static_cast<int>(si)),
                                          tr.val);
                    }
                    mat.finalize();
                    if (!mat.is_zero()) cm.mats[n] = std::move(mat);
                }
                ractop[{i, k}] = std::move(cm);
            }
            const ChainComplex* yc = py.cx.ptr(k, i);
            if (yc && sc) {
                ChainMap cm;
                auto perms = all_perms(k);
                for (const auto& [n, dim] : yc->dims) {
                    TensorBlocks tb(sc->dims, yc->dims, n);
                    SparseMatrix mat(field, dim, tb.total);
                    for (size_t si = 0; si < perms.size(); ++si) {
                        ChainMap a = py.left_action(k, i, perms[si]);
                        auto mit = a.mats.find(n);
                        if (mit == a.mats.end()) continue;
                        for (const auto& tr : mit->second.entries())
                            mat.add_entry(tr.row,
                                          tb.index(0, static_cast<int>(si), tr.col),
                                          tr.val);
                    }
                    mat.finalize();
                    if (!mat.is_zero()) cm.mats[n] = std::move(mat);
                }
                lacty[{k, i}] = std::move(cm);
            }
        }
    MergeFn rfn = [&](int p, int q, int r) -> const ChainMap* {
        if (q != r) return nullptr;
        auto it = ractop.find({p, q});
        return it == ractop.end() ? nullptr : &it->second;
    };
    MergeFn lfn = [&](int p, int q, int r) -> const ChainMap* {
        if (p != q) return nullptr;
        auto it = lacty.find({q, r});
        return it == lacty.end() ? nullptr : &it->second;
    };
    CircOver rhs = circ_over(opx, py.cx, sig.cx, rfn, lfn);
    auto fail = [&](std::string s) { rep.failures.push_back(std::move(s)); };
    auto tag = [](int i, int j, int nd) {
        return "(" + std::to_string(i) + "," + std::to_string(j) + ") degree " +
               std::to_string(nd);
    };
    for (int i = 0; i <= cap; ++i)
        for (int j = 0; j <= cap; ++j) {
            const ChainComplex& lc = L.cx.at(i, j);
            const ChainComplex& rc = rhs.cx.at(i, j);
            if (lc.is_zero()) continue;
            // the comparison lands in middle arity K = k_1 + ... + k_j; skip
            // pairs whose image leaves the common truncation window
            {
                bool fits = true;
                for (const auto& h : L.fs.at({i, j})) {
                    int kmax = 0;
                    for (int sz : fiber_sizes(h, j)) {
                        auto ait = w.arity.find(sz);
                        if (ait == w.arity.end()) continue;
                        int mk = 0;
                        for (const auto& sm : ait->second.sums)
                            mk = std::max(mk, sm.k);
                        kmax += mk;
                    }
                    if (kmax > cap) fits = false;
                }
                if (!fits) continue;
            }
            std::map<int, SparseMatrix> iso;
            for (const auto& [nd, ldim] : lc.dims) {
                WordSpace amb({&opx, &py.cx}, i, j, nd);
                SparseMatrix pr = rhs.proj_at(opx, py.cx, i, j, nd);
                SparseMatrix phi(field, rc.dim(nd), ldim);
                for (int col = 0; col < ldim; ++col) {
                    auto [hi, zdegs, zidxs] = prop_decode(L, i, j, nd, col);
                    const auto& h = L.fs.at({i, j})[hi];
                    std::vector<std::vector<int>> fibs(j);
                    for (int t = 0; t < j; ++t) fibs[t] = fiber_of(h, t);
                    // lift every slot class to the ambient presentation
                    std::vector<std::vector<std::pair<int, Scalar>>> lifts(j);
                    bool dead = false;
                    for (int t = 0; t < j && !dead; ++t) {
                        int at = static_cast<int>(fibs[t].size());
                        const auto& ar = w.arity.at(at);
                        auto qit = ar.q.find(zdegs[t]);
                        if (qit == ar.q.end()) {
                            dead = true;
                            break;
                        }
                        for (const auto& tr : qit->second.section.entries())
                            if (tr.col == zidxs[t])
                                lifts[t].push_back({tr.row, tr.val});
                        if (lifts[t].empty()) dead = true;
                    }
                    if (dead) continue;
                    std::vector<size_t> cur(j, 0);
                    while (true) {
                        Scalar coef = Scalar::one(field);
                        std::vector<int> ks(j);
                        std::vector<std::vector<int>> us(j), fdegs(j), fidxs(j);
                        for (int t = 0; t < j; ++t) {
                            coef = coef * lifts[t][cur[t]].second;
                            int at = static_cast<int>(fibs[t].size());
                            auto [sidx, dg, ix] = coinv_ambient_decode(
                                w, x, y, at, zdegs[t], lifts[t][cur[t]].first);
                            ks[t] = w.arity.at(at).sums[sidx].k;
                            us[t] = w.arity.at(at).sums[sidx].f;
                            fdegs[t] = dg;
                            fidxs[t] = ix;
                        }
                        int K = 0;
                        for (int t = 0; t < j; ++t) K += ks[t];
                        std::vector<int> G(K), F(K);
                        {
                            int off = 0;
                            for (int t = 0; t < j; ++t) {
                                for (int u = 0; u < ks[t]; ++u) {
                                    G[off + u] = fibs[t][us[t][u]];
                                    F[off + u] = t;
                                }
                                off += ks[t];
                            }
                        }
                        // factor elements in target order, with the regroup sign
                        std::vector<int> xdegs(i, 0), xidxs(i, 0);
                        std::vector<int> ydegs(j), yidxs(j);
                        int total = i + j;
                        std::vector<int> sdegs(total), spos(total);
                        {
                            int src = 0;
                            for (int t = 0; t < j; ++t) {
                                int at = static_cast<int>(fibs[t].size());
                                for (int e = 0; e < at; ++e) {
                                    int s = fibs[t][e];
                                    xdegs[s] = fdegs[t][e];
                                    xidxs[s] = fidxs[t][e];
                                    sdegs[src] = fdegs[t][e];
                                    spos[src] = s;
                                    ++src;
                                }
                                ydegs[t] = fdegs[t][at];
                                yidxs[t] = fidxs[t][at];
                                sdegs[src] = fdegs[t][at];
                                spos[src] = i + t;
                                ++src;
                            }
                        }
                        int sgn = koszul_reorder_sign(sdegs, spos);
                        int dx = 0, dy = 0;
                        for (int s = 0; s < i; ++s) dx += xdegs[s];
                        for (int t = 0; t < j; ++t) dy += ydegs[t];
                        const auto& glist = px.fs.at({K, i});
                        int gi = static_cast<int>(
                            std::lower_bound(glist.begin(), glist.end(), G) -
                            glist.begin());
                        int xrow = px.block_offset(K, i, gi, dx) +
                                   TensorWord(px.summand_factors(K, i, gi), dx)
                                       .find(xdegs, xidxs);
                        const auto& flist = py.fs.at({K, j});
                        int fi2 = static_cast<int>(
                            std::lower_bound(flist.begin(), flist.end(), F) -
                            flist.begin());
                        int yrow = py.block_offset(K, j, fi2, dy) +
                                   TensorWord(py.summand_factors(K, j, fi2), dy)
                                       .find(ydegs, yidxs);
                        WordBasisElt e;
                        e.path = {i, K, j};
                        e.degs = {dx, dy};
                        e.idxs = {xrow, yrow};
                        int v = amb.find(e);
                        if (v < 0) throw std::logic_error("prop_bar_compat: bad word");
                        for (const auto& tr : pr.entries())
                            if (tr.col == v)
                                phi.add_entry(tr.row, col,
                                              tr.val * coef * Scalar(field, sgn));
                        int t = j - 1;
                        while (t >= 0 && ++cur[t] == lifts[t].size()) cur[t--] = 0;
                        if (t < 0) break;
                    }
                }
                phi.finalize();
                if (rank(phi) != ldim) fail("not injective at " + tag(i, j, nd));
                iso[nd] = std::move(phi);
            }
            for (const auto& [nd, mat] : iso) {
                auto below = iso.find(nd - 1);
                SparseMatrix lhs = rc.diff(nd) * mat;
                SparseMatrix rhs2 =
                    below == iso.end()
                        ? SparseMatrix::zero(field, rc.dim(nd - 1), lc.dim(nd))
                        : below->second * lc.diff(nd);
                if (!(lhs - rhs2).is_zero()) fail("not a chain map at " + tag(i, j, nd));
            }
            // equivariance on both sides
            auto act_check = [&](int slot, int count, auto edge_act, auto l_act,
                                 const char* side) {
                for (int jj = 0; jj + 1 < count; ++jj) {
                    std::map<std::pair<int, int>, ChainMap> cache;
                    ApplyFn fn = [&](int p, int q) -> const ChainMap* {
                        auto key = std::make_pair(p, q);
                        auto it = cache.find(key);
                        if (it == cache.end())
                            it = cache.emplace(key, edge_act(p, q, jj)).first;
                        return &it->second;
                    };
                    ChainMap la = l_act(jj);
                    for (const auto& [nd, mat] : iso) {
                        WordSpace amb({&opx, &py.cx}, i, j, nd);
                        SparseMatrix ract = rhs.proj_at(opx, py.cx, i, j, nd) *
                                            slot_apply(amb, amb, slot, fn) *
                                            rhs.section_at(opx, py.cx, i, j, nd);
                        SparseMatrix lact = la.at(field, lc, lc, nd);
                        if (!((ract * mat - mat * lact)).is_zero())
                            fail(std::string(side) + " equivariance fails at " +
                                 tag(i, j, nd));
                    }
                }
            };
            if (i >= 2)
                act_check(
                    0, i,
                    [&](int p, int q, int jj) {
                        // slot 0 holds prop X read backwards: the left action
                        // of an adjacent swap is its right action on (q, p)
                        Perm s(p);
                        for (int u = 0; u < p; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return px.right_action(q, p, s);
                    },
                    [&](int jj) {
                        Perm s(i);
                        for (int u = 0; u < i; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return L.left_action(i, j, s);
                    },
                    "left");
            if (j >= 2)
                act_check(
                    1, j,
                    [&](int p, int q, int jj) {
                        Perm s(q);
                        for (int u = 0; u < q; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return py.right_action(p, q, s);
                    },
                    [&](int jj) {
                        Perm s(j);
                        for (int u = 0; u < j; ++u) s[u] = u;
                        std::swap(s[jj], s[jj + 1]);
                        return L.right_action(i, j, s);
                    },
                    "right");
            rep.iso[{i, j}] = std::move(iso);
        }
    rep.ok = rep.failures.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// operads and their props

const ChainMap* Operad::gamma_at(const std::vector<int>& key) const {
    auto it = gamma.find(key);
    return it == gamma.end() ? nullptr : &it->second;
}

Operad operad_unit(Field f, int cap) {
    Operad o;
    o.p = unit_symseq(f, cap);
    ChainMap id1;
    id1.mats[0] = SparseMatrix::identity(f, 1);
    o.gamma[{1, 1}] = std::move(id1);
    return o;
}

Operad operad_binary(Field f, int cap) {
    Operad o;
    o.p.field = f;
    o.p.cap = cap;
    o.p.arities[1] = ChainComplex::unit(f);
    ChainComplex c2;
    c2.field = f;
    c2.set_dim(0, 1);
    o.p.arities[2] = std::move(c2);
    ChainMap g;
    g.mats[0] = SparseMatrix::identity(f, 1);
    o.p.gens[2] = {g};
    ChainMap id1;
    id1.mats[0] = SparseMatrix::identity(f, 1);
    o.gamma[{1, 1}] = id1;
    o.gamma[{1, 2}] = id1;
    o.gamma[{2, 1, 1}] = id1;
    return o;
}

PropAlgebra prop_algebra(const Operad& op) {
    PropAlgebra pa;
    const SymSeq& x = op.p;
    Field f = x.field;
    int cap = x.cap;
    pa.prop = prop_of(x);
    const Prop& pr = pa.prop;
    pa.cat.cx = pr.cx;
    for (int n = 0; n <= cap; ++n) {
        const ChainComplex* c = pr.cx.ptr(n, n);
        if (!c) continue;
        std::vector<int> idf(n);
        for (int e = 0; e < n; ++e) idf[e] = e;
        const auto& list = pr.fs.at({n, n});
        int fi = static_cast<int>(std::lower_bound(list.begin(), list.end(), idf) -
                                  list.begin());
        SparseMatrix u(f, c->dim(0), 1);
        u.add_entry(pr.block_offset(n, n, fi, 0), 0, Scalar(f, 1));
        u.finalize();
        pa.cat.unit[n] = std::move(u);
    }
    for (int p = 0; p <= cap; ++p)
        for (int q = 0; q <= cap; ++q)
            for (int r = 0; r <= cap; ++r) {
                const ChainComplex* cpq = pr.cx.ptr(p, q);
                const ChainComplex* cqr = pr.cx.ptr(q, r);
                const ChainComplex* cpr = pr.cx.ptr(p, r);
                if (!cpq || !cqr || !cpr) continue;
                const auto& hlist = pr.fs.at({p, r});
                ChainMap cm;
                ChainComplex tc = tensor(*cpq, *cqr);
                for (const auto& [n, tdim] : tc.dims) {
                    if (cpr->dim(n) == 0) continue;
                    SparseMatrix mat(f, cpr->dim(n), tdim);
                    TensorBlocks tb(cpq->dims, cqr->dims, n);
                    for (const auto& blk : tb.blocks) {
                        int a = blk.left_deg, b = n - a;
                        for (int u = 0; u < blk.left_dim; ++u) {
                            auto [fi, xdegs, xidxs] = prop_decode(pr, p, q, a, u);
                            const auto& fn = pr.fs.at({p, q})[fi];
                            for (int v = 0; v < blk.right_dim; ++v) {
                                auto [gi, ydegs, yidxs] = prop_decode(pr, q, r, b, v);
                                const auto& gn = pr.fs.at({q, r})[gi];
                                std::vector<int> h(p);
                                for (int e = 0; e < p; ++e) h[e] = gn[fn[e]];
                                // regrouping sign: each operator passes the
                                // inputs of the earlier slots
                                std::vector<int> sdegs(q + r), spos(q + r);
                                {
                                    std::vector<std::pair<std::tuple<int, int, int>, int>>
                                        key(q + r);
                                    for (int s = 0; s < q; ++s) {
                                        sdegs[s] = xdegs[s];
                                        key[s] = {{gn[s], 1, s}, s};
                                    }
                                    for (int t = 0; t < r; ++t) {
                                        sdegs[q + t] = ydegs[t];
                                        key[q + t] = {{t, 0, 0}, q + t};
                                    }
                                    std::sort(key.begin(), key.end());
                                    for (int w = 0; w < q + r; ++w)
                                        spos[key[w].second] = w;
                                }
                                int sgn = koszul_reorder_sign(sdegs, spos);
                                // per-slot operadic compositions
                                bool dead = false;
                                std::vector<std::vector<std::pair<int, Scalar>>> slots(r);
                                std::vector<int> sldeg(r);
                                for (int t = 0; t < r && !dead; ++t) {
                                    auto ss = fiber_of(gn, t);
                                    std::vector<int> key{static_cast<int>(ss.size())};
                                    std::vector<const ChainComplex*> sf{
                                        x.at(static_cast<int>(ss.size()))};
                                    std::vector<int> degs{ydegs[t]}, idxs{yidxs[t]};
                                    std::vector<int> conc;
                                    for (int s : ss) {
                                        auto fib = fiber_of(fn, s);
                                        key.push_back(static_cast<int>(fib.size()));
                                        sf.push_back(x.at(static_cast<int>(fib.size())));
                                        degs.push_back(xdegs[s]);
                                        idxs.push_back(xidxs[s]);
                                        conc.insert(conc.end(), fib.begin(), fib.end());
                                    }
                                    const ChainMap* gm = op.gamma_at(key);
                                    if (!gm) {
                                        dead = true;
                                        break;
                                    }
                                    int dt = 0;
                                    for (int dd : degs) dt += dd;
                                    sldeg[t] = dt;
                                    auto mit = gm->mats.find(dt);
                                    if (mit == gm->mats.end()) {
                                        dead = true;
                                        break;
                                    }
                                    int col = TensorWord(sf, dt).find(degs, idxs);
                                    std::vector<std::pair<int, Scalar>> vals;
                                    for (const auto& tr : mit->second.entries())
                                        if (tr.col == col) vals.push_back({tr.row, tr.val});
                                    if (vals.empty()) {
                                        dead = true;
                                        break;
                                    }
                                    // relabel the concatenated fibers into the
                                    // sorted labels of h^-1(t)
                                    std::vector<int> srt = conc;
                                    std::sort(srt.begin(), srt.end());
                                    Perm pi(conc.size());
                                    bool idp = true;
                                    for (size_t w = 0; w < conc.size(); ++w) {
                                        pi[w] = static_cast<int>(
                                            std::lower_bound(srt.begin(), srt.end(),
                                                             conc[w]) -
                                            srt.begin());
                                        if (pi[w] != static_cast<int>(w)) idp = false;
                                    }
                                    if (!idp) {
                                        ChainMap act = x.action(
                                            static_cast<int>(pi.size()),
                                            perm_inverse(pi));
                                        const SparseMatrix& am = act.mats.at(dt);
                                        std::vector<std::pair<int, Scalar>> out;
                                        for (const auto& [row, coef] : vals)
                                            for (const auto& tr : am.entries())
                                                if (tr.col == row)
                                                    out.push_back({tr.row, tr.val * coef});
                                        vals = std::move(out);
                                        if (vals.empty()) dead = true;
                                    }
                                    slots[t] = std::move(vals);
                                }
                                if (dead) continue;
                                int hidx = static_cast<int>(
                                    std::lower_bound(hlist.begin(), hlist.end(), h) -
                                    hlist.begin());
                                auto hfacs = pr.summand_factors(p, r, hidx);
                                TensorWord htw(hfacs, n);
                                int hoff = pr.block_offset(p, r, hidx, n);
                                int colix = tb.index(a, u, v);
                                std::vector<size_t> cur(r, 0);
                                while (true) {
                                    Scalar coef(f, sgn);
                                    std::vector<int> tdegs(r), tidxs(r);
                                    for (int t = 0; t < r; ++t) {
                                        tdegs[t] = sldeg[t];
                                        tidxs[t] = slots[t][cur[t]].first;
                                        coef = coef * slots[t][cur[t]].second;
                                    }
                                    mat.add_entry(hoff + htw.find(tdegs, tidxs), colix,
                                                  coef);
                                    int t = r - 1;
                                    while (t >= 0 && ++cur[t] == slots[t].size())
                                        cur[t--] = 0;
                                    if (t < 0) break;
                                }
                            }
                        }
                    }
                    mat.finalize();
                    if (!mat.is_zero()) cm.mats[n] = std::move(mat);
                }
                if (!cm.mats.empty()) pa.cat.mult[{p, q, r}] = std::move(cm);
            }
    // augmentation onto the diagonal group algebras; for a reduced operad the
    // diagonal of the prop is exactly k Sigma_n with matching basis order
    pa.aug.base = k_sigma(f, 0, cap);
    for (int n = 0; n <= cap; ++n) {
        const ChainComplex* c = pr.cx.ptr(n, n);
        if (!c) continue;
        ChainMap id;
        id.mats[0] = SparseMatrix::identity(f, c->dim(0));
        pa.aug.incl[{n, n}] = id;
        pa.aug.aug[{n, n}] = id;
    }
    return pa;
}

void validate_prop_algebra(const PropAlgebra& pa) {
    validate_category(pa.cat);
    validate_augmentation(pa.cat, pa.aug);
}

OperadBar operad_bar(const Operad& p) {
    OperadBar ob;
    ob.pa = prop_algebra(p);
    ob.bo = bar(bar_rcr(ob.pa.cat, ob.pa.aug));
    Field f = p.p.field;
    int cap = p.p.cap;
    ob.bp.field = f;
    ob.bp.cap = cap;
    for (int n = 1; n <= cap; ++n) {
        const ChainComplex* c = ob.bo.total.ptr(n, 1);
        if (!c || c->is_zero()) continue;
        ob.bp.arities[n] = *c;
        if (n < 2) continue;
        // Sigma_n acts through left multiplication on the leading bar slot
        std::vector<ChainMap> gens;
        for (int j = 0; j + 1 < n; ++j) {
            Perm sig(n);
            for (int u = 0; u < n; ++u) sig[u] = u;
            std::swap(sig[j], sig[j + 1]);
            // left multiplication by e_sigma on k Sigma_n
            auto perms = all_perms(n);
            SparseMatrix lm(f, static_cast<int>(perms.size()),
                            static_cast<int>(perms.size()));
            for (size_t g = 0; g < perms.size(); ++g)
                lm.add_entry(perm_index(perm_then(sig, perms[g])),
                             static_cast<int>(g), Scalar(f, 1));
            lm.finalize();
            ChainMap lmc;
            lmc.mats[0] = std::move(lm);
            ApplyFn fn = [&](int pp, int qq) -> const ChainMap* {
                return pp == n && qq == n ? &lmc : nullptr;
            };
            ChainMap g;
            for (const auto& [deg, dim] : c->dims) {
                SparseMatrix mat(f, dim, dim);
                for (int l = 0; l <= ob.bo.lmax; ++l) {
                    const ChainComplex* lc = ob.bo.levels[l].cx.ptr(n, 1);
                    if (!lc || lc->dim(deg - l) == 0) continue;
                    std::vector<const Graph*> fac = ob.bo.level_factors(l);
                    WordSpace ws(fac, n, 1, deg - l);
                    SparseMatrix blockm =
                        ob.bo.levels[l].proj_at(n, 1, deg - l, ws.dim()) *
                        slot_apply(ws, ws, 0, fn) *
                        ob.bo.levels[l].section_at(n, 1, deg - l, ws.dim());
                    int off = ob.bo.level_offset(n, 1, deg, l);
                    for (const auto& tr : blockm.entries())
                        mat.add_entry(off + tr.row, off + tr.col, tr.val);
                }
                mat.finalize();
                if (!mat.is_zero()) g.mats[deg] = std::move(mat);
            }
            gens.push_back(std::move(g));
        }
        ob.bp.gens[n] = std::move(gens);
    }
    return ob;
}

// ---------------------------------------------------------------------------
// the duality comparison maps

PropDualReport prop_dual_map(const SymSeq& m) {
    PropDualReport rep;
    Field f = m.field;
    int cap = m.cap;
    Prop pm = prop_of(m);
    Prop pd = prop_of(dual_symseq(m));
    rep.source = pd.cx;
    DgCategory base = k_sigma(f, 0, cap);
    Bimodule bm = pm.bimodule();
    rep.target = hom_over_right(pm.cx, base.cx, base, bm.ract_fn(), base.mult_fn());
    rep.ok = true;
    for (int i = 0; i <= cap; ++i)
        for (int j = 0; j <= cap; ++j) {
            const ChainComplex* dom = pm.cx.ptr(j, i);
            const ChainComplex* src = pd.cx.ptr(j, i);
            const ChainComplex* sub = rep.target.cx.ptr(i, j);
            ChainComplex zero;
            zero.field = f;
            if (!src || !dom) {
                bool good = (src == nullptr || src->is_zero()) ==
                            (sub == nullptr || sub->is_zero());
                rep.pairs.push_back({i, j, good});
                if (!good) rep.ok = false;
                continue;
            }
            auto perms = all_perms(i);
            std::vector<ChainMap> racts;
            racts.reserve(perms.size());
            for (const auto& s : perms) racts.push_back(pm.right_action(j, i, s));
            ChainMap cm;
            for (const auto& [n, sdim] : src->dims) {
                int d = -n;  // an element of hom degree n eats degree -n
                if (dom->dim(d) == 0) continue;
                HomGraphBlocks hgb(pm.cx, base.cx, i, j, n, false);
                SparseMatrix amb(f, hgb.total, sdim);
                for (int col = 0; col < sdim; ++col) {
                    auto [fi, ddegs, didxs] = prop_decode(pd, j, i, n, col);
                    std::vector<int> wdegs(ddegs.size());
                    for (size_t s = 0; s < ddegs.size(); ++s) wdegs[s] = -ddegs[s];
                    int wrow =
                        pm.block_offset(j, i, fi, d) +
                        TensorWord(pm.summand_factors(j, i, fi), d).find(wdegs, didxs);
                    // pairing sign of the tensor-of-duals against the tensor
                    int sgn = 1;
                    for (size_t s = 0; s + 1 < wdegs.size(); ++s)
                        for (size_t t = s + 1; t < wdegs.size(); ++t)
                            if (wdegs[s] % 2 != 0 && wdegs[t] % 2 != 0) sgn = -sgn;
                    for (size_t si = 0; si < perms.size(); ++si) {
                        auto mit = racts[si].mats.find(d);
                        if (mit == racts[si].mats.end()) continue;
                        int codi = perm_index(perm_inverse(perms[si]));
                        for (const auto& tr : mit->second.entries())
                            if (tr.row == wrow)
                                amb.add_entry(hgb.index(i, d, codi, tr.col), col,
                                              Scalar(f, sgn) * tr.val);
                    }
                }
                amb.finalize();
                if (amb.is_zero()) continue;
                cm.mats[n] = solve_in_span(rep.target.incl_at(i, j, n), amb);
            }
            const ChainComplex& subr = sub ? *sub : zero;
            validate_chain_map(cm, *src, subr);
            bool good = is_quasi_iso(cm, *src, subr);
            rep.pairs.push_back({i, j, good});
            if (!good) rep.ok = false;
            if (!cm.mats.empty()) rep.map[{i, j}] = std::move(cm);
        }
    return rep;
}

// Deconcatenation convolution on hom_R(B(R,C,R), R): split a bar word at a
// middle object k, feed the front to the second factor, push its value into
// the leading module slot of the back, and feed that to the first factor.
// Returns the product matrix tensor(sub(i,k), sub(k,j)) -> sub(i,j) in the
// carrier's subspace coordinates at total degree n.
SparseMatrix conv_matrix(const DualBarModel& dm, int i, int k, int j, int n) {
    const BarObject& b = dm.resolution;
    Field f = b.field;
    const Graph& br = b.total;
    const Graph& rg = b.in.aug.base.cx;
    ChainComplex zero;
    zero.field = f;
    const ChainComplex* pik = dm.carrier.cx.ptr(i, k);
    const ChainComplex* pkj = dm.carrier.cx.ptr(k, j);
    const ChainComplex* pij = dm.carrier.cx.ptr(i, j);
    const ChainComplex& sik = pik ? *pik : zero;
    const ChainComplex& skj = pkj ? *pkj : zero;
    const ChainComplex& sij = pij ? *pij : zero;
    TensorBlocks tb(sik.dims, skj.dims, n);
    HomGraphBlocks hres(br, rg, i, j, n, false);
    SparseMatrix amb(f, hres.total, tb.total);
    const ChainComplex* dom = br.ptr(j, i);
    if (!dom || dom->dim(-n) == 0 || tb.total == 0) {
        amb.finalize();
        return solve_in_span(dm.carrier.incl_at(i, j, n), amb);
    }
    for (const auto& blk : tb.blocks) {
        int p = blk.left_deg, q = n - p;
        SparseMatrix phis = dm.carrier.incl_at(i, k, p);
        SparseMatrix psis = dm.carrier.incl_at(k, j, q);
        for (int u = 0; u < blk.left_dim; ++u)
            for (int v = 0; v < blk.right_dim; ++v) {
                int tcol = tb.index(p, u, v);
                // hom coordinates of the two factors, indexed by domain elt
                std::map<int, SparseVec> phi, psi;
                HomGraphBlocks hik(br, rg, i, k, p, false);
                HomGraphBlocks hkj(br, rg, k, j, q, false);
                const HomGraphBlocks::Block* bik = hik.block(i);
                const HomGraphBlocks::Block* bkj = hkj.block(k);
                if (!bik || !bkj) continue;
                const HomBlocks::Block* hbik = bik->hb.block(-p);
                const HomBlocks::Block* hbkj = bkj->hb.block(-q);
                if (!hbik || !hbkj) continue;
                for (const auto& tr : phis.entries())
                    if (tr.col == u) {
                        int loc = tr.row - bik->offset - hbik->offset;
                        phi[loc % hbik->dom_dim].push_back(
                            {loc / hbik->dom_dim, tr.val});
                    }
                for (const auto& tr : psis.entries())
                    if (tr.col == v) {
                        int loc = tr.row - bkj->offset - hbkj->offset;
                        psi[loc % hbkj->dom_dim].push_back(
                            {loc / hbkj->dom_dim, tr.val});
                    }
                if (phi.empty() || psi.empty()) continue;
                for (int l = 0; l <= b.lmax; ++l) {
                    int a = -n - l;
                    const ChainComplex* lc = b.levels[l].cx.ptr(j, i);
                    if (!lc || lc->dim(a) == 0) continue;
                    WordSpace ws(b.level_factors(l), j, i, a);
                    SparseMatrix sec = b.levels[l].section_at(j, i, a, ws.dim());
                    int off = b.level_offset(j, i, -n, l);
                    for (const auto& se : sec.entries()) {
                        int widx = off + se.col;
                        const WordBasisElt& e = ws[se.row];
                        for (int s = 0; s <= l; ++s) {
                            if (e.path[s + 1] != k) continue;
                            int a1 = 0;
                            for (int t = 0; t <= s; ++t) a1 += e.degs[t];
                            if (a1 + s != -q) continue;
                            // the front piece, closed off by the unit of R(k,k)
                            WordBasisElt pre;
                            pre.path.assign(e.path.begin(), e.path.begin() + s + 2);
                            pre.path.push_back(k);
                            pre.degs.assign(e.degs.begin(), e.degs.begin() + s + 1);
                            pre.degs.push_back(0);
                            pre.idxs.assign(e.idxs.begin(), e.idxs.begin() + s + 1);
                            pre.idxs.push_back(0);  // identity is the first perm
                            WordSpace wsp(b.level_factors(s), j, k, a1);
                            int pidx = wsp.find(pre);
                            if (pidx < 0) continue;
                            SparseMatrix prj =
                                b.levels[s].proj_at(j, k, a1, wsp.dim());
                            int offp = b.level_offset(j, k, -q, s);
                            // value of the second factor on the front piece
                            SparseVec mid;
                            for (const auto& pe : prj.entries()) {
                                if (pe.col != pidx) continue;
                                auto it = psi.find(offp + pe.row);
                                if (it == psi.end()) continue;
                                for (const auto& [sg, val] : it->second)
                                    mid.push_back({sg, val * pe.val});
                            }
                            if (mid.empty()) continue;
                            int a2 = a - a1;
                            WordSpace wss(b.level_factors(l - s), k, i, a2);
                            SparseMatrix prs =
                                b.levels[l - s].proj_at(k, i, a2, wss.dim());
                            int offs = b.level_offset(k, i, -p, l - s);
                            for (const auto& [sg, mval] : mid) {
                                WordBasisElt suf;
                                suf.path.assign(e.path.begin() + s + 1, e.path.end());
                                suf.path.insert(suf.path.begin(), k);
                                suf.degs.assign(e.degs.begin() + s + 1, e.degs.end());
                                suf.degs.insert(suf.degs.begin(), 0);
                                suf.idxs.assign(e.idxs.begin() + s + 1, e.idxs.end());
                                suf.idxs.insert(suf.idxs.begin(), sg);
                                int sidx = wss.find(suf);
                                if (sidx < 0) continue;
                                for (const auto& pe : prs.entries()) {
                                    if (pe.col != sidx) continue;
                                    auto it = phi.find(offs + pe.row);
                                    if (it == phi.end()) continue;
                                    for (const auto& [tg, fval] : it->second)
                                        amb.add_entry(hres.index(i, -n, tg, widx),
                                                      tcol,
                                                      se.val * pe.val * mval * fval);
                                }
                            }
                        }
                    }
                }
            }
    }
    amb.finalize();
    return solve_in_span(dm.carrier.incl_at(i, j, n), amb);
}

OperadKoszulReport operad_koszul_check(const Operad& p, int mmax) {
    OperadKoszulReport rep;
    if (mmax > p.p.cap)
        throw std::invalid_argument("operad_koszul_check: arity cap too small");
    Field f = p.p.field;
    OperadBar ob = operad_bar(p);
    KoszulDual kd = koszul_dual(ob.pa.cat, ob.pa.aug);
    DualBarModel dm = dual_bar_model(ob.pa.cat, ob.pa.aug);
    CompareReport cmp = compare_models(kd, dm);
    if (!cmp.ok) rep.failures.push_back("model comparison map is not a quasi-iso");
    Prop pd = prop_of(dual_symseq(ob.bp));
    rep.dims_ok = true;
    for (int m = 0; m <= mmax; ++m)
        for (int n2 = 0; n2 <= p.p.cap; ++n2) {
            const ChainComplex* ka = kd.K.cx.ptr(m, n2);
            const ChainComplex* pb = pd.cx.ptr(n2, m);
            std::map<int, int> ha = ka ? homology_dims(*ka) : std::map<int, int>{};
            std::map<int, int> hb = pb ? homology_dims(*pb) : std::map<int, int>{};
            if (ha.empty() && hb.empty()) continue;
            std::set<int> degs;
            for (const auto& [d, v] : ha) degs.insert(d);
            for (const auto& [d, v] : hb) degs.insert(d);
            for (int d : degs) {
                int da = ha.count(d) ? ha[d] : 0;
                int db = hb.count(d) ? hb[d] : 0;
                rep.table[{m, n2}][d] = {da, db};
                if (da != db) {
                    rep.dims_ok = false;
                    rep.failures.push_back(
                        "dimension mismatch at (" + std::to_string(m) + "," +
                        std::to_string(n2) + ") degree " + std::to_string(d) + ": " +
                        std::to_string(da) + " vs " + std::to_string(db));
                }
            }
        }
    // homology representatives per pair and degree, boundaries excluded
    auto reps_of = [&](int a, int b) {
        std::map<int, std::vector<SparseVec>> out;
        const ChainComplex* c = kd.K.cx.ptr(a, b);
        if (!c) return out;
        for (const auto& [d, dim] : c->dims) {
            SparseMatrix bd = c->diff(d + 1);
            Echelon ech(f, dim);
            for (int col = 0; col < bd.cols(); ++col) {
                SparseVec r;
                for (const auto& tr : bd.entries())
                    if (tr.col == col) r.push_back({tr.row, tr.val});
                ech.add_row(std::move(r));
            }
            SparseMatrix zs = kernel_basis(c->diff(d));
            for (int col = 0; col < zs.cols() && out[d].size() < 2; ++col) {
                SparseVec r;
                for (const auto& tr : zs.entries())
                    if (tr.col == col) r.push_back({tr.row, tr.val});
                SparseVec probe = r;
                if (ech.add_row(std::move(probe))) out[d].push_back(std::move(r));
            }
            if (out[d].empty()) out.erase(d);
        }
        return out;
    };
    auto norm = [&](SparseVec v) {
        std::sort(v.begin(), v.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        SparseVec out;
        for (auto& [idx, val] : v) {
            if (!out.empty() && out.back().first == idx)
                out.back().second = out.back().second + val;
            else
                out.push_back({idx, val});
        }
        std::erase_if(out, [](const auto& e) { return e.second.is_zero(); });
        return out;
    };
    auto apply = [&](const SparseMatrix& mat, const SparseVec& x) {
        SparseVec out;
        for (const auto& tr : mat.entries())
            for (const auto& [idx, val] : x)
                if (tr.col == idx) out.push_back({tr.row, tr.val * val});
        return out;
    };
    rep.mult_ok = true;
    for (int i = 0; i <= p.p.cap && rep.mult_pairs < 60; ++i)
        for (int k = 0; k <= p.p.cap; ++k)
            for (int j = 0; j <= p.p.cap; ++j) {
                const ChainComplex* kik = kd.K.cx.ptr(i, k);
                const ChainComplex* kkj = kd.K.cx.ptr(k, j);
                if (!kik || !kkj) continue;
                auto ra = reps_of(i, k);
                auto rb = reps_of(k, j);
                if (ra.empty() || rb.empty()) continue;
                auto mit = kd.K.mult.find({i, k, j});
                for (const auto& [pa, va] : ra)
                    for (const auto& [pb, vb] : rb)
                        for (const auto& xa : va)
                            for (const auto& xb : vb) {
                                if (rep.mult_pairs >= 60) break;
                                int nn = pa + pb;
                                // product in K
                                SparseVec kap;
                                if (mit != kd.K.mult.end() &&
                                    mit->second.mats.count(nn)) {
                                    TensorBlocks tk(kik->dims, kkj->dims, nn);
                                    SparseVec tv;
                                    for (const auto& [r1, v1] : xa)
                                        for (const auto& [r2, v2] : xb)
                                            tv.push_back(
                                                {tk.index(pa, r1, r2), v1 * v2});
                                    kap = apply(mit->second.mats.at(nn), tv);
                                }
                                // both sides in the dual bar carrier
                                auto th = [&](int aa, int bb, int dd,
                                              const SparseVec& x) {
                                    auto it = cmp.theta.find({aa, bb});
                                    if (it == cmp.theta.end() ||
                                        !it->second.mats.count(dd))
                                        return SparseVec{};
                                    return apply(it->second.mats.at(dd), x);
                                };
                                SparseVec ta = th(i, k, pa, xa);
                                SparseVec tbv = th(k, j, pb, xb);
                                SparseVec lhs = th(i, j, nn, kap);
                                const ChainComplex* cij = dm.carrier.cx.ptr(i, j);
                                ChainComplex zero;
                                zero.field = f;
                                const ChainComplex& sij = cij ? *cij : zero;
                                SparseVec rhs;
                                if (!ta.empty() && !tbv.empty()) {
                                    const ChainComplex* cik = dm.carrier.cx.ptr(i, k);
                                    const ChainComplex* ckj = dm.carrier.cx.ptr(k, j);
                                    TensorBlocks td(cik->dims, ckj->dims, nn);
                                    SparseVec tv;
                                    for (const auto& [r1, v1] : ta)
                                        for (const auto& [r2, v2] : tbv)
                                            tv.push_back(
                                                {td.index(pa, r1, r2), v1 * v2});
                                    rhs = apply(conv_matrix(dm, i, k, j, nn), tv);
                                }
                                // difference must be a boundary
                                SparseVec diffv = lhs;
                                for (auto& [idx, val] : diffv) val = -val;
                                diffv.insert(diffv.end(), rhs.begin(), rhs.end());
                                diffv = norm(std::move(diffv));
                                Echelon ech(f, std::max(sij.dim(nn), 1));
                                SparseMatrix bd = sij.diff(nn + 1);
                                for (int col = 0; col < bd.cols(); ++col) {
                                    SparseVec r;
                                    for (const auto& tr : bd.entries())
                                        if (tr.col == col)
                                            r.push_back({tr.row, tr.val});
                                    ech.add_row(std::move(r));
                                }
                                bool nonzero = ech.add_row(std::move(diffv));
                                ++rep.mult_pairs;
                                if (nonzero) {
                                    rep.mult_ok = false;
                                    rep.failures.push_back(
                                        "multiplicativity fails at (" +
                                        std::to_string(i) + "," + std::to_string(k) +
                                        "," + std::to_string(j) + ") degrees (" +
                                        std::to_string(pa) + "," +
                                        std::to_string(pb) + ")");
                                }
                            }
            }
    rep.ok = rep.dims_ok && rep.mult_ok && cmp.ok;
    return rep;
}

}  // namespace koszul
