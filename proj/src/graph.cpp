#include "koszul/graph.hpp"

#include <stdexcept>
#include <string>

namespace koszul {

const ChainComplex& Graph::at(int i, int j) const {
    auto it = comp_.find({i, j});
    return it == comp_.end() ? empty_ : it->second;
}

const ChainComplex* Graph::ptr(int i, int j) const {
    auto it = comp_.find({i, j});
    return it == comp_.end() ? nullptr : &it->second;
}

void Graph::set(int i, int j, ChainComplex c) {
    if (i < lo_ || i > hi_ || j < lo_ || j > hi_)
        throw std::out_of_range("Graph: pair outside the object window");
    c.prune();
    if (c.dims.empty())
        comp_.erase({i, j});
    else
        comp_[{i, j}] = std::move(c);
}

int Graph::total_dim() const {
    int t = 0;
    for (const auto& [ij, c] : comp_) t += c.total_dim();
    return t;
}

bool Graph::is_directed() const {
    for (const auto& [ij, c] : comp_)
        if (ij.first > ij.second && !c.dims.empty()) return false;
    return true;
}

bool Graph::is_strictly_directed() const {
    if (!is_directed()) return false;
    for (const auto& [ij, c] : comp_)
        if (ij.first == ij.second && (c.min_degree() != 0 || c.max_degree() != 0)) return false;
    return true;
}

void validate(const Graph& g) {
    for (const auto& [ij, c] : g.components()) {
        if (!(c.field == g.field()))
            throw std::invalid_argument("Graph: component over the wrong field");
        validate(c);
    }
}

Graph unit_graph(Field f, int lo, int hi) {
    Graph g(f, lo, hi);
    for (int i = lo; i <= hi; ++i) g.set(i, i, ChainComplex::unit(f));
    return g;
}

Graph opposite(const Graph& x) {
    Graph g(x.field(), x.lo(), x.hi());
    for (const auto& [ij, c] : x.components()) g.set(ij.second, ij.first, c);
    return g;
}

CircBlocks::CircBlocks(const Graph& x, const Graph& y, int i, int j, int n) {
    for (int k = x.lo(); k <= x.hi(); ++k) {
        const ChainComplex* a = x.ptr(i, k);
        const ChainComplex* b = y.ptr(k, j);
        if (!a || !b) continue;
        TensorBlocks tb(a->dims, b->dims, n);
        if (tb.total == 0) continue;
        int off = total;
        total += tb.total;
        blocks.push_back({k, off, std::move(tb)});
    }
}

const CircBlocks::Block* CircBlocks::block(int k) const {
    for (const auto& b : blocks)
        if (b.k == k) return &b;
    return nullptr;
}

int CircBlocks::index(int k, int left_deg, int left_idx, int right_idx) const {
    const Block* b = block(k);
    if (!b) throw std::out_of_range("CircBlocks: no block at that middle object");
    return b->offset + b->tb.index(left_deg, left_idx, right_idx);
}

Graph circ(const Graph& x, const Graph& y) {
    Graph g(x.field(), x.lo(), x.hi());
    for (int i = x.lo(); i <= x.hi(); ++i)
        for (int j = x.lo(); j <= x.hi(); ++j) {
            ChainComplex acc;
            acc.field = x.field();
            bool any = false;
            for (int k = x.lo(); k <= x.hi(); ++k) {
                const ChainComplex* a = x.ptr(i, k);
                const ChainComplex* b = y.ptr(k, j);
                if (!a || !b) continue;
                ChainComplex t = tensor(*a, *b);
                acc = any ? direct_sum(acc, t) : std::move(t);
                any = true;
            }
            if (any) g.set(i, j, std::move(acc));
        }
    return g;
}

HomGraphBlocks::HomGraphBlocks(const Graph& x, const Graph& y, int i, int j, int n, bool left) {
    for (int k = x.lo(); k <= x.hi(); ++k) {
        const ChainComplex* dom = left ? x.ptr(k, i) : x.ptr(j, k);
        const ChainComplex* cod = left ? y.ptr(k, j) : y.ptr(i, k);
        if (!dom || !cod) continue;
        HomBlocks hb(dom->dims, cod->dims, n);
        if (hb.total == 0) continue;
        int off = total;
        total += hb.total;
        blocks.push_back({k, off, std::move(hb)});
    }
}

const HomGraphBlocks::Block* HomGraphBlocks::block(int k) const {
    for (const auto& b : blocks)
        if (b.k == k) return &b;
    return nullptr;
}

int HomGraphBlocks::index(int k, int dom_deg, int cod_idx, int dom_idx) const {
    const Block* b = block(k);
    if (!b) throw std::out_of_range("HomGraphBlocks: no block at that middle object");
    return b->offset + b->hb.index(dom_deg, cod_idx, dom_idx);
}

static Graph hom_graph(const Graph& x, const Graph& y, bool left) {
    Graph g(x.field(), x.lo(), x.hi());
    for (int i = x.lo(); i <= x.hi(); ++i)
        for (int j = x.lo(); j <= x.hi(); ++j) {
            ChainComplex acc;
            acc.field = x.field();
            bool any = false;
            for (int k = x.lo(); k <= x.hi(); ++k) {
                const ChainComplex* dom = left ? x.ptr(k, i) : x.ptr(j, k);
                const ChainComplex* cod = left ? y.ptr(k, j) : y.ptr(i, k);
                if (!dom || !cod) continue;
                ChainComplex h = hom_cx(*dom, *cod);
                if (h.dims.empty()) continue;
                acc = any ? direct_sum(acc, h) : std::move(h);
                any = true;
            }
            if (any) g.set(i, j, std::move(acc));
        }
    return g;
}

Graph hom_right(const Graph& x, const Graph& y) { return hom_graph(x, y, false); }
Graph hom_left(const Graph& x, const Graph& y) { return hom_graph(x, y, true); }

const ChainMap* GraphMap::find(int i, int j) const {
    auto it = comp.find({i, j});
    return it == comp.end() ? nullptr : &it->second;
}

SparseMatrix GraphMap::at(const Graph& x, const Graph& y, int i, int j, int n) const {
    const ChainMap* f = find(i, j);
    if (f) return f->at(x.field(), x.at(i, j), y.at(i, j), n);
    return SparseMatrix::zero(x.field(), y.at(i, j).dim(n + degree), x.at(i, j).dim(n));
}

GraphMap identity_graph_map(const Graph& x) {
    GraphMap f;
    for (const auto& [ij, c] : x.components()) f.comp[ij] = identity_map(c);
    return f;
}

void validate_graph_map(const GraphMap& f, const Graph& x, const Graph& y) {
    for (const auto& [ij, fm] : f.comp) {
        ChainMap shifted = fm;
        shifted.degree = f.degree;
        validate_chain_map(shifted, x.at(ij.first, ij.second), y.at(ij.first, ij.second));
    }
}

GraphMap compose(const GraphMap& g, const GraphMap& f, const Graph& x, const Graph& mid,
                 const Graph& y) {
    GraphMap h;
    h.degree = f.degree + g.degree;
    for (const auto& [ij, fm] : f.comp) {
        const ChainMap* gm = g.find(ij.first, ij.second);
        if (!gm) continue;
        ChainMap c = compose(*gm, fm, x.at(ij.first, ij.second), mid.at(ij.first, ij.second),
                             y.at(ij.first, ij.second));
        if (!c.mats.empty()) h.comp[ij] = std::move(c);
    }
    return h;
}

bool is_graph_iso(const GraphMap& f, const Graph& x, const Graph& y) {
    if (f.degree != 0) return false;
    for (int i = x.lo(); i <= x.hi(); ++i)
        for (int j = x.lo(); j <= x.hi(); ++j) {
            const ChainComplex &cx = x.at(i, j), &cy = y.at(i, j);
            int lo = std::min(cx.min_degree(), cy.min_degree());
            int hi = std::max(cx.max_degree(), cy.max_degree());
            for (int n = lo; n <= hi; ++n) {
                if (cx.dim(n) != cy.dim(n)) return false;
                if (cx.dim(n) > 0 && rank(f.at(x, y, i, j, n)) != cx.dim(n)) return false;
            }
        }
    return true;
}

GraphMap associator(const Graph& x, const Graph& y, const Graph& z) {
    Graph xy = circ(x, y), yz = circ(y, z);
    Graph src = circ(xy, z), dst = circ(x, yz);
    GraphMap f;
    Scalar one = Scalar::one(x.field());
    for (const auto& [ij, c] : src.components()) {
        auto [i, j] = ij;
        ChainMap cm;
        for (const auto& [n, dim] : c.dims) {
            CircBlocks sb(xy, z, i, j, n), db(x, yz, i, j, n);
            SparseMatrix m(x.field(), db.total, sb.total);
            for (const auto& outer : sb.blocks) {
                int k2 = outer.k;  // ((x o y)(i,k2)) (x) z(k2,j)
                for (const auto& tb : outer.tb.blocks) {
                    int ab = tb.left_deg, cdeg = n - ab;
                    // decompose the left index through (x o y)(i,k2) in degree ab
                    CircBlocks inner(x, y, i, k2, ab);
                    for (const auto& ib : inner.blocks) {
                        int k1 = ib.k;
                        for (const auto& itb : ib.tb.blocks) {
                            int a = itb.left_deg, b = ab - a;
                            for (int ia = 0; ia < itb.left_dim; ++ia)
                                for (int ibx = 0; ibx < itb.right_dim; ++ibx)
                                    for (int ic = 0; ic < tb.right_dim; ++ic) {
                                        int li = ib.offset + itb.offset + ia * itb.right_dim + ibx;
                                        int src_idx = outer.offset + outer.tb.index(ab, li, ic);
                                        // target: x(i,k1)_a (x) [(y o z)(k1,j)]_{b+cdeg}
                                        CircBlocks rb(y, z, k1, j, b + cdeg);
                                        int ri = rb.index(k2, b, ibx, ic);
                                        int dst_idx = db.index(k1, a, ia, ri);
                                        m.add_entry(dst_idx, src_idx, one);
                                    }
                        }
                    }
                }
            }
            m.finalize();
            if (!m.is_zero()) cm.mats[n] = std::move(m);
        }
        if (!cm.mats.empty()) f.comp[ij] = std::move(cm);
    }
    return f;
}

}  // namespace koszul
