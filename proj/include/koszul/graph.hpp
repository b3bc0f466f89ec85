#pragma once

#include <map>
#include <utility>

#include "koszul/chain.hpp"

namespace koszul {

/// Chain-complex valued graph on an integer object window [lo, hi]:
/// a complex X(i,j) for every ordered pair. Absent pairs are zero.
class Graph {
public:
    Graph() = default;
    Graph(Field f, int lo, int hi) : field_(f), lo_(lo), hi_(hi) { empty_.field = f; }

    Field field() const { return field_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }

    const ChainComplex& at(int i, int j) const;
    const ChainComplex* ptr(int i, int j) const;  // nullptr when zero
    void set(int i, int j, ChainComplex c);
    const std::map<std::pair<int, int>, ChainComplex>& components() const { return comp_; }

    int total_dim() const;
    bool is_zero() const { return comp_.empty(); }
    /// True when X(i,j) = 0 for i > j (all arrows point up the window).
    bool is_directed() const;
    /// True when additionally the diagonal complexes sit in degree 0.
    bool is_strictly_directed() const;

private:
    Field field_ = Field::rationals();
    int lo_ = 0, hi_ = -1;
    std::map<std::pair<int, int>, ChainComplex> comp_;
    ChainComplex empty_;
};

void validate(const Graph& g);

/// The monoidal unit: the ground field in degree 0 on each diagonal entry.
Graph unit_graph(Field f, int lo, int hi);
/// X^op(i,j) = X(j,i).
Graph opposite(const Graph& x);

/// (X o Y)(i,j) = sum_k X(i,k) (x) Y(k,j), summands ordered by k ascending.
Graph circ(const Graph& x, const Graph& y);

/// Block bookkeeping for circ components: for fixed (i,j,n), blocks run over
/// the middle object k ascending, each a TensorBlocks of the two factors.
struct CircBlocks {
    struct Block {
        int k, offset;
        TensorBlocks tb;
    };
    std::vector<Block> blocks;
    int total = 0;

    CircBlocks() = default;
    CircBlocks(const Graph& x, const Graph& y, int i, int j, int n);
    const Block* block(int k) const;
    int index(int k, int left_deg, int left_idx, int right_idx) const;
};

/// hom^r(X,Y)(i,j) = sum_k hom_cx(X(j,k), Y(i,k)); right adjoint to - o X.
Graph hom_right(const Graph& x, const Graph& y);
/// hom^l(X,Y)(i,j) = sum_k hom_cx(X(k,i), Y(k,j)); right adjoint to X o -.
Graph hom_left(const Graph& x, const Graph& y);

struct HomGraphBlocks {
    struct Block {
        int k, offset;
        HomBlocks hb;
    };
    std::vector<Block> blocks;
    int total = 0;

    HomGraphBlocks() = default;
    /// right variant: blocks hom(X(j,k), Y(i,k)); left variant: hom(X(k,i), Y(k,j))
    HomGraphBlocks(const Graph& x, const Graph& y, int i, int j, int n, bool left);
    const Block* block(int k) const;
    int index(int k, int dom_deg, int cod_idx, int dom_idx) const;
};

/// Componentwise collection of chain maps X(i,j) -> Y(i,j), degree shift allowed.
struct GraphMap {
    int degree = 0;
    std::map<std::pair<int, int>, ChainMap> comp;

    ChainMap& operator[](std::pair<int, int> ij) { return comp[ij]; }
    const ChainMap* find(int i, int j) const;
    SparseMatrix at(const Graph& x, const Graph& y, int i, int j, int n) const;
};

GraphMap identity_graph_map(const Graph& x);
void validate_graph_map(const GraphMap& f, const Graph& x, const Graph& y);
GraphMap compose(const GraphMap& g, const GraphMap& f, const Graph& x, const Graph& mid,
                 const Graph& y);
bool is_graph_iso(const GraphMap& f, const Graph& x, const Graph& y);

/// The canonical iso (X o Y) o Z -> X o (Y o Z): a basis permutation
/// (re-grouping of direct summands and tensor factors, no Koszul signs).
GraphMap associator(const Graph& x, const Graph& y, const Graph& z);

}  // namespace koszul
