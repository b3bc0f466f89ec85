#pragma once

#include <functional>
#include <vector>

#include "koszul/graph.hpp"

namespace koszul {

/// Basis label inside a word space: a path through the object window,
/// one homological degree per factor, and one basis index per factor.
struct WordBasisElt {
    std::vector<int> path;  // k_0 .. k_m, endpoints included
    std::vector<int> degs;  // a_1 .. a_m
    std::vector<int> idxs;  // basis index in factor_t(k_{t-1}, k_t) in degree a_t
};

bool word_elt_less(const WordBasisElt& a, const WordBasisElt& b);

/// Ordered basis of (X_1 o X_2 o ... o X_m)(i,j) in one total degree:
/// paths ascending, then degree tuples by left-nested prefix-sum key,
/// then indices left-to-right. The plain (un-quotiented) word of graphs.
class WordSpace {
public:
    WordSpace(std::vector<const Graph*> factors, int i, int j, int n);

    int dim() const { return static_cast<int>(elts_.size()); }
    const WordBasisElt& operator[](int t) const { return elts_[t]; }
    int find(const WordBasisElt& e) const;  // -1 when absent
    int source() const { return i_; }
    int target() const { return j_; }
    int degree() const { return n_; }
    const std::vector<const Graph*>& factors() const { return factors_; }

private:
    std::vector<const Graph*> factors_;
    int i_, j_, n_;
    std::vector<WordBasisElt> elts_;
};

/// All degrees of a word at fixed endpoints, with the total differential
/// d = sum_t (+-) id (x) .. (x) d_t (x) .. (x) id. Lives as a ChainComplex
/// whose degree-n basis is WordSpace(factors, i, j, n).
struct WordComplex {
    std::vector<WordSpace> spaces;  // one per degree in [min_deg, max_deg]
    int min_deg = 0;
    ChainComplex cx;

    const WordSpace& space(int n) const;
};

WordComplex word_complex(std::vector<const Graph*> factors, int i, int j);

/// Degree-0 merge data: for each composable triple (p,q,r) a chain map
/// tensor(X(p,q), Y(q,r)) -> Z(p,r), keyed by total degree inside the
/// ChainMap. Null means the component is zero.
using MergeFn = std::function<const ChainMap*(int p, int q, int r)>;
/// Degree-0 edgewise map data: X(p,q) -> Y(p,q) per pair.
using ApplyFn = std::function<const ChainMap*(int p, int q)>;

/// Merges factors slot and slot+1 (0-based) through mu; src/dst must share
/// endpoints and degree, dst has one factor fewer. Degree-0 merge, no signs.
SparseMatrix slot_merge(const WordSpace& src, const WordSpace& dst, int slot, const MergeFn& mu);

/// Applies an edgewise degree-0 map in one slot.
SparseMatrix slot_apply(const WordSpace& src, const WordSpace& dst, int slot, const ApplyFn& f);

/// Internal differential matrix from degree n to n-1 of the same word.
SparseMatrix word_differential(const WordSpace& src, const WordSpace& dst);

/// Degree-0 expansion data: for (p,q,deg) a matrix from A(p,q)_deg into
/// WordSpace(sub_factors, p, q, deg). Null means zero.
using ExpandFn = std::function<const SparseMatrix*(int p, int q, int deg)>;
/// Degree-0 contraction data: matrix from WordSpace(sub_factors, p, q, deg)
/// to A(p,q)_deg.
using ContractFn = std::function<const SparseMatrix*(int p, int q, int deg)>;

/// Replaces the single factor at `slot` by the factors `sub` through fn;
/// dst factors = src factors with that splice performed. Degree 0, no signs.
SparseMatrix slot_expand(const WordSpace& src, const WordSpace& dst, int slot,
                         const std::vector<const Graph*>& sub, const ExpandFn& fn);

/// Collapses `sub.size()` consecutive factors starting at `slot` into the
/// single dst factor there, through fn. Degree 0, no signs.
SparseMatrix slot_contract(const WordSpace& src, const WordSpace& dst, int slot,
                           const std::vector<const Graph*>& sub, const ContractFn& fn);

}  // namespace koszul
