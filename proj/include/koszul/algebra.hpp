#pragma once

#include <tuple>

#include "koszul/word.hpp"

namespace koszul {

/// Category enriched in chain complexes on the object window: an underlying
/// graph, composition maps mult(p,q,r): C(p,q) (x) C(q,r) -> C(p,r), and a
/// unit element in C(i,i)_0 for each object (stored as a column vector).
struct DgCategory {
    Graph cx;
    std::map<std::tuple<int, int, int>, ChainMap> mult;
    std::map<int, SparseMatrix> unit;  // dim C(i,i)_0 x 1

    const ChainMap* mult_at(int p, int q, int r) const;
    MergeFn mult_fn() const;
    SparseVec unit_vec(int i) const;
};

/// Checks composition is a chain map, associativity, and both unit laws.
void validate_category(const DgCategory& c);

/// The ground field on each diagonal entry; composition is scalar product.
DgCategory unit_category(Field f, int lo, int hi);

/// A (left A, right B)-bimodule: actions lact(p,q,r): A(p,q) (x) M(q,r) -> M(p,r)
/// and ract(p,q,r): M(p,q) (x) B(q,r) -> M(p,r).
struct Bimodule {
    Graph cx;
    std::map<std::tuple<int, int, int>, ChainMap> lact, ract;

    const ChainMap* lact_at(int p, int q, int r) const;
    const ChainMap* ract_at(int p, int q, int r) const;
    MergeFn lact_fn() const;
    MergeFn ract_fn() const;
};

void validate_bimodule(const Bimodule& m, const DgCategory& a, const DgCategory& b);

/// C as a bimodule over itself.
Bimodule regular_bimodule(const DgCategory& c);

/// A split diagonal subcategory R of C: incl: R -> C and aug: C -> R are
/// maps of categories with aug o incl = id.
struct Augmentation {
    DgCategory base;  // diagonal
    GraphMap incl;
    GraphMap aug;
};

void validate_augmentation(const DgCategory& c, const Augmentation& a);

/// The reduced part ker(aug), split out of C by id - incl o aug.
struct ReducedPart {
    Graph cx;
    GraphMap incl;  // into C
    GraphMap proj;  // from C, proj o incl = id
};

ReducedPart reduced_part(const DgCategory& c, const Augmentation& a);

/// X o_R Y: the coequalizer of the two R-actions inside X o Y, presented
/// degreewise as a quotient of the two-factor word space with stored
/// projection and section matrices (proj o section = id).
struct CircOver {
    Graph cx;
    std::map<std::pair<int, int>, std::map<int, SparseMatrix>> proj, section;

    SparseMatrix proj_at(const Graph& x, const Graph& y, int i, int j, int n) const;
    SparseMatrix section_at(const Graph& x, const Graph& y, int i, int j, int n) const;
};

CircOver circ_over(const Graph& x, const Graph& y, const Graph& rgraph, const MergeFn& ract_x,
                   const MergeFn& lact_y);

/// hom_C(X,Y) for right C-modules X, Y: the subcomplex of hom^r(X,Y) of
/// C-linear families, f(x.c) = f(x).c, with the inclusion stored degreewise.
struct HomOver {
    Graph ambient;  // hom_right(X, Y)
    Graph cx;
    std::map<std::pair<int, int>, std::map<int, SparseMatrix>> incl;

    SparseMatrix incl_at(int i, int j, int n) const;
};

HomOver hom_over_right(const Graph& x, const Graph& y, const DgCategory& c,
                       const MergeFn& ract_x, const MergeFn& ract_y);

/// Composition product on right-hom graphs:
/// hom^r(Y,Z)(i,k) (x) hom^r(X,Y)(k,j) -> hom^r(X,Z)(i,j), (g,f) -> g o f.
/// Composition of graded maps picks up no sign under our hom convention.
ChainMap hom_compose(const Graph& x, const Graph& y, const Graph& z, int i, int k, int j);

/// Square-zero extension R + M: mult is (r,m)(r',m') = (rr', r m' + m r'),
/// augmentation is the projection onto R. Basis order: R before M.
struct SquareZero {
    DgCategory cat;
    Augmentation aug;
    GraphMap include_m;  // M -> R + M
};

SquareZero square_zero(const DgCategory& r, const Bimodule& m);

/// Free R-algebra on an R-bimodule M, truncated at max_weight: the weight-w
/// component is M^{o_R w}, with sections into the plain word [M,...,M] and
/// concatenation product. weight[0] is R itself.
struct FreeAlgebra {
    DgCategory cat;                      // direct sum of the weight pieces
    std::vector<Graph> weight;           // weight components, 0..max_weight
    std::vector<std::map<std::pair<int, int>, std::map<int, SparseMatrix>>> sigma;  // to words
    std::vector<std::map<std::pair<int, int>, std::map<int, SparseMatrix>>> pi;     // from words

    int max_weight() const { return static_cast<int>(weight.size()) - 1; }
};

FreeAlgebra free_algebra(const DgCategory& r, const Bimodule& m, int max_weight);

/// The split projection onto the weight-0 part R of a free algebra.
Augmentation free_augmentation(const FreeAlgebra& fa, const DgCategory& r);

}  // namespace koszul
