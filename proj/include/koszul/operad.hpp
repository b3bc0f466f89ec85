#pragma once

#include <random>

#include "koszul/bar.hpp"

namespace koszul {

// ---------------------------------------------------------------------------
// permutations, one-line images on {0..n-1}

using Perm = std::vector<int>;

std::vector<Perm> all_perms(int n);  // lexicographic
int perm_index(const Perm& p);       // position in the lexicographic list
Perm perm_then(const Perm& s, const Perm& t);  // x -> t[s[x]] ("s, then t")
Perm perm_inverse(const Perm& p);
int perm_sign(const Perm& p);
/// p = s_{i1} then s_{i2} then ... as adjacent transpositions (bubble sort).
std::vector<int> adjacent_factorization(const Perm& p);

/// Group algebras k[Sigma_n] on the diagonal of the object window; basis the
/// permutations in lexicographic order, mult(e_f (x) e_g) = e_{f then g}.
DgCategory k_sigma(Field f, int lo, int hi);

/// Ordered basis of X_1 (x) ... (x) X_r in one total degree, matching the
/// word-space order: degree tuples by prefix-sum key, then indices
/// left-to-right.
struct TensorWord {
    std::vector<const ChainComplex*> factors;
    int degree = 0;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> elts;  // (degs, idxs)

    TensorWord() = default;
    TensorWord(std::vector<const ChainComplex*> fs, int n);
    int dim() const { return static_cast<int>(elts.size()); }
    int find(const std::vector<int>& degs, const std::vector<int>& idxs) const;
};

/// All degrees at once, with the total differential.
ChainComplex tensor_word_complex(const std::vector<const ChainComplex*>& fs);

/// Factor permutation with Koszul signs: source position s lands in target
/// position pi[s]; target factor list is the induced reordering.
SparseMatrix tensor_word_permute(Field f, const std::vector<const ChainComplex*>& src_factors,
                                 const Perm& pi, int degree);

// ---------------------------------------------------------------------------
// symmetric sequences

/// Arity-indexed complexes with Sigma_n-actions stored as the matrices of the
/// adjacent transpositions s_0 .. s_{n-2}. rho(p then q) = rho(p) rho(q).
struct SymSeq {
    Field field = Field::rationals();
    int cap = 0;
    std::map<int, ChainComplex> arities;        // 0 <= n <= cap, nonzero only
    std::map<int, std::vector<ChainMap>> gens;  // n -> [s_0 .. s_{n-2}]

    const ChainComplex* at(int n) const;
    ChainMap action(int n, const Perm& p) const;
    bool reduced() const;  // X(0) = 0 and X(1) = k in degree 0
};

/// Generators are chain maps and satisfy the Coxeter relations of Sigma_n.
void validate_symseq(const SymSeq& x);

SymSeq unit_symseq(Field f, int cap);
/// Levelwise dual: arities dualized, generator matrices transposed.
SymSeq dual_symseq(const SymSeq& x);
/// Seeded generator for the randomized suites: permutation/trivial/sign
/// blocks in small degrees, occasionally joined by an equivariant cone.
SymSeq random_symseq(Field f, int cap, std::mt19937& rng);

// functions {0..m-1} -> {0..n-1} as image vectors, lexicographic
std::vector<std::vector<int>> all_functions(int m, int n);
std::vector<std::vector<int>> surjections(int m, int n);
std::vector<int> fiber_sizes(const std::vector<int>& f, int n);

// ---------------------------------------------------------------------------
// the prop functor

/// prop X(m,n) = (+)_f X(|f^-1(0)|) (x) ... (x) X(|f^-1(n-1)|), summands in
/// lexicographic f order (surjections when X(0) = 0, all functions
/// otherwise), inner blocks in TensorWord order.
struct Prop {
    SymSeq x;
    Graph cx;  // objects 0..cap
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> fs;

    /// offset of summand `fidx` inside prop X(m,n) in one degree
    int block_offset(int m, int n, int fidx, int deg) const;
    std::vector<const ChainComplex*> summand_factors(int m, int n, int fidx) const;
    /// e_g . - : relabels each summand index to (f then g^-1 ... ) by
    /// precomposition; inner sorting permutations act through X
    ChainMap left_action(int m, int n, const Perm& g) const;
    /// - . e_h : post-composition; permutes the tensor blocks with Koszul signs
    ChainMap right_action(int m, int n, const Perm& h) const;
    /// the two actions as a kSigma-bimodule
    Bimodule bimodule() const;
};

Prop prop_of(const SymSeq& x);

// ---------------------------------------------------------------------------
// composition products

/// A coinvariant composition product together with its presentation: the
/// (k, f) summand list, the ambient direct sum of tensor words (with the
/// middle factor N(k) in the last slot), and the diagonal quotient per
/// degree. Arities without summands are absent.
struct CoinvProduct {
    struct Summand {
        int k;
        std::vector<int> f;
    };
    struct Arity {
        std::vector<Summand> sums;
        ChainComplex ambient;
        std::map<int, std::vector<int>> offs;  // degree -> per-summand offsets
        std::map<int, QuotientMaps> q;
    };
    SymSeq seq;
    std::map<int, Arity> arity;

    int find_summand(int i, int k, const std::vector<int>& f) const;
};

/// (M o_S N)(i) = (+)_k ((+)_{f: i->k} M(i_1)(x)...(x)M(i_k)) (x)_{Sigma_k} N(k),
/// coinvariants as an explicit quotient. Requires char 0 or p > cap.
CoinvProduct circ_sigma_full(const SymSeq& m, const SymSeq& n);
SymSeq circ_sigma(const SymSeq& m, const SymSeq& n);

/// (M obar N)(i) = (+)_k (+)_{f: k->i} M(k_1)(x)...(x)M(k_i) (x)_{Sigma_k} N(k).
CoinvProduct bar_circ_full(const SymSeq& m, const SymSeq& n);
SymSeq bar_circ(const SymSeq& m, const SymSeq& n);

/// The explicit iso prop(M) o_S prop(N) = prop(M o_S N), regrouping a pair
/// (g: i->k, f: k->j) slotwise along h = f o g, with full verification:
/// constancy on coinvariant classes, invertibility, chain-map identity, and
/// equivariance for both residual actions.
struct PropMonoidalReport {
    bool ok = false;
    std::vector<std::string> failures;
    /// per (i,j): matrices (prop M o prop N)(i,j) -> prop(M o_S N)(i,j) by degree
    std::map<std::pair<int, int>, std::map<int, SparseMatrix>> iso;
};

PropMonoidalReport prop_monoidal_iso(const SymSeq& m, const SymSeq& n);

/// The natural comparison prop(X obar Y) -> prop(X)^op o_S prop(Y), sending a
/// class over h: i -> j with per-fiber data (u_t: k_t -> h^-1(t), x-factors, y_t)
/// to the class of the pair (G: K -> i, F: K -> j) assembled from the blocks
/// K = k_1 + ... + k_j. Verified as an equivariant chain monomorphism; its
/// image is the span of classes of pairs (g, f) where f factors through g, a
/// proper summand in general, so no inverse is produced.
PropMonoidalReport prop_bar_compat(const SymSeq& x, const SymSeq& y);

// ---------------------------------------------------------------------------
// operads

/// Reduced operad with total composition tables gamma[{k, n_1..n_k}]:
/// P(k) (x) P(n_1) (x) ... (x) P(n_k) -> P(n_1+...+n_k), TensorWord layout on
/// the source. Tables may omit zero components.
struct Operad {
    SymSeq p;
    std::map<std::vector<int>, ChainMap> gamma;

    const ChainMap* gamma_at(const std::vector<int>& key) const;
};

/// prop P as an augmented kSigma-algebra; the operad axioms are exactly the
/// category axioms of the prop, which validate_prop_algebra checks.
struct PropAlgebra {
    Prop prop;
    DgCategory cat;
    Augmentation aug;
};

PropAlgebra prop_algebra(const Operad& p);
void validate_prop_algebra(const PropAlgebra& pa);

Operad operad_unit(Field f, int cap);
/// One binary generator with trivial Sigma_2-action and all higher
/// compositions truncated to zero.
Operad operad_binary(Field f, int cap);

// ---------------------------------------------------------------------------
// the operadic bar and the duality check

/// BP(n) = B(kSigma, prop P, kSigma)(n,1) with the Sigma_n-action on the
/// leading bar slot; the categorical bar is the only simplicial machinery.
struct OperadBar {
    PropAlgebra pa;
    BarObject bo;  // B(R, prop P, R)
    SymSeq bp;
};

OperadBar operad_bar(const Operad& p);

/// The dual-comparison map prop(M-dual)^op -> hom_Sigma(prop M, kSigma),
/// with a pairwise quasi-iso verdict.
struct PropDualReport {
    HomOver target;
    Graph source;  // prop(dual M), read at (j,i)
    std::map<std::pair<int, int>, ChainMap> map;  // keyed by target pair (i,j)
    bool ok = false;
    std::vector<PairVerdict> pairs;
};

PropDualReport prop_dual_map(const SymSeq& m);

/// Graded homology tables of K(prop P) against prop(dual BP)^op for source
/// arity <= mmax, plus sampled multiplicativity of the comparison map
/// K -> hom_R(B(R,C,R),R) against the deconcatenation convolution product.
struct OperadKoszulReport {
    bool dims_ok = false;
    bool mult_ok = false;
    int mult_pairs = 0;  // composable representative pairs actually sampled
    bool ok = false;
    /// (m,n) -> degree -> (dim H K(prop P)(m,n), dim H prop(dual BP)(n,m))
    std::map<std::pair<int, int>, std::map<int, std::pair<int, int>>> table;
    std::vector<std::string> failures;
};

OperadKoszulReport operad_koszul_check(const Operad& p, int mmax);

}  // namespace koszul
