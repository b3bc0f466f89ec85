#pragma once

#include "koszul/algebra.hpp"

namespace koszul {

using Triple = std::tuple<int, int, int>;

/// Input data of a two-sided bar construction B(M, C, N): an augmented
/// category C with split base R, a right C-module M and a left C-module N.
struct BarInput {
    DgCategory C;
    Augmentation aug;
    Graph M;
    std::map<Triple, ChainMap> ractM;  // M(p,q) (x) C(q,r) -> M(p,r)
    Graph N;
    std::map<Triple, ChainMap> lactN;  // C(p,q) (x) N(q,r) -> N(p,r)
};

/// M = N = R, acting through the augmentation.
BarInput bar_rcr(const DgCategory& c, const Augmentation& aug);
/// M = R, N = C with the regular action.
BarInput bar_rcc(const DgCategory& c, const Augmentation& aug);

/// One normalized simplicial level M o_R Cbar^{o_R l} o_R N, presented as a
/// quotient of the plain word space [M, Cbar x l, N] with stored projection
/// and section per pair and internal degree.
struct BarLevel {
    Graph cx;
    std::map<std::pair<int, int>, std::map<int, SparseMatrix>> proj, section;

    SparseMatrix proj_at(int i, int j, int n, int word_dim) const;
    SparseMatrix section_at(int i, int j, int n, int word_dim) const;
};

struct BarObject {
    Field field = Field::rationals();
    BarInput in;
    bool normalized = true;
    ReducedPart red;  // unused when not normalized
    int lmax = 0;
    std::vector<BarLevel> levels;          // 0..lmax
    std::vector<std::vector<GraphMap>> faces;  // faces[l][t]: level l -> l-1, t = 0..l
    /// Total complex: degree n block l is level l in internal degree n - l,
    /// blocks ordered by l ascending; differential is
    /// sum_t (-1)^t d_t + (-1)^l d_internal.
    Graph total;

    std::vector<const Graph*> level_factors(int l) const;
    int level_offset(int i, int j, int n, int l) const;  // block offset inside total
};

/// trunc < 0: use the window-span bound (requires strictly directed Cbar).
/// normalized = false keeps the full C in the middle slots (no reduction by
/// the augmentation); a truncation is then mandatory.
BarObject bar(BarInput in, int trunc = -1, bool normalized = true);

/// The collapse map total -> R (defined when M = R): kills levels >= 1 and
/// augments the level-0 part. A map of complexes per pair.
GraphMap bar_collapse(const BarObject& b);

/// Checks that the collapse map is a quasi-iso for every pair; failing pairs
/// are appended to *fails when given.
bool augmentation_qiso_check(const BarObject& b, std::vector<std::pair<int, int>>* fails = nullptr);

/// Right action of D on the total complex through a right D-action on N
/// (levelwise, on the last word slot): total(i,k) (x) D(k,j) -> total(i,j).
std::map<Triple, ChainMap> bar_right_action(const BarObject& b, const Graph& d,
                                            const std::map<Triple, ChainMap>& ract_n);

struct KoszulDual {
    BarObject resolution;                 // B(R, C, C)
    std::map<Triple, ChainMap> braction;  // right C-action on the resolution
    HomOver carrier;                      // C-linear endomorphisms of the resolution
    DgCategory K;                         // carrier with composition product
};

KoszulDual koszul_dual(const DgCategory& c, const Augmentation& aug);

struct DualBarModel {
    BarObject resolution;  // B(R, C, R)
    HomOver carrier;       // hom_R(B(R,C,R), R)
};

DualBarModel dual_bar_model(const DgCategory& c, const Augmentation& aug);

struct PairVerdict {
    int i = 0, j = 0;
    bool ok = false;
};

struct CompareReport {
    bool ok = false;
    std::vector<PairVerdict> pairs;
    /// the comparison map per pair, in the carriers' subspace coordinates
    std::map<std::pair<int, int>, ChainMap> theta;
};

/// The map hom_C(B,B) -> hom_R(B(R,C,R), R), f -> collapse o f o lift,
/// checked to be a quasi-iso pair by pair.
CompareReport compare_models(const KoszulDual& kd, const DualBarModel& dm);

/// B(R,C,C) o_C R = B(R,C,R), as an explicit bit-exact chain isomorphism.
struct BarLemmaReport {
    bool ok = false;
    std::vector<PairVerdict> pairs;
};

BarLemmaReport bar_lemma_check(const DgCategory& c, const Augmentation& aug);

struct DoubleDual {
    KoszulDual kd;
    /// hom over left K of the truncated bar resolution B(K, K, B) of the
    /// resolution B = B(R,C,C), per truncation level requested
    Graph carrier;                                   // at truncation `trunc`
    Graph carrier_prev;                              // at truncation `trunc - 1`
    GraphMap nu;                                     // C -> carrier
    bool stabilized = false;                         // homology tables agree
    /// inspected degrees where H(carrier) and H(carrier_prev) still disagree,
    /// keyed by pair; empty everywhere iff `stabilized`
    std::map<std::pair<int, int>, std::vector<int>> unstable;
    std::vector<PairVerdict> nu_verdicts;            // H(nu) iso per pair
    bool nu_iso = false;
};

DoubleDual double_dual(const DgCategory& c, const Augmentation& aug, int trunc);

}  // namespace koszul
