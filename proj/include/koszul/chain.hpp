#pragma once

#include <map>
#include <vector>

#include "koszul/sparse.hpp"

namespace koszul {

/// Bounded chain complex of finite-dimensional vector spaces. Only nonzero
/// degrees are stored; d_n maps degree n to degree n-1 and d*d = 0.
struct ChainComplex {
    Field field = Field::rationals();
    std::map<int, int> dims;          // degree -> dimension, entries > 0 only
    std::map<int, SparseMatrix> d;    // degree -> differential out of that degree

    int dim(int n) const {
        auto it = dims.find(n);
        return it == dims.end() ? 0 : it->second;
    }
    SparseMatrix diff(int n) const {
        auto it = d.find(n);
        return it == d.end() ? SparseMatrix::zero(field, dim(n - 1), dim(n)) : it->second;
    }
    int min_degree() const { return dims.empty() ? 0 : dims.begin()->first; }
    int max_degree() const { return dims.empty() ? 0 : dims.rbegin()->first; }
    int total_dim() const;
    bool is_zero() const { return dims.empty(); }

    void set_dim(int n, int dimension);  // drops zero dims
    void set_diff(int n, SparseMatrix m);
    void prune();  // drop zero differentials and zero dims

    /// The ground field concentrated in degree 0.
    static ChainComplex unit(Field f);
};

/// Throws std::invalid_argument with a description if shapes are off or d*d != 0.
void validate(const ChainComplex& c);

/// Degree-preserving (after shifting by `degree`) collection of matrices:
/// mats[n] : C_n -> D_{n+degree}. Zero maps may be omitted.
struct ChainMap {
    int degree = 0;
    std::map<int, SparseMatrix> mats;

    SparseMatrix at(Field f, const ChainComplex& C, const ChainComplex& D, int n) const;
};

ChainMap identity_map(const ChainComplex& c);
/// Validates shapes and the chain map equation d_D f = (-1)^{deg f} f d_C.
void validate_chain_map(const ChainMap& f, const ChainComplex& C, const ChainComplex& D);
ChainMap compose(const ChainMap& g, const ChainMap& f, const ChainComplex& C,
                 const ChainComplex& Mid, const ChainComplex& D);

struct Homology {
    std::map<int, int> dims;
    std::map<int, SparseMatrix> reps;  // columns are cycles spanning H_n
};

Homology homology(const ChainComplex& c);
std::map<int, int> homology_dims(const ChainComplex& c);

/// Index bookkeeping for a two-factor graded tensor in a fixed total degree.
/// Blocks are ordered by left degree ascending; inside a block the left index
/// is the outer (slower) one.
struct TensorBlocks {
    struct Block {
        int left_deg, left_dim, right_dim, offset;
    };
    std::vector<Block> blocks;
    int total = 0;

    TensorBlocks() = default;
    TensorBlocks(const std::map<int, int>& left_dims, const std::map<int, int>& right_dims, int n);
    int index(int left_deg, int left_idx, int right_idx) const;
    const Block* block(int left_deg) const;
};

/// (C (x) D)_n = sum_{a+b=n} C_a (x) D_b with d(x(x)y) = dx(x)y + (-1)^|x| x(x)dy.
ChainComplex tensor(const ChainComplex& C, const ChainComplex& D);

/// hom(C,D)_n = prod_a Hom(C_a, D_{a+n}); basis in degree n runs over blocks
/// a ascending, inside a block index = i*dim(C_a) + j for the map x_j -> y_i.
/// (df)_a = d_D f_a - (-1)^n f_{a-1} d_C.
ChainComplex hom_cx(const ChainComplex& C, const ChainComplex& D);

struct HomBlocks {
    struct Block {
        int dom_deg, dom_dim, cod_dim, offset;  // Hom(C_{dom_deg}, D_{dom_deg+n})
    };
    std::vector<Block> blocks;
    int total = 0;

    HomBlocks() = default;
    HomBlocks(const std::map<int, int>& dom_dims, const std::map<int, int>& cod_dims, int n);
    int index(int dom_deg, int cod_idx, int dom_idx) const;
    const Block* block(int dom_deg) const;
};

ChainComplex dual(const ChainComplex& c);           // hom_cx(c, unit)
ChainComplex shift(const ChainComplex& c, int k);   // shift(c,k)_n = c_{n-k}, d -> (-1)^k d
ChainComplex direct_sum(const ChainComplex& C, const ChainComplex& D);

/// The symmetry C(x)D -> D(x)C, x(x)y -> (-1)^{|x||y|} y(x)x.
ChainMap tensor_swap_iso(const ChainComplex& C, const ChainComplex& D);

/// f (x) g : C (x) E -> D (x) F, (f(x)g)(x(x)y) = (-1)^{|g||x|} f(x) (x) g(y).
ChainMap tensor_map(const ChainMap& f, const ChainComplex& C, const ChainComplex& D,
                    const ChainMap& g, const ChainComplex& E, const ChainComplex& F);

/// Rank of H_n(f) for each n where either side has homology.
std::map<int, int> homology_map_rank(const ChainMap& f, const ChainComplex& C,
                                     const ChainComplex& D);

/// True iff the mapping cone of f is acyclic.
bool is_quasi_iso(const ChainMap& f, const ChainComplex& C, const ChainComplex& D);

}  // namespace koszul
