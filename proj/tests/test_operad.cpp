#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "koszul/operad.hpp"

using namespace koszul;

static const Field Q = Field::rationals();

// arity 1 = k, arity 2 = regular representation of Sigma_2 in degree 0
static SymSeq regular2(int cap = 2) {
    SymSeq x;
    x.field = Q;
    x.cap = cap;
    x.arities[1] = ChainComplex::unit(Q);
    ChainComplex c2;
    c2.field = Q;
    c2.set_dim(0, 2);
    x.arities[2] = c2;
    SparseMatrix sw(Q, 2, 2);
    sw.add_entry(1, 0, Scalar(Q, 1));
    sw.add_entry(0, 1, Scalar(Q, 1));
    sw.finalize();
    ChainMap g;
    g.mats[0] = sw;
    x.gens[2] = {g};
    return x;
}

// one-dimensional arity 2 with trivial action; arity 1 = k
static SymSeq binary2(int cap = 4, int deg2 = 0) {
    SymSeq x;
    x.field = Q;
    x.cap = cap;
    x.arities[1] = ChainComplex::unit(Q);
    ChainComplex c2;
    c2.field = Q;
    c2.set_dim(deg2, 1);
    x.arities[2] = c2;
    ChainMap g;
    g.mats[deg2] = SparseMatrix::identity(Q, 1);
    x.gens[2] = {g};
    return x;
}

TEST_CASE("permutation utilities") {
    auto p3 = all_perms(3);
    CHECK(p3.size() == 6);
    CHECK(p3[0] == Perm{0, 1, 2});
    for (int i = 0; i < 6; ++i) CHECK(perm_index(p3[i]) == i);

    Perm s{1, 0, 2}, t{0, 2, 1};
    Perm st = perm_then(s, t);  // x -> t[s[x]]
    CHECK(st == Perm{2, 0, 1});
    CHECK(perm_then(s, perm_inverse(s)) == Perm{0, 1, 2});
    CHECK(perm_sign(s) == -1);
    CHECK(perm_sign(st) == 1);

    for (const auto& p : all_perms(4)) {
        Perm acc{0, 1, 2, 3};
        for (int j : adjacent_factorization(p)) {
            Perm sj{0, 1, 2, 3};
            std::swap(sj[j], sj[j + 1]);
            acc = perm_then(acc, sj);
        }
        CHECK(acc == p);
    }
}

TEST_CASE("group algebra categories") {
    DgCategory s3 = k_sigma(Q, 0, 3);
    validate_category(s3);
    CHECK(s3.cx.at(2, 2).dim(0) == 2);
    CHECK(s3.cx.at(3, 3).dim(0) == 6);
    CHECK(s3.cx.at(2, 3).is_zero());
}

TEST_CASE("tensor words") {
    ChainComplex a;
    a.field = Q;
    a.set_dim(0, 1);
    a.set_dim(1, 1);
    ChainComplex b = a;
    ChainComplex w = tensor_word_complex({&a, &b});
    CHECK(w.dim(0) == 1);
    CHECK(w.dim(1) == 2);
    CHECK(w.dim(2) == 1);
    validate(w);

    // swapping two odd factors carries the Koszul sign
    Perm sw{1, 0};
    SparseMatrix p2 = tensor_word_permute(Q, {&a, &b}, sw, 2);
    CHECK(p2.entries().size() == 1);
    CHECK(p2.entries()[0].val == Scalar(Q, -1));
    SparseMatrix p0 = tensor_word_permute(Q, {&a, &b}, sw, 0);
    CHECK(p0.entries()[0].val == Scalar(Q, 1));
}

TEST_CASE("symmetric sequences validate") {
    validate_symseq(unit_symseq(Q, 3));
    validate_symseq(regular2());
    validate_symseq(dual_symseq(regular2()));

    // permutation representation of Sigma_3 satisfies the braid relation
    std::mt19937 rng(7);
    for (int t = 0; t < 5; ++t) validate_symseq(random_symseq(Q, 3, rng));
}

TEST_CASE("prop of the unit is the base category") {
    Prop p = prop_of(unit_symseq(Q, 3));
    DgCategory s = k_sigma(Q, 0, 3);
    for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) {
            CHECK(p.cx.at(m, n).dims == s.cx.at(m, n).dims);
        }
    validate_bimodule(p.bimodule(), s, s);
}

TEST_CASE("prop dimensions and directedness") {
    SymSeq x = binary2(4);
    Prop p = prop_of(x);
    // the six surjections 4 -> 2 with both fibers of size two
    CHECK(p.cx.at(4, 2).dim(0) == 6);
    CHECK(p.cx.at(2, 4).is_zero());  // lower-directed
    CHECK(p.cx.at(3, 3).dim(0) == 6);
    CHECK(p.cx.at(4, 3).dim(0) == 36);  // all surjections 4 -> 3
    validate_bimodule(p.bimodule(), k_sigma(Q, 0, 4), k_sigma(Q, 0, 4));
}

TEST_CASE("prop actions satisfy the module axioms") {
    SymSeq x = regular2(3);
    Prop p = prop_of(x);
    DgCategory s = k_sigma(Q, 0, 3);
    validate_bimodule(p.bimodule(), s, s);

    // explicit axiom check with nontrivial inner actions: act(a then b) =
    // act(a) o act(b) on the left, = act(b) o act(a) on the right
    for (const auto& a : all_perms(3))
        for (const auto& b : all_perms(3)) {
            Perm ab = perm_then(a, b);
            SparseMatrix la = p.left_action(3, 2, a).mats.at(0);
            SparseMatrix lb = p.left_action(3, 2, b).mats.at(0);
            SparseMatrix lab = p.left_action(3, 2, ab).mats.at(0);
            CHECK((lab - la * lb).is_zero());
        }
    for (const auto& a : all_perms(2))
        for (const auto& b : all_perms(2)) {
            Perm ab = perm_then(a, b);
            SparseMatrix ra = p.right_action(3, 2, a).mats.at(0);
            SparseMatrix rb = p.right_action(3, 2, b).mats.at(0);
            SparseMatrix rab = p.right_action(3, 2, ab).mats.at(0);
            CHECK((rab - rb * ra).is_zero());
        }
    // a three-element fiber exercises non-involutive inner relabels
    SymSeq y;
    y.field = Q;
    y.cap = 3;
    y.arities[1] = ChainComplex::unit(Q);
    ChainComplex c3;
    c3.field = Q;
    c3.set_dim(0, 3);
    y.arities[3] = c3;
    std::vector<ChainMap> g3(2);
    for (int j = 0; j < 2; ++j) {
        SparseMatrix sw(Q, 3, 3);
        for (int u = 0; u < 3; ++u) {
            int v = u == j ? j + 1 : (u == j + 1 ? j : u);
            sw.add_entry(v, u, Scalar(Q, 1));
        }
        sw.finalize();
        g3[j].mats[0] = sw;
    }
    y.gens[3] = g3;
    validate_symseq(y);
    Prop py = prop_of(y);
    for (const auto& a : all_perms(3))
        for (const auto& b : all_perms(3)) {
            SparseMatrix la = py.left_action(3, 1, a).mats.at(0);
            SparseMatrix lb = py.left_action(3, 1, b).mats.at(0);
            SparseMatrix lab = py.left_action(3, 1, perm_then(a, b)).mats.at(0);
            CHECK((lab - la * lb).is_zero());
        }

    // the two actions commute
    Perm g{1, 0, 2}, h{1, 0};
    SparseMatrix lg = p.left_action(3, 2, g).mats.at(0);
    SparseMatrix rh = p.right_action(3, 2, h).mats.at(0);
    CHECK((lg * rh - rh * lg).is_zero());
}

TEST_CASE("composition product unit laws") {
    SymSeq one = unit_symseq(Q, 3);
    for (const SymSeq& x : {regular2(3), binary2(3)}) {
        SymSeq xu = circ_sigma(x, one);
        SymSeq ux = circ_sigma(one, x);
        for (int n = 0; n <= 3; ++n) {
            const ChainComplex* a = x.at(n);
            const ChainComplex* b = xu.at(n);
            const ChainComplex* c = ux.at(n);
            if (!a) {
                CHECK(b == nullptr);
                CHECK(c == nullptr);
            } else {
                REQUIRE(b != nullptr);
                REQUIRE(c != nullptr);
                CHECK(a->dims == b->dims);
                CHECK(a->dims == c->dims);
            }
        }
        validate_symseq(xu);
        validate_symseq(ux);
    }
}

TEST_CASE("coinvariants by orbit count") {
    // both sequences one-dimensional in arity 2 (trivial actions), nothing
    // in arity 1: (M o_S N)(3) has summands f: 3->2, factors M(2)(x)M(1) --
    // all zero since M(1) = 0; with arity 1 = k instead, the surjections
    // 3->2 fall into Sigma_2-orbits.
    SymSeq m = binary2(3), n = binary2(3);
    CoinvProduct w = circ_sigma_full(m, n);
    // arity 3 summands: k=2, f: 3->2 (six surjections), factors
    // M(2)(x)M(1)(x)N(2), each one-dimensional; sigma in Sigma_2
    // post-composes f, pairing the summands into three orbits
    REQUIRE(w.seq.at(3) != nullptr);
    CHECK(w.seq.at(3)->dim(0) == 3);
    validate_symseq(w.seq);

    // char guard
    SymSeq mp = binary2(3);
    Field f3 = Field::prime(3);
    // rebuild over F_3
    SymSeq m3;
    m3.field = f3;
    m3.cap = 3;
    m3.arities[1] = ChainComplex::unit(f3);
    ChainComplex c2;
    c2.field = f3;
    c2.set_dim(0, 1);
    m3.arities[2] = c2;
    ChainMap g;
    g.mats[0] = SparseMatrix::identity(f3, 1);
    m3.gens[2] = {g};
    CHECK_THROWS_AS(circ_sigma(m3, m3), std::invalid_argument);
}

TEST_CASE("prop is monoidal") {
    SUBCASE("unit on either side") {
        SymSeq one = unit_symseq(Q, 2);
        PropMonoidalReport r1 = prop_monoidal_iso(regular2(), one);
        CHECK(r1.ok);
        PropMonoidalReport r2 = prop_monoidal_iso(one, regular2());
        CHECK(r2.ok);
    }
    SUBCASE("binary sequences") {
        PropMonoidalReport r = prop_monoidal_iso(binary2(3), binary2(3));
        for (const auto& s : r.failures) MESSAGE(s);
        CHECK(r.ok);
    }
    SUBCASE("regular representation, graded factor") {
        PropMonoidalReport r = prop_monoidal_iso(regular2(3), binary2(3, 1));
        for (const auto& s : r.failures) MESSAGE(s);
        CHECK(r.ok);
    }
    SUBCASE("randomized") {
        std::mt19937 rng(2026);
        for (int t = 0; t < 8; ++t) {
            SymSeq a = random_symseq(Q, 3, rng);
            SymSeq b = random_symseq(Q, 3, rng);
            PropMonoidalReport r = prop_monoidal_iso(a, b);
            for (const auto& s : r.failures) MESSAGE("case " << t << ": " << s);
            CHECK(r.ok);
        }
    }
}

TEST_CASE("bar composition product") {
    SymSeq one = unit_symseq(Q, 3);
    SymSeq x = regular2(3);
    // X obar 1: only k = 1 contributes, f: 1 -> i needs every fiber of size
    // >= 1 unless X had arity 0; here X(0) = 0 so only i = 1 survives with
    // X(1) (x) 1(1) = k
    SymSeq xb = bar_circ(x, one);
    REQUIRE(xb.at(1) != nullptr);
    CHECK(xb.at(1)->dims == std::map<int, int>{{0, 1}});
    CHECK(xb.at(2) == nullptr);

    // 1 obar X at arity i: f: k -> i with all fibers of size one, so k = i
    // and (1 obar X)(i) = X(i) through the free diagonal quotient
    SymSeq bx = bar_circ(one, x);
    for (int i = 1; i <= 3; ++i) {
        if (!x.at(i)) {
            CHECK(bx.at(i) == nullptr);
        } else {
            REQUIRE(bx.at(i) != nullptr);
            CHECK(bx.at(i)->dims == x.at(i)->dims);
        }
    }
    validate_symseq(bx);
}

TEST_CASE("interchange of the two products") {
    // (X o Y) obar Z = Y obar (X obar Z), dimension equality arity by arity
    std::mt19937 rng(11);
    for (int t = 0; t < 4; ++t) {
        SymSeq x = random_symseq(Q, 2, rng);
        SymSeq y = random_symseq(Q, 2, rng);
        SymSeq z = random_symseq(Q, 2, rng);
        SymSeq lhs = bar_circ(circ_sigma(x, y), z);
        SymSeq rhs = bar_circ(y, bar_circ(x, z));
        for (int i = 0; i <= 2; ++i) {
            const ChainComplex* a = lhs.at(i);
            const ChainComplex* b = rhs.at(i);
            std::map<int, int> da = a ? a->dims : std::map<int, int>{};
            std::map<int, int> db = b ? b->dims : std::map<int, int>{};
            CHECK(da == db);
        }
    }
}

TEST_CASE("prop algebras of operads") {
    PropAlgebra u = prop_algebra(operad_unit(Q, 3));
    validate_prop_algebra(u);

    PropAlgebra b = prop_algebra(operad_binary(Q, 3));
    validate_prop_algebra(b);
    // with no arity-3 operations, hom(3,1) vanishes while hom(3,2) collects
    // the six surjections 3 -> 2
    CHECK(b.prop.cx.ptr(3, 1) == nullptr);
    const ChainComplex* c32 = b.prop.cx.ptr(3, 2);
    REQUIRE(c32 != nullptr);
    CHECK(c32->dim(0) == 6);
}

TEST_CASE("operadic bar construction") {
    OperadBar u = operad_bar(operad_unit(Q, 3));
    // trivial coefficients: the reduced bar complex collapses to the unit
    REQUIRE(u.bp.at(1) != nullptr);
    CHECK(u.bp.at(1)->dims == std::map<int, int>{{0, 1}});
    CHECK(u.bp.at(2) == nullptr);
    CHECK(u.bp.at(3) == nullptr);

    OperadBar b = operad_bar(operad_binary(Q, 3));
    validate_symseq(b.bp);
    REQUIRE(b.bp.at(1) != nullptr);
    CHECK(b.bp.at(1)->dims == std::map<int, int>{{0, 1}});
    REQUIRE(b.bp.at(2) != nullptr);
    CHECK(b.bp.at(2)->dims == std::map<int, int>{{1, 1}});
    // three rooted binary trees with three leaves
    REQUIRE(b.bp.at(3) != nullptr);
    CHECK(b.bp.at(3)->dims == std::map<int, int>{{2, 3}});
}

TEST_CASE("prop compatibility of the bar product") {
    auto rep = prop_bar_compat(binary2(3, 0), binary2(3, 0));
    CHECK(rep.ok);
    auto rep2 = prop_bar_compat(binary2(3, 1), binary2(3, 0));
    CHECK(rep2.ok);
    std::mt19937 rng(17);
    for (int t = 0; t < 3; ++t) {
        SymSeq a = random_symseq(Q, 2, rng);
        SymSeq b = random_symseq(Q, 2, rng);
        auto r = prop_bar_compat(a, b);
        CHECK(r.ok);
        if (!r.ok)
            for (auto& s : r.failures) MESSAGE(s);
    }
}

TEST_CASE("dual comparison map is a quasi-iso") {
    auto rep = prop_dual_map(binary2(3, 0));
    CHECK(rep.ok);
    auto rep2 = prop_dual_map(binary2(3, 1));
    CHECK(rep2.ok);
    std::mt19937 rng(23);
    for (int t = 0; t < 3; ++t) {
        auto r = prop_dual_map(random_symseq(Q, 3, rng));
        CHECK(r.ok);
    }
}

TEST_CASE("operadic Koszul duality tables") {
    auto u = operad_koszul_check(operad_unit(Q, 3), 3);
    CHECK(u.ok);
    CHECK(u.dims_ok);
    CHECK(u.mult_ok);
    CHECK(u.mult_pairs >= 10);
    CHECK(u.table.at({3, 3}).at(0) == std::pair<int, int>{6, 6});

    auto b = operad_koszul_check(operad_binary(Q, 3), 3);
    CHECK(b.ok);
    CHECK(b.mult_pairs >= 10);
    // the cobar side of one binary generator: three trees in arity 3
    CHECK(b.table.at({1, 3}).at(-2) == std::pair<int, int>{3, 3});
    CHECK(b.table.at({2, 3}).at(-1) == std::pair<int, int>{6, 6});

    CHECK_THROWS_AS(operad_koszul_check(operad_unit(Q, 2), 3), std::invalid_argument);
}
