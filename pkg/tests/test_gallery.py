import itertools

import pytest

from uaworkbench.algebra import is_homomorphism, is_isomorphic, product, sg, validate_algebra
from uaworkbench.formula import And, Eq, Exists, check_functional, eval_formula, implicit_table
from uaworkbench.gallery import (ALGEBRAS, bool_top_pdl, c5_counterexample, chain_heyting, gallery_algebra,
                                 gallery_formula, hilbert_chain, isbell_formula, isbell_inputs, lukasiewicz,
                                 monoid_c, monoid_inverse, mv_division, ordered_sum, pdl_implication,
                                 small_monoids, zmod_ring)
from uaworkbench.terms import App, Var

HEYTINGS = [chain_heyting(n) for n in range(2, 6)] + [
    product([chain_heyting(2), chain_heyting(2)])[0],
    ordered_sum(product([chain_heyting(2), chain_heyting(2)])[0], chain_heyting(3)),
    ordered_sum(chain_heyting(3), product([chain_heyting(2), chain_heyting(2)])[0]),
]


def revalidate(A):
    return validate_algebra(A.name, A.signature, A.size, dict(A.tables), A.labels)


@pytest.mark.parametrize("A", HEYTINGS + [bool_top_pdl(k) for k in range(3)] + [lukasiewicz(n) for n in range(1, 5)]
                         + [zmod_ring(p) for p in (2, 3, 5)] + [monoid_c(3)])
def test_gallery_algebras_validate(A):
    assert revalidate(A) == A


@pytest.mark.parametrize("A", HEYTINGS)
def test_residuation(A):
    le = lambda a, b: A.apply("meet", (a, b)) == a
    for a, b, c in itertools.product(A.universe, repeat=3):
        assert le(A.apply("meet", (a, b)), c) == le(a, A.apply("imp", (b, c)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_mv_axioms(n):
    L = lukasiewicz(n)
    plus = lambda a, b: L.apply("+", (a, b))
    neg = lambda a: L.apply("neg", (a,))
    zero = L.const("0")
    for x, y in itertools.product(L.universe, repeat=2):
        assert plus(x, neg(zero)) == neg(zero)
        assert neg(neg(x)) == x
        assert plus(neg(plus(neg(x), y)), y) == plus(neg(plus(neg(y), x)), x)


def test_lukasiewicz_half():
    L2 = lukasiewicz(2)
    assert L2.apply("+", (1, 1)) == 2
    odot = lambda a, b: L2.apply("neg", (L2.apply("+", (L2.apply("neg", (a,)), L2.apply("neg", (b,)))),))
    assert odot(1, 1) == 0


def test_ordered_sum_examples():
    assert is_isomorphic(ordered_sum(chain_heyting(3), chain_heyting(5)), chain_heyting(7)).proven
    C2, C3 = chain_heyting(2), chain_heyting(3)
    B4 = product([C2, C2])[0]
    triples = [(C2, C3, B4), (B4, C2, C3), (C3, B4, C2), (B4, B4, C2)]
    for A, B, C in triples:
        left = ordered_sum(ordered_sum(A, B), C)
        right = ordered_sum(A, ordered_sum(B, C))
        assert is_isomorphic(left, right).proven


def test_monoid_c():
    M = monoid_c(3)
    # element i is c^i, with c^4 absorbing
    c3 = M.apply("*", (M.apply("*", (1, 1)), 1))
    c4 = M.apply("*", (c3, 1))
    c5 = M.apply("*", (c4, 1))
    assert (c3, c4, c5) == (3, 4, 4)


def test_formula_examples():
    f = monoid_inverse()
    x, y, one = Var("x"), Var("y"), App("1")
    assert f == And((Eq(App("*", (x, y)), one), Eq(App("*", (y, x)), one)))
    L4 = lukasiewicz(4)
    tab = implicit_table(L4, mv_division(2), ["x"], "y")
    # index m is m/4: half of 1 is 1/2, half of 1/2 is 1/4
    assert tab(4) == 2 and tab(2) == 1
    A = bool_top_pdl(2)
    imp_ok = 0
    for a, b, c in itertools.product(A.universe, repeat=3):
        # Heyting implication of the finite distributive lattice: largest z with a & z <= b
        zs = [z for z in A.universe if A.apply("meet", (A.apply("meet", (a, z)), b)) == A.apply("meet", (a, z))]
        top = max(zs, key=lambda z: sum(A.apply("meet", (w, z)) == w for w in A.universe))
        assert eval_formula(A, pdl_implication(), {"x1": a, "x2": b, "y": c}) == (top == c)
        imp_ok += 1
    assert imp_ok == A.size ** 3


def test_bool_top_pdl_sizes():
    assert [bool_top_pdl(k).size for k in range(3)] == [2, 3, 5]


def test_isbell_formulas():
    assert isbell_formula(0) == Eq(Var("x1"), Var("y"))
    f1 = isbell_formula(1)
    assert isinstance(f1, Exists) and len(f1.vars) == 2 and len(isbell_inputs(1)) == 3
    assert check_functional(list(small_monoids(4, commutative=True)), f1, isbell_inputs(1), "y").proven


def test_c5_counterexample():
    C5, B, D, k = c5_counterexample()
    assert len(D) == 4
    assert B.label(k.map[1]) == (1, 2)
    assert sg(B, D) == D
    assert is_homomorphism(C5, B, k.map)


def test_gallery_ids():
    assert gallery_algebra("chain_heyting(4)").size == 4
    assert gallery_algebra("ordered_sum(chain_heyting(2), chain_heyting(3))").size == 4
    assert gallery_algebra("power(d2_bdl, 2)").size == 4
    assert gallery_formula("mv_constant(3)") is not None
    with pytest.raises(ValueError):
        gallery_algebra("nothing(1)")
    assert "hilbert_chain" in ALGEBRAS and hilbert_chain(3).signature.names == ["imp"]
