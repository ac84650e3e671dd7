import itertools

import pytest
from hypothesis import given, settings, strategies as st

from uaworkbench.algebra import (AlgebraError, Homomorphism, enumerate_embeddings, enumerate_homs,
                                 is_homomorphism, is_isomorphic, product, quotient, sg, subuniverses,
                                 trivial_algebra, validate_algebra)
from uaworkbench.congruence import Congruence, cg
from uaworkbench.gallery import BDL, chain_heyting, d2_bdl, lukasiewicz, zmod_group
from uaworkbench.terms import App, Var, eval_term
from uaworkbench.formula import parse_term


# brute-force oracles ---------------------------------------------------------

def all_homs(A, B):
    return sorted(m for m in itertools.product(B.universe, repeat=A.size) if is_hom_naive(A, B, m))


def is_hom_naive(A, B, m):
    for sym, k in A.signature:
        for args in itertools.product(A.universe, repeat=k):
            if m[A.apply(sym, args)] != B.apply(sym, tuple(m[a] for a in args)):
                return False
    return True


def closure_naive(A, X):
    S = set(X) | {A.const(s) for s, k in A.signature if k == 0}
    while True:
        new = {A.apply(s, args) for s, k in A.signature if k > 0
               for args in itertools.product(sorted(S), repeat=k)} - S
        if not new:
            return frozenset(S)
        S |= new


# validation ------------------------------------------------------------------

def test_d2_tables_validate():
    A = validate_algebra("D2", BDL, 2, {"meet": [[0, 0], [0, 1]], "join": [[0, 1], [1, 1]], "0": 0, "1": 1})
    assert A.size == 2 and A.apply("join", (0, 1)) == 1


def test_value_out_of_range():
    with pytest.raises(AlgebraError, match="value out of range"):
        validate_algebra("bad", BDL, 2, {"meet": [[0, 0], [0, 2]], "join": [[0, 1], [1, 1]], "0": 0, "1": 1})


def test_missing_table():
    sig = BDL.extend([("neg", 1)])
    with pytest.raises(AlgebraError, match="missing table"):
        validate_algebra("bad", sig, 2, {"meet": [[0, 0], [0, 1]], "join": [[0, 1], [1, 1]], "0": 0, "1": 1})


def test_wrong_shape_and_extra_symbol():
    with pytest.raises(AlgebraError, match="wrong table shape"):
        validate_algebra("bad", BDL, 2, {"meet": [[0, 0]], "join": [[0, 1], [1, 1]], "0": 0, "1": 1})
    with pytest.raises(AlgebraError, match="undeclared"):
        validate_algebra("bad", BDL, 2, {"meet": [[0, 0], [0, 1]], "join": [[0, 1], [1, 1]], "0": 0, "1": 1,
                                         "x": 0})


# terms -----------------------------------------------------------------------

def test_eval_term_examples():
    D2 = d2_bdl()
    assert eval_term(D2, App("meet", (Var("x"), Var("y"))), {"x": 0, "y": 1}) == 0
    L2 = lukasiewicz(2)
    t = parse_term("neg(neg(x) + neg(y))", L2.signature)
    assert eval_term(L2, t, {"x": 1, "y": 1}) == 0
    C3 = chain_heyting(3)
    assert eval_term(C3, App("1"), {}) == 2


# subuniverses ----------------------------------------------------------------

def test_sg_examples():
    C3 = chain_heyting(3)
    assert sg(C3, []) == {0, 2}
    assert sg(C3, [1]) == {0, 1, 2}
    assert sg(d2_bdl(), [0]) == {0, 1}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([chain_heyting(4), zmod_group(4), lukasiewicz(3), product([d2_bdl(), d2_bdl()])[0]]),
       st.sets(st.integers(0, 3), max_size=3))
def test_sg_matches_naive_closure_and_is_idempotent(A, X):
    S = sg(A, X)
    assert S == closure_naive(A, X)
    assert sg(A, S) == S


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 4), max_size=3), st.sets(st.integers(0, 4), max_size=3))
def test_sg_monotone(X, Y):
    A = chain_heyting(5)
    assert sg(A, X) <= sg(A, X | Y)


def test_subuniverses_are_closed():
    A = chain_heyting(5)
    subs = subuniverses(A)
    assert len(subs) == 8
    assert all(sg(A, S) == S for S in subs)


# products and quotients ------------------------------------------------------

def test_product_sizes():
    D2 = d2_bdl()
    assert product([D2, D2])[0].size == 4
    assert product([chain_heyting(2), chain_heyting(3)])[0].size == 6
    T, projs = product([], signature=BDL)
    assert T.size == 1 and projs == []


def test_projections_are_homomorphisms():
    A, B = chain_heyting(2), chain_heyting(3)
    P, projs = product([A, B])
    for p, F in zip(projs, [A, B]):
        assert is_homomorphism(P, F, p.map)


def test_quotient_examples():
    C3 = chain_heyting(3)
    Q, _ = quotient(C3, Congruence.identity(3))
    assert is_isomorphic(Q, C3).proven
    Q2, _ = quotient(C3, Congruence.from_blocks(3, [(1, 2)]))
    assert is_isomorphic(Q2, chain_heyting(2)).proven
    Q3, _ = quotient(C3, Congruence.total(3))
    assert Q3.size == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=3))
def test_quotient_map_kernel_is_the_congruence(pairs):
    A = chain_heyting(5)
    theta = cg(A, pairs)
    Q, q = quotient(A, theta)
    assert is_homomorphism(A, Q, q.map)
    assert Congruence.from_labels(q.map) == theta


# homomorphisms ---------------------------------------------------------------

def test_hom_examples():
    D2 = d2_bdl()
    P, projs = product([D2, D2])
    assert sorted(h.map for h in enumerate_homs(P, D2)) == sorted(p.map for p in projs)
    C2 = chain_heyting(2)
    assert [h.map for h in enumerate_homs(C2, C2)] == [(0, 1)]
    assert enumerate_homs(trivial_algebra(BDL), D2) == []


def test_embedding_and_isomorphism_examples():
    assert len(enumerate_embeddings(chain_heyting(3), chain_heyting(5))) == 3
    v = is_isomorphic(d2_bdl(), d2_bdl())
    assert v.proven and v.witness.map == (0, 1)
    C2 = chain_heyting(2)
    assert is_isomorphic(chain_heyting(4), product([C2, C2])[0]).refuted


@pytest.mark.parametrize("A,B", [
    (chain_heyting(3), chain_heyting(4)),
    (zmod_group(4), zmod_group(2)),
    (product([d2_bdl(), d2_bdl()])[0], d2_bdl()),
    (lukasiewicz(2), lukasiewicz(4)),
])
def test_enumerate_homs_matches_brute_force(A, B):
    assert [h.map for h in enumerate_homs(A, B)] == all_homs(A, B)


def test_homomorphism_composition():
    A, B = chain_heyting(3), chain_heyting(4)
    for h in enumerate_homs(A, B):
        for g in enumerate_homs(B, chain_heyting(2)):
            c = g.compose(h)
            assert isinstance(c, Homomorphism) and is_homomorphism(A, chain_heyting(2), c.map)
