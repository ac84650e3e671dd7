import itertools

import pytest

from uaworkbench.algebra import enumerate_homs, is_homomorphism, product, subalgebra, subuniverses
from uaworkbench.classops import ClassSpec
from uaworkbench.dominion import (check_absolutely_closed, check_ses, dominion, equalizer_dominion,
                                  find_zigzag, is_monoid, unary_monoid_law, zigzag_membership)
from uaworkbench.formula import implicit_table, parse
from uaworkbench.gallery import (MONOID, c5_counterexample, chain_heyting, d2_bdl, d2_rcdl, monoid_inverse,
                                 small_monoids, square, zmod_group)


def dominion_oracle(A, B, codomains):
    """Pairs of homs agreeing on A; keep the points where every pair agrees."""
    d = set(B.universe)
    for C in codomains:
        homs = enumerate_homs(B, C)
        for g, h in itertools.product(homs, repeat=2):
            if all(g.map[a] == h.map[a] for a in A):
                d -= {b for b in B.universe if g.map[b] != h.map[b]}
    return frozenset(d)


def test_three_element_sublattice_has_full_dominion():
    D2 = d2_bdl()
    P, _ = product([D2, D2])
    A = frozenset(P.index_of(p) for p in [(0, 0), (0, 1), (1, 1)])
    rep = dominion(A, P, ClassSpec((D2,)))
    assert rep.result == frozenset(P.universe)
    assert rep.extra == [P.index_of((1, 0))]


def test_c5_gadget_dominion():
    C5, B, D, k = c5_counterexample()
    rep = dominion(D, B, ClassSpec((C5,)))
    assert B.index_of((4, 3)) in rep.result - D


def test_dominion_of_whole_algebra():
    C3 = chain_heyting(3)
    P, _ = product([C3, C3])
    assert dominion(frozenset(P.universe), P, ClassSpec((C3,))).trivial


def test_rcdl_dominions_are_trivial():
    R = d2_rcdl()
    P, _ = product([R, R])
    for A in subuniverses(P):
        assert dominion(A, P, ClassSpec((R,))).result == A


@pytest.mark.parametrize("K,B", [
    ((chain_heyting(3),), product([chain_heyting(3), chain_heyting(2)])[0]),
    ((d2_bdl(),), product([d2_bdl(), d2_bdl()])[0]),
    ((chain_heyting(5),), product([chain_heyting(5), chain_heyting(5)])[0]),
])
def test_dominion_matches_pairwise_oracle(K, B):
    for A in subuniverses(B)[:25]:
        assert equalizer_dominion(A, B, K)[0] == dominion_oracle(A, B, K)


def test_dominion_rejects_non_subuniverse():
    C3 = chain_heyting(3)
    with pytest.raises(ValueError):
        dominion(frozenset([1]), C3, ClassSpec((C3,)))


def test_ses_examples():
    v = check_ses(ClassSpec((d2_rcdl(),)))
    assert v.proven
    v = check_ses(ClassSpec((chain_heyting(5),)))
    assert v.refuted
    C5, B, D, _ = c5_counterexample()
    assert v.witness["element"] in ([3, 4], [4, 3])
    assert sorted(v.witness["sub"]) == sorted(list(B.label(x)) for x in D)
    assert check_ses(ClassSpec((chain_heyting(2),))).proven
    assert check_ses(ClassSpec((d2_bdl(),))).refuted


def test_fg_strategy_never_proves():
    assert check_ses(ClassSpec((chain_heyting(2),)), strategy="fg").unknown
    assert check_ses(ClassSpec((d2_bdl(),)), strategy="fg").refuted


def test_absolutely_closed_examples():
    D2 = d2_bdl()
    K = ClassSpec((D2,))
    P, _ = product([D2, D2])
    diag = [P.index_of((a, a)) for a in D2.universe]
    assert check_absolutely_closed(D2, K, [(P, diag)]).proven
    A3 = frozenset(P.index_of(p) for p in [(0, 0), (0, 1), (1, 1)])
    S, emb = subalgebra(P, A3)
    v = check_absolutely_closed(S, K, [(P, emb)])
    assert v.refuted
    C3 = chain_heyting(3)
    assert check_absolutely_closed(C3, ClassSpec((C3,)), [(C3, (0, 1, 2))]).proven


# monoids ---------------------------------------------------------------------

def test_zigzag_examples():
    Z2 = zmod_group(2)
    v = zigzag_membership(frozenset([0]), Z2, 1)
    assert v.refuted
    M = small_monoids(4)
    for name in (v.witness["codomain"],):
        C = next(m for m in M if m.name == name)
        assert is_homomorphism(Z2, C, v.witness["g"]) and is_homomorphism(Z2, C, v.witness["h"])
    v = zigzag_membership(frozenset([0]), Z2, 0)
    assert v.proven and v.witness["length"] == 0


def test_zigzag_witness_solves_the_system():
    # in a group every submonoid's dominion contains inverses of its elements
    G = zmod_group(3)
    A = frozenset(G.universe)
    for b in G.universe:
        z = find_zigzag(A, G, b, 1)
        assert z is not None
        x1, x2, x3 = z.x
        (z1,), (w1,) = z.z, z.w
        m = lambda a, c: G.apply("*", (a, c))
        assert b == m(x1, z1) and x1 == m(w1, x2) and m(x2, z1) == x3 and m(w1, x3) == b


def test_small_monoid_corpus():
    assert len(small_monoids(4)) == 45
    assert len(small_monoids(4, commutative=True)) == 27
    assert all(is_monoid(M) for M in small_monoids(4))


def test_unary_laws():
    groups = [zmod_group(2), zmod_group(3)]
    inv = [implicit_table(G, monoid_inverse(), ["x"], "y") for G in groups]
    assert unary_monoid_law(inv) == (1, 0)
    sq = [implicit_table(M, square(), ["x"], "y") for M in small_monoids(3)]
    assert unary_monoid_law(sq) == (0, 2)
    ident = [implicit_table(M, parse("y = x", MONOID), ["x"], "y") for M in small_monoids(3)]
    assert unary_monoid_law(ident) == (0, 1)
