import itertools

from uaworkbench.algebra import enumerate_homs, is_isomorphic, product
from uaworkbench.classops import (U, V, ClassSpec, finitely_presented, free_algebra, membership, rsi_members,
                                  subdirect_decomposition)
from uaworkbench.congruence import Congruence
from uaworkbench.formula import eval_formula, parse
from uaworkbench.gallery import (chain_heyting, chain_semilattice, complement, d2_bdl, lukasiewicz,
                                 zmod_group, zmod_ring)


def test_reduced_ring_quasiequation():
    fields = ClassSpec((zmod_ring(2), zmod_ring(3), zmod_ring(5)))
    Z4 = zmod_ring(4)
    v = membership(Z4, fields)
    assert v.refuted
    w = v.witness
    assert w["quasiequation"].replace(" ", "") in ("0=x*x->x=0", "x*x=0->x=0")
    x = w["at"]["x"]
    assert Z4.apply("*", (x, x)) == 0 and x != 0


def test_membership_examples():
    assert membership(chain_heyting(3), ClassSpec((chain_heyting(5),))).proven
    D2 = d2_bdl()
    assert membership(product([D2, D2])[0], ClassSpec((D2,))).proven
    assert membership(product([D2, D2])[0], ClassSpec((D2,), U)).refuted
    assert membership(chain_heyting(3), ClassSpec((chain_heyting(5),), U)).proven


def test_variety_membership():
    # x * x = 1 holds in G2 but not in G4
    v = membership(zmod_group(4), ClassSpec((zmod_group(2),), V))
    assert v.refuted and "identity" in v.witness
    C2, C3 = chain_heyting(2), chain_heyting(3)
    assert membership(product([C2, C3])[0], ClassSpec((C3,), V)).proven


def test_subdirect_decompositions():
    D2 = d2_bdl()
    P, projs = product([D2, D2])
    got = subdirect_decomposition(P, ClassSpec((D2,)))
    assert set(got) == {Congruence.from_labels(p.map) for p in projs}
    C3 = chain_heyting(3)
    assert subdirect_decomposition(C3, ClassSpec((C3,))) == [Congruence.identity(3)]
    P2, projs2 = product([chain_heyting(2), C3])
    got2 = subdirect_decomposition(P2, ClassSpec((C3,)))
    assert set(got2) == {Congruence.from_labels(p.map) for p in projs2}


def test_decomposition_meets_to_identity():
    C3 = chain_heyting(3)
    P, _ = product([C3, C3])
    parts = subdirect_decomposition(P, ClassSpec((C3,)))
    meet = Congruence.total(P.size)
    for t in parts:
        meet = meet.meet(t)
    assert meet.is_identity()


def test_rsi_members():
    sizes = sorted(B.size for B in rsi_members(ClassSpec((chain_heyting(5),))))
    assert sizes == [2, 3, 4, 5]
    L = rsi_members(ClassSpec((lukasiewicz(2),)))
    assert sorted(B.size for B in L) == [2, 3]
    assert is_isomorphic(L[0], lukasiewicz(1)).proven
    assert [B.size for B in rsi_members(ClassSpec((d2_bdl(),)))] == [2]


def test_free_algebras():
    D2 = d2_bdl()
    F1, gens = free_algebra(ClassSpec((D2,)), 1)
    assert F1.size == 3 and len(gens) == 1
    F2, _ = free_algebra(ClassSpec((chain_semilattice(2),)), 2)
    assert F2.size == 3
    F0, _ = free_algebra(ClassSpec((D2,)), 0)
    assert F0.size == 2


def test_free_algebra_universal_property():
    # every map of generators into D2 extends to a homomorphism
    D2 = d2_bdl()
    F, gens = free_algebra(ClassSpec((D2,)), 2)
    for vals in itertools.product(range(2), repeat=2):
        homs = enumerate_homs(F, D2, constraint=dict(zip(gens, vals)))
        assert len(homs) == 1


def test_finitely_presented():
    D2 = d2_bdl()
    T, asg = finitely_presented(complement(), ClassSpec((D2,)))
    assert T.size == 4
    assert eval_formula(T, complement(), asg)
    T2, _ = finitely_presented(parse("x = x"), ClassSpec((D2,)))
    assert T2.size == 3
    T3, _ = finitely_presented(parse("0 = 1 & x = x"), ClassSpec((D2,)))
    assert T3.size == 1
