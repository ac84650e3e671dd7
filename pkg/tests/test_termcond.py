import itertools

import pytest
from hypothesis import given, settings, strategies as st

from uaworkbench.algebra import Signature, product, trivial_algebra, validate_algebra
from uaworkbench.classops import ClassSpec
from uaworkbench.formula import eval_formula, implicit_table, parse
from uaworkbench.gallery import (BDL, MONOID, chain_heyting, chain_semilattice, complement, d2_bdl, d2_boolean,
                                 d2_lattice, d2_rcdl, lukasiewicz, lukasiewicz_with_constant, monoid_inverse,
                                 zmod_group)
from uaworkbench.termcond import (TermCondition, is_primal, is_rigid, search_eq_interpolant,
                                  search_interpolant_term, term_condition_search)
from uaworkbench.terms import compile_term


def term_table(A, t, k):
    fn = compile_term(A, t, {f"x{i + 1}": i for i in range(k)})
    return [fn(list(a)) for a in itertools.product(A.universe, repeat=k)]


def test_condition_shapes():
    maj = TermCondition.parse("majority")
    assert maj.arity == 3
    assert TermCondition.parse("nu 4").arity == 4
    with pytest.raises(ValueError):
        TermCondition.parse("nonsense")


def test_d2_majority_is_the_median():
    D2 = d2_bdl()
    v = term_condition_search(D2, TermCondition.parse("majority"))
    assert v.proven
    median = [sorted(a)[1] for a in itertools.product(range(2), repeat=3)]
    assert term_table(D2, v.witness["_term"], 3) == median


def test_semilattice_has_no_malcev():
    v = term_condition_search(chain_semilattice(2), TermCondition.parse("malcev"))
    assert v.refuted and v.witness["exhausted"]


def test_l1_discriminator():
    L1 = lukasiewicz(1)
    v = term_condition_search(L1, TermCondition.parse("discriminator"))
    assert v.proven
    disc = [z if x == y else x for x, y, z in itertools.product(range(2), repeat=3)]
    assert term_table(L1, v.witness["_term"], 3) == disc


@pytest.mark.parametrize("A", [d2_rcdl(), chain_heyting(5), lukasiewicz(2)])
def test_found_majority_terms_satisfy_the_identities(A):
    v = term_condition_search(A, TermCondition.parse("majority"))
    assert v.proven
    tab = term_table(A, v.witness["_term"], 3)
    n = A.size
    for x, y in itertools.product(A.universe, repeat=2):
        for p in [(x, x, y), (x, y, x), (y, x, x)]:
            assert tab[p[0] * n * n + p[1] * n + p[2]] == x


def test_budget_gives_unknown():
    from uaworkbench.verdict import SearchBudget
    v = term_condition_search(lukasiewicz_with_constant(2), TermCondition.parse("pixley"),
                              SearchBudget(max_steps=2000))
    assert v.unknown


def test_rigidity():
    assert is_rigid(lukasiewicz(2))
    assert is_rigid(trivial_algebra(BDL))
    # the order swap of the pure 2-element lattice reverses meet and join, so it is
    # a dual automorphism only
    assert is_rigid(d2_lattice())
    assert not is_rigid(zmod_group(3))


# primality -----------------------------------------------------------------

def post_primal(ops):
    """Post's criterion for {0,1}: primal iff no maximal clone contains every operation.

    ops: list of (arity, table over itertools.product order)."""
    def preserves0(k, t):
        return t[0] == 0

    def preserves1(k, t):
        return t[-1] == 1

    def monotone(k, t):
        pts = list(itertools.product(range(2), repeat=k))
        return all(t[i] <= t[j] for i, a in enumerate(pts) for j, b in enumerate(pts)
                   if all(x <= y for x, y in zip(a, b)))

    def self_dual(k, t):
        if k == 0:
            return False
        pts = list(itertools.product(range(2), repeat=k))
        return all(t[pts.index(tuple(1 - x for x in a))] == 1 - t[i] for i, a in enumerate(pts))

    def affine(k, t):
        pts = list(itertools.product(range(2), repeat=k))
        for c0 in range(2):
            for coef in itertools.product(range(2), repeat=k):
                if all(t[i] == (c0 + sum(c * x for c, x in zip(coef, a))) % 2 for i, a in enumerate(pts)):
                    return True
        return False

    return not any(all(clone(k, t) for k, t in ops)
                   for clone in (preserves0, preserves1, monotone, self_dual, affine))


def two_element(ops):
    sig = Signature([(f"f{i}", k) for i, (k, _) in enumerate(ops)])
    return validate_algebra("T", sig, 2, {f"f{i}": list(t) for i, (_, t) in enumerate(ops)})


op_strategy = st.integers(0, 2).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.integers(0, 1), min_size=2 ** k, max_size=2 ** k)))


@settings(max_examples=40, deadline=None)
@given(st.lists(op_strategy, min_size=1, max_size=3))
def test_primality_agrees_with_post_criterion(ops):
    A = two_element(ops)
    expected = post_primal(ops)
    for route in ("fast", "reference"):
        v = is_primal(A, route=route)
        assert not v.unknown
        assert v.proven == expected, (route, ops)


@pytest.mark.parametrize("ops,primal", [
    ([(2, [1, 1, 1, 0])], True),           # nand
    ([(2, [0, 0, 0, 1]), (1, [1, 0])], True),   # and, not
    ([(2, [0, 1, 1, 0])], False),          # xor is affine
    ([(2, [0, 0, 0, 1]), (2, [0, 1, 1, 1])], False),  # lattice: monotone
])
def test_post_oracle_known_cases(ops, primal):
    assert post_primal(ops) == primal
    assert is_primal(two_element(ops)).proven == primal


def test_primal_examples():
    assert is_primal(lukasiewicz_with_constant(2)).proven
    v = is_primal(lukasiewicz(2))
    assert v.refuted and v.witness["subuniverse"] == [0, 2]
    assert is_primal(d2_bdl(), route="fast").refuted
    assert is_primal(d2_bdl(), route="reference").refuted
    assert is_primal(d2_boolean()).proven
    assert is_primal(trivial_algebra(BDL)).refuted


# interpolants --------------------------------------------------------------

def test_complement_interpolated_by_negation():
    v = search_interpolant_term(ClassSpec((d2_boolean(),)), complement(), ["x"], "y")
    assert v.proven and v.witness["term"] == "neg(x)"


def test_term_function_interpolated():
    C3 = chain_heyting(3)
    f = parse("y = imp(x1, meet(x1, x2))", C3.signature)
    v = search_interpolant_term(ClassSpec((C3,)), f, ["x1", "x2"], "y")
    assert v.proven
    want = [C3.apply("imp", (a, min(a, b))) for a, b in itertools.product(range(3), repeat=2)]
    assert term_table(C3, v.witness["_term"], 2) == want


def test_inverse_over_finite_groups_is_a_power():
    # over a finite corpus of groups the inverse is a term (a power of x)
    groups = (zmod_group(2), zmod_group(3))
    v = search_interpolant_term(ClassSpec(groups), monoid_inverse(), ["x"], "y")
    assert v.proven
    for G in groups:
        tab = implicit_table(G, monoid_inverse(), ["x"], "y")
        fn = compile_term(G, v.witness["_term"], {"x": 0})
        assert all(fn([a]) == b for (a,), b in tab.values)


def test_complement_has_no_lattice_interpolant():
    # lattice terms are monotone, complement is not
    v = search_interpolant_term(ClassSpec((d2_bdl(),)), complement(), ["x"], "y")
    assert v.refuted


def test_eq_interpolant_is_valid():
    f = parse("exists z. x*z = 1 & y = 1", MONOID)
    K = ClassSpec((zmod_group(2), zmod_group(3)))
    v = search_eq_interpolant(K, f, ["x"], "y")
    assert v.proven
    g = parse(v.witness["formula"], MONOID)
    # the equations define f on its domain in every check algebra
    for G in (zmod_group(2), zmod_group(3), product([zmod_group(2), zmod_group(3)])[0]):
        for x in G.universe:
            ys = [y for y in G.universe if eval_formula(G, g, {"x": x, "y": y})]
            assert ys == [G.const("1")]


def test_eq_conjunction_returns_itself():
    f = parse("x*y = 1 & y*x = 1", MONOID)
    v = search_eq_interpolant(ClassSpec((zmod_group(3),)), f, ["x"], "y")
    assert v.proven
