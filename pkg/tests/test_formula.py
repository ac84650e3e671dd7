import itertools

import pytest

from uaworkbench.formula import (EP, EQ_CONJ, PP, And, Bottom, Eq, Exists, ParseError, PartialFunctionTable,
                                 Top, check_extendable, check_functional, classify, compose_tables,
                                 eval_formula, identity_table, implicit_table, parse, render_formula)
from uaworkbench.classops import ClassSpec
from uaworkbench.gallery import (MONOID, bool_top_pdl, complement, d2_bdl, lukasiewicz, monoid_c,
                                 monoid_inverse, mv_constant, pdl_implication, relative_complement,
                                 small_monoids, weak_inverse, zmod_group, zmod_ring)
from uaworkbench.terms import App, Var


def test_parse_conjunction():
    f = parse("x*y = 1 & y*x = 1", MONOID)
    assert isinstance(f, And) and len(f.parts) == 2
    assert f.parts[0] == Eq(App("*", (Var("x"), Var("y"))), App("1"))
    assert classify(f) == EQ_CONJ


def test_parse_exists_is_pp():
    f = parse("exists z. x*z = 1 & y = 1", MONOID)
    assert isinstance(f, Exists) and f.vars == ("z",)
    assert classify(f) == PP
    assert f.free_vars == {"x", "y"}


def test_parse_error():
    with pytest.raises(ParseError):
        parse("x =")


def test_render_round_trip():
    for f in [complement(), relative_complement(), pdl_implication(), parse("exists z. x*z = 1 & y = 1")]:
        assert parse(render_formula(f)) == f


def test_classify_examples():
    assert classify(Top()) == EQ_CONJ
    assert classify(parse("exists z. x*z = 1 & z*y = x")) == PP
    assert classify(parse("x = y | exists z. z = x")) == EP
    assert classify(parse("!(x = y)")) not in (EQ_CONJ, PP, EP)


def test_eval_examples():
    D2 = d2_bdl()
    assert eval_formula(D2, complement(), {"x": 0, "y": 1})
    L2 = lukasiewicz(2)
    assert eval_formula(L2, mv_constant(2), {"y": 1})
    assert not eval_formula(L2, mv_constant(2), {"y": 0})
    assert not eval_formula(D2, Bottom(), {})


def test_eval_connectives_against_python():
    D2 = d2_bdl()
    f = parse("meet(x, y) = x -> (x = 0 | y = 1)")
    for x, y in itertools.product(range(2), repeat=2):
        expected = (min(x, y) != x) or (x == 0 or y == 1)
        assert eval_formula(D2, f, {"x": x, "y": y}) == expected


def test_check_functional_examples():
    monoids = list(small_monoids(3))
    assert check_functional(monoids, monoid_inverse(), ["x"], "y").proven
    v = check_functional([d2_bdl()], parse("y = y"), ["x"], "y")
    assert v.refuted and v.witness["outputs"] == [0, 1]
    assert check_functional([zmod_ring(3)], weak_inverse(), ["x"], "y").proven


def functional_oracle(A, f, inputs, output):
    """Brute force over all assignments of inputs and output."""
    seen = {}
    for args in itertools.product(A.universe, repeat=len(inputs)):
        for y in A.universe:
            if eval_formula(A, f, dict(zip(inputs, args), **{output: y})):
                seen.setdefault(args, set()).add(y)
    return seen


@pytest.mark.parametrize("A,f,inputs", [
    (d2_bdl(), complement(), ["x"]),
    (zmod_ring(5), weak_inverse(), ["x"]),
    (monoid_c(3), monoid_inverse(), ["x"]),
    (bool_top_pdl(2), pdl_implication(), ["x1", "x2"]),
    (zmod_group(4), monoid_inverse(), ["x"]),
])
def test_implicit_table_matches_brute_force(A, f, inputs):
    tab = implicit_table(A, f, inputs, "y")
    seen = functional_oracle(A, f, inputs, "y")
    assert all(len(ys) == 1 for ys in seen.values())
    assert dict(tab.values) == {k: next(iter(v)) for k, v in seen.items()}


def test_implicit_table_examples():
    tab = implicit_table(d2_bdl(), complement(), ["x"], "y")
    assert tab.is_total() and tab.values == (((0,), 1), ((1,), 0))
    inv = implicit_table(monoid_c(3), monoid_inverse(), ["x"], "y")
    assert inv.dom == {(0,)} and inv(0) == 0
    rc = implicit_table(d2_bdl().reduct(["meet", "join"]), relative_complement(), ["x1", "x2", "x3"], "y")
    assert rc.is_total() and rc.arity == 3


def test_check_extendable_examples():
    assert check_extendable(ClassSpec((d2_bdl(),)), complement(), ["x"], "y").proven
    pdls = ClassSpec(tuple(bool_top_pdl(k) for k in range(3)))
    assert check_extendable(pdls, pdl_implication(), ["x1", "x2"], "y").proven
    assert check_extendable(ClassSpec((monoid_c(3),)), monoid_inverse(), ["x"], "y").refuted


def test_compose_tables_examples():
    D2 = d2_bdl()
    neg = implicit_table(D2, complement(), ["x"], "y")
    assert compose_tables(identity_table(D2), [neg]) == neg
    assert compose_tables(neg, [neg]) == identity_table(D2)
    empty = PartialFunctionTable.from_dict(1, {}, D2)
    assert len(compose_tables(neg, [empty])) == 0
    assert len(compose_tables(empty, [neg])) == 0
