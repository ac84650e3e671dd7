"""Reproducible end-to-end checks, addressable from the command line."""

import itertools

from .algebra import is_homomorphism, is_isomorphic, product, sg, subuniverses, term_function_table
from .classops import ClassSpec
from .congruence import check_congruence_equation
from .dominion import dominion, unary_monoid_law
from .expansion import ExpansionOp, ExpansionSpec, beth_primal_witness, expand, expand_class
from .formula import check_functional, eval_formula, implicit_table
from .gallery import (bool_top_pdl, c5_counterexample, chain_heyting, chain_semilattice, complement, d2_bdl,
                      d2_boolean, d2_rcdl, heyting_of_lattice, hilbert_chain, hilbert_meet, isbell_formula,
                      isbell_inputs, lukasiewicz, lukasiewicz_with_constant, monoid_c, monoid_inverse,
                      mv_constant, pdl_implication, small_monoids, weak_inverse, zmod_group, zmod_ring)
from .properties import DEFAULT_SEED, SUITES
from .termcond import is_primal, search_interpolant_term
from .verdict import Proven, Refuted


def _verdict(ok, details):
    return Proven(details) if ok else Refuted(details)


def boolean_expansion():
    D2 = d2_bdl()
    f = complement()
    func = check_functional([D2], f, ["x"], "y")
    tab = implicit_table(D2, f, ["x"], "y")
    op = ExpansionOp("neg", f, ("x",), "y")
    spec = ExpansionSpec(ClassSpec((D2,)), (op,))
    E = expand(D2, spec)
    iso = is_isomorphic(E, d2_boolean())
    M, axioms, _ = expand_class(spec)
    interp = search_interpolant_term(M, f, ["x"], "y")
    t = interp.witness.get("_term") if interp.proven else None
    table = list(term_function_table(E, t, ["x"])) if t is not None else None
    ok = func.proven and tab.is_total() and iso.proven and table == [v for _, v in tab.values]
    return _verdict(ok, {"functional": func.status, "total": tab.is_total(),
                         "table": [v for _, v in tab.values], "isomorphic_to_B2": iso.status,
                         "axioms": axioms, "interpolant": interp.witness.get("term") if interp.proven else None,
                         "interpolant_table": table})


def rcdl_dominions():
    R = d2_rcdl()
    P, _ = product([R, R])
    rows = []
    ok = True
    for A in subuniverses(P):
        d = dominion(A, P, [R]).result
        rows.append({"sub": [list(P.label(x)) for x in sorted(A)], "equal": d == A})
        ok &= d == A
    D2 = d2_bdl()
    Q, _ = product([D2, D2])
    A3 = frozenset(Q.index_of(p) for p in [(0, 0), (0, 1), (1, 1)])
    d3 = dominion(A3, Q, [D2]).result
    ok &= d3 == frozenset(Q.universe)
    return _verdict(ok, {"rcdl_subalgebras": rows,
                         "bdl_three_element": {"sub": [list(Q.label(x)) for x in sorted(A3)],
                                               "dominion": [list(Q.label(x)) for x in sorted(d3)]}})


def c5_gadget():
    C5, B, D, k = c5_counterexample()
    closed = sg(B, D) == D
    hom = is_homomorphism(C5, B, k.map)
    image = frozenset(k.map) == D
    rep = dominion(D, B, [C5])
    target = B.index_of((4, 3))  # <c5, c4> with c_i the element i-1
    ok = closed and hom and image and target in rep.result and target not in D
    return _verdict(ok, {"D": [list(B.label(x)) for x in sorted(D)], "subuniverse": closed,
                         "k_homomorphism": hom, "image_is_D": image,
                         "dominion": [list(B.label(x)) for x in sorted(rep.result)],
                         "witness": ["c5", "c4"], "witness_in_dominion_minus_D": target in rep.result - D})


def pdl_implication_check():
    f = pdl_implication()
    rows = []
    ok = True
    for kk in range(3):
        A = bool_top_pdl(kk)
        imp = heyting_of_lattice(A)
        bad = 0
        for a, b, c in itertools.product(A.universe, repeat=3):
            if eval_formula(A, f, {"x1": a, "x2": b, "y": c}) != (imp[a][b] == c):
                bad += 1
        rows.append({"algebra": A.name, "size": A.size, "mismatches": bad})
        ok &= bad == 0
    return _verdict(ok, {"algebras": rows})


def lukasiewicz_suite():
    rows = []
    ok = True
    for n in range(1, 5):
        L = lukasiewicz(n)
        f = mv_constant(n)
        func = check_functional([L], f, [], "y")
        tab = implicit_table(L, f, [], "y")
        val = tab.mapping.get(())
        rows.append({"n": n, "functional": func.status, "total": tab.is_total(), "value": f"{val}/{n}"})
        ok &= func.proven and tab.is_total() and val == 1
    Lc = lukasiewicz_with_constant(2)
    p1 = is_primal(Lc)
    p2 = is_primal(lukasiewicz(2))
    L2 = lukasiewicz(2)
    beth = beth_primal_witness(L2, [ExpansionOp("c", mv_constant(2), (), "y")])
    ok &= p1.proven and p2.refuted and p2.witness.get("subuniverse") == [0, 2] and beth.proven
    return _verdict(ok, {"constants": rows,
                         "primal_L2_with_half": {k: v for k, v in p1.witness.items()} if p1.witness else None,
                         "primal_L2": p2.witness, "beth": beth.witness.get("claim") if beth.proven else beth.status})


def finite_fields():
    rows = []
    ok = True
    f = weak_inverse()
    for p in (2, 3, 5):
        Z = zmod_ring(p)
        func = check_functional([Z], f, ["x"], "y")
        tab = implicit_table(Z, f, ["x"], "y")
        expect = [0] + [pow(a, p - 2, p) for a in range(1, p)]
        got = [v for _, v in tab.values]
        rows.append({"p": p, "functional": func.status, "table": got})
        ok &= func.proven and tab.is_total() and got == expect
    return _verdict(ok, {"fields": rows})


def monoid_gadgets():
    M = monoid_c(3)
    cr = M.apply("*", (3, 0)) != M.apply("*", (3, 1)) and M.apply("*", (3, 1)) == M.apply("*", (3, 2))
    corpus = list(small_monoids(4, commutative=True))
    isb = check_functional(corpus, isbell_formula(1), isbell_inputs(1), "y")
    groups = [zmod_group(2), zmod_group(3)]
    law = unary_monoid_law([implicit_table(G, monoid_inverse(), ["x"], "y") for G in groups])
    ok = cr and isb.proven and law == (1, 0)
    return _verdict(ok, {"c3_ne_c4_and_c4_eq_c5": cr, "isbell_1_functional": isb.status,
                         "corpus_size": len(corpus), "inverse_power_law": list(law) if law else None})


def hilbert_meet_check():
    f = hilbert_meet()
    rows = []
    ok = True
    for n in range(2, 6):
        H = hilbert_chain(n)
        tab = implicit_table(H, f, ["x1", "x2"], "y")
        exact = tab.is_total() and all(v == min(a, b) for (a, b), v in tab.values)
        rows.append({"algebra": H.name, "total": tab.is_total(), "equals_meet": exact})
        ok &= exact
    return _verdict(ok, {"algebras": rows})


def congruence_equations_check():
    C5 = chain_heyting(5)
    dist = check_congruence_equation(C5, ClassSpec((C5,)), "(x | y) & (x | z) = x | (y & z)")
    perm = check_congruence_equation(chain_semilattice(3), None, "x o y = y o x")
    comm = check_congruence_equation(C5, None, "x & y = y & x")
    ok = dist.proven and perm.refuted and comm.proven
    return _verdict(ok, {"distributive_C5": dist.status, "permutable_S3": perm.status,
                         "S3_witness": perm.witness, "meet_commutes": comm.status})


def property_suites(seed=DEFAULT_SEED):
    out = {}
    ok = True
    for name, fn in SUITES.items():
        r = fn(seed=seed)
        out[name] = {"cases": r["cases"], "violations": len(r["violations"])}
        ok &= not r["violations"] and r["cases"] >= 200
    return _verdict(ok, {"seed": seed, "suites": out})


REPRO = {
    "boolean-expansion": boolean_expansion,
    "rcdl-dominions": rcdl_dominions,
    "c5-gadget": c5_gadget,
    "pdl-implication": pdl_implication_check,
    "lukasiewicz-suite": lukasiewicz_suite,
    "finite-fields": finite_fields,
    "monoid-gadgets": monoid_gadgets,
    "hilbert-meet": hilbert_meet_check,
    "congruence-equations": congruence_equations_check,
    "property-suites": property_suites,
}
