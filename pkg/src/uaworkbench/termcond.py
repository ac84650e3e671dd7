"""Term-condition searches, rigidity, primality and interpolant search."""

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import (automorphisms, product, sg, subalgebra, subuniverses, term_function_table)
from .closure import Coordinates, term_closure
from .congruence import con
from .formula import (EQ_CONJ, And, Eq, FormulaClassError, NotFunctional, classify, implicit_table,
                      render_formula)
from .terms import Var, render
from .verdict import BudgetExhausted, Proven, Refuted, SearchBudget, Unknown, as_tracker

CONDITIONS = ("nu", "majority", "malcev", "pixley", "discriminator")


@dataclass(frozen=True)
class TermCondition:
    kind: str
    arity: int = 3

    def __post_init__(self):
        if self.kind not in CONDITIONS:
            raise ValueError(f"unknown term condition {self.kind}")
        if self.kind == "nu" and self.arity < 3:
            raise ValueError("near-unanimity needs arity >= 3")
        if self.kind != "nu":
            object.__setattr__(self, "arity", 3)

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text.startswith("nu"):
            rest = text[2:].strip("():_ ")
            return cls("nu", int(rest) if rest else 3)
        return cls(text)

    def __str__(self):
        return f"nu({self.arity})" if self.kind == "nu" else self.kind

    def shapes(self, n):
        """(point, required value) pairs the identities constrain on a universe of size n."""
        out = {}
        k = self.arity
        if self.kind in ("nu", "majority"):
            for a, b in itertools.product(range(n), repeat=2):
                for i in range(k):
                    pt = [a] * k
                    pt[i] = b
                    out[tuple(pt)] = a
        elif self.kind in ("malcev", "pixley"):
            for a, b in itertools.product(range(n), repeat=2):
                out[(a, b, b)] = a
                out[(b, b, a)] = a
                if self.kind == "pixley":
                    out[(a, b, a)] = a
        else:
            for a, b, c in itertools.product(range(n), repeat=3):
                out[(a, b, c)] = c if a == b else a
        return sorted(out.items())

    def holds(self, A, table):
        """Check the identity schema at every tuple of the constrained shapes."""
        for pt, v in self.shapes(A.size):
            if table[_index(pt, A.size)] != v:
                return False
        return True


def _index(pt, n):
    i = 0
    for a in pt:
        i = i * n + a
    return i


def term_condition_search(A, cond, budget=None, lattice_fallback=True):
    """Search a term satisfying cond on A (hence in V(A)).

    Proven carries the term and its table over A^k; Refuted only when the
    closure over the constrained coordinates is exhausted without a hit.
    """
    if isinstance(cond, str):
        cond = TermCondition.parse(cond)
    tr = as_tracker(budget)
    k = cond.arity
    names = [f"x{i}" for i in range(1, k + 1)]
    shapes = cond.shapes(A.size)
    coords = Coordinates(A.signature, k).add(A, [p for p, _ in shapes])
    goal = np.array([v for _, v in shapes], dtype=np.int64)
    try:
        res = term_closure(coords, names, tr, goal=goal)
    except BudgetExhausted as e:
        res = None
        bound = e.bound()
    if res is not None and res.found is not None:
        return _proven(A, cond, res.term(res.found), names)
    if res is not None and res.exhausted:
        return Refuted({"condition": str(cond), "closure_size": len(res), "exhausted": True})
    if lattice_fallback and cond.kind in ("majority", "nu"):
        t = lattice_nu_term(A, k, budget)
        if t is not None:
            return _proven(A, cond, t, names, note="composed from a definable lattice reduct")
    return Unknown(bound if res is None else {"closure_size": len(res)})


def _proven(A, cond, t, names, note=""):
    table = term_function_table(A, t, names)
    if not cond.holds(A, table):
        raise AssertionError(f"witness for {cond} fails its identities")
    return Proven({"condition": str(cond), "term": render(t), "table": list(table), "_term": t}, note)


def lattice_nu_term(A, k=3, budget=None):
    """If some binary term operations form a lattice on A, the k-ary
    near-unanimity term join over i of meet of all x_j with j != i."""
    tr = as_tracker(SearchBudget(max_elements=50_000, max_steps=50_000_000) if budget is None else budget)
    n = A.size
    pts = list(itertools.product(range(n), repeat=2))
    coords = Coordinates(A.signature, 2).add(A, pts)
    semis = []
    found = {}

    def is_semilattice(v):
        t = v.reshape(n, n)
        if not all(t[a, a] == a for a in range(n)):
            return False
        if not np.array_equal(t, t.T):
            return False
        return all(t[t[a, b], c] == t[a, t[b, c]] for a in range(n) for b in range(n) for c in range(n))

    def check(v):
        if not is_semilattice(v):
            return False
        t = v.reshape(n, n)
        for i, s in enumerate(semis):
            # absorption both ways
            if all(t[a, s[a, b]] == a and s[a, t[a, b]] == a for a in range(n) for b in range(n)):
                found["partner"] = i
                semis.append(t)
                return True
        semis.append(t)
        return False

    try:
        res = term_closure(coords, ["x", "y"], tr, goal=check)
    except BudgetExhausted:
        return None
    if res.found is None:
        return None
    # recover the two terms
    idx_new = res.found
    sem_terms = [i for i in range(len(res)) if is_semilattice(res.vectors[i])]
    partner = found["partner"]
    m_term, j_term = res.term(sem_terms[partner]), res.term(idx_new)
    xs = [Var(f"x{i}") for i in range(1, k + 1)]

    def sub(t, a, b):
        return t.substitute({"x": a, "y": b})

    def fold(t, items):
        out = items[0]
        for it in items[1:]:
            out = sub(t, out, it)
        return out

    parts = [fold(m_term, [xs[j] for j in range(k) if j != i]) for i in range(k)]
    return fold(j_term, parts)


def is_rigid(A, budget=None):
    return len(automorphisms(A, budget)) == 1


def is_primal(A, budget=None, route="auto"):
    """Primality of a finite algebra.

    route "reference": Pixley term + simple + rigid + no proper subalgebras.
    route "fast": a majority term and only the trivial subuniverses of A^2.
    route "auto": fast when a majority term is found, else reference.
    """
    tr = as_tracker(budget)
    try:
        cheap = _cheap_obstruction(A, tr)
        if cheap is not None:
            return cheap
        if route in ("auto", "fast"):
            maj = term_condition_search(A, TermCondition("majority"), tr)
            if maj.proven:
                return _fast_primal(A, maj, tr)
            if maj.refuted:
                # every primal algebra has a majority term function
                return Refuted({"route": "fast", "reason": "no majority term",
                                "closure_size": maj.witness["closure_size"]})
            if route == "fast":
                return Unknown({"reason": "no majority term found", "majority": maj.status})
        pix = term_condition_search(A, TermCondition("pixley"), tr)
        if pix.proven:
            return Proven({"route": "reference", "pixley": pix.witness["term"]})
        if pix.refuted:
            return Refuted({"route": "reference", "reason": "no Pixley term", "closure_size": pix.witness["closure_size"]})
        return Unknown(pix.witness)
    except BudgetExhausted as e:
        return Unknown(e.bound())


def _cheap_obstruction(A, tr):
    if A.size < 2:
        return Refuted({"reason": "trivial algebra"})
    for S in subuniverses(A, tr):
        if 0 < len(S) < A.size:
            return Refuted({"reason": "proper subuniverse", "subuniverse": sorted(S)})
    auts = automorphisms(A, tr)
    if len(auts) > 1:
        return Refuted({"reason": "nontrivial automorphism", "automorphism": list(auts[1].map)})
    for theta in con(A).elements:
        if not theta.is_identity() and not theta.is_total():
            return Refuted({"reason": "not simple", "congruence": str(theta)})
    return None


def _fast_primal(A, maj, tr):
    P, _ = product([A, A], max_size=A.size ** 2)
    diag = frozenset(P.index_of((a, a)) for a in A.universe)
    e0 = sg(P, [])
    if e0 and e0 != diag:
        return Refuted({"route": "fast", "reason": "subuniverse of A^2", "subuniverse": [P.label(x) for x in sorted(e0)]})
    for p in P.universe:
        tr.step()
        S = sg(P, [p])
        if S != diag and len(S) != P.size:
            return Refuted({"route": "fast", "reason": "subuniverse of A^2",
                            "subuniverse": [list(P.label(x)) for x in sorted(S)]})
    return Proven({"route": "fast", "majority": maj.witness["term"]})


# ------------------------------------------------------------ interpolants

def check_algebras(K, max_product=256):
    """Generators, their subalgebras and binary products, in that order."""
    gens = list(getattr(K, "generators", K))
    out, seen = [], set()

    def push(B):
        key = (B.name, B.size)
        if key not in seen:
            seen.add(key)
            out.append(B)

    for C in gens:
        push(C)
    for C in gens:
        for S in subuniverses(C):
            if 0 < len(S) < C.size:
                push(subalgebra(C, S, name=f"{C.name}[{','.join(map(str, sorted(S)))}]")[0])
    for i, j in itertools.combinations_with_replacement(range(len(gens)), 2):
        if gens[i].size * gens[j].size <= max_product:
            push(product([gens[i], gens[j]], max_size=max_product)[0])
    return out


def search_interpolant_term(K, f, inputs, output, budget=None, algebras=None):
    """First term (by size) agreeing with f on its domain in every check algebra.

    The candidates are the closure elements over the domain points, so an
    exhausted closure without a hit is a genuine refutation on that corpus.
    """
    tr = as_tracker(budget)
    inputs = list(inputs)
    algs = algebras if algebras is not None else check_algebras(K)
    sig = algs[0].signature
    coords = Coordinates(sig, len(inputs))
    goal = []
    try:
        for B in algs:
            tab = implicit_table(B, f, inputs, output, tr)
            if len(tab):
                coords.add(B, [a for a, _ in tab.values])
                goal.extend(v for _, v in tab.values)
    except NotFunctional as e:
        return Refuted({"reason": "not functional", **e.witness})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    names = inputs if inputs else []
    if not goal:
        t = Var(names[0]) if names else None
        return Proven({"term": render(t) if t else None, "_term": t, "note": "empty domain"})
    try:
        res = term_closure(coords, names, tr, goal=np.array(goal, dtype=np.int64))
    except BudgetExhausted as e:
        return Unknown(e.bound())
    if res.found is not None:
        t = res.term(res.found)
        return Proven({"term": render(t), "_term": t, "algebras": [B.name for B in algs]})
    if res.exhausted:
        return Refuted({"reason": "no term agrees on the check algebras", "closure_size": len(res),
                        "algebras": [B.name for B in algs]})
    return Unknown({"closure_size": len(res)})


def search_eq_interpolant(K, f, inputs, output, budget=None, max_equations=2, max_terms=40,
                          algebras=None, max_product=64):
    """Search a conjunction of equations, functional on the check algebras,
    whose partial function extends f there."""
    inputs = list(inputs)
    if classify(f) == EQ_CONJ:
        return Proven({"formula": render_formula(f), "_formula": f, "note": "already an equation conjunction"})
    if classify(f) not in ("pp",):
        raise FormulaClassError("eq-interpolant search needs a pp formula")
    tr = as_tracker(budget)
    algs = algebras if algebras is not None else check_algebras(K, max_product)
    sig = algs[0].signature
    variables = inputs + [output]
    coords = Coordinates(sig, len(variables))
    layout = []
    try:
        for B in algs:
            tab = implicit_table(B, f, inputs, output, tr)
            pts = list(itertools.product(B.universe, repeat=len(variables)))
            coords.add(B, pts)
            nin = B.size ** len(inputs)
            target = np.full(nin, -1, dtype=np.int64)
            for args, v in tab.values:
                target[_index(args, B.size)] = v
            layout.append((B, nin, B.size, target))
        res = term_closure(coords, variables, tr, goal=_stop_after(max_terms))
    except NotFunctional as e:
        return Refuted({"reason": "not functional", **e.witness})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    vecs = res.vectors[:max_terms]
    eqs = []
    for i, j in itertools.combinations(range(len(vecs)), 2):
        eqs.append(((i, j), vecs[i] == vecs[j]))
    eqs.sort(key=lambda e: (res.sizes[e[0][0]] + res.sizes[e[0][1]], e[0]))
    try:
        for m in range(1, max_equations + 1):
            for combo in itertools.combinations(range(len(eqs)), m):
                tr.step()
                mask = eqs[combo[0]][1]
                for c in combo[1:]:
                    mask = mask & eqs[c][1]
                if _mask_interpolates(mask, layout):
                    g = And(tuple(Eq(res.term(eqs[c][0][0]), res.term(eqs[c][0][1])) for c in combo))
                    if m == 1:
                        g = g.parts[0]
                    return Proven({"formula": render_formula(g), "_formula": g,
                                   "algebras": [B.name for B in algs]})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Unknown({"searched": f"conjunctions of <= {max_equations} equations over {len(vecs)} terms",
                    "algebras": [B.name for B in algs]})


def _stop_after(count):
    seen = [0]

    def check(_):
        seen[0] += 1
        return seen[0] >= count
    return check


def _mask_interpolates(mask, layout):
    start = 0
    for B, nin, n, target in layout:
        m = mask[start:start + nin * n].reshape(nin, n)
        start += nin * n
        counts = m.sum(axis=1)
        if (counts > 1).any():
            return False
        dom = target >= 0
        if not dom.any():
            continue
        rows = np.nonzero(dom)[0]
        if not m[rows, target[rows]].all():
            return False
    return True
