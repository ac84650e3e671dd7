"""Classes generated by finitely many finite algebras: membership,
subdirect decompositions, RSI members, free and finitely presented algebras."""

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import (AlgebraError, FiniteAlgebra, dedupe_isomorphic, enumerate_embeddings, enumerate_homs,
                      generating_set, is_homomorphism, same_signature, subalgebra, subuniverses,
                      trivial_algebra)
from .closure import Coordinates, _compositions, term_closure
from .congruence import Congruence, con_k, is_rsi
from .formula import And, Eq, Implies, pp_disjuncts, render_formula, solve
from .terms import App, Var, eval_term
from .verdict import BudgetExhausted, Proven, Refuted, Unknown, as_tracker

Q, U, V = "Q", "U", "V"


@dataclass(frozen=True)
class ClassSpec:
    generators: tuple
    operator: str = Q

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise AlgebraError("a class needs at least one generator")
        if not same_signature(*gens):
            raise AlgebraError("generators must share a signature")
        if self.operator not in (Q, U, V):
            raise AlgebraError(f"unknown class operator {self.operator}")
        object.__setattr__(self, "generators", gens)

    @property
    def signature(self):
        return self.generators[0].signature

    def describe(self):
        return f"{self.operator}({', '.join(A.name for A in self.generators)})"


def as_class(K, operator=Q):
    if isinstance(K, ClassSpec):
        return K
    if isinstance(K, FiniteAlgebra):
        K = [K]
    return ClassSpec(tuple(K), operator)


# ------------------------------------------------------------ membership

def membership(B, K, budget=None):
    K = as_class(K)
    tr = as_tracker(budget)
    if B.signature != K.signature:
        return Refuted({"reason": "signature mismatch"})
    try:
        if K.operator == U:
            return _member_u(B, K, tr)
        if K.operator == V:
            return _member_v(B, K, tr)
        return _member_q(B, K, tr)
    except BudgetExhausted as e:
        return Unknown(e.bound())


def _member_u(B, K, tr):
    for C in K.generators:
        embs = enumerate_embeddings(B, C, tr)
        if embs:
            return Proven({"generator": C.name, "embedding": list(embs[0].map)})
    return Refuted({"reason": "no embedding into any generator"})


def separating_homs(B, K, tr=None):
    """Homomorphisms into generators; returns (homs, first unseparated pair)."""
    homs = []
    for C in as_class(K).generators:
        homs.extend(enumerate_homs(B, C, tr))
    n = B.size
    for a in range(n):
        for b in range(a + 1, n):
            if not any(h.map[a] != h.map[b] for h in homs):
                return homs, (a, b)
    return homs, None


def _member_q(B, K, tr):
    homs, bad = separating_homs(B, K, tr)
    if bad is None:
        chosen = []
        n = B.size
        for a in range(n):
            for b in range(a + 1, n):
                if not any(h.map[a] != h.map[b] for h in chosen):
                    h = next(h for h in homs if h.map[a] != h.map[b])
                    chosen.append(h)
        return Proven({"separating": [{"codomain": h.target.name, "map": list(h.map)} for h in chosen]})
    qe = failing_quasiequation(B, K, bad, tr)
    return Refuted(dict(qe, unseparated=list(bad)))


def failing_quasiequation(B, K, pair, tr=None, max_term_size=3):
    """A quasiequation true in every generator but false in B.

    First a short search over one-premise quasiequations in one
    variable; otherwise the diagram of B over a generating set.
    """
    sig = B.signature
    gens = list(as_class(K).generators)
    terms = small_terms(sig, ["x"], max_term_size)
    for e in B.universe:
        vals_B = [eval_term(B, t, {"x": e}) for t in terms]
        vals_G = [[tuple(eval_term(C, t, {"x": c}) for c in C.universe) for t in terms] for C in gens]
        pairs = [(i, j) for i in range(len(terms)) for j in range(i + 1, len(terms))]
        for ci, cj in pairs:
            if vals_B[ci] == vals_B[cj]:
                continue
            for pi, pj in pairs:
                if vals_B[pi] != vals_B[pj]:
                    continue
                ok = True
                for C, G in zip(gens, vals_G):
                    for c in C.universe:
                        if G[pi][c] == G[pj][c] and G[ci][c] != G[cj][c]:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    q = Implies(Eq(terms[pi], terms[pj]), Eq(terms[ci], terms[cj]))
                    return {"quasiequation": render_formula(q), "at": {"x": e}}
    # fall back to the diagram of B
    gen = generating_set(B)
    names = {g: f"x{i}" for i, g in enumerate(gen)}
    reps = _term_reps(B, gen, names)
    prem = []
    for sym, k in sig:
        for args in itertools.product(B.universe, repeat=k):
            lhs = App(sym, tuple(reps[a] for a in args))
            rhs = reps[B.apply(sym, args)]
            if lhs != rhs:
                prem.append(Eq(lhs, rhs))
    a, b = pair
    q = Implies(And(tuple(prem)), Eq(reps[a], reps[b]))
    return {"quasiequation": render_formula(q), "at": {v: g for g, v in names.items()}}


def _term_reps(B, gen, names):
    reps = {g: Var(names[g]) for g in gen}
    for sym, k in B.signature:
        if k == 0:
            reps.setdefault(B.const(sym), App(sym))
    changed = True
    while changed:
        changed = False
        for sym, k in B.signature:
            if k == 0:
                continue
            for args in itertools.product(sorted(reps), repeat=k):
                v = B.apply(sym, args)
                if v not in reps:
                    reps[v] = App(sym, tuple(reps[a] for a in args))
                    changed = True
    return reps


def small_terms(sig, variables, max_size):
    """Terms up to max_size, in size order."""
    by_size = {1: [Var(v) for v in variables] + [App(s) for s, k in sig if k == 0]}
    for s in range(2, max_size + 1):
        out = []
        for sym, k in sig:
            if k == 0:
                continue
            for comp in _compositions(s - 1, k):
                for args in itertools.product(*[by_size.get(c, []) for c in comp]):
                    out.append(App(sym, tuple(args)))
        by_size[s] = out
    return [t for s in sorted(by_size) for t in by_size[s]]


def _member_v(B, K, tr):
    """Exact for finite B: B lies in V(K) iff its generators satisfy every
    relation of the free algebra of K on that many generators."""
    gen = generating_set(B)
    k = len(gen)
    F = free_closure(K, k, tr)
    if not F.exhausted:
        return Unknown({"reason": "free algebra closure unfinished"})
    asg = dict(zip(F.names, gen))
    # B is a quotient of F iff sending each minimal term to its value in B
    # is a homomorphism
    hmap = tuple(eval_term(B, F.term(i), asg) for i in range(len(F.vectors)))
    Falg, _ = free_algebra_from_closure(K, F)
    if is_homomorphism(Falg, B, hmap):
        return Proven({"free_generators": k, "free_size": Falg.size, "surjection": list(hmap)})
    # find an identity that fails: two F-equal terms with different B values
    for sym, kk in Falg.signature:
        for args in itertools.product(Falg.universe, repeat=kk):
            r = Falg.apply(sym, args)
            lhs_val = B.apply(sym, [hmap[a] for a in args])
            if lhs_val != hmap[r]:
                lhs = App(sym, tuple(F.term(a) for a in args))
                return Refuted({"identity": f"{lhs} = {F.term(r)}", "reason": "identity of K fails in B"})
    return Unknown({})


# ------------------------------------------------------ decompositions

def subdirect_decomposition(A, K, budget=None):
    """Completely meet-irreducible K-congruences meeting to the identity,
    pruned to an irredundant family."""
    K = as_class(K)
    tr = as_tracker(budget)
    L = con_k(A, K, tr)
    ident = Congruence.identity(A.size)
    if ident not in L.elements:
        raise AlgebraError(f"{A.name} is not in {K.describe()}")
    if A.size == 1:
        return []
    irr = []
    for i, t in enumerate(L.elements):
        if t.is_total():
            continue
        ups = [j for a, j in L.covers if a == i]
        if len(ups) == 1:
            irr.append(t)
    chosen = list(irr)
    for t in list(irr):
        rest = [s for s in chosen if s != t]
        if rest and _meet_all(rest, A.size) == ident:
            chosen = rest
    return chosen


def _meet_all(ts, n):
    out = Congruence.total(n)
    for t in ts:
        out = out.meet(t)
    return out


def rsi_members(K, budget=None):
    """RSI members of Q(K) up to isomorphism: nontrivial RSI subalgebras of generators."""
    K = as_class(K)
    tr = as_tracker(budget)
    cands = []
    for C in K.generators:
        for S in subuniverses(C, tr):
            if len(S) < 2:
                continue
            if len(S) == C.size:
                cands.append(C)
            else:
                cands.append(subalgebra(C, S, name=f"{C.name}[{','.join(map(str, sorted(S)))}]")[0])
    cands.sort(key=lambda B: B.size)
    reps = dedupe_isomorphic(cands, tr)
    return [B for B in reps if is_rsi(B, K, tr)]


# ---------------------------------------------------- free algebras

def free_coordinates(K, k):
    K = as_class(K)
    coords = Coordinates(K.signature, k)
    for C in K.generators:
        coords.add(C, itertools.product(C.universe, repeat=k))
    return coords


def free_closure(K, k, budget=None, names=None):
    names = names or [f"x{i}" for i in range(k)]
    coords = free_coordinates(K, k)
    res = term_closure(coords, names, budget)
    res.coords = coords
    return res


def free_algebra_from_closure(K, F, max_size=None):
    m = len(F.vectors)
    if max_size is not None and m > max_size:
        raise AlgebraError(f"free algebra has {m} elements, over the cap {max_size}")
    mats = np.stack(F.vectors) if m else np.zeros((0, 0), np.int64)
    index = F.index
    tables = {}
    for sym, k in as_class(K).signature:
        if k == 0:
            vec = F.coords.constant(sym)
            tables[sym] = (index[vec.tobytes()],)
            continue
        out = []
        for args in itertools.product(range(m), repeat=k):
            vec = np.empty(mats.shape[1], np.int64)
            for A, sl in F.coords.slices():
                t = A.np_tables[sym]
                acc = np.zeros(sl.stop - sl.start, np.int64)
                for a in args:
                    acc = acc * A.size + mats[a][sl]
                vec[sl] = t[acc]
            out.append(index[vec.tobytes()])
        tables[sym] = tuple(out)
    labels = tuple(str(F.term(i)) for i in range(m))
    name = f"F({','.join(F.names)})"
    return FiniteAlgebra(name, as_class(K).signature, m, tables, labels), list(range(len(F.names)))


def free_algebra(K, k, budget=None, max_size=4096):
    """Free algebra of Q(K) on k generators as a subalgebra of a power.

    Returns (algebra, generator elements) or raises BudgetExhausted.
    Element labels are minimal generating terms.
    """
    K = as_class(K)
    has_const = any(kk == 0 for _, kk in K.signature)
    if k < 1 and not has_const:
        raise AlgebraError("free algebra on no generators needs constants")
    F = free_closure(K, k, budget)
    if not F.exhausted:
        raise BudgetExhausted("closure", "unfinished")
    return free_algebra_from_closure(K, F, max_size)


def finitely_presented(f, K, budget=None, max_size=4096):
    """T_K(phi) for a pp formula phi: the subalgebra generated by the
    variable vectors in the product over all satisfying assignments.

    Returns (algebra, {variable: element}).  No satisfying assignment
    gives the trivial algebra.
    """
    K = as_class(K)
    tr = as_tracker(budget)
    d = pp_disjuncts(f)
    if d is None or len(d) != 1:
        raise ValueError("finitely presented algebras need a pp formula")
    (pp,) = d
    variables = sorted(f.free_vars) + [v for v in pp.exvars]
    variables = list(dict.fromkeys(variables))
    for e in pp.eqs:
        for v in sorted(e.lhs.variables | e.rhs.variables):
            if v not in variables:
                variables.append(v)
    coords = Coordinates(K.signature, len(variables))
    total = 0
    for C in K.generators:
        sols = list(solve(C, pp.eqs, variables, budget=tr))
        total += len(sols)
        coords.add(C, sols)
    if total == 0:
        T = trivial_algebra(K.signature, name="T(trivial)")
        return T, {v: 0 for v in variables}
    res = term_closure(coords, variables, tr)
    if not res.exhausted:
        raise BudgetExhausted("closure", "unfinished")
    res.coords = coords
    T, gens = free_algebra_from_closure(K, res, max_size)
    return T.renamed("T(phi)"), {v: res.index[coords.variable(i).tobytes()] for i, v in enumerate(variables)}
