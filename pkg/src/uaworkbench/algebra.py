"""Finite algebras, constructions and homomorphism search."""

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .terms import App, Var, eval_term
from .verdict import BudgetExhausted, Proven, Refuted, Unknown, as_tracker, map_ordered

DEFAULT_SIZE_CAP = 64


class AlgebraError(ValueError):
    pass


class Signature:
    """Ordered operation symbols with arities.

    `derived` holds macros (name -> (params, template term)) that the
    formula parser expands; they are not part of the algebra's tables.
    """

    def __init__(self, symbols, derived=None):
        symbols = tuple((str(s), int(k)) for s, k in symbols)
        names = [s for s, _ in symbols]
        if len(set(names)) != len(names):
            raise AlgebraError("duplicate symbol in signature")
        if any(k < 0 for _, k in symbols):
            raise AlgebraError("negative arity")
        self.symbols = symbols
        self._arity = dict(symbols)
        self.derived = dict(derived or {})

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def arity(self, name):
        return self._arity[name]

    @property
    def names(self):
        return [s for s, _ in self.symbols]

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return "Signature(" + ", ".join(f"{s}/{k}" for s, k in self.symbols) + ")"

    def extend(self, extra):
        return Signature(list(self.symbols) + list(extra), self.derived)

    def restrict(self, names):
        keep = set(names)
        return Signature([(s, k) for s, k in self.symbols if s in keep], self.derived)

    @property
    def max_arity(self):
        return max((k for _, k in self.symbols), default=0)


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    name: str
    signature: Signature
    size: int
    tables: dict
    labels: tuple = None
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        tables = {s: tuple(self.tables[s]) for s in self.signature.names}
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "_key", (self.signature.symbols, self.size, tuple(tables[s] for s in self.signature.names)))

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, size={self.size}, {self.signature!r})"

    @property
    def universe(self):
        return range(self.size)

    def table(self, sym):
        return self.tables[sym]

    def apply(self, sym, args):
        n = self.size
        i = 0
        for a in args:
            i = i * n + a
        return self.tables[sym][i]

    def const(self, sym):
        return self.tables[sym][0]

    @cached_property
    def np_tables(self):
        return {s: np.asarray(t, dtype=np.int64) for s, t in self.tables.items()}

    def label(self, x):
        return x if self.labels is None else self.labels[x]

    def index_of(self, label):
        if self.labels is None:
            return int(label)
        return self._label_index[_freeze(label)]

    @cached_property
    def _label_index(self):
        return {_freeze(l): i for i, l in enumerate(self.labels)}

    def renamed(self, name):
        return FiniteAlgebra(name, self.signature, self.size, self.tables, self.labels)

    def reduct(self, names):
        sig = self.signature.restrict(names)
        return FiniteAlgebra(self.name, sig, self.size, {s: self.tables[s] for s in sig.names}, self.labels)

    def is_trivial(self):
        return self.size == 1


def _freeze(x):
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(y) for y in x)
    return x


def table_index(args, n):
    i = 0
    for a in args:
        i = i * n + a
    return i


def make_algebra(name, signature, size, funcs, labels=None):
    """Build an algebra from python callables (one per symbol)."""
    tables = {}
    for sym, k in signature:
        f = funcs[sym]
        if k == 0:
            tables[sym] = (f() if callable(f) else f,)
        else:
            tables[sym] = tuple(f(*args) for args in itertools.product(range(size), repeat=k))
    return validate_algebra(name, signature, size, tables, labels)


def validate_algebra(name, signature, size, tables, labels=None):
    """Check a raw table set and return a FiniteAlgebra.

    tables maps symbol -> flat row-major sequence, nested lists, or a
    scalar for constants.  Errors name the symbol and the offending entry.
    """
    if not isinstance(signature, Signature):
        signature = Signature(signature)
    if not isinstance(size, int) or size < 1:
        raise AlgebraError(f"size must be a positive integer, got {size!r}")
    extra = set(tables) - set(signature.names)
    if extra:
        raise AlgebraError(f"extra table for undeclared symbol {sorted(extra)[0]}")
    flat = {}
    for sym, k in signature:
        if sym not in tables:
            raise AlgebraError(f"missing table for {sym}")
        raw = tables[sym]
        if k == 0:
            if isinstance(raw, (list, tuple)):
                if len(raw) != 1:
                    raise AlgebraError(f"wrong table shape for {sym}: constant needs one value")
                raw = raw[0]
            vals = [raw]
        else:
            vals = _flatten(raw, k, size, sym)
        for pos, v in enumerate(vals):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise AlgebraError(f"non-integer entry in {sym} at {_unflat(pos, k, size)}")
            if not 0 <= v < size:
                raise AlgebraError(f"value out of range in {sym} at {_unflat(pos, k, size)}: {v}")
        flat[sym] = tuple(int(v) for v in vals)
    if labels is not None and len(labels) != size:
        raise AlgebraError("labels do not match size")
    return FiniteAlgebra(name, signature, size, flat, tuple(labels) if labels is not None else None)


def _flatten(raw, k, n, sym):
    if isinstance(raw, np.ndarray):
        raw = raw.tolist()
    if isinstance(raw, (list, tuple)) and len(raw) == n ** k and (k == 1 or not raw or not isinstance(raw[0], (list, tuple))):
        return list(raw)

    def walk(x, depth):
        if depth == k:
            if isinstance(x, (list, tuple)):
                raise AlgebraError(f"wrong table shape for {sym}")
            return [x]
        if not isinstance(x, (list, tuple)) or len(x) != n:
            raise AlgebraError(f"wrong table shape for {sym}: expected {n} entries at depth {depth}")
        out = []
        for y in x:
            out.extend(walk(y, depth + 1))
        return out

    return walk(raw, 0)


def _unflat(pos, k, n):
    out = []
    for _ in range(k):
        out.append(pos % n)
        pos //= n
    return tuple(reversed(out))


def nested_table(A, sym):
    """Row-major nested list form (scalar for constants)."""
    k = A.signature.arity(sym)
    flat = list(A.table(sym))
    if k == 0:
        return flat[0]
    for _ in range(k - 1):
        n = A.size
        flat = [flat[i:i + n] for i in range(0, len(flat), n)]
    return flat


def same_signature(*algebras):
    sigs = {a.signature.symbols for a in algebras}
    return len(sigs) <= 1


# ---------------------------------------------------------------- closure

def sg(A, X):
    """Least subuniverse of A containing X, as a frozenset."""
    S = set(X)
    for x in S:
        if not 0 <= x < A.size:
            raise AlgebraError(f"element {x} outside universe")
    for sym, k in A.signature:
        if k == 0:
            S.add(A.const(sym))
    return frozenset(_close(A, S))


def _close(A, S, new=None):
    S = set(S)
    frontier = set(S) if new is None else set(new)
    ops = [(sym, k, A.table(sym)) for sym, k in A.signature if k > 0]
    n = A.size
    while frontier:
        found = set()
        cur = sorted(S)
        for sym, k, table in ops:
            if k == 1:
                for a in frontier:
                    v = table[a]
                    if v not in S:
                        found.add(v)
            elif k == 2:
                for a in frontier:
                    row = a * n
                    for b in cur:
                        v = table[row + b]
                        if v not in S:
                            found.add(v)
                        v = table[b * n + a]
                        if v not in S:
                            found.add(v)
            else:
                for args in itertools.product(cur, repeat=k):
                    if frontier.isdisjoint(args):
                        continue
                    v = table[table_index(args, n)]
                    if v not in S:
                        found.add(v)
        S |= found
        frontier = found
    return S


def is_subuniverse(A, X):
    return sg(A, X) == frozenset(X)


def subalgebra(A, X, name=None):
    """Subalgebra on the subuniverse X (must be closed and nonempty).

    Returns (algebra, embedding tuple mapping new index -> old element).
    """
    elems = sorted(X)
    if not elems:
        raise AlgebraError("empty subuniverse has no algebra")
    if sg(A, elems) != frozenset(elems):
        raise AlgebraError("not a subuniverse")
    pos = {e: i for i, e in enumerate(elems)}
    m = len(elems)
    tables = {}
    for sym, k in A.signature:
        if k == 0:
            tables[sym] = (pos[A.const(sym)],)
        else:
            tables[sym] = tuple(pos[A.apply(sym, [elems[i] for i in args])]
                                for args in itertools.product(range(m), repeat=k))
    labels = tuple(A.label(e) for e in elems)
    B = FiniteAlgebra(name or f"{A.name}|{len(elems)}", A.signature, m, tables, labels)
    return B, tuple(elems)


def subuniverses(A, budget=None, nonempty=True):
    """All subuniverses of A, sorted by (size, elements)."""
    tr = as_tracker(budget)
    base = sg(A, ())
    seen = {base}
    stack = [base]
    while stack:
        S = stack.pop()
        for a in A.universe:
            if a in S:
                continue
            T = frozenset(_close(A, S | {a}, {a}))
            tr.step()
            if T not in seen:
                seen.add(T)
                tr.elements(len(seen))
                stack.append(T)
    out = [S for S in seen if S or not nonempty]
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def generating_set(A):
    """Greedy small generating set (in element order)."""
    gens = []
    S = sg(A, ())
    for a in A.universe:
        if a not in S:
            gens.append(a)
            S = frozenset(_close(A, S | {a}, {a}))
    return gens


# ------------------------------------------------------------ constructions

def product(algebras, signature=None, name=None, max_size=DEFAULT_SIZE_CAP):
    """Direct product; returns (algebra, list of projection Homomorphisms).

    Elements are tuples in lexicographic order (first coordinate most
    significant).  The empty product is the trivial algebra and needs an
    explicit signature.
    """
    algebras = list(algebras)
    if not algebras:
        if signature is None:
            raise AlgebraError("empty product needs a signature")
        tables = {s: (0,) * 1 for s, _ in signature}
        return FiniteAlgebra(name or "trivial", signature, 1, tables, ((),)), []
    if not same_signature(*algebras):
        raise AlgebraError("signature mismatch in product")
    sig = algebras[0].signature
    sizes = [a.size for a in algebras]
    total = 1
    for s in sizes:
        total *= s
    if total > max_size:
        raise AlgebraError(f"product size {total} exceeds cap {max_size}")
    elems = list(itertools.product(*[range(s) for s in sizes]))
    pos = {e: i for i, e in enumerate(elems)}
    tables = {}
    for sym, k in sig:
        if k == 0:
            tables[sym] = (pos[tuple(a.const(sym) for a in algebras)],)
            continue
        cols = [a.table(sym) for a in algebras]
        out = []
        for args in itertools.product(elems, repeat=k):
            out.append(pos[tuple(cols[j][table_index([x[j] for x in args], sizes[j])] for j in range(len(algebras)))])
        tables[sym] = tuple(out)
    labels = tuple(tuple(a.label(x) for a, x in zip(algebras, e)) for e in elems)
    P = FiniteAlgebra(name or "x".join(a.name for a in algebras), sig, total, tables, labels)
    projections = [Homomorphism(P, a, tuple(e[j] for e in elems)) for j, a in enumerate(algebras)]
    return P, projections


def power(A, k, max_size=DEFAULT_SIZE_CAP):
    return product([A] * k, name=f"{A.name}^{k}", max_size=max_size)[0]


def trivial_algebra(signature, name="trivial"):
    return product([], signature=signature, name=name)[0]


def quotient(A, theta):
    """Quotient by a congruence (given as a Congruence or block-label tuple).

    Returns (algebra, canonical surjection).
    """
    blocks = tuple(getattr(theta, "labels", theta))
    if len(blocks) != A.size:
        raise AlgebraError("partition does not match universe")
    canon = _canonical_labels(blocks)
    m = max(canon) + 1
    reps = [None] * m
    for x, b in enumerate(canon):
        if reps[b] is None:
            reps[b] = x
    tables = {}
    for sym, k in A.signature:
        if k == 0:
            tables[sym] = (canon[A.const(sym)],)
            continue
        table = A.table(sym)
        # compatibility: every tuple must land in the block of its representative tuple
        for args in itertools.product(A.universe, repeat=k):
            rep = [reps[canon[a]] for a in args]
            if canon[table[table_index(args, A.size)]] != canon[table[table_index(rep, A.size)]]:
                raise AlgebraError(f"partition not compatible with {sym} at {args}")
        tables[sym] = tuple(canon[table[table_index([reps[b] for b in bargs], A.size)]]
                            for bargs in itertools.product(range(m), repeat=k))
    labels = tuple(tuple(A.label(x) for x in A.universe if canon[x] == b) for b in range(m))
    Q = FiniteAlgebra(f"{A.name}/~", A.signature, m, tables, labels)
    return Q, Homomorphism(A, Q, tuple(canon))


def _canonical_labels(blocks):
    seen = {}
    return tuple(seen.setdefault(b, len(seen)) for b in blocks)


# ---------------------------------------------------------- homomorphisms

@dataclass(frozen=True)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple

    def __call__(self, x):
        return self.map[x]

    def image(self, X=None):
        if X is None:
            return frozenset(self.map)
        return frozenset(self.map[x] for x in X)

    def kernel(self):
        return _canonical_labels(self.map)

    def is_injective(self):
        return len(set(self.map)) == len(self.map)

    def is_surjective(self):
        return len(set(self.map)) == self.target.size

    def compose(self, other):
        """self after other."""
        return Homomorphism(other.source, self.target, tuple(self.map[v] for v in other.map))


def is_homomorphism(A, B, h):
    h = tuple(h)
    if len(h) != A.size or any(not 0 <= v < B.size for v in h):
        return False
    for sym, k in A.signature:
        tA, tB = A.table(sym), B.table(sym)
        for args in itertools.product(A.universe, repeat=k):
            if h[tA[table_index(args, A.size)]] != tB[table_index([h[a] for a in args], B.size)]:
                return False
    return True


class _HomPlan:
    """Generator levels of A with derivations and table checks per level."""

    def __init__(self, A):
        self.A = A
        n = A.size
        level_of = [None] * n
        derivations = []  # per level: list of (elem, sym, args)
        checks = []       # per level: list of (sym, args, result)
        gens = [None]
        S = set()

        def grow(new_seed, lvl):
            deriv = []
            S_before = set(S)
            for x in new_seed:
                S.add(x)
                level_of[x] = lvl
            while True:
                added = []
                cur = sorted(S)
                for sym, k in A.signature:
                    if k == 0:
                        continue
                    for args in itertools.product(cur, repeat=k):
                        v = A.apply(sym, args)
                        if v not in S:
                            S.add(v)
                            level_of[v] = lvl
                            deriv.append((v, sym, args))
                            added.append(v)
                if not added:
                    break
            lvl_checks = []
            for sym, k in A.signature:
                if k == 0:
                    continue
                for args in itertools.product(sorted(S), repeat=k):
                    if all(a in S_before for a in args):
                        continue
                    lvl_checks.append((sym, args, A.apply(sym, args)))
            return deriv, lvl_checks

        const_seed = []
        const_checks = []
        for sym, k in A.signature:
            if k == 0:
                c = A.const(sym)
                const_checks.append((sym, c))
                if c not in const_seed:
                    const_seed.append(c)
        deriv, lvl_checks = grow(const_seed, 0)
        derivations.append(deriv)
        checks.append(lvl_checks)
        for a in A.universe:
            if a not in S:
                gens.append(a)
                deriv, lvl_checks = grow([a], len(gens) - 1)
                derivations.append(deriv)
                checks.append(lvl_checks)
        self.gens = gens
        self.const_seed = const_seed
        self.const_checks = const_checks
        self.derivations = derivations
        self.checks = checks


_plan_cache = {}


def _plan(A):
    key = A._key
    p = _plan_cache.get(key)
    if p is None:
        p = _HomPlan(A)
        if len(_plan_cache) > 512:
            _plan_cache.clear()
        _plan_cache[key] = p
    return p


def iter_homs(A, B, budget=None, constraint=None, injective=False):
    """Yield homomorphism maps A -> B (tuples) in search order.

    Raises BudgetExhausted when the step budget runs out.
    """
    if not same_signature(A, B):
        raise AlgebraError("signature mismatch")
    tr = as_tracker(budget)
    plan = _plan(A)
    constraint = dict(constraint or {})
    nA, nB = A.size, B.size
    if injective and nA > nB:
        return
    h = [None] * nA

    def consistent(x):
        c = constraint.get(x)
        return c is None or c == h[x]

    # constants
    for sym, c in plan.const_checks:
        v = B.const(sym)
        if h[c] is None:
            h[c] = v
        elif h[c] != v:
            return
    for c in plan.const_seed:
        if not consistent(c):
            return

    def extend(level):
        for v, sym, args in plan.derivations[level]:
            h[v] = B.apply(sym, [h[a] for a in args])
            if not consistent(v):
                return False
        for sym, args, res in plan.checks[level]:
            if B.apply(sym, [h[a] for a in args]) != h[res]:
                return False
        if injective:
            vals = [x for x in h if x is not None]
            if len(set(vals)) != len(vals):
                return False
        return True

    def clear(level):
        for v, _, _ in plan.derivations[level]:
            h[v] = None

    if not extend(0):
        return
    L = len(plan.gens)

    def rec(level):
        if level == L:
            yield tuple(h)
            return
        g = plan.gens[level]
        cands = [constraint[g]] if g in constraint else range(nB)
        for v in cands:
            tr.step()
            h[g] = v
            if extend(level):
                yield from rec(level + 1)
            clear(level)
            h[g] = None

    yield from rec(1)


def enumerate_homs(A, B, budget=None, constraint=None, injective=False):
    """All homomorphisms A -> B extending constraint, canonically sorted.

    Raises BudgetExhausted rather than returning a truncated list.
    """
    tr = as_tracker(budget)
    plan = _plan(A)
    if len(plan.gens) > 1 and nontrivial_split(plan, constraint):
        g = plan.gens[1]
        firsts = range(B.size)

        def branch(v):
            c = dict(constraint or {})
            c[g] = v
            return list(iter_homs(A, B, tr, c, injective))

        maps = [m for part in map_ordered(branch, firsts) for m in part]
    else:
        maps = list(iter_homs(A, B, tr, constraint, injective))
    return [Homomorphism(A, B, m) for m in sorted(maps)]


def nontrivial_split(plan, constraint):
    from .verdict import worker_count
    return worker_count() > 1 and not (constraint and plan.gens[1] in constraint)


def enumerate_embeddings(A, B, budget=None):
    return enumerate_homs(A, B, budget, injective=True)


def is_isomorphic(A, B, budget=None):
    if not same_signature(A, B):
        return Refuted({"reason": "signature mismatch"})
    if A.size != B.size:
        return Refuted({"reason": "sizes differ", "sizes": [A.size, B.size]})
    try:
        for m in iter_homs(A, B, budget, injective=True):
            return Proven(Homomorphism(A, B, m))
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Refuted({"reason": "no bijective homomorphism"})


def automorphisms(A, budget=None):
    return enumerate_homs(A, A, budget, injective=True)


def canonical_form(A, budget=None):
    """Lexicographically least relabelled table tuple; an isomorphism invariant."""
    best = None
    for perm in itertools.permutations(range(A.size)):
        inv = [0] * A.size
        for i, p in enumerate(perm):
            inv[p] = i
        key = []
        for sym, k in A.signature:
            t = A.table(sym)
            key.append(tuple(inv[t[table_index([perm[a] for a in args], A.size)]]
                             for args in itertools.product(A.universe, repeat=k)))
        key = tuple(key)
        if best is None or key < best:
            best = key
    return best


def dedupe_isomorphic(algebras, budget=None):
    """Keep the first representative of each isomorphism class."""
    kept = []
    for A in algebras:
        if not any(B.size == A.size and is_isomorphic(A, B, budget).proven for B in kept):
            kept.append(A)
    return kept


def term_function_table(A, t, variables):
    """Table of the term function of t over the listed variables."""
    return tuple(eval_term(A, t, dict(zip(variables, args)))
                 for args in itertools.product(A.universe, repeat=len(variables)))


__all__ = [
    "AlgebraError", "Signature", "FiniteAlgebra", "Homomorphism", "DEFAULT_SIZE_CAP",
    "validate_algebra", "make_algebra", "nested_table", "sg", "subalgebra", "subuniverses",
    "generating_set", "product", "power", "trivial_algebra", "quotient", "is_homomorphism",
    "iter_homs", "enumerate_homs", "enumerate_embeddings", "is_isomorphic", "automorphisms",
    "dedupe_isomorphic", "canonical_form", "term_function_table", "is_subuniverse", "App", "Var",
]
