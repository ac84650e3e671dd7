"""Congruences: generation, full and relative lattices, irreducibility,
congruence equations."""

import itertools
import re
from dataclasses import dataclass

from .algebra import enumerate_homs, table_index
from .verdict import BudgetExhausted, Proven, Refuted, Unknown

DEFAULT_CON_CAP = 20_000


def _canon(labels):
    seen = {}
    return tuple(seen.setdefault(b, len(seen)) for b in labels)


@dataclass(frozen=True)
class Congruence:
    """Equivalence on {0..n-1} given by canonical block labels."""
    labels: tuple

    @classmethod
    def from_labels(cls, labels):
        return cls(_canon(labels))

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    @classmethod
    def total(cls, n):
        return cls((0,) * n)

    @classmethod
    def from_blocks(cls, n, blocks):
        lab = list(range(n))
        for i, blk in enumerate(blocks):
            for x in blk:
                lab[x] = n + i
        return cls.from_labels(lab)

    @property
    def size(self):
        return len(self.labels)

    def blocks(self):
        out = {}
        for x, b in enumerate(self.labels):
            out.setdefault(b, []).append(x)
        return [tuple(v) for _, v in sorted(out.items())]

    def related(self, a, b):
        return self.labels[a] == self.labels[b]

    def pairs(self):
        return frozenset((a, b) for blk in self.blocks() for a in blk for b in blk)

    def leq(self, other):
        return all(other.labels[a] == other.labels[blk[0]] for blk in self.blocks() for a in blk)

    def meet(self, other):
        return Congruence.from_labels(tuple(zip(self.labels, other.labels)))

    def equiv_join(self, other):
        uf = _UF(self.size)
        for x in range(self.size):
            uf.union(x, self.blocks_rep[x])
            uf.union(x, other.blocks_rep[x])
        return Congruence.from_labels(tuple(uf.find(x) for x in range(self.size)))

    @property
    def blocks_rep(self):
        first = {}
        return [first.setdefault(b, x) for x, b in enumerate(self.labels)]

    def is_identity(self):
        return len(set(self.labels)) == self.size

    def is_total(self):
        return len(set(self.labels)) <= 1

    def num_blocks(self):
        return len(set(self.labels))

    def sort_key(self):
        return (-self.num_blocks(), self.labels)

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks())


class _UF:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.p[rb] = ra
        else:
            self.p[ra] = rb
        return True


def is_congruence(A, labels):
    lab = tuple(getattr(labels, "labels", labels))
    n = A.size
    for sym, k in A.signature:
        if k == 0:
            continue
        t = A.table(sym)
        for i in range(k):
            for args in itertools.product(A.universe, repeat=k):
                # compare with the tuple where position i is replaced by its block representative
                rep = list(args)
                rep[i] = lab.index(lab[args[i]])
                if lab[t[table_index(args, n)]] != lab[t[table_index(rep, n)]]:
                    return False
    return True


def cg(A, pairs):
    """Least congruence of A containing the given pairs."""
    n = A.size
    uf = _UF(n)
    work = []
    for a, b in pairs:
        if uf.union(a, b):
            work.append((a, b))
    ops = [(A.table(sym), k) for sym, k in A.signature if k > 0]
    while work:
        a, b = work.pop()
        for t, k in ops:
            if k == 1:
                if uf.union(t[a], t[b]):
                    work.append((t[a], t[b]))
                continue
            for i in range(k):
                for rest in itertools.product(range(n), repeat=k - 1):
                    args_a = rest[:i] + (a,) + rest[i:]
                    args_b = rest[:i] + (b,) + rest[i:]
                    u, v = t[table_index(args_a, n)], t[table_index(args_b, n)]
                    if uf.union(u, v):
                        work.append((u, v))
    return Congruence.from_labels(tuple(uf.find(x) for x in range(n)))


@dataclass
class CongruenceLattice:
    elements: list
    covers: list  # pairs (i, j) with elements[i] covered by elements[j]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, theta):
        return self.elements.index(theta)


def _with_covers(elems):
    elems = sorted(set(elems), key=Congruence.sort_key)
    leq = [[a.leq(b) for b in elems] for a in elems]
    covers = []
    for i in range(len(elems)):
        for j in range(len(elems)):
            if i != j and leq[i][j] and not any(
                    k not in (i, j) and leq[i][k] and leq[k][j] for k in range(len(elems))):
                covers.append((i, j))
    return CongruenceLattice(elems, covers)


def con(A, cap=DEFAULT_CON_CAP):
    """Con(A) via principal congruences closed under joins."""
    n = A.size
    principal = {cg(A, [(a, b)]) for a in range(n) for b in range(a + 1, n)}
    found = {Congruence.identity(n)} | principal
    frontier = set(found)
    while frontier:
        new = set()
        for x in frontier:
            for p in principal:
                j = x.equiv_join(p)
                if j not in found and j not in new:
                    new.add(j)
        found |= new
        if len(found) > cap:
            raise BudgetExhausted("congruences", cap)
        frontier = new
    return _with_covers(found)


def _gens(K):
    return list(getattr(K, "generators", K))


def kernels_into(A, K, budget=None):
    """Distinct kernels of homomorphisms from A into the generators of K."""
    out = set()
    for C in _gens(K):
        for h in enumerate_homs(A, C, budget):
            out.add(Congruence.from_labels(h.map))
    return sorted(out, key=Congruence.sort_key)


def cg_k(A, K, pairs, budget=None):
    """Least K-congruence containing pairs: intersection of the kernels
    (of homomorphisms into generators) that contain them; total if none."""
    pairs = list(pairs)
    theta = Congruence.total(A.size)
    for ker in kernels_into(A, K, budget):
        if all(ker.related(a, b) for a, b in pairs):
            theta = theta.meet(ker)
    return theta


def con_k(A, K, budget=None, cap=DEFAULT_CON_CAP):
    """Con_K(A): intersections of kernels into generators, plus the total relation."""
    kers = kernels_into(A, K, budget)
    found = {Congruence.total(A.size)}
    frontier = set(found)
    while frontier:
        new = set()
        for x in frontier:
            for k in kers:
                m = x.meet(k)
                if m not in found and m not in new:
                    new.add(m)
        found |= new
        if len(found) > cap:
            raise BudgetExhausted("congruences", cap)
        frontier = new
    return _with_covers(found)


def _lattice(A, K, budget=None):
    return con(A) if K is None else con_k(A, K, budget)


def is_rfsi(A, K=None, budget=None):
    """Identity is meet irreducible in Con_K(A) (false for trivial A)."""
    if A.size < 2:
        return False
    L = _lattice(A, K, budget)
    ident = Congruence.identity(A.size)
    if ident not in L.elements:
        return False
    others = [t for t in L.elements if t != ident]
    for a, b in itertools.combinations_with_replacement(others, 2):
        if a.meet(b) == ident:
            return False
    return True


def monolith(L, n):
    ident = Congruence.identity(n)
    if ident not in L.elements:
        return None
    i = L.index(ident)
    ups = [j for a, j in L.covers if a == i]
    return L.elements[ups[0]] if len(ups) == 1 else None


def is_rsi(A, K=None, budget=None):
    """Identity is completely meet irreducible (a unique upper cover)."""
    if A.size < 2:
        return False
    return monolith(_lattice(A, K, budget), A.size) is not None


def is_simple(A, K=None, budget=None):
    if A.size < 2:
        return False
    L = _lattice(A, K, budget)
    return len(L) == 2 and Congruence.identity(A.size) in L.elements


# ------------------------------------------------------ congruence equations

@dataclass(frozen=True)
class CTerm:
    op: str  # 'var', 'meet', 'join', 'comp'
    args: tuple = ()
    name: str = ""

    def variables(self):
        if self.op == "var":
            return [self.name]
        out = []
        for a in self.args:
            for v in a.variables():
                if v not in out:
                    out.append(v)
        return out

    def __str__(self):
        if self.op == "var":
            return self.name
        sym = {"meet": "&", "join": "|", "comp": "o"}[self.op]
        return f"({self.args[0]} {sym} {self.args[1]})"


@dataclass(frozen=True)
class CongruenceEquation:
    lhs: CTerm
    rhs: CTerm

    def variables(self):
        out = self.lhs.variables()
        for v in self.rhs.variables():
            if v not in out:
                out.append(v)
        return out

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


_CTOK = re.compile(r"\s*(∧|∨|∘|[()=&|]|o(?![A-Za-z0-9_])|[A-Za-z_][A-Za-z0-9_]*)")


def parse_congruence_equation(text):
    """Terms over '&' (meet), '|' (join) and 'o' (composition); 'o' binds
    tightest, then '&', then '|'."""
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _CTOK.match(text, pos)
        if not m:
            raise ValueError(f"bad congruence equation at column {pos + 1}")
        tok = {"∧": "&", "∨": "|", "∘": "o"}.get(m.group(1), m.group(1))
        toks.append(tok)
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take():
        nonlocal i
        i += 1
        return toks[i - 1]

    def level(ops, sub):
        def go():
            t = sub()
            while peek() in ops:
                op = take()
                t = CTerm({"|": "join", "&": "meet", "o": "comp"}[op], (t, sub()))
            return t
        return go

    def prim():
        t = take() if peek() is not None else None
        if t == "(":
            u = expr()
            if take() != ")":
                raise ValueError("expected ')'")
            return u
        if t is None or not re.match(r"[A-Za-z_]", t) or t == "o":
            raise ValueError(f"unexpected token {t!r}")
        return CTerm("var", name=t)

    comp = level({"o"}, prim)
    meet = level({"&"}, comp)
    expr = level({"|"}, meet)
    lhs = expr()
    if take() != "=":
        raise ValueError("expected '='")
    rhs = expr()
    if peek() is not None:
        raise ValueError(f"unexpected token {peek()!r}")
    return CongruenceEquation(lhs, rhs)


def _compose(r, s):
    by_first = {}
    for b, c in s:
        by_first.setdefault(b, []).append(c)
    return frozenset((a, c) for a, b in r for c in by_first.get(b, ()))


def check_congruence_equation(A, K, e, budget=None, tuple_cap=200_000):
    """Evaluate e over all tuples of Con_K(A) (Con(A) when K is None).

    meet is intersection, join is the least K-congruence containing the
    union, and o is relational composition.
    """
    if isinstance(e, str):
        e = parse_congruence_equation(e)
    try:
        L = _lattice(A, K, budget)
    except BudgetExhausted as ex:
        return Unknown(ex.bound())
    elems = [t.pairs() for t in L.elements]
    vs = e.variables()
    if len(elems) ** len(vs) > tuple_cap:
        return Unknown({"exhausted": "tuples", "limit": tuple_cap})
    join_cache = {}
    kers = None if K is None else [(k, k.pairs()) for k in kernels_into(A, K, budget)]

    def join(r, s):
        key = (r, s)
        if key not in join_cache:
            u = r | s
            if K is None:
                theta = cg(A, u)
            else:
                theta = Congruence.total(A.size)
                for k, kp in kers:
                    if u <= kp:
                        theta = theta.meet(k)
            join_cache[key] = theta.pairs()
        return join_cache[key]

    def ev(t, env):
        if t.op == "var":
            return env[t.name]
        a, b = ev(t.args[0], env), ev(t.args[1], env)
        if t.op == "meet":
            return a & b
        if t.op == "join":
            return join(a, b)
        return _compose(a, b)

    for combo in itertools.product(range(len(elems)), repeat=len(vs)):
        env = {v: elems[i] for v, i in zip(vs, combo)}
        l, r = ev(e.lhs, env), ev(e.rhs, env)
        if l != r:
            diff = sorted(l ^ r)[0]
            return Refuted({"assignment": {v: str(L.elements[i]) for v, i in zip(vs, combo)},
                            "differs_at": list(diff)})
    return Proven({"lattice_size": len(elems), "tuples": len(elems) ** len(vs)})
