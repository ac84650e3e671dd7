"""Named finite algebras, formulas and counterexample gadgets."""

import itertools
import re
from functools import lru_cache

from .algebra import AlgebraError, Homomorphism, Signature, make_algebra, power, product, validate_algebra
from .formula import And, Eq, Exists, parse
from .terms import App, Var, app

# signatures -------------------------------------------------------------

LATTICE = Signature([("meet", 2), ("join", 2)])
BDL = Signature([("meet", 2), ("join", 2), ("0", 0), ("1", 0)])
BOOLEAN = Signature([("meet", 2), ("join", 2), ("0", 0), ("1", 0), ("neg", 1)])
RCDL = Signature([("meet", 2), ("join", 2), ("r", 3)])
HEYTING = Signature([("meet", 2), ("join", 2), ("imp", 2), ("0", 0), ("1", 0)])
HILBERT = Signature([("imp", 2)])
PDL = Signature([("meet", 2), ("join", 2), ("neg", 1), ("0", 0), ("1", 0)])
MONOID = Signature([("*", 2), ("1", 0)])
RING = Signature([("+", 2), ("*", 2), ("neg", 1), ("0", 0), ("1", 0)])
SEMILATTICE = Signature([("meet", 2)])

_x, _y = Var("x"), Var("y")
MV = Signature([("+", 2), ("neg", 1), ("0", 0)], derived={
    "*": (("x", "y"), app("neg", app("+", app("neg", _x), app("neg", _y)))),
    "1": ((), app("neg", App("0"))),
})


# algebras ----------------------------------------------------------------

def chain_heyting(n):
    """The n-element Heyting chain C_n on 0 < 1 < ... < n-1."""
    if n < 1:
        raise AlgebraError("chain size must be positive")
    top = n - 1
    return make_algebra(f"C{n}", HEYTING, n, {
        "meet": min, "join": max,
        "imp": lambda a, b: top if a <= b else b,
        "0": 0, "1": top,
    })


def _order(A):
    return lambda a, b: A.apply("meet", (a, b)) == a


def ordered_sum(A, B):
    """Heyting algebra with B stacked on A, gluing 1 of A to 0 of B."""
    for X in (A, B):
        if X.signature != HEYTING:
            raise AlgebraError("ordered sum needs Heyting algebras")
    topA = A.const("1")
    low = [a for a in A.universe if a != topA]
    m = len(low)
    size = m + B.size
    leA, leB = _order(A), _order(B)

    def part(x):
        return ("A", low[x]) if x < m else ("B", x - m)

    def idx(p, v):
        if p == "A":
            # the top of A is glued to the bottom of B
            return m + B.const("0") if v == topA else low.index(v)
        return m + v

    def le(x, y):
        (p, a), (q, b) = part(x), part(y)
        if p != q:
            return p == "A"
        return leA(a, b) if p == "A" else leB(a, b)

    def meet(x, y):
        (p, a), (q, b) = part(x), part(y)
        if p != q:
            return x if p == "A" else y
        X = A if p == "A" else B
        return idx(p, X.apply("meet", (a, b)))

    def join(x, y):
        (p, a), (q, b) = part(x), part(y)
        if p != q:
            return y if p == "A" else x
        X = A if p == "A" else B
        return idx(p, X.apply("join", (a, b)))

    top = m + B.const("1")

    def imp(x, y):
        if le(x, y):
            return top
        (p, a), (q, b) = part(x), part(y)
        if p == q:
            X = A if p == "A" else B
            return idx(p, X.apply("imp", (a, b)))
        return y  # x above, y below

    bottom = idx("A", A.const("0"))
    return make_algebra(f"{A.name}+{B.name}", HEYTING, size, {
        "meet": meet, "join": join, "imp": imp, "0": bottom, "1": top})


def pseudocomplement_table(size, meet, bottom):
    """neg a = the largest b with a meet b = bottom (checked to exist)."""
    le = lambda a, b: meet(a, b) == a
    out = []
    for a in range(size):
        cands = [b for b in range(size) if meet(a, b) == bottom]
        best = [b for b in cands if all(le(c, b) for c in cands)]
        if len(best) != 1:
            raise AlgebraError(f"no pseudocomplement for {a}")
        out.append(best[0])
    return out


def bool_top_pdl(k):
    """Boolean lattice 2^k with a new top adjoined, as a p-algebra."""
    if k < 0:
        raise AlgebraError("k must be nonnegative")
    nb = 2 ** k
    top = nb
    size = nb + 1

    def meet(a, b):
        if a == top:
            return b
        if b == top:
            return a
        return a & b

    def join(a, b):
        if a == top or b == top:
            return top
        return a | b

    neg = pseudocomplement_table(size, meet, 0)
    A = make_algebra(f"B{k}+1", PDL, size, {
        "meet": meet, "join": join, "neg": lambda a: neg[a], "0": 0, "1": top})
    # pseudocomplement law: a meet b = 0 iff b <= neg a
    for a in range(size):
        for b in range(size):
            if (meet(a, b) == 0) != (meet(b, neg[a]) == b):
                raise AlgebraError("pseudocomplement law fails")
    return A


def heyting_of_lattice(A):
    """Heyting implication of a finite distributive lattice with 0, 1."""
    n = A.size
    le = _order(A)

    def imp(a, b):
        cands = [c for c in range(n) if le(A.apply("meet", (c, a)), b)]
        best = [c for c in cands if all(le(d, c) for d in cands)]
        return best[0]

    return [[imp(a, b) for b in range(n)] for a in range(n)]


def lukasiewicz(n):
    """The MV chain with elements 0, 1/n, ..., 1 (index m is m/n)."""
    if n < 1:
        raise AlgebraError("n must be positive")
    return make_algebra(f"L{n}", MV, n + 1, {
        "+": lambda a, b: min(a + b, n), "neg": lambda a: n - a, "0": 0})


def lukasiewicz_with_constant(n):
    """Lukasiewicz chain expanded with a constant for 1/n."""
    L = lukasiewicz(n)
    sig = Signature(list(MV.symbols) + [("c", 0)], MV.derived)
    return validate_algebra(f"L{n}[1/{n}]", sig, L.size, dict(L.tables, c=1))


def zmod_ring(p):
    if p < 1:
        raise AlgebraError("modulus must be positive")
    return make_algebra(f"Z{p}", RING, p, {
        "+": lambda a, b: (a + b) % p, "*": lambda a, b: (a * b) % p,
        "neg": lambda a: (-a) % p, "0": 0, "1": 1 % p})


def zmod_group(n):
    """Cyclic group Z_n written multiplicatively, in the monoid signature."""
    return make_algebra(f"G{n}", MONOID, n, {"*": lambda a, b: (a + b) % n, "1": 0})


def monoid_c(r):
    """Monoid c^0, ..., c^{r+1} with c^i c^j = c^min(i+j, r+1)."""
    if r < 1:
        raise AlgebraError("r must be positive")
    top = r + 1
    return make_algebra(f"M{r}", MONOID, r + 2, {
        "*": lambda a, b: a + b if a + b < top else top, "1": 0})


def d2_bdl():
    return make_algebra("D2", BDL, 2, {"meet": min, "join": max, "0": 0, "1": 1})


def d2_boolean():
    return make_algebra("B2", BOOLEAN, 2, {"meet": min, "join": max, "0": 0, "1": 1, "neg": lambda a: 1 - a})


def d2_lattice():
    return make_algebra("L2", LATTICE, 2, {"meet": min, "join": max})


def d2_rcdl():
    def r(a, b, c):
        lo, hi = min(a, b, c), max(a, b, c)
        return a if lo == hi else lo + hi - a
    return make_algebra("D2r", RCDL, 2, {"meet": min, "join": max, "r": r})


def chain_semilattice(n):
    return make_algebra(f"S{n}", SEMILATTICE, n, {"meet": min})


def hilbert_chain(n):
    """Implication reduct of the Heyting chain C_n."""
    return chain_heyting(n).reduct(["imp"]).renamed(f"C{n}imp")


def heyting_chain_meet_imp(n):
    return chain_heyting(n).reduct(["meet", "imp"]).renamed(f"C{n}mi")


# small monoids --------------------------------------------------------------

@lru_cache(maxsize=None)
def small_monoids(max_size=4, commutative=False):
    """All monoids of size <= max_size up to isomorphism, identity = 0."""
    out = []
    for n in range(1, max_size + 1):
        found = []
        _fill_monoids(n, commutative, found)
        reps = []
        seen = set()
        for t in found:
            key = _monoid_canon(t, n)
            if key not in seen:
                seen.add(key)
                reps.append(t)
        for i, t in enumerate(sorted(reps)):
            out.append(make_algebra(f"Mon{n}.{i}", MONOID, n, {"*": lambda a, b, t=t: t[a * n + b], "1": 0}))
    return tuple(out)


def _fill_monoids(n, commutative, found):
    t = [None] * (n * n)
    for a in range(n):
        t[a] = a
        t[a * n] = a
    cells = [(a, b) for a in range(1, n) for b in range(1, n) if not commutative or a <= b]

    def ok():
        for a in range(n):
            for b in range(n):
                ab = t[a * n + b]
                if ab is None:
                    continue
                for c in range(n):
                    bc = t[b * n + c]
                    if bc is None:
                        continue
                    l, r = t[ab * n + c], t[a * n + bc]
                    if l is not None and r is not None and l != r:
                        return False
        return True

    def rec(i):
        if i == len(cells):
            found.append(tuple(t))
            return
        a, b = cells[i]
        for v in range(n):
            t[a * n + b] = v
            if commutative:
                t[b * n + a] = v
            if ok():
                rec(i + 1)
        t[a * n + b] = None
        if commutative:
            t[b * n + a] = None

    rec(0)


def _monoid_canon(t, n):
    best = None
    for perm in itertools.permutations(range(1, n)):
        p = (0,) + perm
        inv = [0] * n
        for i, v in enumerate(p):
            inv[v] = i
        key = tuple(inv[t[p[a] * n + p[b]]] for a in range(n) for b in range(n))
        if best is None or key < best:
            best = key
    return best


# formulas ------------------------------------------------------------------

def complement():
    return parse("meet(x, y) = 0 & join(x, y) = 1", BDL)


def relative_complement():
    return parse("meet(x1, y) = meet(meet(x1, x2), x3) & join(x1, y) = join(join(x1, x2), x3)", LATTICE)


def monoid_inverse():
    return parse("x * y = 1 & y * x = 1", MONOID)


def weak_inverse():
    return parse("x^2 * y = x & x * y^2 = y", RING)


def hilbert_meet():
    # the constant 1 is the term x1 -> x1 in the pure implication signature
    one = "imp(x1, x1)"
    return parse(f"imp(y, x1) = {one} & imp(y, x2) = {one} & imp(x1, imp(x2, y)) = {one}", HILBERT)


def pdl_implication():
    # a <= b is written meet(a, b) = a
    return parse(
        "meet(meet(x1, y), x2) = meet(x1, y)"
        " & meet(join(neg(x1), x2), y) = join(neg(x1), x2)"
        " & neg(join(neg(x1), x2)) = neg(y)"
        " & join(y, x1) = join(neg(neg(y)), x1)", PDL)


def mv_division(n):
    """n.y = x and y * ((n-1).y) = 0 (defines x / n)."""
    if n < 1:
        raise ValueError("n must be positive")
    return parse(f"{n}.y = x & y * ({n - 1}.y) = 0", MV)


def mv_constant(n):
    """n.y = 1 and y * ((n-1).y) = 0 (defines the constant 1/n)."""
    if n < 1:
        raise ValueError("n must be positive")
    return parse(f"{n}.y = 1 & y * ({n - 1}.y) = 0", MV)


def isbell_formula(n):
    """Isbell's zigzag formula with inputs x1..x_{2n+1} and output y."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = [None] + [Var(f"x{i}") for i in range(1, 2 * n + 2)]
    z = [None] + [Var(f"z{i}") for i in range(1, n + 1)]
    w = [None] + [Var(f"w{i}") for i in range(1, n + 1)]
    y = Var("y")
    if n == 0:
        return Eq(x[1], y)
    m = lambda a, b: app("*", a, b)
    eqs = [Eq(y, m(x[1], z[1])), Eq(x[1], m(w[1], x[2]))]
    for i in range(1, n):
        eqs.append(Eq(m(x[2 * i], z[i]), m(x[2 * i + 1], z[i + 1])))
        eqs.append(Eq(m(w[i], x[2 * i + 1]), m(w[i + 1], x[2 * i + 2])))
    eqs.append(Eq(m(x[2 * n], z[n]), x[2 * n + 1]))
    eqs.append(Eq(m(w[n], x[2 * n + 1]), y))
    ex = tuple(f"z{i}" for i in range(1, n + 1)) + tuple(f"w{i}" for i in range(1, n + 1))
    return Exists(ex, And(tuple(eqs)))


def isbell_inputs(n):
    return [f"x{i}" for i in range(1, 2 * n + 2)]


def square():
    return parse("y = x * x", MONOID)


def c5_counterexample():
    """C5, the subuniverse D of C5^2 and the homomorphism k: C5 -> C5^2."""
    C5 = chain_heyting(5)
    B, _ = product([C5, C5], name="C5^2")
    # c1..c5 are the elements 0..4
    pairs = [(0, 0), (1, 2), (3, 3), (4, 4)]
    D = frozenset(B.index_of(p) for p in pairs)
    kmap = [(0, 0), (1, 2), (3, 3), (4, 4), (4, 4)]
    k = Homomorphism(C5, B, tuple(B.index_of(p) for p in kmap))
    return C5, B, D, k


# ids ------------------------------------------------------------------------

ALGEBRAS = {
    "chain_heyting": chain_heyting, "ordered_sum": ordered_sum, "bool_top_pdl": bool_top_pdl,
    "lukasiewicz": lukasiewicz, "lukasiewicz_with_constant": lukasiewicz_with_constant,
    "zmod_ring": zmod_ring, "zmod_group": zmod_group, "monoid_c": monoid_c,
    "d2_bdl": d2_bdl, "d2_rcdl": d2_rcdl, "d2_boolean": d2_boolean, "d2_lattice": d2_lattice,
    "chain_semilattice": chain_semilattice, "hilbert_chain": hilbert_chain,
    "power": power, "product": lambda *xs: product(list(xs))[0],
}

FORMULAS = {
    "complement": complement, "relative_complement": relative_complement,
    "monoid_inverse": monoid_inverse, "weak_inverse": weak_inverse, "hilbert_meet": hilbert_meet,
    "pdl_implication": pdl_implication, "mv_division": mv_division, "mv_constant": mv_constant,
    "isbell_formula": isbell_formula, "square": square,
}

# default (inputs, output) for gallery formulas
FORMULA_IO = {
    "complement": (["x"], "y"), "relative_complement": (["x1", "x2", "x3"], "y"),
    "monoid_inverse": (["x"], "y"), "weak_inverse": (["x"], "y"), "hilbert_meet": (["x1", "x2"], "y"),
    "pdl_implication": (["x1", "x2"], "y"), "mv_division": (["x"], "y"), "mv_constant": ([], "y"),
    "square": (["x"], "y"),
}

_ID = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(\(|)")


def parse_id(text):
    """Parse 'name(arg, ...)' where args are integers or nested ids."""
    pos = 0

    def node():
        nonlocal pos
        m = re.compile(r"\s*(-?\d+)").match(text, pos)
        if m:
            pos = m.end()
            return int(m.group(1))
        m = _ID.match(text, pos)
        if not m:
            raise ValueError(f"bad gallery id {text!r}")
        pos = m.end()
        name, args = m.group(1), []
        if m.group(2):
            if re.compile(r"\s*\)").match(text, pos):
                pos = re.compile(r"\s*\)").match(text, pos).end()
                return (name, args)
            while True:
                args.append(node())
                m2 = re.compile(r"\s*([,)])").match(text, pos)
                if not m2:
                    raise ValueError(f"bad gallery id {text!r}")
                pos = m2.end()
                if m2.group(1) == ")":
                    break
        return (name, args)

    out = node()
    if text[pos:].strip():
        raise ValueError(f"trailing text in gallery id {text!r}")
    return out


def build(tree, table):
    if isinstance(tree, int):
        return tree
    name, args = tree
    if name not in table:
        raise ValueError(f"unknown gallery item {name}")
    return table[name](*[build(a, ALGEBRAS) if not isinstance(a, int) else a for a in args])


def gallery_algebra(text):
    return build(parse_id(text), ALGEBRAS)


def gallery_formula(text):
    return build(parse_id(text), FORMULAS)


def gallery_names():
    return {"algebras": sorted(ALGEBRAS), "formulas": sorted(FORMULAS)}
