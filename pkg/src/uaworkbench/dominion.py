"""Dominions, the strong epimorphism surjectivity property, absolutely
closed checks, monoid zigzags and unary power laws."""

import itertools
from dataclasses import dataclass, field

from .algebra import AlgebraError, Homomorphism, enumerate_homs, is_homomorphism, product, sg, subuniverses
from .classops import as_class, rsi_members
from .formula import solve
from .gallery import MONOID, isbell_formula, small_monoids
from .verdict import BudgetExhausted, Proven, Refuted, Unknown, as_tracker, map_ordered


@dataclass
class DominionReport:
    sub: frozenset
    big: object
    cls: object
    result: frozenset
    witnesses: dict = field(default_factory=dict)  # b -> (codomain, g map, h map)
    complete: bool = True
    bound: dict = None

    @property
    def extra(self):
        return sorted(self.result - self.sub)

    @property
    def trivial(self):
        return self.result == self.sub

    def as_dict(self):
        B = self.big
        out = {
            "sub": [_lab(B, x) for x in sorted(self.sub)],
            "big": B.name,
            "class": self.cls.describe() if hasattr(self.cls, "describe") else str(self.cls),
            "dominion": [_lab(B, x) for x in sorted(self.result)],
            "outside_sub": [_lab(B, x) for x in self.extra],
            "complete": self.complete,
            "separations": {str(_lab(B, b)): {"codomain": c, "g": list(g), "h": list(h)}
                            for b, (c, g, h) in sorted(self.witnesses.items())},
        }
        if self.bound:
            out["bound"] = self.bound
        return out


def _lab(B, x):
    lab = B.label(x)
    return list(lab) if isinstance(lab, tuple) else lab


def equalizer_dominion(A, B, codomains, budget=None):
    """Elements of B on which all pairs of homs B -> C agreeing on A agree.

    Returns (dominion, witnesses).  Homs are grouped by their restriction
    to A so that only pairs within a group are compared.
    """
    tr = as_tracker(budget)
    A = sorted(A)
    d = set(B.universe)
    witnesses = {}

    def per_codomain(C):
        groups = {}
        for h in enumerate_homs(B, C, tr):
            groups.setdefault(tuple(h.map[a] for a in A), []).append(h.map)
        return C.name, groups

    for name, groups in map_ordered(per_codomain, list(codomains)):
        for key in sorted(groups):
            hs = groups[key]
            if len(hs) < 2:
                continue
            first = hs[0]
            for b in sorted(d):
                for other in hs[1:]:
                    if other[b] != first[b]:
                        d.discard(b)
                        witnesses.setdefault(b, (name, first, other))
                        break
    return frozenset(d), witnesses


def dominion(A, B, K, budget=None):
    """d_K(A, B) with codomains restricted to the generators of K."""
    K = as_class(K)
    A = frozenset(A)
    if sg(B, A) != A:
        raise AlgebraError("the small set is not a subuniverse of the big algebra")
    try:
        d, wit = equalizer_dominion(A, B, K.generators, budget)
    except BudgetExhausted as e:
        return DominionReport(A, B, K, frozenset(B.universe), {}, False, e.bound())
    return DominionReport(A, B, K, d, wit)


# ---------------------------------------------------------------- SES

def nu_arity(K, budget=None, max_arity=4):
    """Least n <= max_arity with a near-unanimity term proven for every generator's variety."""
    from .termcond import TermCondition, term_condition_search
    K = as_class(K)
    P = product(list(K.generators), max_size=4096)[0] if len(K.generators) > 1 else K.generators[0]
    for n in range(3, max_arity + 1):
        v = term_condition_search(P, TermCondition("nu", n), budget)
        if v.proven:
            return n, v
    return None, None


def check_ses(K, strategy="nu", budget=None, nu=None, max_size=64, max_gens=2, width=2,
              max_member_size=None):
    """Scan a stratum of pairs A <= B for dominions larger than A.

    strategy "nu": B ranges over products of n-1 RSI members (n the
    near-unanimity arity) and A over all subalgebras of B; this stratum
    decides the property, so a clean scan is Proven.
    strategy "fg": B ranges over products of <= width generators and A
    over subalgebras generated by <= max_gens elements; a clean scan only
    bounds the search (Unknown).
    """
    K = as_class(K)
    tr = as_tracker(budget)
    try:
        if strategy == "nu":
            if nu is None:
                nu, _ = nu_arity(K, tr)
            if nu is None:
                raise ValueError("the nu strategy needs a near-unanimity term")
            members = rsi_members(K, tr)
            if max_member_size is not None:
                members = [M for M in members if M.size <= max_member_size]
            bigs = _products(members, nu - 1, max_size)
            stratum = {"strategy": "nu", "nu_arity": nu, "members": [M.name for M in members],
                       "factors": nu - 1, "max_size": max_size}
            for B in bigs:
                for A in subuniverses(B, tr):
                    r = _check_pair(A, B, K, tr)
                    if r is not None:
                        return Refuted(dict(r, stratum=stratum))
            if any(_prod_size(c) > max_size for c in itertools.combinations_with_replacement(members, nu - 1)):
                return Unknown(dict(stratum, reason="some products exceed max_size"))
            return Proven(dict(stratum, pairs_checked="all"))
        if strategy == "fg":
            gens = list(K.generators)
            if max_member_size is not None:
                gens = [M for M in gens if M.size <= max_member_size]
            bigs = []
            for w in range(1, width + 1):
                bigs.extend(_products(gens, w, max_size))
            stratum = {"strategy": "fg", "max_generators": max_gens, "width": width, "max_size": max_size}
            for B in bigs:
                seen = set()
                for g in range(0, max_gens + 1):
                    for X in itertools.combinations(B.universe, g):
                        A = sg(B, X)
                        if not A or A in seen:
                            continue
                        seen.add(A)
                        r = _check_pair(A, B, K, tr)
                        if r is not None:
                            return Refuted(dict(r, stratum=stratum))
            return Unknown(dict(stratum, reason="no failure in the scanned stratum"))
        raise ValueError(f"unknown strategy {strategy}")
    except BudgetExhausted as e:
        return Unknown(e.bound())


def _prod_size(ms):
    s = 1
    for m in ms:
        s *= m.size
    return s


def _products(members, k, max_size):
    out = []
    for combo in itertools.combinations_with_replacement(members, k):
        if _prod_size(combo) <= max_size:
            out.append(product(list(combo), max_size=max_size)[0] if k > 1 else combo[0])
    out.sort(key=lambda B: B.size)
    return out


def _check_pair(A, B, K, tr):
    d, wit = equalizer_dominion(A, B, K.generators, tr)
    if d != A:
        b = min(d - A)
        return {"sub": [_lab(B, x) for x in sorted(A)], "big": B.name,
                "element": _lab(B, b), "dominion": [_lab(B, x) for x in sorted(d)]}
    return None


def check_absolutely_closed(A, K, extensions, budget=None):
    """Check d_K(e(A), B) = e(A) for each (B, embedding) in a corpus."""
    K = as_class(K)
    checked = []
    try:
        for B, e in extensions:
            emap = tuple(e.map if isinstance(e, Homomorphism) else e)
            if len(set(emap)) != len(emap) or not is_homomorphism(A, B, emap):
                raise AlgebraError(f"invalid embedding into {B.name}")
            img = frozenset(emap)
            rep = dominion(img, B, K, budget)
            if not rep.complete:
                return Unknown(rep.bound)
            if rep.result != img:
                b = rep.extra[0]
                return Refuted({"big": B.name, "image": [_lab(B, x) for x in sorted(img)],
                                "element": _lab(B, b), "dominion": [_lab(B, x) for x in sorted(rep.result)]})
            checked.append(B.name)
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Proven({"extensions": checked, "scope": "corpus only"})


# ------------------------------------------------------------ monoids

def is_monoid(B):
    if B.signature != MONOID:
        return False
    one = B.const("1")
    m = lambda a, b: B.apply("*", (a, b))
    if any(m(one, a) != a or m(a, one) != a for a in B.universe):
        return False
    return all(m(m(a, b), c) == m(a, m(b, c)) for a in B.universe for b in B.universe for c in B.universe)


@dataclass(frozen=True)
class Zigzag:
    """A solution of Isbell's system: inputs x in the submonoid, z and w in B."""
    length: int
    x: tuple
    z: tuple
    w: tuple

    def as_dict(self):
        return {"length": self.length, "x": list(self.x), "z": list(self.z), "w": list(self.w)}


def find_zigzag(A, B, b, n, budget=None):
    f = isbell_formula(n)
    xs = [f"x{i}" for i in range(1, 2 * n + 2)]
    if n == 0:
        return Zigzag(0, (b,), (), ()) if b in A else None
    zs = [f"z{i}" for i in range(1, n + 1)]
    ws = [f"w{i}" for i in range(1, n + 1)]
    order = ["y", "x1", "z1", "w1", "x2"]
    for i in range(1, n):
        order += [f"z{i + 1}", f"x{2 * i + 1}", f"w{i + 1}", f"x{2 * i + 2}"]
    order += [f"x{2 * n + 1}"]
    dom = {v: sorted(A) for v in xs}
    for sol in solve(B, f.body.parts, order, {"y": b}, budget, dom):
        asg = dict(zip(order, sol))
        return Zigzag(n, tuple(asg[v] for v in xs), tuple(asg[v] for v in zs), tuple(asg[v] for v in ws))
    return None


def zigzag_membership(A, B, b, budget=None, max_length=3, codomain_bound=4):
    """Is b in the dominion of the submonoid A in B (monoid varieties)?

    Proven by a zigzag of length <= max_length; Refuted by two
    homomorphisms into a monoid of size <= codomain_bound that agree on A
    and separate b; otherwise Unknown.
    """
    if not is_monoid(B):
        raise AlgebraError("zigzag search needs a monoid")
    A = frozenset(A)
    if sg(B, A) != A:
        raise AlgebraError("not a submonoid")
    tr = as_tracker(budget)
    try:
        for n in range(0, max_length + 1):
            z = find_zigzag(A, B, b, n, tr)
            if z is not None:
                return Proven(z.as_dict())
        for M in small_monoids(codomain_bound):
            groups = {}
            for h in enumerate_homs(B, M, tr):
                groups.setdefault(tuple(h.map[a] for a in sorted(A)), []).append(h.map)
            for key in sorted(groups):
                hs = groups[key]
                for g in hs:
                    for h in hs:
                        if g[b] < h[b]:
                            return Refuted({"codomain": M.name, "codomain_table": list(M.table("*")),
                                            "g": list(g), "h": list(h), "codomain_bound": codomain_bound})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Unknown({"max_length": max_length, "codomain_bound": codomain_bound})


def unary_monoid_law(tables, bound=6):
    """Least (l, r), ordered by l + r then l, with a^l f(a) = a^r on every domain."""
    tables = list(tables)

    def power(M, a, k):
        out = M.const("1")
        for _ in range(k):
            out = M.apply("*", (out, a))
        return out

    for total in range(0, 2 * bound + 1):
        for l in range(0, min(total, bound) + 1):
            r = total - l
            if r > bound:
                continue
            if all(M.apply("*", (power(M, a, l), fa)) == power(M, a, r)
                   for f in tables for M in [f.carrier] for (a,), fa in f.values):
                return (l, r)
    return None
