"""Seeded randomized property suites.

Each suite returns a dict with the number of cases checked and a list of
violations (empty when the property held everywhere).
"""

import itertools
import random

from .algebra import enumerate_homs, product, sg, subuniverses
from .classops import ClassSpec
from .congruence import check_congruence_equation
from .dominion import equalizer_dominion, zigzag_membership
from .formula import And, Eq, Exists, eval_formula
from .gallery import (chain_heyting, chain_semilattice, d2_bdl, lukasiewicz, ordered_sum,
                      small_monoids, zmod_group)
from .terms import App, Var

DEFAULT_SEED = 20240611


def _random_term(rng, sig, variables, depth):
    ops = [(s, k) for s, k in sig if k > 0]
    consts = [s for s, k in sig if k == 0]
    if depth == 0 or rng.random() < 0.3 or not ops:
        leaves = [Var(v) for v in variables] + [App(c) for c in consts]
        return rng.choice(leaves)
    sym, k = rng.choice(ops)
    return App(sym, tuple(_random_term(rng, sig, variables, depth - 1) for _ in range(k)))


def random_pp(rng, sig, free=("x1", "x2"), exvars=("z",), max_eqs=3, depth=2):
    allv = list(free) + list(exvars)
    eqs = tuple(Eq(_random_term(rng, sig, allv, depth), _random_term(rng, sig, allv, depth))
                for _ in range(rng.randint(1, max_eqs)))
    body = And(eqs) if len(eqs) > 1 else eqs[0]
    return Exists(tuple(exvars), body) if exvars else body


def _pp_corpus():
    C2, C3, C4 = chain_heyting(2), chain_heyting(3), chain_heyting(4)
    D2 = d2_bdl()
    G2, G3 = zmod_group(2), zmod_group(3)
    L2 = lukasiewicz(2)
    return [[C2, C3, C4, product([C2, C2])[0], product([C2, C3])[0]],
            [D2, product([D2, D2])[0]],
            [G2, G3, product([G2, G3])[0]] + list(small_monoids(3)),
            [lukasiewicz(1), L2]]


def pp_preservation(seed=DEFAULT_SEED, cases=200):
    """A |= f(a) implies B |= f(h a) for homs h, and componentwise truth
    implies truth in a binary product."""
    rng = random.Random(seed)
    corpus = _pp_corpus()
    hom_cache = {}
    checked = 0
    bad = []
    attempts = 0
    while checked < cases and attempts < cases * 50:
        attempts += 1
        family = rng.choice(corpus)
        sig = family[0].signature
        f = random_pp(rng, sig)
        A, B = rng.choice(family), rng.choice(family)
        key = (id(A), id(B))
        if key not in hom_cache:
            hom_cache[key] = enumerate_homs(A, B)
        homs = hom_cache[key]
        free = ["x1", "x2"]
        sols = [s for s in itertools.product(A.universe, repeat=2) if eval_formula(A, f, dict(zip(free, s)))]
        if not sols:
            continue
        a = rng.choice(sols)
        if homs:
            h = rng.choice(homs)
            checked += 1
            if not eval_formula(B, f, {"x1": h.map[a[0]], "x2": h.map[a[1]]}):
                bad.append({"kind": "hom", "formula": str(f), "source": A.name, "target": B.name, "tuple": list(a)})
        solsB = [s for s in itertools.product(B.universe, repeat=2) if eval_formula(B, f, dict(zip(free, s)))]
        if solsB and A.size * B.size <= 64:
            b = rng.choice(solsB)
            P, _ = product([A, B])
            p = [a[i] * B.size + b[i] for i in range(2)]  # lexicographic pair index
            checked += 1
            if not eval_formula(P, f, {"x1": p[0], "x2": p[1]}):
                bad.append({"kind": "product", "formula": str(f), "factors": [A.name, B.name]})
    return {"cases": checked, "violations": bad}


def _dominion_corpus():
    C2, C3, C4 = chain_heyting(2), chain_heyting(3), chain_heyting(4)
    D2 = d2_bdl()
    out = []
    for K, bigs in [((C3,), [C3, product([C2, C3])[0], product([C3, C3])[0]]),
                    ((C4,), [C4, product([C2, C4])[0]]),
                    ((D2,), [D2, product([D2, D2])[0], product([D2, D2, D2])[0]]),
                    ((chain_heyting(5),), [product([chain_heyting(5), chain_heyting(5)])[0]])]:
        for B in bigs:
            out.append((ClassSpec(K), B, subuniverses(B)))
    return out


def dominion_laws(seed=DEFAULT_SEED, cases=200):
    """Sandwich A <= d <= B with d a subuniverse, monotonicity in A, and
    g[d(A, B)] <= d(A', B) for endomorphisms g with g[A] <= A'."""
    rng = random.Random(seed)
    corpus = _dominion_corpus()
    cache = {}
    endos = {}
    bad = []
    checked = 0

    def dom(K, B, A):
        key = (id(B), A)
        if key not in cache:
            cache[key] = equalizer_dominion(A, B, K.generators)[0]
        return cache[key]

    while checked < cases:
        K, B, subs = rng.choice(corpus)
        A = rng.choice(subs)
        d = dom(K, B, A)
        kind = checked % 3
        if kind == 0:
            if not (A <= d) or sg(B, d) != d:
                bad.append({"kind": "sandwich", "big": B.name, "sub": sorted(A), "dominion": sorted(d)})
        elif kind == 1:
            bigger = [S for S in subs if A <= S]
            A2 = rng.choice(bigger)
            if not d <= dom(K, B, A2):
                bad.append({"kind": "monotone", "big": B.name, "sub": sorted(A), "sub2": sorted(A2)})
        else:
            if id(B) not in endos:
                endos[id(B)] = enumerate_homs(B, B)
            g = rng.choice(endos[id(B)])
            A2 = sg(B, g.image(A))
            bigger = [S for S in subs if A2 <= S]
            A2 = rng.choice(bigger)
            if not g.image(d) <= dom(K, B, A2):
                bad.append({"kind": "hom_image", "big": B.name, "sub": sorted(A), "map": list(g.map)})
        checked += 1
    return {"cases": checked, "violations": bad}


def zigzag_cross_oracle(seed=DEFAULT_SEED, cases=200, max_size=4):
    """Zigzag verdicts against the equalizer dominion with all monoids of
    size <= max_size as codomains."""
    rng = random.Random(seed)
    monoids = list(small_monoids(max_size))
    bad = []
    counts = {"Proven": 0, "Refuted": 0, "Unknown": 0}
    cache = {}
    subs_cache = {}
    for _ in range(cases):
        B = rng.choice(monoids)
        if id(B) not in subs_cache:
            subs_cache[id(B)] = subuniverses(B)
        A = rng.choice(subs_cache[id(B)])
        b = rng.randrange(B.size)
        key = (id(B), A)
        if key not in cache:
            cache[key] = equalizer_dominion(A, B, monoids)[0]
        d = cache[key]
        v = zigzag_membership(A, B, b, max_length=2, codomain_bound=max_size)
        counts[v.status] += 1
        if v.proven and b not in d:
            bad.append({"kind": "zigzag_outside", "monoid": B.name, "sub": sorted(A), "element": b})
        if v.refuted and b in d:
            bad.append({"kind": "separated_inside", "monoid": B.name, "sub": sorted(A), "element": b})
        if b in A and not v.proven:
            bad.append({"kind": "member_not_proven", "monoid": B.name, "sub": sorted(A), "element": b})
    return {"cases": cases, "violations": bad, "verdicts": counts}


def heyting_samples(rng, count):
    base = [chain_heyting(n) for n in range(2, 6)] + [product([chain_heyting(2), chain_heyting(2)])[0]]
    out = []
    for _ in range(count):
        kind = rng.randrange(3)
        if kind == 0:
            out.append(rng.choice(base))
        elif kind == 1:
            A, B = rng.choice(base[:3]), rng.choice(base[:3])
            out.append(product([A, B])[0])
        else:
            A, B = rng.choice(base), rng.choice(base)
            out.append(ordered_sum(A, B))
    return out


DISTRIBUTIVE = "(x | y) & (x | z) = x | (y & z)"
PERMUTABLE = "x o y = y o x"


def congruence_equations(seed=DEFAULT_SEED, cases=200):
    """Distributivity and permutability hold in Con_K of Heyting samples
    (K generated by the sample); permutability fails in the 3-chain
    meet-semilattice."""
    rng = random.Random(seed)
    samples = heyting_samples(rng, cases // 2)
    bad = []
    checked = 0
    memo = {}
    for A in samples:
        for eq in (DISTRIBUTIVE, PERMUTABLE):
            key = (A.name, eq)
            if key not in memo:
                K = ClassSpec((A,)) if eq == DISTRIBUTIVE else None
                memo[key] = check_congruence_equation(A, K, eq)
            checked += 1
            if not memo[key].proven:
                bad.append({"algebra": A.name, "equation": eq, "verdict": memo[key].status})
    v = check_congruence_equation(chain_semilattice(3), None, PERMUTABLE)
    checked += 1
    if not v.refuted:
        bad.append({"algebra": "S3", "equation": PERMUTABLE, "expected": "Refuted"})
    return {"cases": checked, "violations": bad, "semilattice_witness": v.witness}


SUITES = {
    "pp-preservation": pp_preservation,
    "dominion-laws": dominion_laws,
    "zigzag-oracle": zigzag_cross_oracle,
    "congruence-equations": congruence_equations,
}
