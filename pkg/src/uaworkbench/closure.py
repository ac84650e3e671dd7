"""Breadth-first term closure over a set of coordinates.

A coordinate is a pair (algebra, point) where point assigns an element
to each variable.  A term is represented by its vector of values at all
coordinates, so two terms are identified iff their term functions agree
on every coordinate.  Terms are generated by increasing size; ties are
broken by signature order, then by argument order.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .terms import App, Var
from .verdict import as_tracker

CHUNK = 1 << 20


class Coordinates:
    """Coordinates grouped into per-algebra segments."""

    def __init__(self, signature, nvars):
        self.signature = signature
        self.nvars = nvars
        self.segments = []  # (algebra, points array (m, nvars))

    def add(self, algebra, points):
        points = list(points)
        pts = np.asarray(points, dtype=np.int64).reshape(len(points), self.nvars)
        if len(pts):
            self.segments.append((algebra, pts))
        return self

    @property
    def width(self):
        return sum(len(p) for _, p in self.segments)

    def slices(self):
        out = []
        start = 0
        for A, pts in self.segments:
            out.append((A, slice(start, start + len(pts))))
            start += len(pts)
        return out

    def variable(self, i):
        return np.concatenate([p[:, i] for _, p in self.segments]) if self.segments else np.zeros(0, np.int64)

    def constant(self, sym):
        return np.concatenate([np.full(len(p), A.const(sym), np.int64) for A, p in self.segments])


@dataclass
class ClosureResult:
    vectors: list
    derivations: list      # None for variables; (sym, arg indices) otherwise
    names: list            # variable names (for rendering)
    sizes: list
    found: int = None      # index of the first element satisfying the goal
    exhausted: bool = False
    index: dict = field(default_factory=dict)

    def term(self, i):
        d = self.derivations[i]
        if isinstance(d, str):
            return Var(d)
        sym, args = d
        return App(sym, tuple(self.term(a) for a in args))

    def __len__(self):
        return len(self.vectors)


def term_closure(coords, names, budget=None, goal=None, max_size=None):
    """Generate term vectors by size until the goal is met or the set closes.

    goal: a target vector, or a predicate on a vector (numpy array).
    The closure is certified complete (exhausted=True) once no new
    element can have a minimal term larger than the sizes explored.
    """
    tr = as_tracker(budget)
    sig = coords.signature
    ops = [(s, k) for s, k in sig if k > 0]
    consts = [s for s, k in sig if k == 0]
    slices = coords.slices()
    tables = [(A.np_tables, A.size, sl) for A, sl in slices]
    kmax = max((k for _, k in ops), default=0)

    if goal is None:
        check = None
    elif callable(goal):
        check = goal
    else:
        target = np.asarray(goal, dtype=np.int64)
        check = lambda v: np.array_equal(v, target)

    res = ClosureResult([], [], list(names), [])
    by_size = {}

    def add(vec, deriv, size):
        key = vec.tobytes()
        if key in res.index:
            return False
        res.index[key] = len(res.vectors)
        res.vectors.append(vec)
        res.derivations.append(deriv)
        res.sizes.append(size)
        by_size.setdefault(size, []).append(len(res.vectors) - 1)
        tr.elements(len(res.vectors))
        if check is not None and res.found is None and check(vec):
            res.found = len(res.vectors) - 1
            return True
        return False

    for i, name in enumerate(names):
        if add(coords.variable(i), name, 1):
            return res
    for c in consts:
        if add(coords.constant(c), (c, ()), 1):
            return res
    if not ops:
        res.exhausted = True
        return res

    stacked = {}

    def block(size):
        if size not in stacked or len(stacked[size][1]) != len(by_size.get(size, ())):
            idx = by_size.get(size, [])
            stacked[size] = (np.stack([res.vectors[i] for i in idx]) if idx else None, list(idx))
        return stacked[size]

    s = 1
    while True:
        s += 1
        if max_size is not None and s > max_size:
            return res
        maxmin = max(res.sizes) if res.sizes else 0
        if s > kmax * maxmin + 1:
            res.exhausted = True
            return res
        for sym, k in ops:
            for comp in _compositions(s - 1, k):
                blocks = [block(c) for c in comp]
                if any(b[0] is None for b in blocks):
                    continue
                if _apply_batch(sym, k, blocks, tables, res, add, tr, s):
                    return res


def _compositions(total, parts):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _apply_batch(sym, k, blocks, tables, res, add, tr, size):
    mats = [b[0] for b in blocks]
    idxs = [b[1] for b in blocks]
    counts = [len(m) for m in mats]
    total = 1
    for c in counts:
        total *= c
    tr.step(total)
    width = mats[0].shape[1]
    # iterate the first argument in chunks to bound memory
    rest = 1
    for c in counts[1:]:
        rest *= c
    per = max(1, CHUNK // max(1, rest * max(width, 1)))
    for start in range(0, counts[0], per):
        first = mats[0][start:start + per]
        out = np.empty((len(first),) + tuple(counts[1:]) + (width,), dtype=np.int64)
        for tabs, n, sl in tables:
            t = tabs[sym]
            acc = first[:, sl].reshape((len(first),) + (1,) * (k - 1) + (-1,))
            for j in range(1, k):
                shape = [1] * (k + 1)
                shape[j] = counts[j]
                shape[k] = -1
                acc = acc * n + mats[j][:, sl].reshape(shape)
            out[..., sl] = t[acc]
        flat = out.reshape(-1, width)
        for pos in range(len(flat)):
            vec = flat[pos]
            key = vec.tobytes()
            if key in res.index:
                continue
            # decode the argument indices of this row
            rem = pos
            arg_pos = []
            for c in reversed(counts[1:]):
                arg_pos.append(rem % c)
                rem //= c
            arg_pos.append(start + rem)
            arg_pos.reverse()
            args = tuple(idxs[j][arg_pos[j]] for j in range(k))
            if add(vec.copy(), (sym, args), size):
                return True
    return False


def full_points(n, nvars):
    return list(itertools.product(range(n), repeat=nvars))
