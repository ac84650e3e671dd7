"""First-order formulas over a signature: parsing, evaluation, pp machinery,
functionality checks and implicit-operation tables."""

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

from .algebra import product, sg, subalgebra
from .terms import App, Var, check_term, compile_term, render
from .verdict import BudgetExhausted, Proven, Refuted, Unknown, as_tracker

EQ_CONJ = "eq-conjunction"
PP = "pp"
EP = "existential-positive"
UNIVERSAL = "universal"
GENERAL = "general"

EP_CAP = 64


# ------------------------------------------------------------------ AST

class Formula:
    @cached_property
    def free_vars(self):
        return frozenset(_free(self))

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    lhs: object
    rhs: object


@dataclass(frozen=True, eq=True)
class Top(Formula):
    pass


@dataclass(frozen=True, eq=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, eq=True)
class And(Formula):
    parts: tuple


@dataclass(frozen=True, eq=True)
class Or(Formula):
    parts: tuple


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    vars: tuple
    body: Formula


def conj(*parts):
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def _free(f):
    if isinstance(f, Eq):
        return f.lhs.variables | f.rhs.variables
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, (And, Or)):
        out = frozenset()
        for p in f.parts:
            out |= p.free_vars
        return out
    if isinstance(f, Implies):
        return f.left.free_vars | f.right.free_vars
    if isinstance(f, Not):
        return f.body.free_vars
    if isinstance(f, Exists):
        return f.body.free_vars - set(f.vars)
    raise TypeError(f)


def render_formula(f, ctx=0):
    # ctx: 0 top, 1 inside '->' left, 2 inside '|', 3 inside '&', 4 under '!'
    if isinstance(f, Eq):
        s = f"{render(f.lhs)} = {render(f.rhs)}"
        return f"({s})" if ctx == 4 else s
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Not):
        return "!" + render_formula(f.body, 4)
    if isinstance(f, And):
        if not f.parts:
            return "true"
        s = " & ".join(render_formula(p, 3) for p in f.parts)
        return f"({s})" if ctx > 3 else s
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        s = " | ".join(render_formula(p, 2) for p in f.parts)
        return f"({s})" if ctx > 2 else s
    if isinstance(f, Implies):
        s = f"{render_formula(f.left, 1)} -> {render_formula(f.right, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(f, Exists):
        s = f"exists {', '.join(f.vars)}. {render_formula(f.body, 0)}"
        return f"({s})" if ctx > 0 else s
    raise TypeError(f)


# --------------------------------------------------------------- parser

class ParseError(ValueError):
    def __init__(self, msg, text, pos):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.col = line, col


_TOKEN = re.compile(r"\s*(?:(->)|(\d+)|([A-Za-z_][A-Za-z0-9_']*)|([()=,.&|!*+^~]|≈))")


def _tokenize(text):
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        kind = "op" if m.group(1) or m.group(4) else ("num" if m.group(2) else "id")
        val = m.group(0).strip()
        if val == "≈":
            val = "="
        toks.append((kind, val, m.start(m.lastindex)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, signature):
        self.text = text
        self.sig = signature
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.text, tok[2])

    def expect(self, val):
        t = self.next()
        if t[1] != val:
            raise self.error(f"expected {val!r}, found {t[1] or 'end of input'!r}", t)
        return t

    # formula := quant | impl
    def formula(self):
        if self.peek()[0] == "id" and self.peek()[1] == "exists":
            self.next()
            vs = [self.var()]
            while self.peek()[1] == ",":
                self.next()
                vs.append(self.var())
            self.expect(".")
            return Exists(tuple(vs), self.formula())
        left = self.disj()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.formula() if self.peek()[1] == "exists" else self.impl_rest())
        return left

    def impl_rest(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.impl_rest())
        return left

    def var(self):
        t = self.next()
        if t[0] != "id" or t[1] == "exists":
            raise self.error("expected a variable", t)
        return t[1]

    def disj(self):
        parts = [self.conj()]
        while self.peek()[1] == "|":
            self.next()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.atom()]
        while self.peek()[1] == "&":
            self.next()
            parts.append(self.atom())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def atom(self):
        t = self.peek()
        if t[0] == "id" and t[1] in ("true", "false"):
            self.next()
            return Top() if t[1] == "true" else Bottom()
        if t[1] == "!":
            self.next()
            return Not(self.atom())
        if t[1] == "(":
            save = self.i
            try:
                return self.equation()
            except ParseError:
                self.i = save
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t[0] == "id" and t[1] == "exists":
            return self.formula()
        return self.equation()

    def equation(self):
        lhs = self.term()
        self.expect("=")
        rhs = self.term()
        return Eq(lhs, rhs)

    # term := sum ; sum := prod {'+' prod} ; prod := pw {'*' pw} ; pw := prim ['^' num]
    def term(self):
        t = self.prod()
        while self.peek()[1] == "+":
            self.next()
            t = self.binary("+", t, self.prod())
        return t

    def prod(self):
        t = self.pw()
        while self.peek()[1] == "*":
            self.next()
            t = self.binary("*", t, self.pw())
        return t

    def pw(self):
        t = self.prim()
        if self.peek()[1] == "^":
            self.next()
            k = self.next()
            if k[0] != "num":
                raise self.error("expected an exponent", k)
            t = self.power(t, int(k[1]), k)
        return t

    def prim(self):
        t = self.next()
        if t[1] == "(":
            u = self.term()
            self.expect(")")
            return u
        if t[0] == "num":
            if self.peek()[1] == ".":
                self.next()
                return self.multiple(int(t[1]), self.prim(), t)
            return self.constant(t[1], t)
        if t[0] == "id" and t[1] not in ("exists", "true", "false"):
            if self.peek()[1] == "(":
                self.next()
                args = []
                if self.peek()[1] != ")":
                    args.append(self.term())
                    while self.peek()[1] == ",":
                        self.next()
                        args.append(self.term())
                self.expect(")")
                return self.apply(t[1], args, t)
            if self.sig is not None and t[1] in self.sig and self.sig.arity(t[1]) == 0:
                return App(t[1])
            if self.sig is not None and t[1] in self.sig.derived and not self.sig.derived[t[1]][0]:
                return self.apply(t[1], [], t)
            return Var(t[1])
        raise self.error(f"unexpected token {t[1] or 'end of input'!r}", t)

    def constant(self, name, tok):
        if self.sig is None:
            return App(name)
        if name in self.sig and self.sig.arity(name) == 0:
            return App(name)
        if name in self.sig.derived and not self.sig.derived[name][0]:
            return self.apply(name, [], tok)
        raise self.error(f"unknown symbol {name}", tok)

    def apply(self, sym, args, tok):
        if self.sig is None:
            return App(sym, tuple(args))
        if sym in self.sig:
            if self.sig.arity(sym) != len(args):
                raise self.error(f"arity mismatch for {sym}: expected {self.sig.arity(sym)}, got {len(args)}", tok)
            return App(sym, tuple(args))
        if sym in self.sig.derived:
            params, body = self.sig.derived[sym]
            if len(params) != len(args):
                raise self.error(f"arity mismatch for {sym}: expected {len(params)}, got {len(args)}", tok)
            return body.substitute(dict(zip(params, args)))
        raise self.error(f"unknown symbol {sym}", tok)

    def binary(self, sym, a, b):
        return self.apply(sym, [a, b], self.toks[self.i - 1])

    def power(self, t, k, tok):
        if k == 0:
            return self.constant("1", tok)
        out = t
        for _ in range(k - 1):
            out = self.apply("*", [out, t], tok)
        return out

    def multiple(self, k, t, tok):
        if k == 0:
            return self.constant("0", tok)
        out = t
        for _ in range(k - 1):
            out = self.apply("+", [out, t], tok)
        return out


def parse(text, signature=None):
    """Parse a formula; with a signature, symbols and arities are checked."""
    p = _Parser(text, signature)
    f = p.formula()
    if p.peek()[0] != "eof":
        raise p.error(f"unexpected token {p.peek()[1]!r}")
    return f


def parse_term(text, signature=None):
    p = _Parser(text, signature)
    t = p.term()
    if p.peek()[0] != "eof":
        raise p.error(f"unexpected token {p.peek()[1]!r}")
    return t


def check_formula(signature, f):
    if isinstance(f, Eq):
        check_term(signature, f.lhs)
        check_term(signature, f.rhs)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            check_formula(signature, p)
    elif isinstance(f, Implies):
        check_formula(signature, f.left)
        check_formula(signature, f.right)
    elif isinstance(f, (Not, Exists)):
        check_formula(signature, f.body)


# ------------------------------------------------------ normal forms

@dataclass(frozen=True)
class PPConj:
    """exists exvars . conjunction of equations"""
    exvars: tuple
    eqs: tuple

    def formula(self):
        body = conj(*self.eqs) if self.eqs else Top()
        return Exists(self.exvars, body) if self.exvars else body


class _Fresh:
    def __init__(self, avoid):
        self.avoid = set(avoid)
        self.n = 0

    def __call__(self, base):
        while True:
            self.n += 1
            name = f"{base}_{self.n}"
            if name not in self.avoid:
                self.avoid.add(name)
                return name


def _all_vars(f):
    if isinstance(f, Eq):
        return f.lhs.variables | f.rhs.variables
    if isinstance(f, (And, Or)):
        out = frozenset()
        for p in f.parts:
            out |= _all_vars(p)
        return out
    if isinstance(f, Implies):
        return _all_vars(f.left) | _all_vars(f.right)
    if isinstance(f, Not):
        return _all_vars(f.body)
    if isinstance(f, Exists):
        return _all_vars(f.body) | set(f.vars)
    return frozenset()


def pp_disjuncts(f, cap=EP_CAP):
    """Rewrite an existential-positive formula as a list of PPConj.

    Bound variables are renamed apart.  Returns None when f is not
    existential-positive or the expansion exceeds cap disjuncts.
    """
    fresh = _Fresh(_all_vars(f))

    def go(g, ren):
        if isinstance(g, Eq):
            return [PPConj((), (Eq(g.lhs.substitute(ren), g.rhs.substitute(ren)),))]
        if isinstance(g, Top):
            return [PPConj((), ())]
        if isinstance(g, Bottom):
            return []
        if isinstance(g, Or):
            out = []
            for p in g.parts:
                sub = go(p, ren)
                if sub is None:
                    return None
                out.extend(sub)
                if len(out) > cap:
                    return None
            return out
        if isinstance(g, And):
            out = [PPConj((), ())]
            for p in g.parts:
                sub = go(p, ren)
                if sub is None:
                    return None
                out = [PPConj(a.exvars + b.exvars, a.eqs + b.eqs) for a in out for b in sub]
                if len(out) > cap:
                    return None
            return out
        if isinstance(g, Exists):
            ren2 = dict(ren)
            new = []
            for v in g.vars:
                nv = fresh(v)
                ren2[v] = Var(nv)
                new.append(nv)
            sub = go(g.body, ren2)
            if sub is None:
                return None
            return [PPConj(tuple(new) + d.exvars, d.eqs) for d in sub]
        return None

    return go(f, {})


def _is_eq_conj(f):
    if isinstance(f, (Eq, Top)):
        return True
    if isinstance(f, And):
        return all(_is_eq_conj(p) for p in f.parts)
    return False


def _is_pp(f):
    if _is_eq_conj(f):
        return True
    if isinstance(f, Exists):
        return _is_pp(f.body)
    if isinstance(f, And):
        return all(_is_pp(p) for p in f.parts)
    return False


def _ep_syntax(f):
    if isinstance(f, (Eq, Top, Bottom)):
        return True
    if isinstance(f, (And, Or)):
        return all(_ep_syntax(p) for p in f.parts)
    if isinstance(f, Exists):
        return _ep_syntax(f.body)
    return False


def _universal(f, positive=True):
    if isinstance(f, (Eq, Top, Bottom)):
        return True
    if isinstance(f, (And, Or)):
        return all(_universal(p, positive) for p in f.parts)
    if isinstance(f, Not):
        return _universal(f.body, not positive)
    if isinstance(f, Implies):
        return _universal(f.left, not positive) and _universal(f.right, positive)
    if isinstance(f, Exists):
        return not positive and _universal(f.body, positive)
    return False


@dataclass(frozen=True)
class Classification:
    cls: str
    note: str = ""


def classify(f, cap=EP_CAP):
    """Most specific syntactic class of f."""
    return classify_note(f, cap).cls


def classify_note(f, cap=EP_CAP):
    if _is_eq_conj(f):
        return Classification(EQ_CONJ)
    if _is_pp(f):
        return Classification(PP)
    if _ep_syntax(f):
        d = pp_disjuncts(f, cap)
        if d is None:
            return Classification(GENERAL, f"disjunctive normal form exceeds {cap} disjuncts")
        if len(d) == 1:
            return Classification(PP, "pp after normalization")
        return Classification(EP)
    if _universal(f):
        return Classification(UNIVERSAL)
    return Classification(GENERAL)


# ---------------------------------------------------------- evaluation

def solve(A, eqs, variables, fixed=None, budget=None, domains=None):
    """Yield assignments (tuples over `variables`) satisfying all equations.

    Variables in `fixed` keep their given values; `domains` optionally
    restricts others.  Each equation is tested as soon as its variables
    are all bound.
    """
    domains = domains or {}
    tr = as_tracker(budget) if budget is not None else None
    fixed = dict(fixed or {})
    variables = list(variables)
    idx = {v: i for i, v in enumerate(variables)}
    order = [v for v in variables if v in fixed] + [v for v in variables if v not in fixed]
    rank = {v: r for r, v in enumerate(order)}
    buckets = [[] for _ in order]
    ground = []
    for e in eqs:
        vs = e.lhs.variables | e.rhs.variables
        missing = [v for v in vs if v not in idx]
        if missing:
            raise KeyError(f"unbound variable {missing[0]}")
        l = compile_term(A, e.lhs, idx)
        r = compile_term(A, e.rhs, idx)
        if not vs:
            ground.append((l, r))
        else:
            buckets[max(rank[v] for v in vs)].append((l, r))
    env = [0] * len(variables)
    for l, r in ground:
        if l(env) != r(env):
            return
    pos = [idx[v] for v in order]
    n = A.size
    depth = len(order)

    def rec(d):
        if d == depth:
            yield tuple(env)
            return
        p = pos[d]
        v = order[d]
        cands = (fixed[v],) if v in fixed else domains.get(v, range(n))
        checks = buckets[d]
        for a in cands:
            if tr is not None:
                tr.step()
            env[p] = a
            if all(l(env) == r(env) for l, r in checks):
                yield from rec(d + 1)

    yield from rec(0)


def satisfiable(A, eqs, variables, fixed, budget=None):
    for _ in solve(A, eqs, variables, fixed, budget):
        return True
    return False


def eval_formula(A, f, asg):
    """Tarskian truth of f in A under asg (dict variable -> element)."""
    missing = [v for v in f.free_vars if v not in asg]
    if missing:
        raise KeyError(f"unbound variable {sorted(missing)[0]}")
    return _eval(A, f, dict(asg))


def _eval(A, f, asg):
    if isinstance(f, Eq):
        return _term(A, f.lhs, asg) == _term(A, f.rhs, asg)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, And):
        return all(_eval(A, p, asg) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(A, p, asg) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval(A, f.left, asg)) or _eval(A, f.right, asg)
    if isinstance(f, Not):
        return not _eval(A, f.body, asg)
    if isinstance(f, Exists):
        body = f.body
        if _is_eq_conj(body):
            eqs = _eqs_of(body)
            names = sorted(set(asg) | set(f.vars) | _all_vars(body))
            fixed = {v: asg[v] for v in names if v in asg and v not in f.vars}
            names = [v for v in names if v in fixed or v in f.vars or v in body.free_vars]
            return satisfiable(A, eqs, names, fixed)
        saved = {v: asg.get(v) for v in f.vars}
        try:
            for vals in itertools.product(A.universe, repeat=len(f.vars)):
                asg.update(zip(f.vars, vals))
                if _eval(A, body, asg):
                    return True
            return False
        finally:
            for v, old in saved.items():
                if old is None:
                    asg.pop(v, None)
                else:
                    asg[v] = old
    raise TypeError(f)


def _term(A, t, asg):
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise KeyError(f"unbound variable {t.name}") from None
    return A.apply(t.sym, [_term(A, a, asg) for a in t.args])


def _eqs_of(f):
    if isinstance(f, Eq):
        return [f]
    if isinstance(f, Top):
        return []
    out = []
    for p in f.parts:
        out.extend(_eqs_of(p))
    return out


# ---------------------------------------------------- implicit tables

@dataclass(frozen=True)
class PartialFunctionTable:
    arity: int
    values: tuple  # sorted ((args...), value) pairs
    carrier: object = field(compare=False, default=None)

    @cached_property
    def mapping(self):
        return dict(self.values)

    @property
    def dom(self):
        return frozenset(self.mapping)

    def __call__(self, *args):
        return self.mapping[tuple(args)]

    def __contains__(self, args):
        return tuple(args) in self.mapping

    def __len__(self):
        return len(self.values)

    def is_total(self):
        n = self.carrier.size if self.carrier is not None else None
        return n is not None and len(self.values) == n ** self.arity

    def missing(self):
        """First tuple (lexicographic) outside the domain, or None."""
        for args in itertools.product(self.carrier.universe, repeat=self.arity):
            if args not in self.mapping:
                return args
        return None

    @classmethod
    def from_dict(cls, arity, mapping, carrier=None):
        return cls(arity, tuple(sorted(mapping.items())), carrier)


class NotFunctional(ValueError):
    def __init__(self, witness):
        super().__init__(f"formula is not functional: {witness}")
        self.witness = witness


class FormulaClassError(ValueError):
    pass


def _prepare(f, inputs, output):
    inputs = list(inputs)
    if output in inputs:
        raise ValueError("output variable must not be an input")
    extra = f.free_vars - set(inputs) - {output}
    if extra:
        raise ValueError(f"free variable {sorted(extra)[0]} is neither an input nor the output")
    d = pp_disjuncts(f)
    if d is None:
        raise FormulaClassError("formula is not existential-positive (or too large to normalize)")
    return inputs, d


def relation_outputs(A, f, inputs, output, budget=None):
    """dict input tuple -> {output value: disjunct index} over A."""
    inputs, disjuncts = _prepare(f, inputs, output)
    return _outputs(A, disjuncts, inputs, output, budget)


def _outputs(A, disjuncts, inputs, output, budget=None):
    out = {}
    proj = list(inputs) + [output]
    k = len(proj)
    for di, d in enumerate(disjuncts):
        for vals in _projected_solutions(A, d, proj, budget):
            slot = out.setdefault(vals[:k - 1], {})
            slot.setdefault(vals[k - 1], di)
    return out


def _projected_solutions(A, d, proj, budget=None):
    """Distinct projections onto proj of solutions of a PPConj."""
    ex = [v for v in d.exvars if v not in proj]
    names = list(proj) + ex
    eq_proj = [e for e in d.eqs if (e.lhs.variables | e.rhs.variables) <= set(proj)]
    eq_rest = [e for e in d.eqs if e not in eq_proj]
    for vals in solve(A, eq_proj, proj, budget=budget):
        if not eq_rest or satisfiable(A, eq_rest, names, dict(zip(proj, vals)), budget):
            yield vals


def implicit_table(A, f, inputs, output, budget=None):
    """The partial function defined by f on A (raises NotFunctional)."""
    inputs, disjuncts = _prepare(f, inputs, output)
    outs = _outputs(A, disjuncts, inputs, output, budget)
    mapping = {}
    for args in sorted(outs):
        ys = outs[args]
        if len(ys) > 1:
            y1, y2 = sorted(ys)[:2]
            raise NotFunctional({"algebra": A.name, "inputs": dict(zip(inputs, args)),
                                 "outputs": [y1, y2], "disjuncts": [ys[y1], ys[y2]]})
        mapping[args] = next(iter(ys))
    return PartialFunctionTable.from_dict(len(inputs), mapping, A)


def check_functional(K, f, inputs, output, budget=None):
    """Functionality of an ep formula across the class generated by K.

    Checks every cross pair of pp disjuncts in every generator, which
    amounts to brute-force functionality of f in each generator.
    """
    gens = getattr(K, "generators", K)
    inputs, disjuncts = _prepare(f, inputs, output)
    try:
        for A in gens:
            outs = _outputs(A, disjuncts, inputs, output, budget)
            for args in sorted(outs):
                ys = outs[args]
                if len(ys) > 1:
                    y1, y2 = sorted(ys)[:2]
                    return Refuted({"algebra": A.name, "inputs": dict(zip(inputs, args)),
                                    "outputs": [y1, y2], "disjuncts": [ys[y1], ys[y2]]})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Proven({"generators": [A.name for A in gens], "disjuncts": len(disjuncts)})


def compose_tables(g, fs):
    """Composition g(f1, ..., fm) of partial functions on one carrier."""
    fs = list(fs)
    if g.arity != len(fs):
        raise ValueError(f"arity mismatch: outer has arity {g.arity}, got {len(fs)} inner tables")
    if not fs:
        raise ValueError("composition needs at least one inner table")
    n = fs[0].arity
    if any(f.arity != n for f in fs):
        raise ValueError("inner tables have different arities")
    mapping = {}
    common = set(fs[0].mapping)
    for f in fs[1:]:
        common &= set(f.mapping)
    for args in sorted(common):
        inner = tuple(f.mapping[args] for f in fs)
        if inner in g.mapping:
            mapping[args] = g.mapping[inner]
    return PartialFunctionTable.from_dict(n, mapping, fs[0].carrier)


def identity_table(A):
    return PartialFunctionTable.from_dict(1, {(a,): a for a in A.universe}, A)


def is_total_on(A, f, inputs, output, budget=None):
    return implicit_table(A, f, inputs, output, budget).is_total()


def check_extendable(K, f, inputs, output, budget=None, width=2):
    """Search, for each RSI member A, an extension B >= A with f total.

    Extensions range over subalgebras of products of at most `width`
    generators.  Refuted means some A has no such extension anywhere in
    that stratum; Unknown means neither outcome was settled.
    """
    from .classops import rsi_members
    if classify(f) not in (EQ_CONJ, PP):
        raise FormulaClassError("extendability needs a pp formula")
    inputs = list(inputs)
    tr = as_tracker(budget)
    gens = list(K.generators)
    try:
        members = rsi_members(K, tr)
        products = []
        for w in range(1, width + 1):
            for combo in itertools.combinations_with_replacement(range(len(gens)), w):
                P = product([gens[i] for i in combo], max_size=4096)[0]
                products.append((combo, P))
        results = []
        unsettled = []
        for A in members:
            outcome = _extend_member(A, products, f, inputs, output, tr)
            results.append((A.name, outcome))
            if outcome["status"] == "none":
                return Refuted({"member": A.name, "stratum": f"products of <= {width} generators",
                                "reason": outcome["reason"]})
            if outcome["status"] == "open":
                unsettled.append(A.name)
        if unsettled:
            return Unknown({"unsettled": unsettled, "stratum": f"products of <= {width} generators"})
        return Proven({name: o["witness"] for name, o in results})
    except BudgetExhausted as e:
        return Unknown(e.bound())


def _extend_member(A, products, f, inputs, output, tr):
    from .algebra import enumerate_embeddings
    open_case = False
    reasons = []
    for combo, P in products:
        if P.size < A.size:
            continue
        fP = implicit_table(P, f, inputs, output, tr)
        for e in enumerate_embeddings(A, P, tr):
            start = sorted(set(e.map))
            # close under the operations of P and under f^P
            S = set(sg(P, start))
            stuck = None
            while True:
                new = set()
                for args in itertools.product(sorted(S), repeat=len(inputs)):
                    tr.step()
                    if args not in fP:
                        stuck = args
                        break
                    v = fP(*args)
                    if v not in S:
                        new.add(v)
                if stuck is not None or not new:
                    break
                S = set(sg(P, S | new))
            if stuck is not None:
                reasons.append({"product": P.name, "embedding": list(e.map), "undefined_at": [P.label(a) for a in stuck]})
                continue
            B, emb = subalgebra(P, S)
            fB = implicit_table(B, f, inputs, output, tr)
            if fB.is_total():
                return {"status": "found", "witness": {"product": P.name, "extension": [P.label(x) for x in emb]}}
            if fP.is_total():
                return {"status": "found", "witness": {"product": P.name, "extension": "whole product"}}
            open_case = True
    if open_case:
        return {"status": "open"}
    return {"status": "none", "reason": reasons[:1]}
