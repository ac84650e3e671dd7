"""pp expansions of finite algebras and classes, congruence preservation,
interpolation checks and primal Beth-companion witnesses."""

from dataclasses import dataclass

from .algebra import AlgebraError, FiniteAlgebra, is_homomorphism
from .classops import ClassSpec, as_class
from .congruence import con_k
from .formula import (EQ_CONJ, PP, And, Eq, Exists, FormulaClassError, NotFunctional, Top, check_functional,
                      classify, implicit_table, render_formula)
from .terms import App, Var, check_term, render
from .termcond import check_algebras, is_primal
from .verdict import BudgetExhausted, Proven, Refuted, Unknown


@dataclass(frozen=True)
class ExpansionOp:
    symbol: str
    formula: object
    inputs: tuple
    output: str

    @property
    def arity(self):
        return len(self.inputs)


@dataclass(frozen=True)
class ExpansionSpec:
    base: ClassSpec
    ops: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "base", as_class(self.base))
        ops = tuple(o if isinstance(o, ExpansionOp) else ExpansionOp(o[0], o[1], tuple(o[2]), o[3])
                    for o in self.ops)
        object.__setattr__(self, "ops", ops)
        names = set(self.base.signature.names)
        for o in ops:
            if o.symbol in names:
                raise AlgebraError(f"symbol {o.symbol} already in the base signature")
            names.add(o.symbol)
            if classify(o.formula) not in (EQ_CONJ, PP):
                raise FormulaClassError(f"defining formula of {o.symbol} is not pp")

    @property
    def signature(self):
        return self.base.signature.extend([(o.symbol, o.arity) for o in self.ops])


class NotTotal(AlgebraError):
    def __init__(self, algebra, symbol, args):
        super().__init__(f"{symbol} is undefined on {algebra} at {list(args)}")
        self.witness = {"algebra": algebra, "symbol": symbol, "undefined_at": list(args)}


def _ops_of(spec_or_ops):
    return spec_or_ops.ops if isinstance(spec_or_ops, ExpansionSpec) else tuple(spec_or_ops)


def expand(A, spec, budget=None):
    """A[L_F]: A with each new symbol interpreted by its implicit table."""
    ops = _ops_of(spec)
    tables = dict(A.tables)
    extra = []
    for o in ops:
        tab = implicit_table(A, o.formula, o.inputs, o.output, budget)
        if not tab.is_total():
            raise NotTotal(A.name, o.symbol, tab.missing())
        tables[o.symbol] = tuple(v for _, v in tab.values)
        extra.append((o.symbol, o.arity))
    if not extra:
        return A
    sig = A.signature.extend(extra)
    suffix = ",".join(o.symbol for o in ops)
    return FiniteAlgebra(f"{A.name}[{suffix}]", sig, A.size, tables, A.labels)


def substitute_output(o):
    """The defining formula with its output replaced by the new operation symbol."""
    g = App(o.symbol, tuple(Var(v) for v in o.inputs))
    f = o.formula
    body, ex = (f.body, f.vars) if isinstance(f, Exists) else (f, ())
    parts = body.parts if isinstance(body, And) else ((body,) if isinstance(body, Eq) else ())
    m = {o.output: g}
    new = And(tuple(Eq(e.lhs.substitute(m), e.rhs.substitute(m)) for e in parts))
    if len(new.parts) == 1:
        new = new.parts[0]
    if not parts:
        new = Top()
    return Exists(ex, new) if ex else new


def expand_class(spec, filter_total=False, budget=None):
    """(expanded ClassSpec, axioms).  Generators where an operation is not
    total are rejected, or dropped when filter_total is set."""
    spec = spec if isinstance(spec, ExpansionSpec) else ExpansionSpec(*spec)
    K = spec.base
    for o in spec.ops:
        v = check_functional(K, o.formula, o.inputs, o.output, budget)
        if v.refuted:
            raise NotFunctional(v.witness)
        if v.unknown:
            raise BudgetExhausted("functionality", v.witness)
    gens = []
    dropped = []
    for C in K.generators:
        try:
            gens.append(expand(C, spec, budget))
        except NotTotal as e:
            if not filter_total:
                raise
            dropped.append(e.witness)
    if not gens:
        raise AlgebraError("no base generator has total expanded operations")
    axioms = [f"axioms of {K.describe()}"] + [render_formula(substitute_output(o)) for o in spec.ops]
    M = ClassSpec(tuple(gens), K.operator)
    return M, axioms, dropped


def check_congruence_preserving(spec, A, budget=None):
    """Compare Con_M(A) with Con_K of the base reduct of A."""
    spec = spec if isinstance(spec, ExpansionSpec) else ExpansionSpec(*spec)
    M, _, _ = expand_class(spec, budget=budget)
    base = A.reduct(spec.base.signature.names)
    try:
        top = set(con_k(A, M, budget).elements)
        low = set(con_k(base, spec.base, budget).elements)
    except BudgetExhausted as e:
        return Unknown(e.bound())
    if top == low:
        return Proven({"congruences": len(top)})
    diff = sorted((low ^ top), key=lambda t: t.sort_key())[0]
    return Refuted({"congruence": str(diff), "only_in": "base" if diff in low else "expansion",
                    "expanded": len(top), "base": len(low)})


def check_interpolation(M, f, inputs, output, terms, budget=None, algebras=None):
    """Every domain tuple of f is matched by one of the terms, on the
    generators of M, their subalgebras and binary products."""
    M = as_class(M)
    terms = list(terms)
    for t in terms:
        check_term(M.signature, t)
    algs = algebras if algebras is not None else check_algebras(M)
    inputs = list(inputs)
    from .terms import compile_term
    idx = {v: i for i, v in enumerate(inputs)}
    try:
        for B in algs:
            tab = implicit_table(B, f, inputs, output, budget)
            fns = [compile_term(B, t, idx) for t in terms]
            for args, v in tab.values:
                env = list(args)
                if not any(fn(env) == v for fn in fns):
                    return Refuted({"algebra": B.name, "inputs": list(args), "value": v,
                                    "term_values": [fn(env) for fn in fns]})
    except BudgetExhausted as e:
        return Unknown(e.bound())
    return Proven({"algebras": [B.name for B in algs], "terms": [render(t) for t in terms]})


def beth_primal_witness(A, ops, budget=None):
    """If A[L_F] is primal then V(A[L_F]) is a Beth companion of Q(A)."""
    ops = _ops_of(ops)
    for o in ops:
        implicit_table(A, o.formula, o.inputs, o.output, budget)  # raises NotFunctional
    E = expand(A, ops, budget)
    v = is_primal(E, budget)
    claim = f"V({E.name}) is a Beth companion of Q({A.name})"
    if v.proven:
        return Proven({"expanded": E.name, "primal": v.witness, "claim": claim})
    if v.refuted:
        return Refuted({"expanded": E.name, "not_primal": v.witness,
                        "note": "the primal route does not apply"})
    return Unknown(v.witness)


def compose_interpolation_check(g, terms, f, inputs, output, corpus, budget=None):
    """Check that g(t1, ..., tm) interpolates f pointwise on a corpus.

    g is an ExpansionOp-like triple (formula, inputs, output) or a
    callable returning a PartialFunctionTable for each algebra.
    """
    terms = list(terms)
    inputs = list(inputs)
    from .terms import compile_term
    idx = {v: i for i, v in enumerate(inputs)}
    for B in corpus:
        gtab = g(B) if callable(g) else implicit_table(B, g[0], g[1], g[2], budget)
        if gtab.arity != len(terms):
            raise ValueError(f"arity mismatch: g has arity {gtab.arity}, got {len(terms)} terms")
        ftab = implicit_table(B, f, inputs, output, budget)
        fns = [compile_term(B, t, idx) for t in terms]
        for args, v in ftab.values:
            inner = tuple(fn(list(args)) for fn in fns)
            if inner not in gtab or gtab(*inner) != v:
                return Refuted({"algebra": B.name, "inputs": list(args), "inner": list(inner),
                                "expected": v, "got": gtab(*inner) if inner in gtab else None})
    return Proven({"corpus": [B.name for B in corpus]})


def small_homs_are_big(E1, E2, base_names, budget=None):
    """Every hom between base reducts is a hom of the expansions (returns a
    counterexample map or None)."""
    from .algebra import enumerate_homs
    for h in enumerate_homs(E1.reduct(base_names), E2.reduct(base_names), budget):
        if not is_homomorphism(E1, E2, h.map):
            return h.map
    return None
