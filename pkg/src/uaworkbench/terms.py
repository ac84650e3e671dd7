"""Terms over a signature: construction, rendering, evaluation."""

from dataclasses import dataclass
from functools import cached_property

INFIX = ("*", "+")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name

    @property
    def size(self):
        return 1

    @property
    def variables(self):
        return frozenset([self.name])

    def substitute(self, mapping):
        return mapping.get(self.name, self)


@dataclass(frozen=True)
class App:
    sym: str
    args: tuple = ()

    def __str__(self):
        return render(self)

    @cached_property
    def size(self):
        return 1 + sum(a.size for a in self.args)

    @cached_property
    def variables(self):
        out = frozenset()
        for a in self.args:
            out |= a.variables
        return out

    def substitute(self, mapping):
        return App(self.sym, tuple(a.substitute(mapping) for a in self.args))


def app(sym, *args):
    return App(sym, tuple(args))


def render(t, parent=None):
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.sym
    if t.sym in INFIX and len(t.args) == 2:
        left = render(t.args[0], t.sym)
        right = render(t.args[1], t.sym + "r")
        s = f"{left} {t.sym} {right}"
        # '*' binds tighter than '+'; both are left associative
        if parent is None or (parent == "+" and t.sym == "*") or parent == t.sym:
            return s
        return f"({s})"
    return f"{t.sym}({', '.join(render(a) for a in t.args)})"


def term_variables(t):
    """Variables of t in order of first occurrence."""
    seen = []

    def walk(u):
        if isinstance(u, Var):
            if u.name not in seen:
                seen.append(u.name)
        else:
            for a in u.args:
                walk(a)

    walk(t)
    return seen


def compile_term(A, t, index):
    """Compile t into a function of an environment list.

    index maps variable names to positions in the environment.
    """
    if isinstance(t, Var):
        if t.name not in index:
            raise KeyError(f"unbound variable {t.name}")
        i = index[t.name]
        return lambda env: env[i]
    table = A.table(t.sym)
    k = len(t.args)
    n = A.size
    if k == 0:
        v = table[0]
        return lambda env: v
    subs = [compile_term(A, a, index) for a in t.args]
    if k == 1:
        (f,) = subs
        return lambda env: table[f(env)]
    if k == 2:
        f, g = subs
        return lambda env: table[f(env) * n + g(env)]

    def run(env):
        i = 0
        for s in subs:
            i = i * n + s(env)
        return table[i]

    return run


def eval_term(A, t, asg):
    """Value of t in A under the assignment asg (dict name -> element)."""
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise KeyError(f"unbound variable {t.name}") from None
    vals = [eval_term(A, a, asg) for a in t.args]
    return A.apply(t.sym, vals)


def check_term(signature, t):
    """Raise ValueError if t uses an unknown symbol or a wrong arity."""
    if isinstance(t, Var):
        return
    if t.sym not in signature:
        raise ValueError(f"unknown symbol {t.sym}")
    if signature.arity(t.sym) != len(t.args):
        raise ValueError(f"arity mismatch for {t.sym}: expected {signature.arity(t.sym)}, got {len(t.args)}")
    for a in t.args:
        check_term(signature, a)
