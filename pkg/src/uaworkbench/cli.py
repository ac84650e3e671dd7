"""The `ua` command: JSON/text reports, exit codes and a result cache.

Exit codes: 0 Proven/success, 1 Refuted, 2 Unknown (budget), 3 usage
error, 4 input error.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, gallery
from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, Signature, nested_table, validate_algebra
from .classops import Q, U, V, ClassSpec, membership, subdirect_decomposition
from .congruence import Congruence, CongruenceLattice, con, con_k, is_rfsi, is_rsi
from .dominion import check_ses, dominion, zigzag_membership
from .expansion import ExpansionOp, ExpansionSpec, NotTotal, beth_primal_witness, expand_class
from .formula import (Formula, FormulaClassError, NotFunctional, ParseError, PartialFunctionTable,
                      check_functional, eval_formula, implicit_table, parse, parse_term, render_formula)
from .repro import REPRO
from .termcond import (TermCondition, is_primal, search_eq_interpolant, search_interpolant_term,
                       term_condition_search)
from .terms import App, Var, eval_term, render, term_variables
from .verdict import PROVEN, REFUTED, UNKNOWN, BudgetExhausted, SearchBudget, Verdict, use_workers

EXIT = {PROVEN: 0, REFUTED: 1, UNKNOWN: 2}
USAGE_ERROR = 3
INPUT_ERROR = 4

# options that change how a command runs, not what it computes
OPERATIONAL = {"format", "workers", "cache_dir", "no_cache", "save", "func", "command"}

_KNOWN_SIGNATURES = [gallery.MV]


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


# ------------------------------------------------------------------ JSON io

def algebra_from_json(data, default_name="A"):
    if not isinstance(data, dict) or "operations" not in data or "size" not in data:
        raise InputError("algebra JSON needs 'size' and 'operations'")
    ops = data["operations"]
    if not isinstance(ops, dict):
        raise InputError("'operations' must be an object")
    symbols, tables = [], {}
    for sym, spec in ops.items():
        if not isinstance(spec, dict) or "arity" not in spec or "table" not in spec:
            raise InputError(f"operation {sym} needs 'arity' and 'table'")
        symbols.append((sym, spec["arity"]))
        tables[sym] = spec["table"]
    order = data.get("signature")
    if order is not None:
        # optional symbol order; JSON objects written with sorted keys lose it
        names = [x[0] if isinstance(x, list) else x for x in order]
        if sorted(names) != sorted(s for s, _ in symbols):
            raise InputError("'signature' must list exactly the operation symbols")
        arity = dict(symbols)
        symbols = [(s, arity[s]) for s in names]
    sig = Signature(symbols)
    for known in _KNOWN_SIGNATURES:
        if known == sig:
            sig = known  # keep derived notation such as MV '*'
    labels = data.get("elements")
    if labels is not None:
        labels = [tuple(x) if isinstance(x, list) else x for x in labels]
    return validate_algebra(data.get("name", default_name), sig, data["size"], tables, labels)


def algebra_to_json(A):
    out = {"name": A.name, "size": A.size, "signature": [[s, k] for s, k in A.signature],
           "operations": {s: {"arity": k, "table": nested_table(A, s)} for s, k in A.signature}}
    if A.labels is not None:
        out["elements"] = jsonable(list(A.labels))
    return out


def jsonable(x):
    """Plain JSON data; keys starting with '_' are dropped."""
    if isinstance(x, Verdict):
        return {"status": x.status, "witness": jsonable(x.witness), "note": x.note}
    if isinstance(x, dict):
        return {_key(k): jsonable(v) for k, v in x.items() if not (isinstance(k, str) and k.startswith("_"))}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return [jsonable(v) for v in sorted(x, key=repr)] if not all(isinstance(v, int) for v in x) \
            else sorted(x)
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return int(x)
    if isinstance(x, float):
        return x
    if hasattr(x, "item") and callable(x.item):  # numpy scalars
        return x.item()
    if isinstance(x, Homomorphism):
        return {"source": x.source.name, "target": x.target.name, "map": list(x.map)}
    if isinstance(x, Congruence):
        return [list(b) for b in x.blocks()]
    if isinstance(x, CongruenceLattice):
        return {"elements": [jsonable(t) for t in x.elements], "covers": [list(c) for c in x.covers]}
    if isinstance(x, FiniteAlgebra):
        return x.name
    if isinstance(x, ClassSpec):
        return x.describe()
    if isinstance(x, (App, Var)):
        return render(x)
    if isinstance(x, Formula):
        return render_formula(x)
    if isinstance(x, PartialFunctionTable):
        return [[list(a), v] for a, v in x.values]
    if hasattr(x, "as_dict"):
        return jsonable(x.as_dict())
    return str(x)


def _key(k):
    if isinstance(k, str):
        return k
    if isinstance(k, tuple):
        return ",".join(map(str, k))
    return str(k)


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_text(report):
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict) and v:
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        else:
            lines.append(f"{prefix}: {json.dumps(v, sort_keys=True, ensure_ascii=False)}")

    head = report.get("verdict")
    if head:
        lines.append(f"verdict: {head}")
    walk("", {k: v for k, v in report.items() if k != "verdict"})
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ inputs

class Inputs:
    """Loads command inputs and records a canonical form of each for the digest."""

    def __init__(self):
        self.seen = []

    def algebra(self, src):
        if src.startswith("gallery:"):
            try:
                A = gallery.gallery_algebra(src[len("gallery:"):])
            except (ValueError, TypeError) as e:
                raise InputError(f"{src}: {e}") from e
            if not isinstance(A, FiniteAlgebra):
                raise InputError(f"{src} is not an algebra")
        else:
            path = Path(src)
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except OSError as e:
                raise InputError(f"cannot read {src}: {e.strerror}") from e
            except json.JSONDecodeError as e:
                raise InputError(f"{src}: invalid JSON ({e})") from e
            A = algebra_from_json(data, default_name=path.stem)
        self.seen.append({"algebra": algebra_to_json(A)})
        return A

    def formula(self, src, signature):
        if src.startswith("gallery:"):
            try:
                f = gallery.gallery_formula(src[len("gallery:"):])
            except (ValueError, TypeError) as e:
                raise InputError(f"{src}: {e}") from e
        else:
            text = src
            if os.path.isfile(src):
                text = Path(src).read_text(encoding="utf-8")
            f = parse(text.strip(), signature)
        self.seen.append({"formula": render_formula(f)})
        return f

    def value(self, name, v):
        self.seen.append({name: jsonable(v)})
        return v

    def digest(self):
        blob = json.dumps(self.seen, sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _io(src, f, inputs, output):
    """Inputs and output variable: flags, then gallery defaults, then free variables."""
    if inputs is None and src.startswith("gallery:"):
        name = src[len("gallery:"):].split("(")[0].strip()
        if name in gallery.FORMULA_IO:
            default_in, default_out = gallery.FORMULA_IO[name]
            return list(default_in), output or default_out
        if name == "isbell_formula":
            n = gallery.parse_id(src[len("gallery:"):])[1][0]
            return gallery.isbell_inputs(n), output or "y"
    output = output or "y"
    if inputs is None:
        return sorted(v for v in f.free_vars if v != output), output
    return [v for v in inputs.split(",") if v], output


def _class(inp, args):
    if not args.cls:
        raise UsageError("at least one --class algebra is required")
    gens = [inp.algebra(s) for s in args.cls]
    inp.value("operator", args.op)
    try:
        return ClassSpec(tuple(gens), args.op)
    except AlgebraError as e:
        raise InputError(str(e)) from e


def _subset(B, text):
    try:
        items = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"--sub must be a JSON list ({e})") from e
    if not isinstance(items, list):
        raise InputError("--sub must be a JSON list")
    out = set()
    for it in items:
        try:
            out.add(_element(B, it))
        except (KeyError, ValueError) as e:
            raise InputError(f"{it!r} is not an element of {B.name}") from e
    return frozenset(out)


def _element(B, it):
    if B.labels is None:
        x = int(it)
    else:
        x = B.index_of(tuple(it) if isinstance(it, list) else it)
    if not 0 <= x < B.size:
        raise ValueError(it)
    return x


def _parse_element(B, text):
    try:
        it = json.loads(text)
    except json.JSONDecodeError:
        it = text
    try:
        return _element(B, it)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{text!r} is not an element of {B.name}") from e


def _defines(inp, items, signature):
    """--define SYM=FORMULA or SYM(in1,in2;out)=FORMULA."""
    ops = []
    for item in items or []:
        head, sep, body = item.partition("=")
        if not sep or not head.strip():
            raise UsageError(f"bad --define {item!r}; expected SYM=FORMULA or SYM(x1,x2;y)=FORMULA")
        head = head.strip()
        io = None
        if "(" in head:
            sym, _, rest = head.partition("(")
            rest = rest.rstrip(")")
            ins, _, out = rest.partition(";")
            io = ([v.strip() for v in ins.split(",") if v.strip()], out.strip() or "y")
            head = sym.strip()
        f = inp.formula(body.strip(), signature)
        if io is None:
            io = _io(body.strip(), f, None, None)
        ops.append(ExpansionOp(head, f, tuple(io[0]), io[1]))
        inp.value("define", [head, list(io[0]), io[1]])
    if not ops:
        raise UsageError("at least one --define is required")
    return ops


def _lab(A, x):
    lab = A.label(x)
    return list(lab) if isinstance(lab, tuple) else lab


# ---------------------------------------------------------------- commands

def cmd_validate(inp, args, budget):
    A = inp.algebra(args.algebra)
    return Verdict(PROVEN, {"name": A.name, "size": A.size,
                            "signature": [[s, k] for s, k in A.signature]}), {}


def cmd_eval(inp, args, budget):
    A = inp.algebra(args.algebra)
    asg = {}
    for part in filter(None, (p.strip() for p in (args.assign or "").split(","))):
        var, _, val = part.partition("=")
        if not val:
            raise UsageError(f"bad assignment {part!r}")
        asg[var.strip()] = _parse_element(A, val.strip())
    inp.value("assign", asg)
    if args.term:
        t = parse_term(args.term, A.signature)
        inp.value("term", render(t))
        missing = sorted(set(term_variables(t)) - set(asg))
        if missing:
            raise InputError(f"variable {missing[0]} has no value")
        v = eval_term(A, t, asg)
        return Verdict(PROVEN, {"term": render(t), "value": _lab(A, v)}), {}
    if not args.formula:
        raise UsageError("give --formula or --term")
    f = inp.formula(args.formula, A.signature)
    missing = sorted(f.free_vars - set(asg))
    if missing:
        raise InputError(f"variable {missing[0]} has no value")
    ok = eval_formula(A, f, asg)
    return Verdict(PROVEN if ok else REFUTED, {"formula": render_formula(f), "holds": ok}), {}


def cmd_functional(inp, args, budget):
    K = _class(inp, args)
    f = inp.formula(args.formula, K.signature)
    ins, out = _io(args.formula, f, args.inputs, args.out)
    inp.value("io", [ins, out])
    v = check_functional(K, f, ins, out, budget)
    return v, {"class": K.describe(), "formula": render_formula(f), "inputs": ins, "output": out}


def cmd_implicit_table(inp, args, budget):
    A = inp.algebra(args.algebra)
    f = inp.formula(args.formula, A.signature)
    ins, out = _io(args.formula, f, args.inputs, args.out)
    inp.value("io", [ins, out])
    extra = {"algebra": A.name, "formula": render_formula(f), "inputs": ins, "output": out}
    try:
        tab = implicit_table(A, f, ins, out, budget)
    except NotFunctional as e:
        return Verdict(REFUTED, e.witness, "not functional"), extra
    except BudgetExhausted as e:
        return Verdict(UNKNOWN, e.bound()), extra
    rows = [[[_lab(A, a) for a in args_], _lab(A, v)] for args_, v in tab.values]
    missing = tab.missing()
    return Verdict(PROVEN, {"table": rows, "total": tab.is_total(),
                            "first_missing": [_lab(A, a) for a in missing] if missing is not None else None}), extra


def cmd_conlat(inp, args, budget):
    A = inp.algebra(args.algebra)
    K = _class(inp, args) if args.cls else None
    try:
        L = con(A) if K is None else con_k(A, K, budget)
    except BudgetExhausted as e:
        return Verdict(UNKNOWN, e.bound()), {}
    return Verdict(PROVEN, {"size": len(L), "lattice": jsonable(L)}), \
        {"algebra": A.name, "class": K.describe() if K else None}


def cmd_rfsi(inp, args, budget):
    A = inp.algebra(args.algebra)
    K = _class(inp, args) if args.cls else None
    try:
        fsi = is_rfsi(A, K, budget)
        si = is_rsi(A, K, budget)
        decomp = subdirect_decomposition(A, K, budget) if K is not None and A.size > 1 else None
    except BudgetExhausted as e:
        return Verdict(UNKNOWN, e.bound()), {}
    except AlgebraError as e:
        return Verdict(REFUTED, {"reason": str(e)}), {}
    w = {"rfsi": fsi, "rsi": si}
    if decomp is not None:
        w["decomposition"] = [jsonable(t) for t in decomp]
    return Verdict(PROVEN if fsi else REFUTED, w), {"algebra": A.name, "class": K.describe() if K else "Con"}


def cmd_membership(inp, args, budget):
    B = inp.algebra(args.algebra)
    K = _class(inp, args)
    return membership(B, K, budget), {"algebra": B.name, "class": K.describe()}


def cmd_dominion(inp, args, budget):
    K = _class(inp, args)
    B = inp.algebra(args.big)
    A = inp.value("sub", _subset(B, args.sub))
    inp.value("expect_closed", args.expect_closed)
    try:
        rep = dominion(A, B, K, budget)
    except AlgebraError as e:
        raise InputError(str(e)) from e
    d = rep.as_dict()
    if not rep.complete:
        return Verdict(UNKNOWN, d), {}
    if args.expect_closed and not rep.trivial:
        return Verdict(REFUTED, d, "dominion is larger than the subalgebra"), {}
    return Verdict(PROVEN, d), {}


def cmd_ses(inp, args, budget):
    K = _class(inp, args)
    inp.value("ses", [args.strategy, args.max_size, args.nu])
    try:
        v = check_ses(K, args.strategy, budget, nu=args.nu, max_size=args.max_size)
    except ValueError as e:
        raise InputError(str(e)) from e
    return v, {"class": K.describe()}


def cmd_term_search(inp, args, budget):
    A = inp.algebra(args.algebra)
    try:
        cond = TermCondition.parse(args.condition)
    except ValueError as e:
        raise UsageError(str(e)) from e
    inp.value("condition", args.condition)
    v = term_condition_search(A, cond, budget)
    return v, {"algebra": A.name, "condition": args.condition}


def cmd_primal(inp, args, budget):
    A = inp.algebra(args.algebra)
    inp.value("route", args.route)
    v = is_primal(A, budget, route=args.route)
    w = v.witness
    if v.refuted and isinstance(w, dict) and "subuniverse" in w:
        w = dict(w, subuniverse_elements=[_lab(A, x) for x in w["subuniverse"]])
        v = Verdict(v.status, w, v.note)
    return v, {"algebra": A.name}


def cmd_interpolate(inp, args, budget):
    K = _class(inp, args)
    f = inp.formula(args.formula, K.signature)
    ins, out = _io(args.formula, f, args.inputs, args.out)
    inp.value("io", [ins, out, args.equations])
    if args.equations:
        v = search_eq_interpolant(K, f, ins, out, budget)
    else:
        v = search_interpolant_term(K, f, ins, out, budget)
    return v, {"class": K.describe(), "formula": render_formula(f), "inputs": ins, "output": out}


def cmd_expand(inp, args, budget):
    K = _class(inp, args)
    ops = _defines(inp, args.define, K.signature)
    inp.value("filter_total", args.filter_total)
    try:
        spec = ExpansionSpec(K, tuple(ops))
        M, axioms, dropped = expand_class(spec, filter_total=args.filter_total, budget=budget)
    except NotTotal as e:
        return Verdict(REFUTED, e.witness, "an operation is not total"), {}
    except NotFunctional as e:
        return Verdict(REFUTED, e.witness, "not functional"), {}
    except BudgetExhausted as e:
        return Verdict(UNKNOWN, e.bound()), {}
    except (AlgebraError, FormulaClassError) as e:
        raise InputError(str(e)) from e
    return Verdict(PROVEN, {"class": M.describe(), "axioms": axioms, "dropped": dropped,
                            "algebras": [algebra_to_json(E) for E in M.generators]}), {}


def cmd_beth_witness(inp, args, budget):
    A = inp.algebra(args.algebra)
    ops = _defines(inp, args.define, A.signature)
    try:
        v = beth_primal_witness(A, ops, budget)
    except NotTotal as e:
        return Verdict(REFUTED, e.witness, "an operation is not total"), {}
    except NotFunctional as e:
        return Verdict(REFUTED, e.witness, "not functional"), {}
    return v, {"algebra": A.name}


def cmd_zigzag(inp, args, budget):
    B = inp.algebra(args.algebra)
    A = inp.value("sub", _subset(B, args.sub))
    b = inp.value("element", _parse_element(B, args.element))
    inp.value("zigzag", [args.max_length, args.codomain_bound])
    try:
        v = zigzag_membership(A, B, b, budget, args.max_length, args.codomain_bound)
    except AlgebraError as e:
        raise InputError(str(e)) from e
    return v, {"monoid": B.name, "element": _lab(B, b)}


def cmd_gallery(inp, args, budget):
    if not args.id:
        return Verdict(PROVEN, gallery.gallery_names()), {}
    src = args.id if args.id.startswith("gallery:") else "gallery:" + args.id
    name = src[len("gallery:"):].split("(")[0].strip()
    if name in gallery.FORMULAS:
        f = inp.formula(src, None)
        ins, out = _io(src, f, None, None)
        return Verdict(PROVEN, {"formula": render_formula(f), "inputs": ins, "output": out}), {}
    A = inp.algebra(src)
    return Verdict(PROVEN, {"algebra": algebra_to_json(A)}), {}


def cmd_repro(inp, args, budget):
    if args.id not in REPRO:
        raise UsageError(f"unknown repro id {args.id}; choose from {', '.join(sorted(REPRO))}")
    inp.value("repro", args.id)
    fn = REPRO[args.id]
    if args.id == "property-suites" and args.seed is not None:
        v = fn(seed=args.seed)
    else:
        v = fn()
    return v, {"id": args.id}


# ------------------------------------------------------------------ parser

def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--budget", help="elements=N,steps=N,seconds=S")
    p.add_argument("--seed", type=int, help="seed for sampled property commands")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default UA_WORKERS or 1)")
    p.add_argument("--cache-dir", help="result cache directory (default UA_CACHE_DIR, off if unset)")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--save", metavar="FILE", help="also write the report to FILE")
    return p


def _class_opts(p, required=True):
    p.add_argument("--class", dest="cls", action="append", metavar="ALGEBRA", required=required,
                   help="generator (JSON file or gallery:id); repeatable")
    p.add_argument("--op", choices=[Q, U, V], default=Q, help="class operator (default Q)")


def _formula_opts(p):
    p.add_argument("--formula", required=True, help="formula text, file, or gallery:id")
    p.add_argument("--inputs", help="comma separated input variables")
    p.add_argument("--out", help="output variable (default y)")


def build_parser():
    common = _common()
    parser = _Parser(prog="ua", description="Finite universal algebra workbench.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("validate", cmd_validate, "check an algebra file")
    p.add_argument("algebra")
    p = add("eval", cmd_eval, "evaluate a formula or term under an assignment")
    p.add_argument("algebra")
    p.add_argument("--formula")
    p.add_argument("--term")
    p.add_argument("--assign", help="x=0,y=1")
    p = add("functional", cmd_functional, "is a formula functional on a class")
    _class_opts(p)
    _formula_opts(p)
    p = add("implicit-table", cmd_implicit_table, "table of the implicit operation on an algebra")
    p.add_argument("algebra")
    _formula_opts(p)
    p = add("conlat", cmd_conlat, "congruence lattice (relative with --class)")
    p.add_argument("algebra")
    _class_opts(p, required=False)
    p = add("rfsi", cmd_rfsi, "relative (finite) subdirect irreducibility")
    p.add_argument("algebra")
    _class_opts(p, required=False)
    p = add("membership", cmd_membership, "membership in Q, U or V of generators")
    p.add_argument("algebra")
    _class_opts(p)
    p = add("dominion", cmd_dominion, "dominion of a subalgebra")
    _class_opts(p)
    p.add_argument("--big", required=True, help="the big algebra")
    p.add_argument("--sub", required=True, help="JSON list of elements (indices or labels)")
    p.add_argument("--expect-closed", action="store_true", help="exit 1 when the dominion is larger")
    p = add("ses", cmd_ses, "strong epimorphism surjectivity scan")
    _class_opts(p)
    p.add_argument("--strategy", choices=["nu", "fg"], default="nu")
    p.add_argument("--max-size", type=int, default=64)
    p.add_argument("--nu", type=int, help="known near-unanimity arity")
    p = add("term-search", cmd_term_search, "search for a term satisfying a condition")
    p.add_argument("algebra")
    p.add_argument("--condition", required=True, help="majority, malcev, pixley, discriminator, nu N")
    p = add("primal", cmd_primal, "is the algebra primal")
    p.add_argument("algebra")
    p.add_argument("--route", choices=["auto", "fast", "reference"], default="auto")
    p = add("interpolate", cmd_interpolate, "search terms interpolating an implicit operation")
    _class_opts(p)
    _formula_opts(p)
    p.add_argument("--equations", action="store_true", help="search conjunctions of equations instead")
    p = add("expand", cmd_expand, "pp expansion of a class")
    _class_opts(p)
    p.add_argument("--define", action="append", help="SYM=FORMULA or SYM(x1,x2;y)=FORMULA")
    p.add_argument("--filter-total", action="store_true", help="drop generators where an operation is partial")
    p = add("beth-witness", cmd_beth_witness, "primal expansion witness")
    p.add_argument("algebra")
    p.add_argument("--define", action="append", help="SYM=FORMULA or SYM(x1,x2;y)=FORMULA")
    p = add("zigzag", cmd_zigzag, "zigzag membership in a monoid dominion")
    p.add_argument("algebra")
    p.add_argument("--sub", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--max-length", type=int, default=3)
    p.add_argument("--codomain-bound", type=int, default=4)
    p = add("gallery", cmd_gallery, "list gallery ids or print one")
    p.add_argument("id", nargs="?")
    p = add("repro", cmd_repro, "run a reproducible check")
    p.add_argument("id", help=", ".join(REPRO))
    return parser


# ------------------------------------------------------------------- cache

def _cache_dir(args):
    if args.no_cache:
        return None
    d = args.cache_dir or os.environ.get("UA_CACHE_DIR")
    return Path(d) if d else None


def _cache_get(d, key):
    path = d / key[:2] / f"{key}.json"
    try:
        return path.read_text(encoding="utf-8")
    except OSError:
        return None


def _cache_put(d, key, text):
    folder = d / key[:2]
    folder.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, folder / f"{key}.json")


def _echo(args):
    opts = {k: jsonable(v) for k, v in sorted(vars(args).items()) if k not in OPERATIONAL}
    return {"name": args.command, "options": opts}


def _exit_for(report):
    return EXIT.get(report.get("verdict"), 0)


def run(argv=None, stdout=None):
    """Run the CLI; returns (exit code, report dict or None)."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        budget = SearchBudget.parse(args.budget) if args.budget else SearchBudget()
    except (ValueError, TypeError) as e:
        parser.error(f"--budget: {e}")
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be positive")
    echo = _echo(args)
    inp = Inputs()
    cache = _cache_dir(args)
    try:
        with use_workers(args.workers):
            report = _compute(args, inp, budget, echo, cache)
    except UsageError as e:
        sys.stderr.write(f"ua: usage error: {e}\n")
        return USAGE_ERROR, None
    except (InputError, AlgebraError, ParseError, FormulaClassError, NotFunctional, ValueError) as e:
        sys.stderr.write(f"ua: input error: {e}\n")
        return INPUT_ERROR, None
    text = dumps(report) if args.format == "json" else render_text(report)
    stdout.write(text)
    if args.save:
        Path(args.save).write_text(dumps(report), encoding="utf-8")
    return _exit_for(report), report


def _cache_key(echo, budget):
    """Command echo, contents of any files it names, and the budget."""
    files = {}

    def walk(v):
        if isinstance(v, list):
            for x in v:
                walk(x)
        elif isinstance(v, str) and os.path.isfile(v):
            files[v] = hashlib.sha256(Path(v).read_bytes()).hexdigest()

    for v in echo["options"].values():
        walk(v)
    for item in echo["options"].get("define") or []:
        walk(item.partition("=")[2].strip())
    blob = dumps({"command": echo, "files": files, "budget": budget.as_dict(), "version": __version__})
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _compute(args, inp, budget, echo, cache):
    key = _cache_key(echo, budget) if cache is not None else None
    if key is not None:
        hit = _cache_get(cache, key)
        if hit is not None:
            return json.loads(hit)
    verdict, extra = args.func(inp, args, budget)
    report = {
        "command": echo,
        "inputs_sha256": inp.digest(),
        "budget": budget.as_dict(),
        "verdict": verdict.status,
        "witness": jsonable(verdict.witness),
    }
    if verdict.note:
        report["note"] = verdict.note
    if extra:
        report["context"] = jsonable(extra)
    if key is not None:
        _cache_put(cache, key, dumps(report))
    return report


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
