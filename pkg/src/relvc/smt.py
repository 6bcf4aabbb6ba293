"""SMT-LIB 2 lowering and an external solver driver.

Memory states become ``(Array Int Int)`` constants with a non-negativity
axiom, truncated subtraction becomes ``ite``, and call atoms become
uninterpreted predicates ``call_<proc>`` over pairs of arrays. A goal is
valid when its hypotheses together with its negated conclusion are
unsatisfiable.

State quantifiers that end up existential after negation are skolemized
into fresh constants; the remaining universal ones (the relational contract
hypotheses) are emitted with the call atoms as instantiation patterns.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

from . import logic as L
from .errors import SolverExitError, SolverNotFoundError, SolverProtocolError

DEFAULT_SOLVER = "z3 -in"
DEFAULT_TIMEOUT = 10.0
LOGIC = "AUFLIA"
NONLINEAR_LOGIC = "AUFNIRA"
ARRAY = "(Array Int Int)"

# --------------------------------------------------------------------------
# Verdicts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    status = "valid"


@dataclass(frozen=True)
class Invalid:
    """Counter-model: ``model`` lists ``(state, address, value)`` samples."""

    model: tuple = ()
    states: dict = field(default_factory=dict, compare=False, repr=False)
    ints: dict = field(default_factory=dict, compare=False, repr=False)
    atoms: dict = field(default_factory=dict, compare=False, repr=False)
    status = "invalid"


@dataclass(frozen=True)
class Unknown:
    reason: str = ""
    status = "unknown"


SolverVerdict = Union[Valid, Invalid, Unknown]


# --------------------------------------------------------------------------
# Symbols
# --------------------------------------------------------------------------

_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*\Z")
_RESERVED = {"let", "forall", "exists", "match", "par", "assert", "ite", "and",
             "or", "not", "select", "store", "true", "false", "lambda", "as", "_", "!"}


def sym(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    return "|" + name.replace("|", "") + "|"


def call_sym(proc: str) -> str:
    return sym(f"call_{proc}")


# --------------------------------------------------------------------------
# Skolemization
# --------------------------------------------------------------------------


class _Skolem:
    def __init__(self, taken: set):
        self.taken = set(taken)
        self.states: list[str] = []
        self.ints: list[str] = []

    def name(self, base: str) -> str:
        n, k = base, 0
        while n in self.taken:
            k += 1
            n = f"{base}!{k}"
        self.taken.add(n)
        return n

    def run(self, f, positive: bool, bound: bool):
        """Rewrite ``f`` occurring with the given asserted polarity."""
        if isinstance(f, (L.BoolLit, L.Cmp, L.SEq, L.Call)):
            return f
        if isinstance(f, L.Not):
            return L.Not(self.run(f.arg, not positive, bound))
        if isinstance(f, L.And):
            return L.And(tuple(self.run(a, positive, bound) for a in f.args))
        if isinstance(f, L.Or):
            return L.Or(tuple(self.run(a, positive, bound) for a in f.args))
        if isinstance(f, L.Implies):
            return L.Implies(self.run(f.lhs, not positive, bound), self.run(f.rhs, positive, bound))
        if isinstance(f, L.ForallS):
            if not positive and not bound:
                mapping = {}
                for s in f.states:
                    new = self.name(s.name)
                    mapping[s.name] = new
                    self.states.append(new)
                return self.run(L.rename_states(f.body, mapping), positive, bound)
            return L.ForallS(f.states, self.run(f.body, positive, True), f.patterns)
        if isinstance(f, L.QInt):
            existential = (f.kind == "exists") == positive
            if existential and not bound:
                new = self.name(f.var)
                self.ints.append(new)
                return self.run(_rename_ivar(f.body, f.var, new), positive, bound)
            return L.QInt(f.kind, f.var, self.run(f.body, positive, True))
        raise TypeError(f)


def _rename_ivar(f, old: str, new):
    """Substitute the term ``new`` (or a variable of that name) for ``old``."""
    if isinstance(new, str):
        new = L.IVar(new)

    def term(t):
        if isinstance(t, L.IVar):
            return new if t.name == old else t
        if isinstance(t, L.Sel):
            return L.Sel(state(t.state), term(t.index))
        if isinstance(t, L.Arith):
            return L.Arith(t.op, term(t.left), term(t.right))
        return t

    def state(s):
        if isinstance(s, L.Store):
            return L.Store(state(s.base), term(s.index), term(s.value))
        return s

    def go(f):
        if isinstance(f, L.BoolLit):
            return f
        if isinstance(f, L.Cmp):
            return L.Cmp(f.op, term(f.left), term(f.right))
        if isinstance(f, L.SEq):
            return L.SEq(state(f.left), state(f.right))
        if isinstance(f, L.Call):
            return L.Call(f.proc, state(f.pre), state(f.post))
        if isinstance(f, L.Not):
            return L.Not(go(f.arg))
        if isinstance(f, L.And):
            return L.And(tuple(go(a) for a in f.args))
        if isinstance(f, L.Or):
            return L.Or(tuple(go(a) for a in f.args))
        if isinstance(f, L.Implies):
            return L.Implies(go(f.lhs), go(f.rhs))
        if isinstance(f, L.ForallS):
            return L.ForallS(f.states, go(f.body), tuple(go(p) for p in f.patterns))
        if isinstance(f, L.QInt):
            if f.var == old:
                return f
            return L.QInt(f.kind, f.var, go(f.body))
        raise TypeError(f)

    return go(f)


# --------------------------------------------------------------------------
# Emission
# --------------------------------------------------------------------------


def _nonneg(s: str) -> str:
    return f"(forall ((i Int)) (! (>= (select {s} i) 0) :pattern ((select {s} i))))"


def emit_term(t) -> str:
    if isinstance(t, L.Num):
        return str(t.value)
    if isinstance(t, L.IVar):
        return sym(t.name)
    if isinstance(t, L.Sel):
        return f"(select {emit_state(t.state)} {emit_term(t.index)})"
    if isinstance(t, L.Arith):
        a, b = emit_term(t.left), emit_term(t.right)
        if t.op == "+":
            return f"(+ {a} {b})"
        if t.op == "*":
            return f"(* {a} {b})"
        return f"(ite (>= {a} {b}) (- {a} {b}) 0)"
    raise TypeError(t)


def emit_state(s) -> str:
    if isinstance(s, L.SVar):
        return sym(s.name)
    if isinstance(s, L.Store):
        return f"(store {emit_state(s.base)} {emit_term(s.index)} {emit_term(s.value)})"
    raise TypeError(s)


_CMP = {"=": "=", "<=": "<=", "<": "<", ">=": ">=", ">": ">"}


def emit(f, positive: bool = True) -> str:
    """SMT-LIB text of a formula; ``positive`` is its polarity in the script."""
    if isinstance(f, L.BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, L.Cmp):
        a, b = emit_term(f.left), emit_term(f.right)
        if f.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({_CMP[f.op]} {a} {b})"
    if isinstance(f, L.SEq):
        return f"(= {emit_state(f.left)} {emit_state(f.right)})"
    if isinstance(f, L.Call):
        return f"({call_sym(f.proc)} {emit_state(f.pre)} {emit_state(f.post)})"
    if isinstance(f, L.Not):
        return f"(not {emit(f.arg, not positive)})"
    if isinstance(f, L.And):
        if not f.args:
            return "true"
        return "(and " + " ".join(emit(a, positive) for a in f.args) + ")"
    if isinstance(f, L.Or):
        if not f.args:
            return "false"
        return "(or " + " ".join(emit(a, positive) for a in f.args) + ")"
    if isinstance(f, L.Implies):
        return f"(=> {emit(f.lhs, not positive)} {emit(f.rhs, positive)})"
    if isinstance(f, L.ForallS):
        decls = " ".join(f"({sym(s.name)} {ARRAY})" for s in f.states)
        body = emit(f.body, positive)
        if not (positive and f.patterns):
            # the bound states range over naturals-valued memories
            guards = " ".join(_nonneg(sym(s.name)) for s in f.states)
            body = f"(=> (and {guards} true) {body})"
        if f.patterns:
            pats = " ".join(emit(p) for p in f.patterns)
            body = f"(! {body} :pattern ({pats}))"
        return f"(forall ({decls}) {body})"
    if isinstance(f, L.QInt):
        v = sym(f.var)
        if f.kind == "forall":
            return f"(forall (({v} Int)) (=> (>= {v} 0) {emit(f.body, positive)}))"
        return f"(exists (({v} Int)) (and (>= {v} 0) {emit(f.body, positive)}))"
    raise TypeError(f)


# bounded integer quantifiers up to this bound are unrolled
UNROLL_LIMIT = 64


def unroll_bounded(f):
    """Replace ``forall v. v < k => B`` by ``B[0] & ... & B[k-1]`` (dually for exists)."""
    if isinstance(f, (L.BoolLit, L.Cmp, L.SEq, L.Call)):
        return f
    if isinstance(f, L.Not):
        return L.Not(unroll_bounded(f.arg))
    if isinstance(f, L.And):
        return L.And(tuple(unroll_bounded(a) for a in f.args))
    if isinstance(f, L.Or):
        return L.Or(tuple(unroll_bounded(a) for a in f.args))
    if isinstance(f, L.Implies):
        return L.Implies(unroll_bounded(f.lhs), unroll_bounded(f.rhs))
    if isinstance(f, L.ForallS):
        return L.ForallS(f.states, unroll_bounded(f.body), f.patterns)
    if isinstance(f, L.QInt):
        body = unroll_bounded(f.body)
        guard, rest = None, None
        if f.kind == "forall" and isinstance(body, L.Implies):
            guard, rest = body.lhs, body.rhs
        elif f.kind == "exists" and isinstance(body, L.And) and len(body.args) == 2:
            guard, rest = body.args
        if (isinstance(guard, L.Cmp) and guard.op == "<" and guard.left == L.IVar(f.var)
                and isinstance(guard.right, L.Num) and guard.right.value <= UNROLL_LIMIT):
            parts = tuple(_rename_ivar(rest, f.var, L.Num(k)) for k in range(guard.right.value))
            return L.And(parts) if f.kind == "forall" else L.Or(parts)
        return L.QInt(f.kind, f.var, body)
    raise TypeError(f)


def has_quantifiers(f) -> bool:
    return any(isinstance(n, (L.ForallS, L.QInt)) for n in L.walk(f))


def _ground_calls(f) -> list[L.Call]:
    out, seen = [], set()

    def go(n, bound: frozenset):
        if isinstance(n, L.ForallS):
            bound = bound | {s.name for s in n.states}
            go(n.body, bound)
            return
        if isinstance(n, L.Call):
            if not (L.free_states(n) & bound) and n not in seen:
                seen.add(n)
                out.append(n)
            return
        for c in L.children(n):
            if not isinstance(c, (L.SVar, L.Store, L.Num, L.IVar, L.Sel, L.Arith)):
                go(c, bound)

    go(f, frozenset())
    return out


def _int_literals(f) -> set:
    return {n.value for n in L.walk(f) if isinstance(n, L.Num)}


@dataclass
class LoweredScript:
    label: str
    declarations: list
    assertions: list
    check: str = "(check-sat)"
    logic: str = LOGIC
    queries: list = field(default_factory=list)   # (kind, key, sexpr)
    asserted: list = field(default_factory=list)  # skolemized formulas, for replay
    state_consts: list = field(default_factory=list)
    int_consts: list = field(default_factory=list)
    addresses: list = field(default_factory=list)

    def text(self, with_queries: bool = False) -> str:
        lines = [f"; goal {self.label}",
                 "(set-option :produce-models true)",
                 f"(set-logic {self.logic})"]
        lines += self.declarations
        lines += self.assertions
        lines.append(self.check)
        if with_queries and self.queries:
            lines.append(self.query_text())
        return "\n".join(lines) + "\n"

    def query_text(self) -> str:
        if not self.queries:
            return ""
        return "(get-value (" + " ".join(q[2] for q in self.queries) + "))"

    @property
    def quantifier_free(self) -> bool:
        return not any(has_quantifiers(f) for f in self.asserted)


def lower(goal, skolemize: bool = True) -> LoweredScript:
    """Lower a goal to an SMT-LIB script whose ``unsat`` means the goal is valid."""
    hyps = [unroll_bounded(h) for h in goal.hypotheses]
    negated = L.Not(unroll_bounded(goal.conclusion))
    free = set()
    for f in hyps + [negated]:
        free |= L.free_states(f)
    free_ints = set()
    for f in hyps + [negated]:
        free_ints |= {n.name for n in L.walk(f) if isinstance(n, L.IVar)}
    sk = _Skolem(free | _kept_names(hyps + [negated]))
    if skolemize:
        asserted = [sk.run(f, True, False) for f in hyps] + [sk.run(negated, True, False)]
    else:
        asserted = hyps + [negated]
    states = sorted(free) + sk.states
    ints = sk.ints

    procs = sorted({c.proc for f in asserted for c in L.calls_in(f)})
    decls = [f"(declare-const {sym(s)} {ARRAY})" for s in states]
    decls += [f"(declare-const {sym(v)} Int)" for v in ints]
    decls += [f"(declare-fun {call_sym(p)} ({ARRAY} {ARRAY}) Bool)" for p in procs]

    axioms = [f"(assert {_nonneg(sym(s))})" for s in states]
    axioms += [f"(assert (>= {sym(v)} 0))" for v in ints]
    body = [f"(assert {emit(f, True)})" for f in asserted]

    queries = [("state", s, sym(s)) for s in states]
    queries += [("int", v, sym(v)) for v in ints]
    for c in _ground_calls(L.And(tuple(asserted))):
        queries.append(("atom", emit(c), emit(c)))

    addrs = sorted({a for a in _int_literals(L.And(tuple(asserted))) if a >= 0} | set(range(5)))
    logic = NONLINEAR_LOGIC if any(_nonlinear(f) for f in asserted) else LOGIC
    return LoweredScript(goal.label, decls, axioms + body, queries=queries, logic=logic,
                         asserted=asserted, state_consts=states, int_consts=list(ints),
                         addresses=addrs)


def _kept_names(fs) -> set:
    # binders that survive skolemization must not clash with new constants
    out = set()
    for f in fs:
        for n in L.walk(f):
            if isinstance(n, L.ForallS) and n.patterns:
                out |= {s.name for s in n.states}
            elif isinstance(n, L.QInt):
                out.add(n.var)
    return out


def _nonlinear(f) -> bool:
    return any(isinstance(n, L.Arith) and n.op == "*"
               and not isinstance(n.left, L.Num) and not isinstance(n.right, L.Num)
               for n in L.walk(f))


# --------------------------------------------------------------------------
# S-expressions and model values
# --------------------------------------------------------------------------

_SEXP_TOKEN = re.compile(r'\s*(?:(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|"]+))')


def parse_sexprs(text: str) -> list:
    """Parse SMT-LIB output into nested lists of strings."""
    stack: list[list] = [[]]
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SolverProtocolError(f"cannot parse solver output near {text[pos:pos + 40]!r}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SolverProtocolError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            tok = m.group(3) or m.group(4) or m.group(5)
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SolverProtocolError("unbalanced '(' in solver output")
    return stack[0]


class ArrayValue:
    """A concrete integer array from a model, callable on an index."""

    def __init__(self, fn: Callable[[int], int], points=()):
        self.fn = fn
        self.points = set(points)

    def __call__(self, i: int) -> int:
        return self.fn(i)

    def __getitem__(self, i: int) -> int:
        return self.fn(i)

    def store(self, i: int, v: int) -> "ArrayValue":
        base = self.fn
        return ArrayValue(lambda j: v if j == i else base(j), self.points | {i})


class _Unsupported(Exception):
    pass


def _unsym(tok: str) -> str:
    return tok[1:-1] if tok.startswith("|") else tok


def eval_value(e, env: dict = None):
    """Evaluate a model value expression (ints, Booleans, arrays)."""
    env = env or {}
    if isinstance(e, str):
        if re.fullmatch(r"\d+", e):
            return int(e)
        if e == "true":
            return True
        if e == "false":
            return False
        name = _unsym(e)
        if name in env:
            return env[name]
        raise _Unsupported(f"unknown symbol {e}")
    head = e[0]
    if isinstance(head, list):
        # ((as const (Array Int Int)) v)
        if len(head) >= 2 and head[0] == "as" and head[1] == "const":
            v = eval_value(e[1], env)
            return ArrayValue(lambda _i: v)
        raise _Unsupported(str(head))
    args = e[1:]
    if head == "-":
        vals = [eval_value(a, env) for a in args]
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if head == "+":
        return sum(eval_value(a, env) for a in args)
    if head == "*":
        out = 1
        for a in args:
            out *= eval_value(a, env)
        return out
    if head == "let":
        new = dict(env)
        for name, val in args[0]:
            new[_unsym(name)] = eval_value(val, env)
        return eval_value(args[1], new)
    if head == "ite":
        return eval_value(args[1], env) if eval_value(args[0], env) else eval_value(args[2], env)
    if head == "and":
        return all(eval_value(a, env) for a in args)
    if head == "or":
        return any(eval_value(a, env) for a in args)
    if head == "not":
        return not eval_value(args[0], env)
    if head == "=>":
        return (not eval_value(args[0], env)) or eval_value(args[1], env)
    if head in ("=", "<=", "<", ">=", ">"):
        a, b = eval_value(args[0], env), eval_value(args[1], env)
        return {"=": a == b, "<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[head]
    if head == "lambda":
        (param, _sort), = args[0]
        pname = _unsym(param)
        body = args[1]
        points = {int(t) for t in _flatten(body) if re.fullmatch(r"\d+", t)}
        return ArrayValue(lambda i: eval_value(body, {**env, pname: i}), points)
    if head == "store":
        arr = eval_value(args[0], env)
        return arr.store(eval_value(args[1], env), eval_value(args[2], env))
    if head == "select":
        return eval_value(args[0], env)(eval_value(args[1], env))
    if head in ("div", "mod"):
        a, b = eval_value(args[0], env), eval_value(args[1], env)
        return a // b if head == "div" else a % b
    raise _Unsupported(head)


def _flatten(e):
    if isinstance(e, str):
        yield e
    else:
        for x in e:
            yield from _flatten(x)


def parse_model(script: LoweredScript, text: str) -> Invalid:
    states, ints, atoms, samples = {}, {}, {}, []
    try:
        top = parse_sexprs(text)
    except SolverProtocolError:
        return Invalid()
    pairs = top[0] if top and isinstance(top[0], list) else []
    by_text = {}
    for pair in pairs:
        if isinstance(pair, list) and len(pair) == 2:
            by_text[_canon(pair[0])] = pair[1]
    for kind, key, sexpr in script.queries:
        val = by_text.get(_canon(parse_sexprs(sexpr)[0]))
        if val is None:
            continue
        try:
            v = eval_value(val)
        except (_Unsupported, RecursionError, ValueError, TypeError):
            continue
        if kind == "state":
            states[key] = v
        elif kind == "int":
            ints[key] = v
        else:
            atoms[key] = v
    for s in script.state_consts:
        if s in states:
            for a in script.addresses:
                try:
                    samples.append((s, a, states[s](a)))
                except (_Unsupported, TypeError):
                    pass
    return Invalid(tuple(samples), states, ints, atoms)


def _canon(e) -> str:
    if isinstance(e, str):
        return _unsym(e)
    return "(" + " ".join(_canon(x) for x in e) + ")"


# --------------------------------------------------------------------------
# Concrete replay of models
# --------------------------------------------------------------------------


def _mval_term(t, m: Invalid, ienv: dict):
    if isinstance(t, L.Num):
        return t.value
    if isinstance(t, L.IVar):
        return ienv[t.name] if t.name in ienv else m.ints[t.name]
    if isinstance(t, L.Sel):
        return _mval_state(t.state, m, ienv)(_mval_term(t.index, m, ienv))
    if isinstance(t, L.Arith):
        a, b = _mval_term(t.left, m, ienv), _mval_term(t.right, m, ienv)
        if t.op == "+":
            return a + b
        if t.op == "*":
            return a * b
        return a - b if a >= b else 0
    raise TypeError(t)


def _mval_state(s, m: Invalid, ienv: dict) -> ArrayValue:
    if isinstance(s, L.SVar):
        return m.states[s.name]
    return _mval_state(s.base, m, ienv).store(_mval_term(s.index, m, ienv),
                                              _mval_term(s.value, m, ienv))


def _probe_points(arrs) -> list:
    pts = set()
    for a in arrs:
        for p in a.points:
            pts |= {p - 1, p, p + 1}
    pts |= {-1, 0, 1 << 40}
    return sorted(pts)


def eval_model(f, m: Invalid, ienv: dict = None) -> bool:
    """Truth value of a quantifier-free formula in a counter-model."""
    ienv = ienv or {}
    if isinstance(f, L.BoolLit):
        return f.value
    if isinstance(f, L.Cmp):
        a, b = _mval_term(f.left, m, ienv), _mval_term(f.right, m, ienv)
        return {"=": a == b, "!=": a != b, "<=": a <= b, "<": a < b,
                ">=": a >= b, ">": a > b}[f.op]
    if isinstance(f, L.SEq):
        x, y = _mval_state(f.left, m, ienv), _mval_state(f.right, m, ienv)
        return all(x(p) == y(p) for p in _probe_points([x, y]))
    if isinstance(f, L.Call):
        return bool(m.atoms.get(emit(f), False))
    if isinstance(f, L.Not):
        return not eval_model(f.arg, m, ienv)
    if isinstance(f, L.And):
        return all(eval_model(a, m, ienv) for a in f.args)
    if isinstance(f, L.Or):
        return any(eval_model(a, m, ienv) for a in f.args)
    if isinstance(f, L.Implies):
        return (not eval_model(f.lhs, m, ienv)) or eval_model(f.rhs, m, ienv)
    raise ValueError("formula is not quantifier-free")


def model_falsifies(script: LoweredScript, m: Invalid) -> bool:
    """True when every asserted formula holds in ``m``, i.e. the goal fails there."""
    return all(eval_model(f, m) for f in script.asserted)


# --------------------------------------------------------------------------
# Solver driver
# --------------------------------------------------------------------------


def solver_command(solver: str = None) -> list[str]:
    return shlex.split(solver or os.environ.get("RELVC_SOLVER") or DEFAULT_SOLVER)


def check(script: LoweredScript, timeout: float = DEFAULT_TIMEOUT, solver: str = None) -> SolverVerdict:
    """Run the solver on ``script``.

    ``unsat`` maps to :class:`Valid`, ``sat`` to :class:`Invalid` with a
    counter-model, and ``unknown`` or an expired timeout to :class:`Unknown`.
    """
    if timeout is not None and timeout <= 0:
        return Unknown("timeout")
    cmd = solver_command(solver)
    try:
        proc = subprocess.Popen(cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True)
    except FileNotFoundError as e:
        raise SolverNotFoundError(f"solver not found: {cmd[0]}") from e
    except PermissionError as e:
        raise SolverNotFoundError(f"solver not executable: {cmd[0]}") from e

    expired = threading.Event()

    def kill():
        expired.set()
        proc.kill()

    timer = threading.Timer(timeout, kill) if timeout else None
    if timer:
        timer.start()
    try:
        try:
            proc.stdin.write(script.text())
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass
        answer = _read_answer(proc)
        if expired.is_set():
            return Unknown("timeout")
        if answer is None:
            code = proc.wait()
            err = proc.stderr.read()
            if code != 0:
                raise SolverExitError(code, err)
            raise SolverProtocolError("solver closed its output without an answer")
        if answer == "unsat":
            _finish(proc, "(exit)\n")
            return Valid()
        if answer == "sat":
            out = _finish(proc, script.query_text() + "\n(exit)\n")
            if expired.is_set():
                return Unknown("timeout")
            return parse_model(script, out)
        if answer == "unknown":
            out = _finish(proc, "(get-info :reason-unknown)\n(exit)\n")
            m = re.search(r':reason-unknown\s+(?:"((?:[^"]|"")*)"|([^\s()]+))', out or "")
            reason = (m.group(1) or m.group(2)) if m else "unknown"
            return Unknown(reason.replace('""', '"').strip())
        _finish(proc, "(exit)\n")
        raise SolverProtocolError(f"unexpected solver answer: {answer[:200]}")
    finally:
        if timer:
            timer.cancel()
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        for stream in (proc.stdin, proc.stdout, proc.stderr):
            try:
                stream.close()
            except OSError:
                pass


def _read_answer(proc) -> str | None:
    while True:
        line = proc.stdout.readline()
        if not line:
            return None
        line = line.strip()
        if not line or line == "success":
            continue
        return line


def _finish(proc, tail: str) -> str:
    try:
        proc.stdin.write(tail)
        proc.stdin.close()
    except (BrokenPipeError, OSError):
        pass
    return proc.stdout.read()


def check_goal(goal, timeout: float = DEFAULT_TIMEOUT, solver: str = None,
               skolemize: bool = True) -> SolverVerdict:
    return check(lower(goal, skolemize=skolemize), timeout, solver)


@dataclass
class GoalResult:
    goal: str
    verdict: SolverVerdict
    time_ms: float
    script: LoweredScript = field(repr=False, default=None)

    @property
    def status(self) -> str:
        return self.verdict.status

    def to_json(self) -> dict:
        out = {"goal": self.goal, "status": self.status, "time_ms": round(self.time_ms, 1)}
        if isinstance(self.verdict, Invalid):
            out["model"] = [{"state": s, "address": a, "value": v} for s, a, v in self.verdict.model]
        if isinstance(self.verdict, Unknown):
            out["reason"] = self.verdict.reason
        return out


def discharge(goals, timeout: float = DEFAULT_TIMEOUT, solver: str = None, jobs: int = None,
              dump_dir: str = None) -> list[GoalResult]:
    """Check goals in parallel (one solver process each); results sorted by label."""
    def one(goal):
        script = lower(goal)
        if dump_dir:
            os.makedirs(dump_dir, exist_ok=True)
            fname = re.sub(r"[^A-Za-z0-9_.,-]", "_", goal.label) + ".smt2"
            with open(os.path.join(dump_dir, fname), "w") as fh:
                fh.write(script.text(with_queries=False))
        t0 = time.perf_counter()
        verdict = check(script, timeout, solver)
        return GoalResult(goal.label, verdict, (time.perf_counter() - t0) * 1000, script)

    jobs = jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(one, goals))
    return sorted(results, key=lambda r: r.goal)
