"""First-order assertions over named memory states.

An assertion reads memory through a *state reference*: the current state,
the pre-state (``old``), or, in relational specifications, the state of a
numbered run (``x3<1>``) and its pre-state (``old(x3<1>)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

from . import logic as L
from .errors import ArityError, UnsupportedInOracle


# --------------------------------------------------------------------------
# State references
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Cur:
    pass


@dataclass(frozen=True)
class Old:
    pass


@dataclass(frozen=True)
class Tag:
    k: int


@dataclass(frozen=True)
class OldTag:
    k: int


StateRef = Union[Cur, Old, Tag, OldTag]
CUR = Cur()
OLD = Old()


def is_old(ref: StateRef) -> bool:
    return isinstance(ref, (Old, OldTag))


def to_old(ref: StateRef) -> StateRef:
    if isinstance(ref, Cur):
        return OLD
    if isinstance(ref, Tag):
        return OldTag(ref.k)
    return ref


# --------------------------------------------------------------------------
# Terms and assertions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Read:
    ref: StateRef
    index: "LTerm"


@dataclass(frozen=True)
class ArithOp:
    op: str  # + * -   (- is monus)
    left: "LTerm"
    right: "LTerm"


@dataclass(frozen=True)
class LogicalVar:
    name: str


LTerm = Union[Const, Read, ArithOp, LogicalVar]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Compare:
    op: str
    left: LTerm
    right: LTerm


@dataclass(frozen=True)
class AAnd:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AOr:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class ANot:
    arg: "Assertion"


@dataclass(frozen=True)
class AImplies:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Forall:
    var: str
    bound: Optional[LTerm]  # ``forall v < bound.``; None means unbounded
    body: "Assertion"


@dataclass(frozen=True)
class Exists:
    var: str
    bound: Optional[LTerm]
    body: "Assertion"


Assertion = Union[BoolConst, Compare, AAnd, AOr, ANot, AImplies, Forall, Exists]

ATRUE = BoolConst(True)
AFALSE = BoolConst(False)


def loc(i: int, ref: StateRef = CUR) -> Read:
    """The value of location ``x_i`` in state ``ref``."""
    return Read(ref, Const(i))


def deref(i: int, ref: StateRef = CUR) -> Read:
    return Read(ref, Read(ref, Const(i)))


# --------------------------------------------------------------------------
# Structural queries
# --------------------------------------------------------------------------


def _term_refs(t: LTerm, out: set) -> None:
    if isinstance(t, Read):
        out.add(t.ref)
        _term_refs(t.index, out)
    elif isinstance(t, ArithOp):
        _term_refs(t.left, out)
        _term_refs(t.right, out)


def state_refs(a: Assertion) -> set:
    """The set of state references an assertion mentions (its arity)."""
    out: set = set()

    def go(a):
        if isinstance(a, Compare):
            _term_refs(a.left, out)
            _term_refs(a.right, out)
        elif isinstance(a, (AAnd, AOr, AImplies)):
            go(a.left)
            go(a.right)
        elif isinstance(a, ANot):
            go(a.arg)
        elif isinstance(a, (Forall, Exists)):
            if a.bound is not None:
                _term_refs(a.bound, out)
            go(a.body)

    go(a)
    return out


def _term_lvars(t: LTerm, out: set) -> None:
    if isinstance(t, LogicalVar):
        out.add(t.name)
    elif isinstance(t, Read):
        _term_lvars(t.index, out)
    elif isinstance(t, ArithOp):
        _term_lvars(t.left, out)
        _term_lvars(t.right, out)


def free_lvars(a: Assertion) -> set:
    if isinstance(a, BoolConst):
        return set()
    if isinstance(a, Compare):
        out: set = set()
        _term_lvars(a.left, out)
        _term_lvars(a.right, out)
        return out
    if isinstance(a, (AAnd, AOr, AImplies)):
        return free_lvars(a.left) | free_lvars(a.right)
    if isinstance(a, ANot):
        return free_lvars(a.arg)
    if isinstance(a, (Forall, Exists)):
        out = free_lvars(a.body) - {a.var}
        if a.bound is not None:
            _term_lvars(a.bound, out)
        return out
    raise TypeError(a)


def check_arity(a: Assertion, allowed, what: str = "assertion") -> None:
    """Raise ``ArityError`` unless every state reference in ``a`` is allowed.

    ``allowed`` is either a collection of refs or a predicate on refs.
    """
    ok = allowed if callable(allowed) else (lambda r: r in allowed)
    for r in state_refs(a):
        if not ok(r):
            raise ArityError(f"{what} may not refer to {describe_ref(r)}")
    if free_lvars(a):
        raise ArityError(f"{what} has unbound logical variables {sorted(free_lvars(a))}")


def check_pre(a: Assertion, what: str = "precondition") -> None:
    check_arity(a, {CUR}, what)


def check_post(a: Assertion, what: str = "postcondition") -> None:
    check_arity(a, {CUR, OLD}, what)


def check_rel_pre(a: Assertion, n: int, what: str = "relational precondition") -> None:
    check_arity(a, lambda r: isinstance(r, Tag) and 1 <= r.k <= n, what)


def check_rel_post(a: Assertion, n: int, what: str = "relational postcondition") -> None:
    check_arity(a, lambda r: isinstance(r, (Tag, OldTag)) and 1 <= r.k <= n, what)


def describe_ref(r: StateRef) -> str:
    if isinstance(r, Cur):
        return "the current state"
    if isinstance(r, Old):
        return "the pre-state (old)"
    if isinstance(r, Tag):
        return f"run {r.k}"
    return f"the pre-state of run {r.k}"


def retag(a: Assertion, mapping: Mapping) -> Assertion:
    """Replace state references according to ``mapping`` (others unchanged)."""

    def term(t):
        if isinstance(t, Read):
            return Read(mapping.get(t.ref, t.ref), term(t.index))
        if isinstance(t, ArithOp):
            return ArithOp(t.op, term(t.left), term(t.right))
        return t

    def go(a):
        if isinstance(a, BoolConst):
            return a
        if isinstance(a, Compare):
            return Compare(a.op, term(a.left), term(a.right))
        if isinstance(a, AAnd):
            return AAnd(go(a.left), go(a.right))
        if isinstance(a, AOr):
            return AOr(go(a.left), go(a.right))
        if isinstance(a, AImplies):
            return AImplies(go(a.left), go(a.right))
        if isinstance(a, ANot):
            return ANot(go(a.arg))
        if isinstance(a, Forall):
            return Forall(a.var, None if a.bound is None else term(a.bound), go(a.body))
        if isinstance(a, Exists):
            return Exists(a.var, None if a.bound is None else term(a.bound), go(a.body))
        raise TypeError(a)

    return go(a)


# --------------------------------------------------------------------------
# Concrete evaluation
# --------------------------------------------------------------------------


def monus(a: int, b: int) -> int:
    return a - b if a >= b else 0


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_term(t: LTerm, binding: Mapping, env: Mapping[str, int] = None) -> int:
    env = env or {}
    if isinstance(t, Const):
        return t.value
    if isinstance(t, LogicalVar):
        return env[t.name]
    if isinstance(t, Read):
        if t.ref not in binding:
            raise ArityError(f"no state bound for {describe_ref(t.ref)}")
        return binding[t.ref][eval_term(t.index, binding, env)]
    if isinstance(t, ArithOp):
        a = eval_term(t.left, binding, env)
        b = eval_term(t.right, binding, env)
        if t.op == "+":
            return a + b
        if t.op == "*":
            return a * b
        return monus(a, b)
    raise TypeError(t)


def eval_assertion(a: Assertion, binding: Mapping, env: Mapping[str, int] = None) -> bool:
    """Truth value of ``a`` with state references bound to concrete states.

    ``binding`` maps each state reference to anything indexable by address
    (typically a :class:`relvc.syntax.MemState`). Quantifiers must carry a
    bound; an unbounded one raises ``UnsupportedInOracle``.
    """
    env = dict(env or {})
    if isinstance(a, BoolConst):
        return a.value
    if isinstance(a, Compare):
        return _CMP[a.op](eval_term(a.left, binding, env), eval_term(a.right, binding, env))
    if isinstance(a, AAnd):
        return eval_assertion(a.left, binding, env) and eval_assertion(a.right, binding, env)
    if isinstance(a, AOr):
        return eval_assertion(a.left, binding, env) or eval_assertion(a.right, binding, env)
    if isinstance(a, AImplies):
        return (not eval_assertion(a.left, binding, env)) or eval_assertion(a.right, binding, env)
    if isinstance(a, ANot):
        return not eval_assertion(a.arg, binding, env)
    if isinstance(a, (Forall, Exists)):
        if a.bound is None:
            raise UnsupportedInOracle(f"quantifier over {a.var} has no bound")
        n = eval_term(a.bound, binding, env)
        results = (eval_assertion(a.body, binding, {**env, a.var: v}) for v in range(n))
        return all(results) if isinstance(a, Forall) else any(results)
    raise TypeError(a)


# --------------------------------------------------------------------------
# Translation into the logic
# --------------------------------------------------------------------------


def translate_term(t: LTerm, binding: Mapping) -> L.Term:
    if isinstance(t, Const):
        return L.Num(t.value)
    if isinstance(t, LogicalVar):
        return L.IVar(t.name)
    if isinstance(t, Read):
        if t.ref not in binding:
            raise ArityError(f"no state bound for {describe_ref(t.ref)}")
        return L.Sel(binding[t.ref], translate_term(t.index, binding))
    if isinstance(t, ArithOp):
        return L.Arith(t.op, translate_term(t.left, binding), translate_term(t.right, binding))
    raise TypeError(t)


def translate(a: Assertion, binding: Mapping) -> L.Formula:
    """Structure-preserving translation with state refs mapped to state terms."""
    if isinstance(a, BoolConst):
        return L.BoolLit(a.value)
    if isinstance(a, Compare):
        return L.Cmp(a.op, translate_term(a.left, binding), translate_term(a.right, binding))
    if isinstance(a, AAnd):
        return L.And((translate(a.left, binding), translate(a.right, binding)))
    if isinstance(a, AOr):
        return L.Or((translate(a.left, binding), translate(a.right, binding)))
    if isinstance(a, AImplies):
        return L.Implies(translate(a.left, binding), translate(a.right, binding))
    if isinstance(a, ANot):
        return L.Not(translate(a.arg, binding))
    if isinstance(a, Forall):
        body = translate(a.body, binding)
        if a.bound is not None:
            body = L.Implies(L.Cmp("<", L.IVar(a.var), translate_term(a.bound, binding)), body)
        return L.QInt("forall", a.var, body)
    if isinstance(a, Exists):
        body = translate(a.body, binding)
        if a.bound is not None:
            body = L.And((L.Cmp("<", L.IVar(a.var), translate_term(a.bound, binding)), body))
        return L.QInt("exists", a.var, body)
    raise TypeError(a)
