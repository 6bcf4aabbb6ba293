"""Logical formulas over symbolic memory states.

This is the intermediate representation emitted by the VC generators and
consumed by the SMT lowering. Integer terms read memory states, memory
states are either symbolic variables or ``store`` chains, and formulas are
plain first-order connectives plus state quantifiers and uninterpreted
call-tracking atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Union


# --------------------------------------------------------------------------
# Integer terms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class IVar:
    """Bound integer (logical) variable."""

    name: str


@dataclass(frozen=True)
class Sel:
    """``state(index)``: read of a memory state."""

    state: "StateTerm"
    index: "Term"


@dataclass(frozen=True)
class Arith:
    """Binary arithmetic; ``-`` is truncated subtraction (monus)."""

    op: str
    left: "Term"
    right: "Term"


Term = Union[Num, IVar, Sel, Arith]


# --------------------------------------------------------------------------
# State terms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Store:
    """``set(base, index, value)``."""

    base: "StateTerm"
    index: Term
    value: Term


StateTerm = Union[SVar, Store]


# --------------------------------------------------------------------------
# Formulas
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # one of = != <= < >= >
    left: Term
    right: Term


@dataclass(frozen=True)
class SEq:
    """Extensional equality of two memory states."""

    left: StateTerm
    right: StateTerm


@dataclass(frozen=True)
class Call:
    """Uninterpreted atom: ``call y`` may take ``pre`` to ``post``."""

    proc: str
    pre: StateTerm
    post: StateTerm


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class ForallS:
    """Universal quantification over memory states.

    ``patterns`` lists atoms the solver should use as instantiation
    triggers when the quantifier survives into the solver script.
    """

    states: tuple
    body: "Formula"
    patterns: tuple = field(default=())


@dataclass(frozen=True)
class QInt:
    """Quantifier over a natural-valued logical variable."""

    kind: str  # "forall" | "exists"
    var: str
    body: "Formula"


Formula = Union[BoolLit, Cmp, SEq, Call, Not, And, Or, Implies, ForallS, QInt]

TRUE = BoolLit(True)
FALSE = BoolLit(False)

CMP_OPS = ("=", "!=", "<=", "<", ">=", ">")


def conj(*args: Formula) -> Formula:
    """Binary-nesting-free conjunction; an empty conjunction is ``True``."""
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


# --------------------------------------------------------------------------
# Traversal helpers
# --------------------------------------------------------------------------


def children(node) -> tuple:
    if isinstance(node, (Num, IVar, SVar, BoolLit)):
        return ()
    if isinstance(node, Sel):
        return (node.state, node.index)
    if isinstance(node, Arith):
        return (node.left, node.right)
    if isinstance(node, Store):
        return (node.base, node.index, node.value)
    if isinstance(node, Cmp):
        return (node.left, node.right)
    if isinstance(node, SEq):
        return (node.left, node.right)
    if isinstance(node, Call):
        return (node.pre, node.post)
    if isinstance(node, Not):
        return (node.arg,)
    if isinstance(node, (And, Or)):
        return node.args
    if isinstance(node, Implies):
        return (node.lhs, node.rhs)
    if isinstance(node, ForallS):
        return node.states + (node.body,)
    if isinstance(node, QInt):
        return (node.body,)
    raise TypeError(f"not a formula node: {node!r}")


def walk(node) -> Iterator:
    """Pre-order iteration over every node (with repetition for shared subtrees)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def node_count(node) -> int:
    """Size of ``node`` as a tree; shared subterms count once per occurrence."""
    memo: dict[int, int] = {}

    def count(n) -> int:
        key = id(n)
        if key in memo:
            return memo[key]
        total = 1
        for c in children(n):
            total += count(c)
        memo[key] = total
        return total

    # iterative post-order to survive very deep trees
    order = []
    stack = [(node, False)]
    seen: set[int] = set()
    while stack:
        n, done = stack.pop()
        if done:
            order.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in children(n):
            if id(c) not in seen:
                stack.append((c, False))
    for n in order:
        count(n)
    return memo[id(node)]


def free_states(f) -> set[str]:
    """Names of state variables occurring free in ``f``."""
    out: set[str] = set()

    def go(n, bound: frozenset):
        if isinstance(n, SVar):
            if n.name not in bound:
                out.add(n.name)
            return
        if isinstance(n, ForallS):
            inner = bound | {s.name for s in n.states}
            go(n.body, inner)
            for p in n.patterns:
                go(p, inner)
            return
        for c in children(n):
            go(c, bound)

    go(f, frozenset())
    return out


def calls_in(f) -> list[Call]:
    return [n for n in walk(f) if isinstance(n, Call)]


def rename_states(f, mapping: dict[str, str]):
    """Capture-naive renaming of state variables (names are globally fresh)."""

    def go(n):
        if isinstance(n, SVar):
            return SVar(mapping.get(n.name, n.name))
        if isinstance(n, (Num, IVar, BoolLit)):
            return n
        if isinstance(n, Sel):
            return Sel(go(n.state), go(n.index))
        if isinstance(n, Arith):
            return Arith(n.op, go(n.left), go(n.right))
        if isinstance(n, Store):
            return Store(go(n.base), go(n.index), go(n.value))
        if isinstance(n, Cmp):
            return Cmp(n.op, go(n.left), go(n.right))
        if isinstance(n, SEq):
            return SEq(go(n.left), go(n.right))
        if isinstance(n, Call):
            return Call(n.proc, go(n.pre), go(n.post))
        if isinstance(n, Not):
            return Not(go(n.arg))
        if isinstance(n, And):
            return And(tuple(go(a) for a in n.args))
        if isinstance(n, Or):
            return Or(tuple(go(a) for a in n.args))
        if isinstance(n, Implies):
            return Implies(go(n.lhs), go(n.rhs))
        if isinstance(n, ForallS):
            return ForallS(tuple(go(s) for s in n.states), go(n.body),
                           tuple(go(p) for p in n.patterns))
        if isinstance(n, QInt):
            return QInt(n.kind, n.var, go(n.body))
        raise TypeError(n)

    return go(f)


def alpha_normalize(f):
    """Rename state variables to ``v0, v1, ...`` in order of first occurrence."""
    mapping: dict[str, str] = {}
    for n in walk(f):
        if isinstance(n, SVar) and n.name not in mapping:
            mapping[n.name] = f"v{len(mapping)}"
    return rename_states(f, mapping)


def alpha_equal(f, g) -> bool:
    return alpha_normalize(f) == alpha_normalize(g)


# --------------------------------------------------------------------------
# Fresh names
# --------------------------------------------------------------------------


def _primed(family: str, k: int) -> str:
    if k == 0:
        return family
    if k <= 3:
        return family + "'" * k
    return f"{family}'{k}"


def family_of(name: str) -> str:
    return name.split("'", 1)[0]


class Fresh:
    """Session-local supply of state names: ``s1``, ``s1'``, ``s1''``, ..."""

    def __init__(self, reserved=()):
        self.used: set[str] = set(reserved)
        self._next: dict[str, int] = {}

    def reserve(self, *names: str) -> None:
        self.used.update(names)

    def state(self, family: str) -> SVar:
        family = family_of(family)
        k = self._next.get(family, 0)
        while _primed(family, k) in self.used:
            k += 1
        name = _primed(family, k)
        self.used.add(name)
        self._next[family] = k + 1
        return SVar(name)

    def after(self, s: SVar) -> SVar:
        """A fresh state in the same family as ``s``."""
        return self.state(family_of(s.name))


# --------------------------------------------------------------------------
# Readable rendering
# --------------------------------------------------------------------------


def show(n) -> str:
    if isinstance(n, Num):
        return str(n.value)
    if isinstance(n, IVar):
        return n.name
    if isinstance(n, SVar):
        return n.name
    if isinstance(n, Sel):
        return f"{show(n.state)}[{show(n.index)}]"
    if isinstance(n, Arith):
        op = "-." if n.op == "-" else n.op
        return f"({show(n.left)} {op} {show(n.right)})"
    if isinstance(n, Store):
        return f"set({show(n.base)}, {show(n.index)}, {show(n.value)})"
    if isinstance(n, BoolLit):
        return "True" if n.value else "False"
    if isinstance(n, Cmp):
        return f"{show(n.left)} {n.op} {show(n.right)}"
    if isinstance(n, SEq):
        return f"{show(n.left)} == {show(n.right)}"
    if isinstance(n, Call):
        return f"call_{n.proc}({show(n.pre)}, {show(n.post)})"
    if isinstance(n, Not):
        return f"~({show(n.arg)})"
    if isinstance(n, And):
        return "(" + " /\\ ".join(show(a) for a in n.args) + ")"
    if isinstance(n, Or):
        return "(" + " \\/ ".join(show(a) for a in n.args) + ")"
    if isinstance(n, Implies):
        return f"({show(n.lhs)} => {show(n.rhs)})"
    if isinstance(n, ForallS):
        names = ", ".join(s.name for s in n.states)
        return f"(forall {names}. {show(n.body)})"
    if isinstance(n, QInt):
        return f"({n.kind} {n.var}. {show(n.body)})"
    raise TypeError(n)


Continuation = Callable[[Formula], Formula]
