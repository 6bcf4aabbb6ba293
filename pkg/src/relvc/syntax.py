"""Locations, memory states, and the abstract syntax of the language.

Locations are ``x0, x1, ...`` and the address of ``x_i`` is ``i``. A memory
state maps every natural address to a natural value; unbound addresses
read as 0.
"""

from __future__ import annotations

import re
import dataclasses
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from . import assertions as A
from . import logic as L
from .errors import ParseError, UnboundProcedureError

_LOC_RE = re.compile(r"x(\d+)\Z")


def addr_of(name: str) -> int:
    """Address of a location token: ``addr_of("x4") == 4``."""
    m = _LOC_RE.match(name)
    if not m:
        raise ParseError(f"not a location: {name!r}")
    return int(m.group(1))


def loc_name(i: int) -> str:
    return f"x{i}"


class MemState:
    """Immutable total map from addresses to naturals with default 0."""

    __slots__ = ("_data", "_hash")

    def __init__(self, bindings: Mapping[int, int] | Iterable = ()):
        data = {}
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        for i, n in items:
            if i < 0 or n < 0:
                raise ValueError(f"memory states hold naturals, got {i}->{n}")
            if n:
                data[i] = n
        self._data = data
        self._hash = None

    @classmethod
    def _raw(cls, data: dict) -> "MemState":
        obj = cls.__new__(cls)
        obj._data = data
        obj._hash = None
        return obj

    def __getitem__(self, i: int) -> int:
        return self._data.get(i, 0)

    def set(self, i: int, n: int) -> "MemState":
        if i < 0 or n < 0:
            raise ValueError(f"memory states hold naturals, got {i}->{n}")
        data = dict(self._data)
        if n:
            data[i] = n
        else:
            data.pop(i, None)
        return MemState._raw(data)

    def bound(self) -> list[int]:
        """Addresses holding a nonzero value, sorted."""
        return sorted(self._data)

    def items(self):
        return sorted(self._data.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MemState):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"MemState({dict(self.items())})"

    def show(self, addrs: Iterable[int] = None) -> str:
        addrs = self.bound() if addrs is None else sorted(set(addrs))
        return " ".join(f"x{i}={self[i]}" for i in addrs)


def set_mem(sigma: MemState, i: int, n: int) -> MemState:
    return sigma.set(i, n)


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NatConst:
    value: int


@dataclass(frozen=True)
class Var:
    addr: int


@dataclass(frozen=True)
class Deref:
    addr: int


@dataclass(frozen=True)
class AddrOf:
    addr: int


@dataclass(frozen=True)
class BinA:
    op: str  # + * -
    left: "Aexp"
    right: "Aexp"


Aexp = Union[NatConst, Var, Deref, AddrOf, BinA]


@dataclass(frozen=True)
class BConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # = != <= < >= >
    left: Aexp
    right: Aexp


@dataclass(frozen=True)
class BinL:
    op: str  # && ||
    left: "Bexp"
    right: "Bexp"


@dataclass(frozen=True)
class BNot:
    arg: "Bexp"


Bexp = Union[BConst, Cmp, BinL, BNot]


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    addr: int
    value: Aexp


@dataclass(frozen=True)
class IndirectAssign:
    addr: int  # writes to the location whose address is stored at ``addr``
    value: Aexp


@dataclass(frozen=True)
class Seq:
    first: "Com"
    second: "Com"


@dataclass(frozen=True)
class Assert:
    cond: A.Assertion


@dataclass(frozen=True)
class If:
    cond: Bexp
    then: "Com"
    orelse: "Com"


@dataclass(frozen=True)
class While:
    cond: Bexp
    inv: A.Assertion
    body: "Com"


@dataclass(frozen=True)
class CallProc:
    name: str


Com = Union[Skip, Assign, IndirectAssign, Seq, Assert, If, While, CallProc]

SKIP = Skip()


def seq(*coms: Com) -> Com:
    """Right-nested sequence ``c1; (c2; (...))``."""
    if not coms:
        return SKIP
    out = coms[-1]
    for c in reversed(coms[:-1]):
        out = Seq(c, out)
    return out


def subcommands(c: Com) -> Iterator[Com]:
    yield c
    if isinstance(c, Seq):
        yield from subcommands(c.first)
        yield from subcommands(c.second)
    elif isinstance(c, If):
        yield from subcommands(c.then)
        yield from subcommands(c.orelse)
    elif isinstance(c, While):
        yield from subcommands(c.body)


def called(c: Com) -> set[str]:
    return {s.name for s in subcommands(c) if isinstance(s, CallProc)}


def com_size(c: Com) -> int:
    """Number of command nodes."""
    return sum(1 for _ in subcommands(c))


def ast_size(node) -> int:
    """Number of nodes in a command or expression, annotations included."""
    if isinstance(node, tuple):
        return sum(ast_size(x) for x in node)
    if not dataclasses.is_dataclass(node):
        return 0
    return 1 + sum(ast_size(getattr(node, f.name)) for f in dataclasses.fields(node))


def erase_annotations(c: Com) -> Com:
    """Replace every assertion and loop invariant by ``true``."""
    if isinstance(c, Assert):
        return Assert(A.ATRUE)
    if isinstance(c, Seq):
        return Seq(erase_annotations(c.first), erase_annotations(c.second))
    if isinstance(c, If):
        return If(c.cond, erase_annotations(c.then), erase_annotations(c.orelse))
    if isinstance(c, While):
        return While(c.cond, A.ATRUE, erase_annotations(c.body))
    return c


# --------------------------------------------------------------------------
# Environments
# --------------------------------------------------------------------------


class ProcEnv(Mapping):
    """Procedure environment: procedure name to body."""

    def __init__(self, bodies: Mapping[str, Com] = None):
        self._bodies = dict(bodies or {})

    def __getitem__(self, name: str) -> Com:
        try:
            return self._bodies[name]
        except KeyError:
            raise UnboundProcedureError(name) from None

    def __iter__(self):
        return iter(self._bodies)

    def __len__(self) -> int:
        return len(self._bodies)

    def body(self, name: str) -> Com:
        return self[name]

    def check_closed(self, extra: Iterable[Com] = ()) -> None:
        """Every call target reachable from a body (or from ``extra``) is bound."""
        for c in list(self._bodies.values()) + list(extra):
            for y in sorted(called(c)):
                if y not in self._bodies:
                    raise UnboundProcedureError(y)

    def __repr__(self) -> str:
        return f"ProcEnv({sorted(self._bodies)})"


@dataclass(frozen=True)
class Contract:
    pre: A.Assertion = A.ATRUE
    post: A.Assertion = A.ATRUE


TRIVIAL = Contract()


class ContractEnv:
    """Procedure contracts; undeclared procedures get ``(true, true)``.

    Preconditions read the current state; postconditions read the current
    (final) state and ``old`` (initial) state.
    """

    def __init__(self, contracts: Mapping[str, Contract] = None):
        self._contracts = dict(contracts or {})
        for name, ct in self._contracts.items():
            A.check_pre(ct.pre, f"precondition of {name}")
            A.check_post(ct.post, f"postcondition of {name}")

    def __getitem__(self, name: str) -> Contract:
        return self._contracts.get(name, TRIVIAL)

    def __contains__(self, name: str) -> bool:
        return name in self._contracts

    def names(self) -> list[str]:
        return list(self._contracts)

    def pre_formula(self, name: str, s: L.StateTerm) -> L.Formula:
        return A.translate(self[name].pre, {A.CUR: s})

    def post_formula(self, name: str, s: L.StateTerm, s2: L.StateTerm) -> L.Formula:
        return A.translate(self[name].post, {A.OLD: s, A.CUR: s2})
