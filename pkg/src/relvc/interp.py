"""Big-step semantics of commands, made executable with a fuel budget.

Fuel is spent on each procedure call and each loop iteration; straight-line
code is free. Annotations (assertions, invariants) do not affect execution.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Union

from .assertions import monus
from .syntax import (
    AddrOf, Assert, Assign, BConst, BinA, BinL, BNot, CallProc, Cmp, Com,
    Deref, If, IndirectAssign, MemState, NatConst, ProcEnv, Seq, Skip, Var,
    While,
)

_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_aexp(a, sigma: MemState) -> int:
    if isinstance(a, NatConst):
        return a.value
    if isinstance(a, Var):
        return sigma[a.addr]
    if isinstance(a, Deref):
        return sigma[sigma[a.addr]]
    if isinstance(a, AddrOf):
        return a.addr
    if isinstance(a, BinA):
        x = eval_aexp(a.left, sigma)
        y = eval_aexp(a.right, sigma)
        if a.op == "+":
            return x + y
        if a.op == "*":
            return x * y
        return monus(x, y)
    raise TypeError(a)


def eval_bexp(b, sigma: MemState) -> bool:
    if isinstance(b, BConst):
        return b.value
    if isinstance(b, Cmp):
        return _CMP[b.op](eval_aexp(b.left, sigma), eval_aexp(b.right, sigma))
    if isinstance(b, BinL):
        if b.op == "&&":
            return eval_bexp(b.left, sigma) and eval_bexp(b.right, sigma)
        return eval_bexp(b.left, sigma) or eval_bexp(b.right, sigma)
    if isinstance(b, BNot):
        return not eval_bexp(b.arg, sigma)
    raise TypeError(b)


@dataclass(frozen=True)
class Final:
    state: MemState


@dataclass(frozen=True)
class OutOfFuel:
    pass


Outcome = Union[Final, OutOfFuel]
OUT_OF_FUEL = OutOfFuel()


class _Exhausted(Exception):
    pass


class _Machine:
    def __init__(self, psi: ProcEnv, fuel: int):
        self.psi = psi
        self.fuel = fuel

    def spend(self) -> None:
        if self.fuel <= 0:
            raise _Exhausted
        self.fuel -= 1

    def run(self, c: Com, sigma: MemState) -> MemState:
        # loops and right-nested sequences are iterated, not recursed
        while True:
            if isinstance(c, Seq):
                sigma = self.run(c.first, sigma)
                c = c.second
                continue
            if isinstance(c, While):
                while eval_bexp(c.cond, sigma):
                    self.spend()
                    sigma = self.run(c.body, sigma)
                return sigma
            break
        if isinstance(c, (Skip, Assert)):
            return sigma
        if isinstance(c, Assign):
            return sigma.set(c.addr, eval_aexp(c.value, sigma))
        if isinstance(c, IndirectAssign):
            return sigma.set(sigma[c.addr], eval_aexp(c.value, sigma))
        if isinstance(c, If):
            branch = c.then if eval_bexp(c.cond, sigma) else c.orelse
            return self.run(branch, sigma)
        if isinstance(c, CallProc):
            body = self.psi[c.name]
            self.spend()
            return self.run(body, sigma)
        raise TypeError(c)


def exec_com(c: Com, sigma: MemState, psi: ProcEnv = None, fuel: int = 1000) -> Outcome:
    """Run ``c`` from ``sigma``; ``OutOfFuel`` if the budget runs out first."""
    machine = _Machine(psi if psi is not None else ProcEnv(), fuel)
    limit = sys.getrecursionlimit()
    if limit < 20000:
        sys.setrecursionlimit(20000)
    try:
        return Final(machine.run(c, sigma))
    except _Exhausted:
        return OUT_OF_FUEL
