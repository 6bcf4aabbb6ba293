"""Random programs, assertions and verification problems.

Used by the test suite and the demos. Programs touch locations ``x1..x4``,
use constants up to 3 and multiply only by constants, so that bounded
enumeration stays meaningful. Postconditions are biased towards properties
that actually hold (as judged by the bounded oracle), otherwise nearly every
generated problem would be trivially refuted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import assertions as A
from . import oracle as O
from .parser import ProcDecl, ProgramFile, Property, pretty
from .parser import RelContract as FileRelContract
from .relvcgen import RelContract, RelContractEnv, RelGoalSpec, rel_goals
from .syntax import (
    AddrOf, Assert, Assign, BConst, BinA, BinL, BNot, CallProc, Cmp, Com,
    Contract, ContractEnv, Deref, If, IndirectAssign, NatConst, ProcEnv, Seq,
    Skip, Var, While, seq,
)
from .vcgen import hoare_goals

LOCS = (1, 2, 3, 4)
MAX_CONST = 3
CMP_OPS = ("=", "!=", "<=", "<", ">=", ">")
PROC = "p"

# bounds used to pick postconditions that hold
BIAS_BOUNDS = O.Bounds(max_addr=5, max_val=3, fuel=64)


# --------------------------------------------------------------------------
# Expressions and commands
# --------------------------------------------------------------------------


def gen_aexp(r: random.Random, depth: int = 2):
    if depth <= 0 or r.random() < 0.4:
        x = r.random()
        if x < 0.35:
            return NatConst(r.randint(0, MAX_CONST))
        if x < 0.85:
            return Var(r.choice(LOCS))
        if x < 0.95:
            return Deref(r.choice(LOCS))
        return AddrOf(r.choice(LOCS))
    op = r.choice("+-*")
    if op == "*":
        return BinA("*", gen_aexp(r, depth - 1), NatConst(r.randint(0, MAX_CONST)))
    return BinA(op, gen_aexp(r, depth - 1), gen_aexp(r, depth - 1))


def gen_bexp(r: random.Random, depth: int = 2):
    if depth <= 0 or r.random() < 0.5:
        if r.random() < 0.1:
            return BConst(r.random() < 0.5)
        return Cmp(r.choice(CMP_OPS), gen_aexp(r, 1), gen_aexp(r, 1))
    x = r.random()
    if x < 0.2:
        return BNot(gen_bexp(r, depth - 1))
    return BinL(r.choice(("&&", "||")), gen_bexp(r, depth - 1), gen_bexp(r, depth - 1))


def gen_loop(r: random.Random, depth: int, procs: tuple) -> While:
    i = r.choice(LOCS)
    k = r.randint(0, MAX_CONST)
    if r.random() < 0.5:
        cond = Cmp("<", Var(i), NatConst(k))
        step = Assign(i, BinA("+", Var(i), NatConst(1)))
        useful = A.Compare("<=", A.loc(i), A.Const(k))
    else:
        cond = Cmp(">", Var(i), NatConst(0))
        step = Assign(i, BinA("-", Var(i), NatConst(1)))
        useful = A.ATRUE
    x = r.random()
    if x < 0.4:
        inv = A.ATRUE
    elif x < 0.7:
        inv = useful
    else:
        inv = gen_assertion(r, (A.CUR,), 1)
    body = seq(gen_com(r, max(0, depth - 2), procs, loops=False), step)
    return While(cond, inv, body)


def gen_com(r: random.Random, depth: int = 4, procs: tuple = (), loops: bool = True) -> Com:
    """A random command of nesting depth at most ``depth``."""
    if depth <= 0:
        kinds = ["skip", "assign", "assign", "assign", "indirect"]
        if procs:
            kinds.append("call")
    else:
        kinds = ["skip", "assign", "assign", "assign", "assign", "indirect",
                 "seq", "seq", "seq", "if", "if", "assert"]
        if loops and depth >= 2:
            kinds.append("while")
        if procs:
            kinds.append("call")
    k = r.choice(kinds)
    if k == "skip":
        return Skip()
    if k == "assign":
        return Assign(r.choice(LOCS), gen_aexp(r, 2))
    if k == "indirect":
        return IndirectAssign(r.choice(LOCS), gen_aexp(r, 1))
    if k == "call":
        return CallProc(r.choice(procs))
    if k == "seq":
        return Seq(gen_com(r, depth - 1, procs, loops), gen_com(r, depth - 1, procs, loops))
    if k == "if":
        return If(gen_bexp(r, 2), gen_com(r, depth - 1, procs, loops),
                  gen_com(r, depth - 1, procs, loops))
    if k == "assert":
        if r.random() < 0.5:
            return Assert(A.ATRUE)
        return Assert(gen_assertion(r, (A.CUR,), 1))
    return gen_loop(r, depth, procs)


def gen_proc_body(r: random.Random, depth: int = 3) -> Com:
    """Body of procedure ``p``; half of the time it recurses on a decreasing location."""
    if r.random() < 0.5:
        i = r.choice(LOCS)
        then = seq(Assign(i, BinA("-", Var(i), NatConst(1))),
                   gen_com(r, max(0, depth - 2), loops=False), CallProc(PROC))
        return If(Cmp(">", Var(i), NatConst(0)), then, gen_com(r, 1, loops=False))
    return gen_com(r, depth, loops=False)


def if_chain(d: int) -> Com:
    """``d`` conditionals in sequence; each branch assigns a different location."""
    parts = []
    for k in range(d):
        cond = Cmp("<", Var(1), NatConst(k))
        parts.append(If(cond, Assign(2, BinA("+", Var(2), NatConst(1))),
                        Assign(3, BinA("+", Var(3), Var(2)))))
    return seq(*parts)


# --------------------------------------------------------------------------
# Assertions
# --------------------------------------------------------------------------


def gen_lterm(r: random.Random, refs: tuple, depth: int = 1):
    if depth <= 0 or r.random() < 0.6:
        x = r.random()
        if x < 0.3:
            return A.Const(r.randint(0, MAX_CONST))
        if x < 0.93:
            return A.Read(r.choice(refs), A.Const(r.choice(LOCS)))
        ref = r.choice(refs)
        return A.Read(ref, A.Read(ref, A.Const(r.choice(LOCS))))
    op = r.choice("+-*")
    if op == "*":
        return A.ArithOp("*", gen_lterm(r, refs, depth - 1), A.Const(r.randint(0, MAX_CONST)))
    return A.ArithOp(op, gen_lterm(r, refs, depth - 1), gen_lterm(r, refs, depth - 1))


def gen_atom(r: random.Random, refs: tuple) -> A.Assertion:
    if r.random() < 0.05:
        # bounded quantifier over a window of locations
        v = "v"
        ref = r.choice(refs)
        body = A.Compare(r.choice(CMP_OPS), A.Read(ref, A.LogicalVar(v)), A.Const(r.randint(0, MAX_CONST)))
        kind = A.Forall if r.random() < 0.5 else A.Exists
        return kind(v, A.Const(r.randint(1, 4)), body)
    return A.Compare(r.choice(CMP_OPS), gen_lterm(r, refs), gen_lterm(r, refs))


def gen_assertion(r: random.Random, refs: tuple, depth: int = 2) -> A.Assertion:
    if depth <= 0 or r.random() < 0.5:
        return gen_atom(r, refs)
    x = r.random()
    if x < 0.15:
        return A.ANot(gen_assertion(r, refs, depth - 1))
    kind = r.choice((A.AAnd, A.AOr, A.AImplies))
    return kind(gen_assertion(r, refs, depth - 1), gen_assertion(r, refs, depth - 1))


def conj(parts) -> A.Assertion:
    parts = list(parts)
    if not parts:
        return A.ATRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = A.AAnd(p, out)
    return out


def biased_post(r: random.Random, check, refs: tuple, tries: int = 12) -> A.Assertion:
    """Conjunction of candidate atoms that ``check`` accepts, or a random atom."""
    if r.random() < 0.35:
        return gen_assertion(r, refs, 1)
    good = []
    for _ in range(tries):
        atom = gen_atom(r, refs)
        if isinstance(check(atom), O.Holds):
            good.append(atom)
            if len(good) == 2:
                break
    if not good:
        return gen_assertion(r, refs, 1)
    return conj(good[: r.randint(1, len(good))])


# --------------------------------------------------------------------------
# Verification problems
# --------------------------------------------------------------------------


@dataclass
class Instance:
    """A verification problem: procedures, contracts and one (relational) triple."""

    seed: int
    psi: ProcEnv
    commands: tuple
    pre: A.Assertion
    post: A.Assertion
    phi: ContractEnv = None
    rel: RelContractEnv = None
    kind: str = "hoare"
    notes: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.kind}{self.seed}"

    def goals(self):
        if self.kind == "hoare":
            return hoare_goals(self.pre, self.commands[0], self.post, self.phi, self.psi,
                               label=self.label)
        spec = RelGoalSpec(self.label, self.commands, self.pre, self.post)
        return rel_goals(spec, self.rel, self.psi)

    def oracle(self, bounds: O.Bounds = O.Bounds(max_addr=5, max_val=3, fuel=64)):
        if self.kind == "hoare":
            return O.check_hoare(self.pre, self.commands[0], self.post, self.psi, bounds)
        return O.check_rel(self.pre, self.commands, self.post, self.psi, bounds)

    def to_program(self) -> ProgramFile:
        procs = []
        for name in self.psi:
            pre = post = None
            if self.phi is not None and name in self.phi:
                pre, post = self.phi[name].pre, self.phi[name].post
            procs.append(ProcDecl(name, pre, post, self.psi[name]))
        rels = []
        if self.rel is not None:
            for e in self.rel:
                if len(e.names) == 1:
                    pre = A.retag(e.pre, {A.Tag(1): A.CUR})
                    post = A.retag(e.post, {A.Tag(1): A.CUR, A.OldTag(1): A.OLD})
                    procs = [ProcDecl(d.name, pre, post, d.body) if d.name == e.names[0] else d
                             for d in procs]
                else:
                    rels.append(FileRelContract(e.names, e.pre, e.post))
        if self.kind == "hoare":
            pre = A.retag(self.pre, {A.CUR: A.Tag(1)})
            post = A.retag(self.post, {A.CUR: A.Tag(1), A.OLD: A.OldTag(1)})
        else:
            pre, post = self.pre, self.post
        return ProgramFile(tuple(procs), tuple(rels),
                           (Property(self.label, self.commands, pre, post),))

    def to_text(self) -> str:
        return pretty(self.to_program())


def _proc_contract(r: random.Random, body: Com) -> tuple[ProcEnv, Contract]:
    psi = ProcEnv({PROC: body})
    pre = A.ATRUE if r.random() < 0.7 else gen_atom(r, (A.CUR,))
    runs = O.RelOracle([body], psi, BIAS_BOUNDS)
    post = biased_post(r, lambda q: runs.check_hoare(pre, q), (A.CUR, A.OLD))
    return psi, Contract(pre, post)


def random_hoare(seed: int) -> Instance:
    r = random.Random(seed)
    procs: tuple = ()
    psi = ProcEnv()
    contracts = {}
    if r.random() < 0.5:
        psi, ct = _proc_contract(r, gen_proc_body(r))
        contracts[PROC] = ct
        procs = (PROC,)
    c = gen_com(r, 4, procs)
    pre = A.ATRUE if r.random() < 0.6 else gen_assertion(r, (A.CUR,), 1)
    runs = O.RelOracle([c], psi, BIAS_BOUNDS)
    post = biased_post(r, lambda q: runs.check_hoare(pre, q), (A.CUR, A.OLD))
    return Instance(seed, psi, (c,), pre, post, phi=ContractEnv(contracts), kind="hoare")


def _mutate(r: random.Random, c: Com) -> Com:
    if isinstance(c, Seq):
        if r.random() < 0.5:
            return Seq(_mutate(r, c.first), c.second)
        return Seq(c.first, _mutate(r, c.second))
    if isinstance(c, If):
        return If(c.cond, c.orelse, c.then) if r.random() < 0.3 else If(c.cond, _mutate(r, c.then), c.orelse)
    if isinstance(c, Assign):
        return Assign(c.addr, gen_aexp(r, 1))
    return c


def random_rel(seed: int) -> Instance:
    """A two-run relational problem, often two runs of the same command."""
    r = random.Random(seed)
    t1, t2 = A.Tag(1), A.Tag(2)
    procs: tuple = ()
    psi = ProcEnv()
    entries = []
    if r.random() < 0.5:
        body = gen_proc_body(r)
        psi, ct = _proc_contract(r, body)
        procs = (PROC,)
        if r.random() < 0.6:
            entries.append(RelContract((PROC,), A.retag(ct.pre, {A.CUR: t1}),
                                       A.retag(ct.post, {A.CUR: t1, A.OLD: A.OldTag(1)})))
        if r.random() < 0.6:
            eqs = [A.Compare("=", A.loc(i, t1), A.loc(i, t2)) for i in LOCS if r.random() < 0.6]
            ppre = conj(eqs)
            pair = O.RelOracle([body, body], psi, BIAS_BOUNDS)
            ppost = biased_post(r, lambda q: pair.check(ppre, q),
                                (t1, t2, A.OldTag(1), A.OldTag(2)))
            entries.append(RelContract((PROC, PROC), ppre, ppost))
    c1 = gen_com(r, 3, procs)
    x = r.random()
    c2 = c1 if x < 0.4 else (_mutate(r, c1) if x < 0.7 else gen_com(r, 3, procs))
    eqs = [A.Compare("=", A.loc(i, t1), A.loc(i, t2)) for i in LOCS if r.random() < 0.5]
    if r.random() < 0.2:
        eqs.append(gen_atom(r, (t1, t2)))
    pre = conj(eqs)
    runs = O.RelOracle([c1, c2], psi, BIAS_BOUNDS)
    post = biased_post(r, lambda q: runs.check(pre, q), (t1, t2, A.OldTag(1), A.OldTag(2)))
    return Instance(seed, psi, (c1, c2), pre, post, rel=RelContractEnv(entries), kind="rel")
