"""Verification conditions for Hoare triples.

``tc`` builds the main condition in continuation-passing style: the
formula describing a command is handed to a continuation exactly once,
so conditionals do not duplicate the rest of the program and the result
stays linear in the size of the command. ``ta`` collects the auxiliary
obligations (assertions, callee preconditions, loop invariants) and ``tf``
the per-procedure contract obligations.

The ``*_naive`` functions are a classical weakest-precondition style
generator that splits at every conditional; they exist for size
comparisons and implication tests only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import assertions as A
from . import logic as L
from .syntax import (
    AddrOf, Assert, Assign, BConst, BinA, BinL, BNot, CallProc, Cmp, Com,
    ContractEnv, Deref, If, IndirectAssign, NatConst, ProcEnv, Seq, Skip, Var,
    While,
)


@dataclass(frozen=True)
class Goal:
    """A proof obligation: the conjunction of ``hypotheses`` implies ``conclusion``.

    State variables free in the goal are implicitly universally quantified.
    """

    label: str
    hypotheses: tuple
    conclusion: L.Formula
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def formula(self) -> L.Formula:
        if not self.hypotheses:
            return self.conclusion
        return L.Implies(L.conj(*self.hypotheses), self.conclusion)


# --------------------------------------------------------------------------
# Expressions at a symbolic state
# --------------------------------------------------------------------------


def aexp_term(a, s: L.StateTerm) -> L.Term:
    if isinstance(a, NatConst):
        return L.Num(a.value)
    if isinstance(a, Var):
        return L.Sel(s, L.Num(a.addr))
    if isinstance(a, Deref):
        return L.Sel(s, L.Sel(s, L.Num(a.addr)))
    if isinstance(a, AddrOf):
        return L.Num(a.addr)
    if isinstance(a, BinA):
        return L.Arith(a.op, aexp_term(a.left, s), aexp_term(a.right, s))
    raise TypeError(a)


def bexp_formula(b, s: L.StateTerm) -> L.Formula:
    if isinstance(b, BConst):
        return L.BoolLit(b.value)
    if isinstance(b, Cmp):
        return L.Cmp(b.op, aexp_term(b.left, s), aexp_term(b.right, s))
    if isinstance(b, BinL):
        cls = L.And if b.op == "&&" else L.Or
        return cls((bexp_formula(b.left, s), bexp_formula(b.right, s)))
    if isinstance(b, BNot):
        return L.Not(bexp_formula(b.arg, s))
    raise TypeError(b)


def _at(a: A.Assertion, s: L.StateTerm) -> L.Formula:
    return A.translate(a, {A.CUR: s})


# --------------------------------------------------------------------------
# Optimized generator
# --------------------------------------------------------------------------


def tc(c: Com, s: L.SVar, s2: L.SVar, phi, f: L.Continuation, fresh: L.Fresh = None) -> L.Formula:
    """Main verification condition of ``c`` between states ``s`` and ``s2``.

    ``phi`` supplies ``pre_formula(name, s)`` and ``post_formula(name, s, s2)``
    (a :class:`ContractEnv` or a lifted relational environment).
    """
    fresh = fresh or L.Fresh([s.name, s2.name])
    if isinstance(c, Skip):
        return f(L.SEq(s, s2))
    if isinstance(c, Assign):
        return f(L.SEq(s2, L.Store(s, L.Num(c.addr), aexp_term(c.value, s))))
    if isinstance(c, IndirectAssign):
        target = L.Sel(s, L.Num(c.addr))
        return f(L.SEq(s2, L.Store(s, target, aexp_term(c.value, s))))
    if isinstance(c, Assert):
        return f(L.And((_at(c.cond, s), L.SEq(s, s2))))
    if isinstance(c, Seq):
        mid = fresh.after(s)
        inner = tc(c.first, s, mid, phi,
                   lambda p1: tc(c.second, mid, s2, phi,
                                 lambda p2: f(L.And((p1, p2))), fresh),
                   fresh)
        return L.ForallS((mid,), inner)
    if isinstance(c, If):
        b = bexp_formula(c.cond, s)
        return tc(c.then, s, s2, phi,
                  lambda p1: tc(c.orelse, s, s2, phi,
                                lambda p2: f(L.And((L.Implies(b, p1),
                                                    L.Implies(L.Not(b), p2)))),
                                fresh),
                  fresh)
    if isinstance(c, CallProc):
        return f(L.And((phi.pre_formula(c.name, s), phi.post_formula(c.name, s, s2))))
    if isinstance(c, While):
        return f(L.And((_at(c.inv, s), _at(c.inv, s2),
                        L.Not(bexp_formula(c.cond, s2)))))
    raise TypeError(c)


def ta(c: Com, s: L.SVar, phi, fresh: L.Fresh = None) -> L.Formula:
    """Auxiliary verification condition of ``c`` from state ``s``."""
    fresh = fresh or L.Fresh([s.name])
    if isinstance(c, (Skip, Assign, IndirectAssign)):
        return L.TRUE
    if isinstance(c, Assert):
        return _at(c.cond, s)
    if isinstance(c, Seq):
        mid = fresh.after(s)
        rest = tc(c.first, s, mid, phi,
                  lambda p: L.Implies(p, ta(c.second, mid, phi, fresh)), fresh)
        return L.And((ta(c.first, s, phi, fresh), L.ForallS((mid,), rest)))
    if isinstance(c, If):
        # the guard is evaluated in the state before the conditional
        b = bexp_formula(c.cond, s)
        return L.And((L.Implies(b, ta(c.then, s, phi, fresh)),
                      L.Implies(L.Not(b), ta(c.orelse, s, phi, fresh))))
    if isinstance(c, CallProc):
        return phi.pre_formula(c.name, s)
    if isinstance(c, While):
        s1 = fresh.after(s)
        keep = L.ForallS((s1,), L.Implies(_at(c.inv, s1),
                                          L.Implies(bexp_formula(c.cond, s1),
                                                    ta(c.body, s1, phi, fresh))))
        s2 = fresh.after(s)
        s3 = fresh.after(s)
        preserve = L.ForallS((s2, s3), L.Implies(
            _at(c.inv, s2),
            tc(c.body, s2, s3, phi, lambda p: L.Implies(p, _at(c.inv, s3)), fresh)))
        return L.And((_at(c.inv, s), keep, preserve))
    raise TypeError(c)


def tf(phi: ContractEnv, psi: ProcEnv, prefix: str = "tf") -> list[Goal]:
    """Goals stating that every procedure body respects its contract."""
    goals = []
    for y in psi:
        body = psi[y]
        fresh = L.Fresh()
        s = fresh.state("s")
        pre = phi.pre_formula(y, s)
        goals.append(Goal(f"{prefix}.{y}.aux", (pre,), ta(body, s, phi, fresh),
                          {"kind": "tf", "proc": y}))
        fresh = L.Fresh()
        s, s2 = fresh.state("s"), fresh.state("s")
        pre = phi.pre_formula(y, s)
        post = phi.post_formula(y, s, s2)
        goals.append(Goal(f"{prefix}.{y}.main", (pre,),
                          tc(body, s, s2, phi, lambda p: L.Implies(p, post), fresh),
                          {"kind": "tf", "proc": y}))
    return goals


def hoare_goals(P: A.Assertion, c: Com, Q: A.Assertion, phi: ContractEnv, psi: ProcEnv,
                label: str = "main") -> list[Goal]:
    """All goals whose validity establishes the Hoare triple ``{P} c {Q}``.

    The procedure goals from :func:`tf` come first, then ``<label>.aux``
    (assertions along the way hold) and ``<label>.main`` (the postcondition).
    """
    A.check_pre(P)
    A.check_post(Q)
    goals = tf(phi, psi)
    fresh = L.Fresh()
    s = fresh.state("s")
    goals.append(Goal(f"{label}.aux", (_at(P, s),), ta(c, s, phi, fresh), {"kind": "aux"}))
    fresh = L.Fresh()
    s, s2 = fresh.state("s"), fresh.state("s")
    pre = _at(P, s)
    post = A.translate(Q, {A.OLD: s, A.CUR: s2})
    goals.append(Goal(f"{label}.main", (pre,),
                      tc(c, s, s2, phi, lambda p: L.Implies(p, post), fresh),
                      {"kind": "main"}))
    return goals


# --------------------------------------------------------------------------
# Naive generator (reference for size and implication checks)
# --------------------------------------------------------------------------


def tc_naive(c: Com, s: L.SVar, phi, post, fresh: L.Fresh = None) -> L.Formula:
    """Weakest-precondition style condition: ``post`` is a function of the final state.

    Conditionals evaluate both branches against the same ``post``, so the
    rest of the program is duplicated in each branch.
    """
    fresh = fresh or L.Fresh([s.name])
    if isinstance(c, Skip):
        return post(s)
    if isinstance(c, (Assign, IndirectAssign)):
        addr = L.Num(c.addr) if isinstance(c, Assign) else L.Sel(s, L.Num(c.addr))
        s2 = fresh.after(s)
        return L.ForallS((s2,), L.Implies(L.SEq(s2, L.Store(s, addr, aexp_term(c.value, s))),
                                          post(s2)))
    if isinstance(c, Assert):
        return L.Implies(_at(c.cond, s), post(s))
    if isinstance(c, Seq):
        return tc_naive(c.first, s, phi,
                        lambda m: tc_naive(c.second, m, phi, post, fresh), fresh)
    if isinstance(c, If):
        b = bexp_formula(c.cond, s)
        return L.And((L.Implies(b, tc_naive(c.then, s, phi, post, fresh)),
                      L.Implies(L.Not(b), tc_naive(c.orelse, s, phi, post, fresh))))
    if isinstance(c, CallProc):
        s2 = fresh.after(s)
        return L.Implies(phi.pre_formula(c.name, s),
                         L.ForallS((s2,), L.Implies(phi.post_formula(c.name, s, s2), post(s2))))
    if isinstance(c, While):
        s2 = fresh.after(s)
        return L.Implies(_at(c.inv, s),
                         L.ForallS((s2,), L.Implies(
                             L.And((_at(c.inv, s2), L.Not(bexp_formula(c.cond, s2)))),
                             post(s2))))
    raise TypeError(c)


def ta_naive(c: Com, s: L.SVar, phi, fresh: L.Fresh = None) -> L.Formula:
    fresh = fresh or L.Fresh([s.name])
    if isinstance(c, (Skip, Assign, IndirectAssign)):
        return L.TRUE
    if isinstance(c, Assert):
        return _at(c.cond, s)
    if isinstance(c, Seq):
        return L.And((ta_naive(c.first, s, phi, fresh),
                      tc_naive(c.first, s, phi, lambda m: ta_naive(c.second, m, phi, fresh), fresh)))
    if isinstance(c, If):
        b = bexp_formula(c.cond, s)
        return L.And((L.Implies(b, ta_naive(c.then, s, phi, fresh)),
                      L.Implies(L.Not(b), ta_naive(c.orelse, s, phi, fresh))))
    if isinstance(c, CallProc):
        return phi.pre_formula(c.name, s)
    if isinstance(c, While):
        s1 = fresh.after(s)
        step = L.ForallS((s1,), L.Implies(
            L.And((_at(c.inv, s1), bexp_formula(c.cond, s1))),
            L.And((ta_naive(c.body, s1, phi, fresh),
                   tc_naive(c.body, s1, phi, lambda m: _at(c.inv, m), fresh)))))
        return L.And((_at(c.inv, s), step))
    raise TypeError(c)


def tf_naive(phi: ContractEnv, psi: ProcEnv, prefix: str = "tf") -> list[Goal]:
    goals = []
    for y in psi:
        body = psi[y]
        fresh = L.Fresh()
        s = fresh.state("s")
        pre = phi.pre_formula(y, s)
        goals.append(Goal(f"{prefix}.{y}.aux", (pre,), ta_naive(body, s, phi, fresh)))
        goals.append(Goal(f"{prefix}.{y}.main", (pre,),
                          tc_naive(body, s, phi, lambda m: phi.post_formula(y, s, m), fresh)))
    return goals


def hoare_goals_naive(P, c, Q, phi, psi, label: str = "main") -> list[Goal]:
    goals = tf_naive(phi, psi)
    fresh = L.Fresh()
    s = fresh.state("s")
    pre = _at(P, s)
    goals.append(Goal(f"{label}.aux", (pre,), ta_naive(c, s, phi, fresh)))
    goals.append(Goal(f"{label}.main", (pre,),
                      tc_naive(c, s, phi, lambda m: A.translate(Q, {A.OLD: s, A.CUR: m}), fresh)))
    return goals
