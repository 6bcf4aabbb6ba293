"""Verification conditions for relational properties over n runs.

Each run owns its own symbolic memory state, so no separation hypotheses
are needed. Relational contracts are used modularly: every procedure call
leaves a ``call_y(s, s')`` atom in the generated formula, and the contract
hypotheses fire only on matching combinations of those atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import assertions as A
from . import logic as L
from .errors import ArityError, UnboundProcedureError
from .syntax import Com, ProcEnv
from .vcgen import Goal, ta, tc


@dataclass(frozen=True)
class RelContract:
    names: tuple
    pre: A.Assertion = A.ATRUE
    post: A.Assertion = A.ATRUE


class RelContractEnv:
    """Relational contracts keyed by procedure-name sequences.

    Preconditions read ``x<k>`` (pre-state of run k); postconditions read
    ``x<k>`` (post-state of run k) and ``old(x<k>)``.
    """

    def __init__(self, entries: Sequence[RelContract] = ()):
        self._entries: dict[tuple, RelContract] = {}
        for e in entries:
            names = tuple(e.names)
            if not names:
                raise ValueError("relational contracts need at least one procedure")
            if names in self._entries:
                raise ValueError(f"duplicate relational contract for {names}")
            n = len(names)
            A.check_rel_pre(e.pre, n, f"precondition of [{', '.join(names)}]")
            A.check_rel_post(e.post, n, f"postcondition of [{', '.join(names)}]")
            self._entries[names] = RelContract(names, e.pre, e.post)

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, names) -> bool:
        return tuple(names) in self._entries

    def get(self, names):
        return self._entries.get(tuple(names))

    def without(self, names) -> "RelContractEnv":
        return RelContractEnv([e for e in self if e.names != tuple(names)])

    @classmethod
    def from_program(cls, pf) -> "RelContractEnv":
        """Relational contracts of a parsed file; procedure contracts become singletons."""
        entries = []
        for d in pf.procs:
            if d.pre is None and d.post is None:
                continue
            pre = A.retag(d.pre or A.ATRUE, {A.CUR: A.Tag(1)})
            post = A.retag(d.post or A.ATRUE, {A.CUR: A.Tag(1), A.OLD: A.OldTag(1)})
            entries.append(RelContract((d.name,), pre, post))
        entries.extend(RelContract(r.names, r.pre, r.post) for r in pf.rel_contracts)
        return cls(entries)


@dataclass(frozen=True)
class RelGoalSpec:
    label: str
    commands: tuple
    pre: A.Assertion
    post: A.Assertion

    def __post_init__(self):
        n = len(self.commands)
        if n < 1:
            raise ArityError("a relational property needs at least one command")
        A.check_rel_pre(self.pre, n)
        A.check_rel_post(self.post, n)


def pre_binding(ss: Sequence[L.SVar]) -> dict:
    return {A.Tag(k + 1): s for k, s in enumerate(ss)}


def post_binding(ss: Sequence[L.SVar], ss2: Sequence[L.SVar]) -> dict:
    b = {A.OldTag(k + 1): s for k, s in enumerate(ss)}
    b.update({A.Tag(k + 1): s for k, s in enumerate(ss2)})
    return b


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------


def tr(cs: Sequence[Com], ss, ss2, phi, f: L.Continuation, fresh: L.Fresh = None) -> L.Formula:
    """Main condition for n commands, each on its own pair of states."""
    if not (len(cs) == len(ss) == len(ss2)):
        raise ValueError("tr: commands and states differ in length")
    fresh = fresh or L.Fresh([s.name for s in list(ss) + list(ss2)])
    if not cs:
        return f(L.TRUE)
    n = len(cs) - 1
    return tc(cs[n], ss[n], ss2[n], phi,
              lambda pn: tr(cs[:n], ss[:n], ss2[:n], phi,
                            lambda prest: f(L.And((pn, prest))), fresh),
              fresh)


def tar(cs: Sequence[Com], ss, phi, fresh: L.Fresh = None) -> L.Formula:
    if len(cs) != len(ss):
        raise ValueError("tar: commands and states differ in length")
    fresh = fresh or L.Fresh([s.name for s in ss])
    if not cs:
        return L.TRUE
    return L.And(tuple(ta(c, s, phi, fresh) for c, s in zip(cs, ss)))


def proccall(y: str, s: L.StateTerm, s2: L.StateTerm) -> L.Call:
    return L.Call(y, s, s2)


def procpred(ys: Sequence[str], ss, ss2) -> L.Formula:
    if not (len(ys) == len(ss) == len(ss2)):
        raise ValueError("procpred: names and states differ in length")
    if not ys:
        return L.TRUE
    return L.And(tuple(proccall(y, s, s2) for y, s, s2 in zip(ys, ss, ss2)))


def tpr(psi_rel: RelContractEnv, fresh: L.Fresh = None) -> L.Formula:
    """Contract hypotheses: one quantified implication per declared sequence.

    Each hypothesis is guarded by the call atoms of its sequence, which
    also serve as the solver's instantiation pattern.
    """
    fresh = fresh or L.Fresh()
    hyps = []
    for e in psi_rel:
        n = len(e.names)
        ss = [fresh.state(f"q{k + 1}") for k in range(n)]
        ss2 = [fresh.state(f"q{k + 1}") for k in range(n)]
        guard = procpred(e.names, ss, ss2)
        body = L.Implies(guard, L.Implies(A.translate(e.pre, pre_binding(ss)),
                                          A.translate(e.post, post_binding(ss, ss2))))
        atoms = guard.args if isinstance(guard, L.And) else (guard,)
        hyps.append(L.ForallS(tuple(ss + ss2), body, tuple(atoms)))
    if not hyps:
        return L.TRUE
    return L.And(tuple(hyps))


class PhiCall:
    """Contract environment lifted from singleton relational contracts.

    Every postcondition is strengthened with the call atom of its procedure,
    so calls leave a trace the relational hypotheses can match on.
    """

    def __init__(self, psi_rel: RelContractEnv):
        self.psi_rel = psi_rel

    def pre_formula(self, y: str, s: L.StateTerm) -> L.Formula:
        e = self.psi_rel.get((y,))
        pre = e.pre if e else A.ATRUE
        return A.translate(pre, {A.Tag(1): s})

    def post_formula(self, y: str, s: L.StateTerm, s2: L.StateTerm) -> L.Formula:
        e = self.psi_rel.get((y,))
        post = e.post if e else A.ATRUE
        return L.And((A.translate(post, {A.OldTag(1): s, A.Tag(1): s2}), proccall(y, s, s2)))


def phicall(psi_rel: RelContractEnv) -> PhiCall:
    return PhiCall(psi_rel)


def _run_states(fresh: L.Fresh, n: int):
    ss = [fresh.state(f"s{k + 1}") for k in range(n)]
    ss2 = [fresh.state(f"s{k + 1}") for k in range(n)]
    return ss, ss2


def tfr(psi_rel: RelContractEnv, psi: ProcEnv, label: str = "") -> list[Goal]:
    """One goal per declared sequence: the bodies respect the relational contract."""
    phi = phicall(psi_rel)
    goals = []
    for e in psi_rel:
        fresh = L.Fresh()
        for y in e.names:
            if y not in psi:
                raise UnboundProcedureError(y)
        bodies = [psi[y] for y in e.names]
        ss, ss2 = _run_states(fresh, len(bodies))
        hyp_pre = A.translate(e.pre, pre_binding(ss))
        hyp_tpr = tpr(psi_rel, fresh)
        post = A.translate(e.post, post_binding(ss, ss2))
        concl = L.And((tar(bodies, ss, phi, fresh),
                       tr(bodies, ss, ss2, phi, lambda p: L.Implies(p, post), fresh)))
        name = ",".join(e.names)
        prefix = f"{label}." if label else ""
        goals.append(Goal(f"{prefix}tfr.{name}", (hyp_pre, hyp_tpr), concl,
                          {"kind": "tfr", "seq": e.names}))
    return goals


def rel_goals(spec: RelGoalSpec, psi_rel: RelContractEnv, psi: ProcEnv) -> list[Goal]:
    """Goals whose validity establishes the relational property ``spec``.

    Emits the contract goals (``<label>.tfr.<seq>``), the auxiliary goal
    ``<label>.hyp2`` and the main goal ``<label>.hyp3``.
    """
    goals = tfr(psi_rel, psi, spec.label)
    phi = phicall(psi_rel)
    cs = list(spec.commands)

    fresh = L.Fresh()
    ss, ss2 = _run_states(fresh, len(cs))
    pre = A.translate(spec.pre, pre_binding(ss))
    goals.append(Goal(f"{spec.label}.hyp2", (pre, tpr(psi_rel, fresh)),
                      tar(cs, ss, phi, fresh), {"kind": "hyp2"}))

    fresh = L.Fresh()
    ss, ss2 = _run_states(fresh, len(cs))
    pre = A.translate(spec.pre, pre_binding(ss))
    post = A.translate(spec.post, post_binding(ss, ss2))
    goals.append(Goal(f"{spec.label}.hyp3", (pre, tpr(psi_rel, fresh)),
                      tr(cs, ss, ss2, phi, lambda p: L.Implies(p, post), fresh),
                      {"kind": "hyp3", "states": (tuple(s.name for s in ss),
                                                  tuple(s.name for s in ss2))}))
    return goals


def spec_from_property(prop) -> RelGoalSpec:
    return RelGoalSpec(prop.label, tuple(prop.commands), prop.pre, prop.post)
