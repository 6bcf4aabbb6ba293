"""Bounded-exhaustive semantic checking of Hoare and relational triples.

Every initial state over the addresses ``0 .. max_addr-1`` with values
``0 .. max_val`` (all other addresses 0) is executed once per command with
the fuel-bounded interpreter. Pre- and postconditions are then evaluated
with numpy over the whole grid of state tuples at once: run ``k`` varies
along grid axis ``k``, and the grid is processed in slices of axis 0 to
bound memory use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import assertions as A
from .errors import UnsupportedInOracle
from .interp import Final, exec_com
from .syntax import Com, MemState, ProcEnv

# from this size on, values are checked with Python integers instead of int64
_BIG = 1 << 20
_GRID_CELLS = 1 << 21


@dataclass(frozen=True)
class Bounds:
    max_addr: int = 4
    max_val: int = 3
    fuel: int = 64

    @property
    def size(self) -> int:
        return (self.max_val + 1) ** self.max_addr


@dataclass(frozen=True)
class Holds:
    checked: int = 0         # state tuples that met the precondition and converged
    out_of_window: int = 0   # runs that wrote outside the enumerated addresses
    status = "holds"


@dataclass(frozen=True)
class Counterexample:
    initial: tuple   # one MemState per run
    final: tuple
    status = "counterexample"

    @property
    def sigma(self) -> MemState:
        return self.initial[0]

    @property
    def sigma2(self) -> MemState:
        return self.final[0]


@dataclass(frozen=True)
class Inconclusive:
    """Some start states satisfying the precondition ran out of fuel."""

    states: tuple    # initial state tuples whose runs did not converge
    checked: int = 0
    status = "inconclusive"


OracleVerdict = Union[Holds, Counterexample, Inconclusive]


def enumerate_states(bounds: Bounds) -> list[MemState]:
    vals = range(bounds.max_val + 1)
    return [MemState(enumerate(t)) for t in itertools.product(vals, repeat=bounds.max_addr)]


# --------------------------------------------------------------------------
# Runs
# --------------------------------------------------------------------------


class _Runs:
    """Outcomes of one command from every enumerated state, as dense arrays."""

    def __init__(self, c: Com, states: list[MemState], psi: ProcEnv, bounds: Bounds):
        self.outcomes = [exec_com(c, s, psi, bounds.fuel) for s in states]
        self.ok = np.array([isinstance(o, Final) for o in self.outcomes], dtype=bool)
        finals = [o.state if isinstance(o, Final) else MemState() for o in self.outcomes]
        self.finals = finals
        width = bounds.max_addr
        big = False
        for f in finals:
            b = f.bound()
            if b:
                width = max(width, b[-1] + 1)
                big = big or max(f[i] for i in b) >= _BIG
        self.out_of_window = sum(1 for f, ok in zip(finals, self.ok)
                                 if ok and f.bound() and f.bound()[-1] >= bounds.max_addr)
        self.big = big or width > 4096
        if self.big:
            self.post = None
        else:
            self.post = np.zeros((len(finals), width), dtype=np.int64)
            for r, f in enumerate(finals):
                for i, v in f.items():
                    self.post[r, i] = v


def _pre_matrix(states: list[MemState], bounds: Bounds) -> np.ndarray:
    m = np.zeros((len(states), bounds.max_addr), dtype=np.int64)
    for r, s in enumerate(states):
        for i, v in s.items():
            m[r, i] = v
    return m


# --------------------------------------------------------------------------
# Vectorized assertion evaluation
# --------------------------------------------------------------------------


class _Grid:
    """State sources for one slice of the run-tuple grid."""

    def __init__(self, sources: dict, shape: tuple):
        # sources: ref -> (matrix, axis, row offset)
        self.sources = sources
        self.shape = shape
        self._rows = {}

    def rows(self, axis: int, offset: int) -> np.ndarray:
        key = (axis, offset)
        if key not in self._rows:
            shp = [1] * len(self.shape)
            shp[axis] = self.shape[axis]
            self._rows[key] = (np.arange(self.shape[axis]) + offset).reshape(shp)
        return self._rows[key]


def _vterm(t, g: _Grid, env: dict):
    if isinstance(t, A.Const):
        return t.value
    if isinstance(t, A.LogicalVar):
        return env[t.name]
    if isinstance(t, A.Read):
        if t.ref not in g.sources:
            raise A.ArityError(f"no state bound for {A.describe_ref(t.ref)}")
        mat, axis, offset = g.sources[t.ref]
        rows = g.rows(axis, offset)
        idx = _vterm(t.index, g, env)
        width = mat.shape[1]
        if np.isscalar(idx) or np.ndim(idx) == 0:
            i = int(idx)
            if i >= width:
                return np.zeros(rows.shape, dtype=np.int64)
            return mat[rows, i]
        idx = np.asarray(idx)
        inside = idx < width
        return np.where(inside, mat[rows, np.where(inside, idx, 0)], 0)
    if isinstance(t, A.ArithOp):
        a, b = _vterm(t.left, g, env), _vterm(t.right, g, env)
        if t.op == "+":
            return a + b
        if t.op == "*":
            return a * b
        return np.maximum(np.subtract(a, b), 0)
    raise TypeError(t)


_VCMP = {"=": np.equal, "!=": np.not_equal, "<=": np.less_equal,
         "<": np.less, ">=": np.greater_equal, ">": np.greater}


def _vassert(a, g: _Grid, env: dict):
    if isinstance(a, A.BoolConst):
        return np.full(g.shape, a.value)
    if isinstance(a, A.Compare):
        return np.broadcast_to(_VCMP[a.op](_vterm(a.left, g, env), _vterm(a.right, g, env)), g.shape)
    if isinstance(a, A.AAnd):
        return _vassert(a.left, g, env) & _vassert(a.right, g, env)
    if isinstance(a, A.AOr):
        return _vassert(a.left, g, env) | _vassert(a.right, g, env)
    if isinstance(a, A.AImplies):
        return ~_vassert(a.left, g, env) | _vassert(a.right, g, env)
    if isinstance(a, A.ANot):
        return ~_vassert(a.arg, g, env)
    if isinstance(a, (A.Forall, A.Exists)):
        if a.bound is None:
            raise UnsupportedInOracle(f"quantifier over {a.var} has no bound")
        bound = np.broadcast_to(_vterm(a.bound, g, env), g.shape)
        forall = isinstance(a, A.Forall)
        acc = np.full(g.shape, forall)
        for v in range(int(bound.max(initial=0))):
            body = _vassert(a.body, g, {**env, a.var: v})
            if forall:
                acc &= (v >= bound) | body
            else:
                acc |= (v < bound) & body
        return acc
    raise TypeError(a)


# --------------------------------------------------------------------------
# Checks
# --------------------------------------------------------------------------


def check_hoare(P: A.Assertion, c: Com, Q: A.Assertion, psi: ProcEnv = None,
                bounds: Bounds = Bounds()) -> OracleVerdict:
    """Exhaustive check of ``{P} c {Q}`` over the bounded state space."""
    A.check_pre(P)
    A.check_post(Q)
    return RelOracle([c], psi, bounds).check_hoare(P, Q)


def check_rel(P: A.Assertion, cs: Sequence[Com], Q: A.Assertion, psi: ProcEnv = None,
              bounds: Bounds = Bounds()) -> OracleVerdict:
    """Exhaustive check of a relational triple over n-tuples of bounded states.

    A counterexample is reported if one exists; otherwise the verdict is
    inconclusive when some tuple meeting ``P`` has a run out of fuel.
    """
    return RelOracle(cs, psi, bounds).check(P, Q)


class RelOracle:
    """Runs of fixed commands, reusable across many pre/postcondition pairs."""

    def __init__(self, cs: Sequence[Com], psi: ProcEnv = None, bounds: Bounds = Bounds()):
        self.n = len(cs)
        self.bounds = bounds
        psi = psi if psi is not None else ProcEnv()
        self.states = enumerate_states(bounds)
        self.pre_mat = _pre_matrix(self.states, bounds)
        memo: dict = {}
        self.runs = []
        for c in cs:
            if c not in memo:
                memo[c] = _Runs(c, self.states, psi, bounds)
            self.runs.append(memo[c])
        self.out_of_window = sum(r.out_of_window for r in memo.values())

    def check(self, P: A.Assertion, Q: A.Assertion) -> OracleVerdict:
        n, runs, states = self.n, self.runs, self.states
        A.check_rel_pre(P, n)
        A.check_rel_post(Q, n)
        if any(r.big for r in runs):
            return _check_scalar(P, Q, states, runs, n, self.out_of_window)
        N = len(states)
        pre_mat = self.pre_mat
        slice_len = max(1, _GRID_CELLS // max(1, N ** (n - 1)))
        checked = 0
        stuck = []
        for start in range(0, N, slice_len):
            stop = min(N, start + slice_len)
            shape = (stop - start,) + (N,) * (n - 1)
            pre_src = {}
            post_src = {}
            for k in range(n):
                off = start if k == 0 else 0
                pre_src[A.Tag(k + 1)] = (pre_mat, k, off)
                post_src[A.OldTag(k + 1)] = (pre_mat, k, off)
                post_src[A.Tag(k + 1)] = (runs[k].post, k, off)
            p_mask = _vassert(P, _Grid(pre_src, shape), {})
            if not p_mask.any():
                continue
            ok = np.ones(shape, dtype=bool)
            for k in range(n):
                o = runs[k].ok[start:stop] if k == 0 else runs[k].ok
                shp = [1] * n
                shp[k] = o.shape[0]
                ok = ok & o.reshape(shp)
            live = p_mask & ok
            if live.any():
                q_mask = _vassert(Q, _Grid(post_src, shape), {})
                bad = live & ~q_mask
                if bad.any():
                    idx = np.argwhere(bad)[0]
                    tup = (idx[0] + start,) + tuple(idx[1:])
                    return Counterexample(tuple(states[i] for i in tup),
                                          tuple(runs[k].finals[i] for k, i in enumerate(tup)))
                checked += int(live.sum())
            dead = p_mask & ~ok
            if dead.any() and len(stuck) < 16:
                for idx in np.argwhere(dead)[: 16 - len(stuck)]:
                    tup = (idx[0] + start,) + tuple(idx[1:])
                    stuck.append(tuple(states[i] for i in tup))
        if stuck:
            return Inconclusive(tuple(stuck), checked)
        return Holds(checked, self.out_of_window)

    def check_hoare(self, P: A.Assertion, Q: A.Assertion) -> OracleVerdict:
        A.check_pre(P)
        A.check_post(Q)
        return self.check(A.retag(P, {A.CUR: A.Tag(1)}),
                          A.retag(Q, {A.CUR: A.Tag(1), A.OLD: A.OldTag(1)}))


def _check_scalar(P, Q, states, runs, n, out_window) -> OracleVerdict:
    # huge values or addresses: plain Python integers, one tuple at a time
    checked = 0
    stuck = []
    for tup in itertools.product(range(len(states)), repeat=n):
        sig = [states[i] for i in tup]
        if not A.eval_assertion(P, {A.Tag(k + 1): s for k, s in enumerate(sig)}):
            continue
        if not all(runs[k].ok[i] for k, i in enumerate(tup)):
            if len(stuck) < 16:
                stuck.append(tuple(sig))
            continue
        fin = [runs[k].finals[i] for k, i in enumerate(tup)]
        b = {A.Tag(k + 1): f for k, f in enumerate(fin)}
        b.update({A.OldTag(k + 1): s for k, s in enumerate(sig)})
        if not A.eval_assertion(Q, b):
            return Counterexample(tuple(sig), tuple(fin))
        checked += 1
    if stuck:
        return Inconclusive(tuple(stuck), checked)
    return Holds(checked, out_window)


def check_rel_scalar(P, cs, Q, psi=None, bounds: Bounds = Bounds()) -> OracleVerdict:
    """Reference implementation of :func:`check_rel` without numpy."""
    n = len(cs)
    A.check_rel_pre(P, n)
    A.check_rel_post(Q, n)
    psi = psi if psi is not None else ProcEnv()
    states = enumerate_states(bounds)
    runs = [_Runs(c, states, psi, bounds) for c in cs]
    return _check_scalar(P, Q, states, runs, n, sum(r.out_of_window for r in runs))
