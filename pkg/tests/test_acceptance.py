"""Acceptance gate: one test per criterion, each reporting a pass/fail line."""

import gc
import itertools
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import pytest

from acceptance_log import criterion, table
from conftest import needs_solver
from relvc import assertions as A
from relvc import cli, corpus_path, smt
from relvc import logic as L
from relvc import oracle as O
from relvc import testing as T
from relvc.interp import Final, exec_com
from relvc.parser import parse, parse_com, pretty, pretty_com
from relvc.relvcgen import RelContractEnv, rel_goals, spec_from_property
from relvc.syntax import ContractEnv, MemState, ProcEnv, ast_size, erase_annotations, set_mem
from relvc.vcgen import hoare_goals, tc, tc_naive

# frozen from measurement: tc grows by 39 nodes per extra branch of an if-chain
K_CHAIN = 40
N_HOARE, N_REL = 350, 200
GOAL_TIMEOUT = 2.0


def test_criterion_1_constant_branch():
    with criterion(1, "constant-branch formula matches the expected shape"):
        t0 = time.perf_counter()
        c = parse_com("if (false) { skip } else { x1 := 2 }")
        s, s2 = L.SVar("s"), L.SVar("s'")
        post = L.Cmp("=", L.Sel(s2, L.Num(1)), L.Num(2))
        got = tc(c, s, s2, ContractEnv(), lambda p: L.Implies(p, post))
        u, v = L.SVar("σ"), L.SVar("σ'")
        shown = L.Implies(
            L.And((L.Implies(L.FALSE, L.SEq(u, v)),
                   L.Implies(L.Not(L.FALSE), L.SEq(v, L.Store(u, L.Num(1), L.Num(2)))))),
            L.Cmp("=", L.Sel(v, L.Num(1)), L.Num(2)))
        assert L.alpha_equal(got, shown)
        assert time.perf_counter() - t0 < 1.0


@needs_solver
def test_criterion_2_sum_contract():
    with criterion(2, "contract of sum is valid") as log:
        t0 = time.perf_counter()
        pf = cli.load(str(corpus_path("csum.rl")))
        goals = cli.hoare_goal_list(pf)
        assert [g.label for g in goals] == ["tf.sum.aux", "tf.sum.main"]
        results = smt.discharge(goals, timeout=10)
        assert all(r.status == "valid" for r in results), [(r.goal, r.status) for r in results]
        elapsed = time.perf_counter() - t0
        assert elapsed < 30
        log["note"] = f"{len(results)} goals valid"


def _chains(conclusion, start):
    """Follow ``m = set(prev, i, v)`` equations from ``start``; returns [(i, v)], end state."""
    eqs = {}
    for n in L.walk(conclusion):
        if isinstance(n, L.SEq) and isinstance(n.right, L.Store) and isinstance(n.right.base, L.SVar):
            eqs[n.right.base.name] = (n.left.name, n.right.index, n.right.value)
    steps, cur = [], start
    while cur in eqs:
        nxt, i, v = eqs[cur]
        steps.append((i, v))
        cur = nxt
    return steps, cur


@needs_solver
def test_criterion_3_modular_rp1(capsys):
    with criterion(3, "R1 proved from the sum contracts; main goal has the expected shape") as log:
        t0 = time.perf_counter()
        code = cli.main(["rcheck", str(corpus_path("csum.rl")), "--property", "R1"])
        out = capsys.readouterr().out
        assert code == 0, out
        for label in ("R1.hyp2", "R1.hyp3", "R1.tfr.sum", "R1.tfr.sum,sum"):
            assert f"valid     {label}" in out

        pf = cli.load(str(corpus_path("csum.rl")))
        env = RelContractEnv.from_program(pf)
        hyp3 = rel_goals(spec_from_property(pf.property("R1")), env, pf.proc_env())[-1]
        (s1, s2), (t1, t2) = hyp3.meta["states"]
        sel = lambda s, i: L.Sel(L.SVar(s), L.Num(i))

        # relational precondition: the two runs agree on x2
        assert hyp3.hypotheses[0] == L.Cmp("=", sel(s1, 2), sel(s2, 2))
        # contract hypothesis for (sum, sum) fires on two call atoms
        pair = [h for h in hyp3.hypotheses[1].args if len(h.patterns) == 2]
        assert len(pair) == 1
        assert [a.proc for a in pair[0].patterns] == ["sum", "sum"]
        assert sum(isinstance(n, L.Call) for n in L.walk(pair[0].body)) == 2

        concl = hyp3.conclusion
        atoms = [n for n in L.walk(concl) if isinstance(n, L.Call)]
        assert [a.proc for a in atoms].count("sum") == 2
        for s, t, first in ((s1, t1, 1), (s2, t2, 0)):
            steps, end = _chains(concl, s)
            assert steps == [(L.Num(1), L.Num(first)), (L.Num(3), L.Num(0))]
            assert L.Call("sum", L.SVar(end), L.SVar(t)) in atoms
        # the postcondition is guarded by both runs, call atoms included
        main = [n for n in L.walk(concl) if isinstance(n, L.Implies)
                and sum(isinstance(m, L.Call) for m in L.walk(n.lhs)) == 2]
        assert len(main) == 1
        assert main[0].rhs == L.Cmp("=", sel(t1, 3), sel(t2, 3))
        assert time.perf_counter() - t0 < 60
        log["note"] = "rcheck exit 0; 2 store chains of length 2, 2 call atoms per side"


@needs_solver
def test_criterion_4_ablation():
    with criterion(4, "without the pair contract the R1 main goal is not valid") as log:
        pf = cli.load(str(corpus_path("csum_no_pair_contract.rl")))
        goals = {g.label: g for g in cli.rel_goal_list(pf, "R1")}
        v = smt.check_goal(goals["R1.hyp3"], timeout=10)
        assert not isinstance(v, smt.Valid)
        log["note"] = f"R1.hyp3 is {v.status}" + (f" ({v.reason})" if isinstance(v, smt.Unknown) else "")


def test_criterion_5_interpreter():
    with criterion(5, "interpreter matches the closed form of sum") as log:
        t0 = time.perf_counter()
        pf = cli.load(str(corpus_path("csum.rl")))
        psi = pf.proc_env()
        call = parse_com("call sum")
        n = 0
        for a, b, z in itertools.product(range(7), repeat=3):
            out = exec_com(call, MemState({1: a, 2: b, 3: z}), psi, 1000)
            assert isinstance(out, Final)
            assert out.state[3] == z + sum(range(a, b))
            n += 1
        assert time.perf_counter() - t0 < 5
        log["note"] = f"{n} start states"


def test_criterion_6_linearity():
    with criterion(6, "optimized size linear, naive size exponential on if-chains") as log:
        t0 = time.perf_counter()
        s, s2 = L.SVar("s"), L.SVar("s'")
        rows = [f"{'d':>3} {'ast':>5} {'tc nodes':>9} {'K*d':>6} {'naive nodes':>12} {'2^d':>7}"]
        enabled = gc.isenabled()
        gc.disable()
        try:
            for d in range(1, 17):
                c = T.if_chain(d)
                opt = L.node_count(tc(c, s, s2, ContractEnv(), lambda p: p))
                naive = L.node_count(tc_naive(c, s, ContractEnv(), lambda m: L.TRUE))
                rows.append(f"{d:>3} {ast_size(c):>5} {opt:>9} {K_CHAIN * d:>6} {naive:>12} {2 ** d:>7}")
                assert opt <= K_CHAIN * d, (d, opt)
                assert naive >= 2 ** d, (d, naive)
        finally:
            if enabled:
                gc.enable()
        table(f"tc size on if-chains (K = {K_CHAIN})", rows)
        elapsed = time.perf_counter() - t0
        assert elapsed < 60
        log["note"] = f"K = {K_CHAIN}"


def _differential(job):
    kind, seed = job
    inst = T.random_hoare(seed) if kind == "hoare" else T.random_rel(seed)
    verdicts = [smt.check_goal(g, timeout=GOAL_TIMEOUT) for g in inst.goals()]
    return inst, verdicts, inst.oracle()


@needs_solver
def test_criterion_7_differential():
    with criterion(7, "no random program is verified yet refuted by the oracle") as log:
        t0 = time.perf_counter()
        jobs = [("hoare", s) for s in range(N_HOARE)] + [("rel", s) for s in range(N_REL)]
        with ThreadPoolExecutor(4) as pool:
            results = list(pool.map(_differential, jobs))
        unsound, tally = [], Counter()
        for inst, verdicts, oracle in results:
            verified = all(isinstance(v, smt.Valid) for v in verdicts)
            tally[(verified, oracle.status)] += 1
            if verified and isinstance(oracle, O.Counterexample):
                unsound.append(inst)
        for inst in unsound:
            print(f"unsound instance {inst.label}:\n{inst.to_text()}")
        assert not unsound, [i.label for i in unsound]
        elapsed = time.perf_counter() - t0
        assert elapsed < 30 * 60
        rows = [f"{'verified':>9} {'oracle':>15} {'count':>6}"]
        rows += [f"{str(v):>9} {o:>15} {n:>6}" for (v, o), n in sorted(tally.items())]
        table(f"differential suite: {len(results)} instances", rows)
        log["note"] = (f"{len(results)} instances, "
                       f"{sum(n for (v, _), n in tally.items() if v)} fully verified, 0 unsound")


@needs_solver
def test_criterion_8_property_suites():
    with criterion(8, "property suites") as log:
        r = random.Random(8)
        # memory update laws
        for _ in range(500):
            sigma = MemState({r.randrange(8): r.randrange(9) for _ in range(r.randrange(5))})
            i, j, n = r.randrange(8), r.randrange(8), r.randrange(9)
            upd = set_mem(sigma, i, n)
            assert upd[i] == n
            if i != j:
                assert upd[j] == sigma[j]
        # monus never goes below zero
        for _ in range(500):
            assert A.monus(r.randrange(20), r.randrange(20)) >= 0
        # interpreter: deterministic, fuel monotone, annotations irrelevant
        for _ in range(300):
            c = T.gen_com(r, 4)
            sigma = MemState({k: r.randrange(4) for k in range(5)})
            a, b = exec_com(c, sigma, None, 40), exec_com(c, sigma, None, 40)
            assert a == b
            if isinstance(a, Final):
                assert exec_com(c, sigma, None, 80) == a
            assert exec_com(erase_annotations(c), sigma, None, 40) == a
        # parser round trip on the corpus and 500 random programs
        for name in ("csum.rl", "csum_no_pair_contract.rl", "const_branch.rl", "swap.rl", "pointers.rl"):
            pf = cli.load(str(corpus_path(name)))
            assert parse(pretty(pf)) == pf
        for seed in range(500):
            inst = T.random_rel(seed) if seed % 5 == 0 else None
            if inst is not None:
                pf = inst.to_program()
                assert parse(pretty(pf)) == pf
            c = T.gen_com(random.Random(seed), 4, procs=("p",))
            assert parse_com(pretty_com(c)) == c
        # tc applies its continuation exactly once
        for _ in range(300):
            calls = []
            tc(T.gen_com(r, 4), L.SVar("s"), L.SVar("s'"), ContractEnv(),
               lambda p: calls.append(p) or p)
            assert len(calls) == 1
        # counter-models replay as real falsifying assignments
        replayed = 0
        while replayed < 10:
            c = T.gen_com(r, 3, loops=False)
            post = T.gen_assertion(r, (A.CUR, A.OLD), 1)
            for g in hoare_goals(A.ATRUE, c, post, ContractEnv(), ProcEnv()):
                script = smt.lower(g)
                if not script.quantifier_free:
                    continue
                v = smt.check(script, timeout=5)
                if isinstance(v, smt.Invalid) and v.states:
                    assert smt.model_falsifies(script, v)
                    replayed += 1
        log["note"] = "memory laws, monus, interpreter, parser, continuation count, model replay"

