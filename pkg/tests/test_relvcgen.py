import random

import pytest
from hypothesis import given, settings

from relvc import assertions as A
from relvc import logic as L
from relvc import smt
from relvc import testing as T
from relvc.errors import ArityError
from relvc.parser import parse_assertion, parse_com
from relvc.relvcgen import (PhiCall, RelContract, RelContractEnv, RelGoalSpec, procpred,
                            rel_goals, spec_from_property, tar, tfr, tpr, tr)
from relvc.syntax import ContractEnv, ProcEnv
from relvc.vcgen import hoare_goals, tc
from conftest import needs_solver
from strategies import coms

S1, S2, T1, T2 = (L.SVar(n) for n in ("a1", "a2", "b1", "b2"))


def ident(p):
    return p


def sel(s, i):
    return L.Sel(s, L.Num(i))


def test_tr_empty_and_single():
    assert tr([], [], [], RelContractEnv(), ident) == L.TRUE
    phi = PhiCall(RelContractEnv())
    c = parse_com("x1 := 1")
    assert tr([c], [S1], [T1], phi, ident) == L.And((tc(c, S1, T1, phi, ident), L.TRUE))


def test_tr_two_runs():
    c1, c2 = parse_com("x1 := 1"), parse_com("x2 := 2")
    got = tr([c1, c2], [S1, S2], [T1, T2], PhiCall(RelContractEnv()), ident)
    e1 = L.SEq(T1, L.Store(S1, L.Num(1), L.Num(1)))
    e2 = L.SEq(T2, L.Store(S2, L.Num(2), L.Num(2)))
    assert got == L.And((e2, L.And((e1, L.TRUE))))


def test_tr_length_mismatch():
    with pytest.raises(ValueError):
        tr([parse_com("skip")], [S1, S2], [T1], RelContractEnv(), ident)


def test_tar_conjoins_runs():
    phi = PhiCall(RelContractEnv())
    cs = [parse_com("assert x1 = 0"), parse_com("assert x2 = 0")]
    assert tar(cs, [S1, S2], phi) == L.And((L.Cmp("=", sel(S1, 1), L.Num(0)),
                                            L.Cmp("=", sel(S2, 2), L.Num(0))))
    assert tar([], [], phi) == L.TRUE


def test_procpred():
    assert procpred([], [], []) == L.TRUE
    got = procpred(["f", "g"], [S1, S2], [T1, T2])
    assert got == L.And((L.Call("f", S1, T1), L.Call("g", S2, T2)))


def test_phicall_adds_call_atom():
    env = RelContractEnv([RelContract(("y",), parse_assertion("x1<1> > 0"),
                                      parse_assertion("x1<1> = old(x1<1>)"))])
    phi = PhiCall(env)
    assert phi.pre_formula("y", S1) == L.Cmp(">", sel(S1, 1), L.Num(0))
    assert phi.post_formula("y", S1, T1) == L.And((L.Cmp("=", sel(T1, 1), sel(S1, 1)),
                                                   L.Call("y", S1, T1)))
    # procedures without a singleton contract still leave their atom
    assert phi.post_formula("z", S1, T1) == L.And((L.TRUE, L.Call("z", S1, T1)))


def test_phicall_ignores_longer_sequences():
    env = RelContractEnv([RelContract(("y", "y"), A.ATRUE, parse_assertion("x1<1> = x1<2>"))])
    assert PhiCall(env).post_formula("y", S1, T1) == L.And((L.TRUE, L.Call("y", S1, T1)))


def test_tpr_one_hypothesis_per_sequence():
    env = RelContractEnv([RelContract(("f",)), RelContract(("f", "g")), RelContract(("g", "g", "f"))])
    got = tpr(env)
    assert isinstance(got, L.And) and len(got.args) == 3
    for hyp, e in zip(got.args, env):
        n = len(e.names)
        assert isinstance(hyp, L.ForallS) and len(hyp.states) == 2 * n
        assert [a.proc for a in hyp.patterns] == list(e.names)
        assert hyp.body.lhs == procpred(e.names, hyp.states[:n], hyp.states[n:])
    assert tpr(RelContractEnv()) == L.TRUE


def test_tfr_labels_and_empty_env():
    env = RelContractEnv([RelContract(("f",)), RelContract(("f", "g"))])
    psi = ProcEnv({"f": parse_com("skip"), "g": parse_com("skip")})
    assert [g.label for g in tfr(env, psi, "P")] == ["P.tfr.f", "P.tfr.f,g"]
    assert tfr(RelContractEnv(), psi, "P") == []


def test_rel_goal_labels(csum):
    prop = csum.property("R1")
    goals = rel_goals(spec_from_property(prop), RelContractEnv.from_program(csum), csum.proc_env())
    assert [g.label for g in goals] == ["R1.tfr.sum", "R1.tfr.sum,sum", "R1.hyp2", "R1.hyp3"]


def test_hyp3_structure(csum):
    prop = csum.property("R1")
    env = RelContractEnv.from_program(csum)
    hyp3 = rel_goals(spec_from_property(prop), env, csum.proc_env())[-1]
    pre, hyps = hyp3.hypotheses
    ss, ss2 = hyp3.meta["states"]
    binding = {A.Tag(k + 1): L.SVar(n) for k, n in enumerate(ss)}
    assert pre == A.translate(prop.pre, binding)
    assert L.alpha_equal(hyps, tpr(env))
    assert L.free_states(hyp3.conclusion) <= set(ss) | set(ss2)


def test_arity_checked():
    with pytest.raises(ArityError):
        RelGoalSpec("bad", (parse_com("skip"),), parse_assertion("x1<2> = 0"), A.ATRUE)
    with pytest.raises(ArityError):
        RelGoalSpec("none", (), A.ATRUE, A.ATRUE)


@settings(max_examples=100, deadline=None)
@given(coms, coms)
def test_tr_single_continuation_application(c1, c2):
    calls = []

    def f(p):
        calls.append(p)
        return p

    tr([c1, c2], [S1, S2], [T1, T2], PhiCall(RelContractEnv()), f)
    assert len(calls) == 1


@needs_solver
def test_csum_goals_valid(csum):
    goals = rel_goals(spec_from_property(csum.property("R1")),
                      RelContractEnv.from_program(csum), csum.proc_env())
    for g in goals:
        assert isinstance(smt.check_goal(g), smt.Valid), g.label


@needs_solver
def test_without_pair_contract_main_goal_fails(csum_no_pair):
    goals = rel_goals(spec_from_property(csum_no_pair.property("R1")),
                      RelContractEnv.from_program(csum_no_pair), csum_no_pair.proc_env())
    hyp3 = goals[-1]
    assert not isinstance(smt.check_goal(hyp3, timeout=3), smt.Valid)


@needs_solver
def test_empty_contracts_leave_main_goal_unproved(csum):
    goals = rel_goals(spec_from_property(csum.property("R1")), RelContractEnv(), csum.proc_env())
    assert [g.label for g in goals] == ["R1.hyp2", "R1.hyp3"]
    assert not isinstance(smt.check_goal(goals[-1], timeout=3), smt.Valid)


@needs_solver
def test_self_violating_singleton():
    env = RelContractEnv([RelContract(("y",), A.ATRUE, parse_assertion("x1<1> = 5"))])
    psi = ProcEnv({"y": parse_com("x1 := 4")})
    (g,) = tfr(env, psi, "bad")
    assert isinstance(smt.check_goal(g), smt.Invalid)


@needs_solver
def test_single_run_matches_hoare():
    # with one run and no contracts the relational goals agree with the unary ones
    for seed in range(15):
        r = random.Random(seed)
        c = T.gen_com(r, 3, loops=False)
        pre = T.gen_assertion(r, (A.CUR,), 1)
        post = T.gen_assertion(r, (A.CUR, A.OLD), 1)
        unary = hoare_goals(pre, c, post, ContractEnv(), ProcEnv())
        rel = rel_goals(RelGoalSpec("r", (c,), A.retag(pre, {A.CUR: A.Tag(1)}),
                                    A.retag(post, {A.CUR: A.Tag(1), A.OLD: A.OldTag(1)})),
                        RelContractEnv(), ProcEnv())
        for u, v in zip(unary, rel):
            a, b = smt.check_goal(u, timeout=3), smt.check_goal(v, timeout=3)
            if not isinstance(a, smt.Unknown) and not isinstance(b, smt.Unknown):
                assert a.status == b.status, (seed, u.label)
