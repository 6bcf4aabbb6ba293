import random

import pytest
from hypothesis import given, settings

from relvc import assertions as A
from relvc import oracle as O
from relvc import testing as T
from relvc.parser import parse_assertion, parse_com
from relvc.syntax import MemState, ProcEnv
from strategies import seeds

SMALL = O.Bounds(max_addr=3, max_val=2, fuel=32)


def test_enumerate_states():
    states = O.enumerate_states(SMALL)
    assert len(states) == SMALL.size == 27
    assert len(set(states)) == 27
    assert MemState({0: 2, 1: 1, 2: 0}) in states


def test_assignment_holds():
    v = O.check_hoare(A.ATRUE, parse_com("x1 := 2"), parse_assertion("x1 = 2"), bounds=SMALL)
    assert isinstance(v, O.Holds) and v.checked == SMALL.size


def test_counterexample_is_real():
    c = parse_com("x1 := x1 + 1")
    v = O.check_hoare(A.ATRUE, c, parse_assertion("x1 <= 2"), bounds=SMALL)
    assert isinstance(v, O.Counterexample)
    assert v.sigma[1] == 2 and v.sigma2[1] == 3


def test_precondition_filters():
    c = parse_com("x1 := x1 + 1")
    v = O.check_hoare(parse_assertion("x1 < 2"), c, parse_assertion("x1 <= 2"), bounds=SMALL)
    assert isinstance(v, O.Holds) and v.checked == 18


def test_divergence_is_inconclusive():
    c = parse_com("while (true) invariant true { skip }")
    v = O.check_hoare(A.ATRUE, c, A.AFALSE, bounds=SMALL)
    assert isinstance(v, O.Inconclusive)
    # a false precondition leaves nothing to run
    v = O.check_hoare(A.AFALSE, c, A.AFALSE, bounds=SMALL)
    assert isinstance(v, O.Holds) and v.checked == 0


def test_counterexample_beats_inconclusive():
    c = parse_com("if (x1 = 0) { while (true) invariant true { skip } } else { x2 := 1 }")
    v = O.check_hoare(A.ATRUE, c, parse_assertion("x2 = 0"), bounds=SMALL)
    assert isinstance(v, O.Counterexample)


def test_csum_properties(csum):
    psi = csum.proc_env()
    b = O.Bounds(4, 3, 64)
    pair = csum.rel_contracts[0]
    assert isinstance(O.check_rel(pair.pre, [psi["sum"]] * 2, pair.post, psi, b), O.Holds)
    r1 = csum.property("R1")
    assert isinstance(O.check_rel(r1.pre, r1.commands, r1.post, psi, b), O.Holds)
    wrong = parse_assertion("x3<1> != x3<2>")
    assert isinstance(O.check_rel(r1.pre, r1.commands, wrong, psi, b), O.Counterexample)


def test_swap_relational():
    from relvc import load_corpus
    pf = load_corpus("swap.rl")
    prop = pf.property("swap_det")
    assert isinstance(O.check_rel(prop.pre, prop.commands, prop.post, pf.proc_env(), SMALL), O.Holds)


def _random_problem(seed):
    r = random.Random(seed)
    t = (A.Tag(1), A.Tag(2))
    cs = [T.gen_com(r, 3), T.gen_com(r, 3)]
    pre = T.gen_assertion(r, t, 1)
    post = T.gen_assertion(r, t + (A.OldTag(1), A.OldTag(2)), 2)
    return pre, cs, post


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_vectorized_matches_scalar(seed):
    pre, cs, post = _random_problem(seed)
    fast = O.check_rel(pre, cs, post, None, SMALL)
    slow = O.check_rel_scalar(pre, cs, post, None, SMALL)
    assert type(fast) is type(slow)
    if isinstance(fast, O.Holds):
        assert fast.checked == slow.checked


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_deterministic(seed):
    pre, cs, post = _random_problem(seed)
    assert O.check_rel(pre, cs, post, None, SMALL) == O.check_rel(pre, cs, post, None, SMALL)


def test_large_values_fall_back_to_python_ints():
    c = parse_com("x1 := 1048576 * 1048576")
    v = O.check_hoare(A.ATRUE, c, parse_assertion("x1 = 1048576 * 1048576"), bounds=SMALL)
    assert isinstance(v, O.Holds)
