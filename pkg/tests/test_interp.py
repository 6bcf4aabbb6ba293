import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relvc.interp import OUT_OF_FUEL, Final, OutOfFuel, eval_aexp, eval_bexp, exec_com
from relvc.parser import parse_aexp, parse_bexp, parse_com
from relvc.syntax import MemState, ProcEnv, erase_annotations
from strategies import coms, small_states


def run(text, sigma=(), psi=None, fuel=1000):
    return exec_com(parse_com(text), MemState(dict(sigma)), psi, fuel)


def test_expressions():
    s = MemState({1: 3, 3: 7})
    assert eval_aexp(parse_aexp("x1 - 5"), s) == 0
    assert eval_aexp(parse_aexp("*x1 + &x2 * 2"), s) == 11
    assert eval_bexp(parse_bexp("x1 < x3 && !(x2 = 1)"), s)


def test_assign_and_pointer_write():
    out = run("x1 := 3; *x1 := 9; x2 := *x1")
    assert out == Final(MemState({1: 3, 3: 9, 2: 9}))


def test_loop():
    out = run("while (x1 < 5) invariant true { x2 := x2 + x1; x1 := x1 + 1 }")
    assert out == Final(MemState({1: 5, 2: 10}))


def test_divergence_runs_out_of_fuel():
    assert run("while (true) invariant true { skip }") == OUT_OF_FUEL
    psi = ProcEnv({"f": parse_com("call f")})
    assert exec_com(parse_com("call f"), MemState(), psi, 50) == OUT_OF_FUEL


def test_sum_example(csum):
    psi = csum.proc_env()
    out = exec_com(psi["sum"], MemState({1: 1, 2: 3}), psi)
    assert out.state.show() == "x1=3 x2=3 x3=3"


@settings(max_examples=150, deadline=None)
@given(coms, small_states)
def test_deterministic(c, sigma):
    psi = ProcEnv({"p": parse_com("if (x1 > 0) { x1 := x1 - 1; call p } else { skip }")})
    assert exec_com(c, sigma, psi, 64) == exec_com(c, sigma, psi, 64)


@settings(max_examples=150, deadline=None)
@given(coms, small_states, st.integers(0, 40), st.integers(0, 40))
def test_fuel_monotone(c, sigma, f, extra):
    psi = ProcEnv({"p": parse_com("if (x2 > 0) { x2 := x2 - 1; call p } else { x3 := 1 }")})
    a = exec_com(c, sigma, psi, f)
    if isinstance(a, Final):
        assert exec_com(c, sigma, psi, f + extra) == a
    else:
        assert isinstance(a, OutOfFuel)


@settings(max_examples=150, deadline=None)
@given(coms, small_states)
def test_annotations_do_not_matter(c, sigma):
    psi = ProcEnv({"p": parse_com("x4 := x4 + 1")})
    assert exec_com(c, sigma, psi, 64) == exec_com(erase_annotations(c), sigma, psi, 64)


def test_deep_recursion():
    psi = ProcEnv({"p": parse_com("if (x1 > 0) { x1 := x1 - 1; x2 := x2 + 1; call p } else { skip }")})
    out = exec_com(parse_com("call p"), MemState({1: 3000}), psi, 10 ** 6)
    assert out.state[2] == 3000
