import pytest
from hypothesis import given
from hypothesis import strategies as st

from relvc.errors import ParseError, UnboundProcedureError
from relvc.syntax import (
    Assign, CallProc, MemState, NatConst, ProcEnv, SKIP, Seq, addr_of, com_size,
    loc_name, seq, set_mem,
)
from strategies import addresses, states, values


def test_addr_of_examples():
    assert addr_of("x1") == 1
    assert addr_of("x0") == 0
    assert addr_of("x17") == 17
    assert loc_name(3) == "x3"


@pytest.mark.parametrize("bad", ["y1", "x", "x-1", "1x", "x1a", ""])
def test_addr_of_rejects(bad):
    with pytest.raises(ParseError):
        addr_of(bad)


def test_default_zero():
    s = MemState({2: 5})
    assert s[2] == 5
    assert s[0] == 0
    assert s[10 ** 9] == 0


def test_extensional_equality():
    assert MemState({1: 0, 2: 3}) == MemState({2: 3})
    assert MemState({2: 3}).set(2, 0) == MemState()
    assert hash(MemState({1: 0, 2: 3})) == hash(MemState({2: 3}))


def test_rejects_negative():
    with pytest.raises(ValueError):
        MemState({1: -1})
    with pytest.raises(ValueError):
        MemState().set(-1, 2)


def test_show():
    assert MemState({1: 3, 2: 3, 3: 3}).show() == "x1=3 x2=3 x3=3"
    assert MemState({1: 3}).show([1, 2]) == "x1=3 x2=0"


@given(states, addresses, values)
def test_set_then_read(sigma, i, n):
    assert set_mem(sigma, i, n)[i] == n


@given(states, addresses, addresses, values)
def test_set_leaves_others(sigma, i, j, n):
    if i != j:
        assert set_mem(sigma, i, n)[j] == sigma[j]


@given(states, addresses, values, values)
def test_set_overwrites(sigma, i, n, m):
    assert set_mem(set_mem(sigma, i, n), i, m) == set_mem(sigma, i, m)


@given(states, addresses, values)
def test_set_is_persistent(sigma, i, n):
    before = dict(sigma.items())
    set_mem(sigma, i, n)
    assert dict(sigma.items()) == before


def test_seq_right_nested():
    a, b, c = Assign(1, NatConst(1)), Assign(2, NatConst(2)), SKIP
    assert seq(a, b, c) == Seq(a, Seq(b, c))
    assert seq() == SKIP
    assert com_size(seq(a, b, c)) == 5


def test_proc_env_unbound():
    psi = ProcEnv({"p": SKIP})
    assert psi["p"] == SKIP
    with pytest.raises(UnboundProcedureError):
        psi["q"]
    with pytest.raises(UnboundProcedureError):
        ProcEnv({"p": CallProc("q")}).check_closed()
