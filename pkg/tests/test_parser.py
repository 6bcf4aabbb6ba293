import random
from importlib import resources

import pytest
from hypothesis import given, settings

from relvc import assertions as A
from relvc import testing as T
from relvc.errors import ParseError
from relvc.parser import (
    parse, parse_aexp, parse_assertion, parse_bexp, parse_com, pretty, pretty_aexp,
    pretty_assertion, pretty_bexp, pretty_com,
)
from relvc.syntax import (
    AddrOf, Assign, BinA, CallProc, Cmp, Deref, If, IndirectAssign, NatConst, Seq,
    Skip, Var, While,
)
from strategies import aexps, bexps, coms, post_assertions

CORPUS = sorted(p.name for p in resources.files("relvc").joinpath("corpus").iterdir()
                if p.name.endswith(".rl"))


def test_corpus_present():
    assert {"csum.rl", "csum_no_pair_contract.rl", "const_branch.rl"} <= set(CORPUS)


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    text = resources.files("relvc").joinpath("corpus", name).read_text()
    pf = parse(text)
    assert parse(pretty(pf)) == pf


def test_csum_shape(csum):
    body = csum.proc_env()["sum"]
    expect = If(Cmp("<", Var(1), Var(2)),
                Seq(Assign(3, BinA("+", Var(3), Var(1))),
                    Seq(Assign(1, BinA("+", Var(1), NatConst(1))), CallProc("sum"))),
                Skip())
    assert body == expect
    assert [r.names for r in csum.rel_contracts] == [("sum", "sum")]
    prop = csum.property("R1")
    assert len(prop.commands) == 2
    assert prop.pre == parse_assertion("x2<1> = x2<2>")


def test_pointer_forms():
    assert parse_com("*x1 := &x3") == IndirectAssign(1, AddrOf(3))
    assert parse_aexp("*x2 + 1") == BinA("+", Deref(2), NatConst(1))
    assert parse_assertion("*x1<2> = mem<2>[x1<2>]").left == A.Read(A.Tag(2), A.Read(A.Tag(2), A.Const(1)))


def test_precedence():
    assert parse_aexp("1 + 2 * x1") == BinA("+", NatConst(1), BinA("*", NatConst(2), Var(1)))
    assert parse_aexp("x1 - x2 - x3") == BinA("-", BinA("-", Var(1), Var(2)), Var(3))
    a = parse_assertion("x1 = 1 ==> x2 = 2 ==> x3 = 3")
    assert isinstance(a, A.AImplies) and isinstance(a.right, A.AImplies)


def test_while_needs_invariant():
    with pytest.raises(ParseError):
        parse_com("while (x1 < 3) { x1 := x1 + 1 }")
    c = parse_com("while (x1 < 3) invariant x1 <= 3 { x1 := x1 + 1 }")
    assert isinstance(c, While)


@pytest.mark.parametrize("text, fragment", [
    ("proc p { call q }", "undefined"),
    ("proc p { skip } proc p { skip }", "duplicate"),
    ("proc p requires old(x1) = 0 { skip }", "arity"),
    ("proc p { skip } relational [p, p] requires x1<3> = 0", "arity"),
    ("property a { skip } ensures x1<2> = 0", "arity"),
    ("proc p { x1 := }", "expected"),
    ("property a { skip } property a { skip }", "duplicate"),
    ("proc p ensures x1 = 0 { skip } relational [p] ensures x1<1> = 0", "both"),
])
def test_errors(text, fragment):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert fragment in str(e.value)


def test_error_position():
    with pytest.raises(ParseError) as e:
        parse("proc p {\n  x1 := 1;\n  x2 := + }")
    assert e.value.line == 3


@settings(max_examples=200)
@given(aexps)
def test_aexp_round_trip(a):
    assert parse_aexp(pretty_aexp(a)) == a


@settings(max_examples=200)
@given(bexps)
def test_bexp_round_trip(b):
    assert parse_bexp(pretty_bexp(b)) == b


@settings(max_examples=200)
@given(post_assertions)
def test_assertion_round_trip(a):
    assert parse_assertion(pretty_assertion(a)) == a


@settings(max_examples=200)
@given(coms)
def test_com_round_trip(c):
    assert parse_com(pretty_com(c)) == c


def test_500_random_asts():
    r = random.Random(2024)
    for _ in range(500):
        c = T.gen_com(r, 4, procs=("p",))
        assert parse_com(pretty_com(c)) == c


def test_random_programs_round_trip():
    for seed in range(40):
        inst = T.random_rel(seed) if seed % 2 else T.random_hoare(seed)
        pf = inst.to_program()
        assert parse(pretty(pf)) == pf
