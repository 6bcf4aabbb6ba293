"""
Running programs
================

Parse a small program file and execute procedures with the big-step
interpreter. Memory is a total map from addresses to naturals, so every
cell we do not mention reads as 0.
"""

from relvc import load_corpus, parse_com
from relvc.interp import Final, exec_com
from relvc.syntax import MemState

pf = load_corpus("csum.rl")
psi = pf.proc_env()

# sum adds x1 + (x1+1) + ... + (x2-1) into x3
out = exec_com(parse_com("call sum"), MemState({1: 1, 2: 4}), psi)
print("sum from 1 to 3:", out.state.show())

# the two runs of the relational property R1 end in the same x3
for k, c in enumerate(pf.property("R1").commands, 1):
    out = exec_com(c, MemState({2: 5}), psi)
    print(f"run {k}:", out.state.show())

# subtraction stops at zero
print(exec_com(parse_com("x1 := 2 - 5"), MemState(), psi).state.show() or "(all zero)")

# pointer writes go through the address stored in a cell
out = exec_com(parse_com("x1 := 3; *x1 := 7"), MemState(), psi)
print("after *x1 := 7:", out.state.show())

# runs that loop forever come back as OutOfFuel rather than hanging
spin = parse_com("while (true) invariant true { skip }")
print(exec_com(spin, MemState(), psi, fuel=50))
assert isinstance(exec_com(parse_com("skip"), MemState(), psi), Final)
