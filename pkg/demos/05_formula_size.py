"""
Size of the generated formulas
==============================

Passing the postcondition around as a continuation keeps the formula for
a chain of d conditionals linear in d. Substituting the postcondition
into both branches instead copies it at every branch, so the size
doubles with each one.
"""

from relvc import logic as L
from relvc import testing as T
from relvc.syntax import ContractEnv, ast_size
from relvc.vcgen import tc, tc_naive

s, s2 = L.SVar("s"), L.SVar("s'")
print(f"{'d':>3} {'program':>8} {'tc':>6} {'naive':>9}")
for d in range(1, 13):
    c = T.if_chain(d)
    opt = L.node_count(tc(c, s, s2, ContractEnv(), lambda p: p))
    naive = L.node_count(tc_naive(c, s, ContractEnv(), lambda m: L.TRUE))
    print(f"{d:>3} {ast_size(c):>8} {opt:>6} {naive:>9}")
