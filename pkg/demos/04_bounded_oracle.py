"""
Checking by enumeration
=======================

The oracle runs every command from every state over a small window of
addresses and values, then evaluates pre- and postconditions over the
whole grid of runs at once with numpy.
"""

from relvc import load_corpus, parse_assertion
from relvc import oracle as O
from relvc import smt
from relvc import testing as T

pf = load_corpus("csum.rl")
psi = pf.proc_env()
r1 = pf.property("R1")
bounds = O.Bounds(max_addr=4, max_val=3, fuel=64)

print("R1:", O.check_rel(r1.pre, r1.commands, r1.post, psi, bounds))

wrong = parse_assertion("x3<1> != x3<2>")
v = O.check_rel(r1.pre, r1.commands, wrong, psi, bounds)
print("negated R1:", [s.show(range(4)) for s in v.initial])

# random problems: the solver and the oracle should never disagree in the
# unsound direction (every goal valid, yet a concrete counterexample)
for seed in range(10):
    inst = T.random_hoare(seed)
    statuses = {smt.check_goal(g, timeout=2).status for g in inst.goals()}
    print(f"{inst.label:9} goals {sorted(statuses)}  oracle {inst.oracle().status}")
