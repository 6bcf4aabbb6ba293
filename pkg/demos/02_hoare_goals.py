"""
Verifying a procedure contract
==============================

Generate the verification conditions for the contract of sum and send
them to an SMT solver. Each goal is a list of hypotheses and a
conclusion; ``unsat`` of its negation means it is valid.
"""

from relvc import load_corpus, parse_assertion, parse_com
from relvc import logic as L
from relvc import smt
from relvc.syntax import ContractEnv
from relvc.vcgen import hoare_goals, tc, tf

pf = load_corpus("csum.rl")
psi, phi = pf.proc_env(), pf.contract_env()

# a branch on a constant guard, written out in full
s, s2 = L.SVar("s"), L.SVar("s'")
post = L.Cmp("=", L.Sel(s2, L.Num(1)), L.Num(2))
f = tc(parse_com("if (false) { skip } else { x1 := 2 }"), s, s2, ContractEnv(),
       lambda p: L.Implies(p, post))
print(L.show(f))

# every procedure body against its own contract
for g in tf(phi, psi):
    print(f"{g.label:12} {smt.check_goal(g).status}")

# a wrong contract gets a counter-model
goals = hoare_goals(parse_assertion("true"), parse_com("x1 := x1 + 1"),
                    parse_assertion("x1 = 1"), phi, psi, label="wrong")
v = smt.check_goal(goals[-1])
print(goals[-1].label, v.status, [m for m in v.model if m[1] == 1])

# the script the solver sees
print(smt.lower(goals[-1]).text())
