"""
Relational properties
=====================

R1 relates two runs of slightly different programs that both end in a
call to sum. It is proved modularly: the contract on pairs of sum calls
is assumed wherever two matching call atoms show up, and is itself
checked against the body of sum.
"""

from relvc import load_corpus, smt
from relvc.relvcgen import RelContractEnv, rel_goals, spec_from_property

for name in ("csum.rl", "csum_no_pair_contract.rl"):
    pf = load_corpus(name)
    env = RelContractEnv.from_program(pf)
    goals = rel_goals(spec_from_property(pf.property("R1")), env, pf.proc_env())
    print(f"{name}: contracts on {[e.names for e in env]}")
    for r in smt.discharge(goals, timeout=5):
        extra = f"  ({r.verdict.reason})" if r.status == "unknown" else ""
        print(f"  {r.goal:18} {r.status}{extra}")

# without the pair contract nothing links the two calls, so the main goal
# cannot be shown valid
