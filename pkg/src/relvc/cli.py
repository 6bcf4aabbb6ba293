"""Command-line driver.

Exit codes: 0 when every goal is valid (or every oracle check holds),
1 when some goal is invalid or unknown, 2 for parse errors, unknown labels
and bad arguments, 3 when the solver cannot be run or misbehaves.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import assertions as A
from . import logic as L
from . import oracle as O
from . import smt
from .errors import ParseError, RelvcError, SolverError, UnboundProcedureError
from .interp import Final, exec_com
from .parser import parse
from .relvcgen import RelContractEnv, rel_goals, spec_from_property
from .syntax import MemState, addr_of
from .vcgen import hoare_goals, tf

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
ORACLE_LIMIT = 10 ** 6


class UsageError(RelvcError):
    pass


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse(text)
    except ParseError as e:
        raise ParseError(e.msg, e.line, e.col) from None


def _unary(prop):
    """Tagged single-run specification as a plain pre/postcondition pair."""
    pre = A.retag(prop.pre, {A.Tag(1): A.CUR})
    post = A.retag(prop.post, {A.Tag(1): A.CUR, A.OldTag(1): A.OLD})
    return pre, post


def _select(pf, label):
    if label is None:
        return list(pf.properties)
    try:
        return [pf.property(label)]
    except KeyError:
        raise UsageError(f"no property labelled {label!r}") from None


def hoare_goal_list(pf, label=None):
    """Procedure contract goals plus the goals of every single-run property."""
    psi, phi = pf.proc_env(), pf.contract_env()
    goals = {g.label: g for g in tf(phi, psi)}
    for prop in _select(pf, label):
        if len(prop.commands) != 1:
            if label is not None:
                raise UsageError(f"property {label!r} relates {len(prop.commands)} runs; use rcheck")
            continue
        pre, post = _unary(prop)
        for g in hoare_goals(pre, prop.commands[0], post, phi, psi, label=prop.label):
            goals.setdefault(g.label, g)
    return list(goals.values())


def rel_goal_list(pf, label=None):
    psi = pf.proc_env()
    rel = RelContractEnv.from_program(pf)
    goals = {}
    for prop in _select(pf, label):
        for g in rel_goals(spec_from_property(prop), rel, psi):
            goals[g.label] = g
    return list(goals.values())


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def _model_lines(v: smt.Invalid) -> list[str]:
    by_state: dict = {}
    for s, a, val in v.model:
        by_state.setdefault(s, []).append(f"x{a}={val}")
    return [f"    {s}: {' '.join(cells)}" for s, cells in by_state.items()]


def report(results, fmt: str, path: str, out=None) -> int:
    out = out or sys.stdout
    code = EXIT_OK if all(r.status == "valid" for r in results) else EXIT_FAIL
    if fmt == "json":
        counts = {k: sum(r.status == k for r in results) for k in ("valid", "invalid", "unknown")}
        json.dump({"file": path, "goals": [r.to_json() for r in results],
                   "summary": counts, "exit_code": code}, out, indent=2)
        out.write("\n")
        return code
    for r in results:
        if r.status == "valid":
            line = f"valid     {r.goal}"
        elif r.status == "invalid":
            line = f"INVALID   {r.goal}"
        else:
            line = f"unknown   {r.goal}  (not verified: {r.verdict.reason})"
        print(f"{line}  [{r.time_ms:.0f} ms]", file=out)
        if r.status == "invalid":
            for m in _model_lines(r.verdict):
                print(m, file=out)
    nv = sum(r.status == "valid" for r in results)
    ni = sum(r.status == "invalid" for r in results)
    nu = sum(r.status == "unknown" for r in results)
    print(f"{len(results)} goals: {nv} valid, {ni} invalid, {nu} unknown", file=out)
    return code


def _discharge(goals, args):
    return smt.discharge(goals, timeout=args.timeout, solver=args.solver,
                         jobs=args.jobs, dump_dir=args.dump_dir)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_check(args) -> int:
    pf = load(args.file)
    goals = hoare_goal_list(pf, args.property)
    return report(_discharge(goals, args), args.format, args.file)


def cmd_rcheck(args) -> int:
    pf = load(args.file)
    goals = rel_goal_list(pf, args.property)
    return report(_discharge(goals, args), args.format, args.file)


def parse_state(text: str) -> MemState:
    cells = {}
    for item in filter(None, (t.strip() for t in (text or "").split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad state binding {item!r}; expected x<i>=<n>")
        try:
            n = int(value.strip())
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
        if n < 0:
            raise UsageError(f"values are naturals, got {item!r}")
        try:
            cells[addr_of(name.strip())] = n
        except ParseError as e:
            raise UsageError(e.msg) from None
    return MemState(cells)


def cmd_run(args) -> int:
    pf = load(args.file)
    psi = pf.proc_env()
    sigma = parse_state(args.state)
    if args.proc:
        if args.proc not in psi:
            raise UsageError(f"no procedure named {args.proc!r}")
        coms = [psi[args.proc]]
    else:
        coms = list(_select(pf, args.property)[0].commands) if pf.properties else []
        if not coms:
            raise UsageError("nothing to run; give --proc or --property")
    code = EXIT_OK
    for k, c in enumerate(coms):
        out = exec_com(c, sigma, psi, args.fuel)
        prefix = f"run {k + 1}: " if len(coms) > 1 else ""
        if isinstance(out, Final):
            addrs = set(sigma.bound()) | set(out.state.bound())
            print(prefix + (out.state.show(addrs) or "(all zero)"))
        else:
            print(prefix + "out of fuel")
            code = EXIT_FAIL
    return code


def cmd_dump_vc(args) -> int:
    pf = load(args.file)
    goals = rel_goal_list(pf, args.property) if args.relational else hoare_goal_list(pf, args.property)
    goals = sorted(goals, key=lambda g: g.label)
    for g in goals:
        if args.format == "smtlib":
            sys.stdout.write(smt.lower(g).text())
        else:
            print(f"goal {g.label}")
            for h in g.hypotheses:
                print(f"  assume {L.show(h)}")
            print(f"  prove  {L.show(g.conclusion)}")
        print()
    return EXIT_OK


def cmd_oracle(args) -> int:
    pf = load(args.file)
    bounds = O.Bounds(args.max_addr, args.max_val, args.fuel)
    if bounds.size > ORACLE_LIMIT:
        raise UsageError(f"{bounds.size} states per run exceeds the limit of {ORACLE_LIMIT}")
    psi = pf.proc_env()
    checks = []
    if args.property is None:
        for d in pf.procs:
            if d.pre is not None or d.post is not None:
                checks.append((f"proc {d.name}", [d.body],
                               A.retag(d.pre or A.ATRUE, {A.CUR: A.Tag(1)}),
                               A.retag(d.post or A.ATRUE, {A.CUR: A.Tag(1), A.OLD: A.OldTag(1)})))
        for r in pf.rel_contracts:
            checks.append((f"relational [{', '.join(r.names)}]", [psi[y] for y in r.names], r.pre, r.post))
    for prop in _select(pf, args.property):
        checks.append((f"property {prop.label}", list(prop.commands), prop.pre, prop.post))
    code = EXIT_OK
    rows = []
    for name, cs, pre, post in checks:
        if bounds.size ** len(cs) > ORACLE_LIMIT * 64:
            raise UsageError(f"{name}: {bounds.size}^{len(cs)} state tuples is too many")
        v = O.check_rel(pre, cs, post, psi, bounds)
        if not isinstance(v, O.Holds):
            code = EXIT_FAIL
        rows.append((name, v))
    for name, v in rows:
        if isinstance(v, O.Holds):
            print(f"holds           {name}  ({v.checked} runs checked)")
        elif isinstance(v, O.Counterexample):
            print(f"COUNTEREXAMPLE  {name}")
            for k, (a, b) in enumerate(zip(v.initial, v.final)):
                addrs = set(range(bounds.max_addr)) | set(b.bound())
                print(f"    run {k + 1}: {a.show(addrs)}  ->  {b.show(addrs)}")
        else:
            print(f"inconclusive    {name}  ({len(v.states)} start states ran out of fuel)")
    return code


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _solver_flags(p):
    p.add_argument("--solver", default=None,
                   help=f"solver command reading SMT-LIB on stdin (default: $RELVC_SOLVER or '{smt.DEFAULT_SOLVER}')")
    p.add_argument("--timeout", type=float, default=smt.DEFAULT_TIMEOUT, help="seconds per goal")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="solver processes in parallel")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dump-dir", default=None, help="write each goal's SMT-LIB script here")
    p.add_argument("--property", default=None, help="only this property label")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relvc", description="Verify Hoare and relational properties of .rl programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify procedure contracts and single-run properties")
    p.add_argument("file")
    _solver_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rcheck", help="verify relational properties")
    p.add_argument("file")
    _solver_flags(p)
    p.set_defaults(func=cmd_rcheck)

    p = sub.add_parser("run", help="execute a procedure or property with the interpreter")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--proc")
    g.add_argument("--property")
    p.add_argument("--state", default="", help="initial state, e.g. x1=1,x2=3")
    p.add_argument("--fuel", type=int, default=1000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dump-vc", help="print verification conditions")
    p.add_argument("file")
    p.add_argument("--format", choices=("smtlib", "debug"), default="debug")
    p.add_argument("--relational", action="store_true", help="relational goals instead of Hoare goals")
    p.add_argument("--property", default=None)
    p.set_defaults(func=cmd_dump_vc)

    p = sub.add_parser("oracle", help="check properties by bounded exhaustive execution")
    p.add_argument("file")
    p.add_argument("--max-addr", type=int, default=4)
    p.add_argument("--max-val", type=int, default=3)
    p.add_argument("--fuel", type=int, default=64)
    p.add_argument("--property", default=None)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, UnboundProcedureError) as e:
        print(f"relvc: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"relvc: solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
