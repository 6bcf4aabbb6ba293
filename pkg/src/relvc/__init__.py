"""Modular verification of Hoare and relational properties for a small
imperative language with pointers and recursive procedures."""

from importlib import resources

from .errors import (
    ArityError, ParseError, RelvcError, SolverError, SolverExitError,
    SolverNotFoundError, SolverProtocolError, UnboundProcedureError,
    UnsupportedInOracle,
)
from .interp import Final, OutOfFuel, exec_com
from .oracle import Bounds, Counterexample, Holds, Inconclusive, check_hoare, check_rel
from .parser import parse, parse_assertion, parse_com
from .relvcgen import RelContractEnv, RelGoalSpec, rel_goals
from .smt import Invalid, Unknown, Valid, check, check_goal, lower
from .syntax import MemState, ProcEnv
from .vcgen import Goal, hoare_goals, tc, ta, tf

__version__ = "0.1.0"


def corpus_path(name: str) -> str:
    """Filesystem path of a bundled example program, e.g. ``csum.rl``."""
    return str(resources.files(__name__).joinpath("corpus", name))


def load_corpus(name: str):
    return parse(resources.files(__name__).joinpath("corpus", name).read_text(encoding="utf-8"))
