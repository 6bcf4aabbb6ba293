class RelvcError(Exception):
    pass


class ParseError(RelvcError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{msg}")


class ArityError(RelvcError):
    """An assertion mentions a state it has no access to at its use site."""


class UnboundProcedureError(RelvcError, KeyError):
    def __str__(self) -> str:
        return f"unbound procedure {self.args[0]!r}"


class UnsupportedInOracle(RelvcError):
    """Raised for assertions the bounded oracle cannot evaluate (unbounded quantifiers)."""


class SolverError(RelvcError):
    pass


class SolverNotFoundError(SolverError):
    pass


class SolverProtocolError(SolverError):
    pass


class SolverExitError(SolverError):
    def __init__(self, code: int, stderr: str = ""):
        self.code = code
        self.stderr = stderr
        super().__init__(f"solver exited with status {code}: {stderr.strip()[:200]}")
