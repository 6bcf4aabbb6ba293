"""Concrete syntax for annotated programs (``.rl`` files).

Grammar sketch::

    file      := decl*
    decl      := 'proc' NAME ['requires' A] ['ensures' A] block
               | 'relational' '[' NAME (',' NAME)* ']' ['requires' A] ['ensures' A]
               | 'property' NAME block ('~' block)* ['requires' A] ['ensures' A]
    com       := stmt (';' stmt)*
    stmt      := 'skip' | LOC ':=' aexp | '*' LOC ':=' aexp | 'assert' A
               | 'if' '(' bexp ')' block 'else' block
               | 'while' '(' bexp ')' 'invariant' A block
               | 'call' NAME | block
    block     := '{' com '}'

Assertions use ``==>``, ``||``, ``&&``, ``!``, comparisons, ``forall v < t.``
and ``exists v < t.`` (bounds optional), and read memory through ``x3``,
``*x1``, ``mem[t]``, ``x3<1>``, ``*x1<1>``, ``mem<1>[t]``, optionally
wrapped in ``old(...)``. Comments run from ``//`` to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import assertions as A
from .errors import ArityError, ParseError
from .syntax import (
    AddrOf, Assert, Assign, BConst, BinA, BinL, BNot, CallProc, Cmp, Com,
    Contract, ContractEnv, Deref, If, IndirectAssign, NatConst, ProcEnv, Seq,
    Skip, Var, While, called,
)

# --------------------------------------------------------------------------
# Program file model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcDecl:
    name: str
    pre: A.Assertion | None
    post: A.Assertion | None
    body: Com


@dataclass(frozen=True)
class RelContract:
    names: tuple
    pre: A.Assertion
    post: A.Assertion


@dataclass(frozen=True)
class Property:
    label: str
    commands: tuple
    pre: A.Assertion
    post: A.Assertion


@dataclass(frozen=True)
class ProgramFile:
    procs: tuple = ()
    rel_contracts: tuple = ()
    properties: tuple = ()

    def proc_env(self) -> ProcEnv:
        return ProcEnv({p.name: p.body for p in self.procs})

    def contract_env(self) -> ContractEnv:
        return ContractEnv({
            p.name: Contract(p.pre or A.ATRUE, p.post or A.ATRUE)
            for p in self.procs if p.pre is not None or p.post is not None
        })

    def property(self, label: str) -> Property:
        for p in self.properties:
            if p.label == label:
                return p
        raise KeyError(label)


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

KEYWORDS = {
    "proc", "requires", "ensures", "relational", "property", "assert",
    "invariant", "call", "skip", "if", "else", "while", "true", "false",
    "old", "mem", "forall", "exists",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<tagloc>x\d+<\d+>)
  | (?P<tagmem>mem<\d+>)
  | (?P<loc>x\d+(?![A-Za-z_0-9]))
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|==>|&&|\|\||!=|<=|>=|[-+*&!<>=(){}\[\];,.~])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_CMP_OPS = ("=", "!=", "<=", "<", ">=", ">")


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.lvars: list[str] = []

    # token plumbing
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def error(self, msg: str, tok: Token = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def name(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected a name, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def location(self) -> int:
        t = self.tok
        if t.kind != "loc":
            raise self.error(f"expected a location, found {t.text or 'end of input'!r}")
        self.i += 1
        return int(t.text[1:])

    # file
    def program_file(self) -> ProgramFile:
        procs, rels, props = [], [], []
        while self.tok.kind != "eof":
            if self.at("proc"):
                procs.append(self.proc_decl())
            elif self.at("relational"):
                rels.append(self.rel_decl())
            elif self.at("property"):
                props.append(self.property_decl())
            else:
                raise self.error(f"expected 'proc', 'relational' or 'property', found {self.tok.text!r}")
        return ProgramFile(tuple(procs), tuple(rels), tuple(props))

    def clauses(self, check_pre, check_post, name_tok):
        pre = post = None
        if self.at("requires"):
            t = self.expect("requires")
            pre = self.assertion()
            self.checked(check_pre, pre, t)
        if self.at("ensures"):
            t = self.expect("ensures")
            post = self.assertion()
            self.checked(check_post, post, t)
        return pre, post

    def checked(self, check, a, tok):
        try:
            check(a)
        except ArityError as e:
            raise ParseError(f"arity error: {e}", tok.line, tok.col) from None

    def proc_decl(self) -> ProcDecl:
        t = self.expect("proc")
        name = self.name()
        pre, post = self.clauses(A.check_pre, A.check_post, t)
        body = self.block()
        return ProcDecl(name, pre, post, body)

    def rel_decl(self) -> RelContract:
        self.expect("relational")
        self.expect("[")
        names = [self.name()]
        while self.accept(","):
            names.append(self.name())
        self.expect("]")
        n = len(names)
        pre, post = self.clauses(lambda a: A.check_rel_pre(a, n),
                                 lambda a: A.check_rel_post(a, n), self.tok)
        return RelContract(tuple(names), pre or A.ATRUE, post or A.ATRUE)

    def property_decl(self) -> Property:
        self.expect("property")
        label = self.name()
        coms = [self.block()]
        while self.accept("~"):
            coms.append(self.block())
        n = len(coms)
        pre, post = self.clauses(lambda a: A.check_rel_pre(a, n),
                                 lambda a: A.check_rel_post(a, n), self.tok)
        return Property(label, tuple(coms), pre or A.ATRUE, post or A.ATRUE)

    # commands
    def block(self) -> Com:
        self.expect("{")
        c = self.com()
        self.expect("}")
        return c

    def com(self) -> Com:
        first = self.stmt()
        if self.accept(";"):
            return Seq(first, self.com())
        return first

    def stmt(self) -> Com:
        t = self.tok
        if self.accept("skip"):
            return Skip()
        if t.kind == "loc":
            addr = self.location()
            self.expect(":=")
            return Assign(addr, self.aexp())
        if self.at("*"):
            self.i += 1
            addr = self.location()
            self.expect(":=")
            return IndirectAssign(addr, self.aexp())
        if self.accept("assert"):
            a = self.assertion()
            self.checked(A.check_pre, a, t)
            return Assert(a)
        if self.accept("if"):
            self.expect("(")
            b = self.bexp()
            self.expect(")")
            then = self.block()
            self.expect("else")
            orelse = self.block()
            return If(b, then, orelse)
        if self.accept("while"):
            self.expect("(")
            b = self.bexp()
            self.expect(")")
            if not self.at("invariant"):
                raise self.error("while loop requires an 'invariant' annotation")
            it = self.expect("invariant")
            inv = self.assertion()
            self.checked(A.check_pre, inv, it)
            return While(b, inv, self.block())
        if self.accept("call"):
            return CallProc(self.name())
        if self.at("{"):
            return self.block()
        raise self.error(f"expected a command, found {t.text or 'end of input'!r}")

    # program expressions
    def aexp(self):
        left = self.aterm()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            left = BinA(op, left, self.aterm())
        return left

    def aterm(self):
        left = self.afactor()
        while self.at("*"):
            self.i += 1
            left = BinA("*", left, self.afactor())
        return left

    def afactor(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return NatConst(int(t.text))
        if t.kind == "loc":
            return Var(self.location())
        if self.accept("*"):
            return Deref(self.location())
        if self.accept("&"):
            return AddrOf(self.location())
        if self.accept("("):
            a = self.aexp()
            self.expect(")")
            return a
        raise self.error(f"expected an arithmetic expression, found {t.text or 'end of input'!r}")

    def bexp(self):
        left = self.bconj()
        while self.accept("||"):
            left = BinL("||", left, self.bconj())
        return left

    def bconj(self):
        left = self.bunary()
        while self.accept("&&"):
            left = BinL("&&", left, self.bunary())
        return left

    def bunary(self):
        if self.accept("!"):
            return BNot(self.bunary())
        if self.accept("true"):
            return BConst(True)
        if self.accept("false"):
            return BConst(False)
        if self.at("("):
            save = self.i
            try:
                return self.bcompare()
            except ParseError:
                self.i = save
            self.expect("(")
            b = self.bexp()
            self.expect(")")
            return b
        return self.bcompare()

    def bcompare(self):
        left = self.aexp()
        op = self.tok.text
        if op not in _CMP_OPS or self.tok.kind != "op":
            raise self.error(f"expected a comparison operator, found {op or 'end of input'!r}")
        self.i += 1
        return Cmp(op, left, self.aexp())

    # assertions
    def assertion(self) -> A.Assertion:
        if self.at("forall") or self.at("exists"):
            return self.quantified()
        left = self.adisj()
        if self.accept("==>"):
            return A.AImplies(left, self.assertion())
        return left

    def quantified(self) -> A.Assertion:
        kind = self.tok.text
        self.i += 1
        var = self.name()
        bound = None
        if self.accept("<"):
            bound = self.lterm()
        self.expect(".")
        self.lvars.append(var)
        try:
            body = self.assertion()
        finally:
            self.lvars.pop()
        cls = A.Forall if kind == "forall" else A.Exists
        return cls(var, bound, body)

    def adisj(self):
        left = self.aconj()
        while self.accept("||"):
            left = A.AOr(left, self.aconj())
        return left

    def aconj(self):
        left = self.aunary()
        while self.accept("&&"):
            left = A.AAnd(left, self.aunary())
        return left

    def aunary(self):
        if self.accept("!"):
            return A.ANot(self.aunary())
        if self.accept("true"):
            return A.ATRUE
        if self.accept("false"):
            return A.AFALSE
        if self.at("forall") or self.at("exists"):
            return self.quantified()
        if self.at("("):
            save = self.i
            try:
                return self.acompare()
            except ParseError:
                self.i = save
            self.expect("(")
            a = self.assertion()
            self.expect(")")
            return a
        return self.acompare()

    def acompare(self):
        left = self.lterm()
        op = self.tok.text
        if op not in _CMP_OPS or self.tok.kind != "op":
            raise self.error(f"expected a comparison operator, found {op or 'end of input'!r}")
        self.i += 1
        return A.Compare(op, left, self.lterm())

    def lterm(self):
        left = self.lprod()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            left = A.ArithOp(op, left, self.lprod())
        return left

    def lprod(self):
        left = self.lfactor()
        while self.at("*"):
            self.i += 1
            left = A.ArithOp("*", left, self.lfactor())
        return left

    def lfactor(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return A.Const(int(t.text))
        if self.accept("old"):
            self.expect("(")
            r = self.memread(old=True)
            self.expect(")")
            return r
        if t.kind in ("loc", "tagloc", "tagmem") or self.at("*") or self.at("mem"):
            return self.memread(old=False)
        if self.accept("&"):
            return A.Const(self.location())
        if t.kind == "ident":
            self.i += 1
            if t.text not in self.lvars:
                raise self.error(f"unbound logical variable {t.text!r}", t)
            return A.LogicalVar(t.text)
        if self.accept("("):
            e = self.lterm()
            self.expect(")")
            return e
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def memread(self, old: bool):
        t = self.tok

        def ref(tag):
            r = A.CUR if tag is None else A.Tag(tag)
            return A.to_old(r) if old else r

        if self.accept("*"):
            t = self.tok
            if t.kind == "loc":
                self.i += 1
                r = ref(None)
                return A.Read(r, A.Read(r, A.Const(int(t.text[1:]))))
            if t.kind == "tagloc":
                self.i += 1
                i, k = _split_tag(t.text)
                r = ref(k)
                return A.Read(r, A.Read(r, A.Const(i)))
            raise self.error("expected a location after '*'", t)
        if t.kind == "loc":
            self.i += 1
            return A.Read(ref(None), A.Const(int(t.text[1:])))
        if t.kind == "tagloc":
            self.i += 1
            i, k = _split_tag(t.text)
            return A.Read(ref(k), A.Const(i))
        if self.accept("mem") or t.kind == "tagmem":
            tag = None
            if t.kind == "tagmem":
                self.i += 1
                tag = int(t.text[4:-1])
            self.expect("[")
            idx = self.lterm()
            self.expect("]")
            return A.Read(ref(tag), idx)
        raise self.error(f"expected a memory read, found {t.text or 'end of input'!r}")


def _split_tag(text: str) -> tuple[int, int]:
    name, tag = text[:-1].split("<")
    return int(name[1:]), int(tag)


def parse(text: str, check_calls: bool = True) -> ProgramFile:
    """Parse a program file; raises ``ParseError`` with line/column info."""
    p = _Parser(text)
    pf = p.program_file()
    names = [d.name for d in pf.procs]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise ParseError(f"duplicate procedure {sorted(dup)[0]!r}")
    seqs = [r.names for r in pf.rel_contracts]
    for s in seqs:
        if seqs.count(s) > 1:
            raise ParseError(f"duplicate relational contract for [{', '.join(s)}]")
        if len(s) == 1:
            d = next((d for d in pf.procs if d.name == s[0]), None)
            if d is not None and (d.pre is not None or d.post is not None):
                raise ParseError(f"procedure {s[0]!r} has both a contract and a singleton relational contract")
    labels = [p.label for p in pf.properties]
    dup = {n for n in labels if labels.count(n) > 1}
    if dup:
        raise ParseError(f"duplicate property {sorted(dup)[0]!r}")
    if check_calls:
        bound = set(names)
        bodies = [d.body for d in pf.procs] + [c for p in pf.properties for c in p.commands]
        for c in bodies:
            for y in sorted(called(c)):
                if y not in bound:
                    raise ParseError(f"call to undefined procedure {y!r}")
        for r in pf.rel_contracts:
            for y in r.names:
                if y not in bound:
                    raise ParseError(f"relational contract names undefined procedure {y!r}")
    return pf


def parse_com(text: str) -> Com:
    p = _Parser(text)
    c = p.com()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return c


def parse_assertion(text: str) -> A.Assertion:
    p = _Parser(text)
    a = p.assertion()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return a


def parse_aexp(text: str):
    p = _Parser(text)
    a = p.aexp()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return a


def parse_bexp(text: str):
    p = _Parser(text)
    b = p.bexp()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return b


# --------------------------------------------------------------------------
# Pretty printer
# --------------------------------------------------------------------------

# binding strength; higher binds tighter
_ADD, _MUL, _ATOM = 1, 2, 3


def _paren(s: str, cond: bool) -> str:
    return f"({s})" if cond else s


def pretty_aexp(a, prec: int = 0) -> str:
    if isinstance(a, NatConst):
        return str(a.value)
    if isinstance(a, Var):
        return f"x{a.addr}"
    if isinstance(a, Deref):
        return f"*x{a.addr}"
    if isinstance(a, AddrOf):
        return f"&x{a.addr}"
    if isinstance(a, BinA):
        mine = _MUL if a.op == "*" else _ADD
        s = f"{pretty_aexp(a.left, mine)} {a.op} {pretty_aexp(a.right, mine + 1)}"
        return _paren(s, mine < prec)
    raise TypeError(a)


_OR, _AND, _NOT, _CMPP = 1, 2, 3, 4


def pretty_bexp(b, prec: int = 0) -> str:
    if isinstance(b, BConst):
        return "true" if b.value else "false"
    if isinstance(b, Cmp):
        return _paren(f"{pretty_aexp(b.left)} {b.op} {pretty_aexp(b.right)}", prec > _CMPP - 1)
    if isinstance(b, BinL):
        mine = _AND if b.op == "&&" else _OR
        s = f"{pretty_bexp(b.left, mine)} {b.op} {pretty_bexp(b.right, mine + 1)}"
        return _paren(s, mine < prec)
    if isinstance(b, BNot):
        return "!" + pretty_bexp(b.arg, _CMPP)
    raise TypeError(b)


def _pretty_ref_read(t: A.Read) -> str | None:
    """Sugar for reads at constant addresses and single dereferences."""
    r = t.ref
    tag = f"<{r.k}>" if isinstance(r, (A.Tag, A.OldTag)) else ""
    if isinstance(t.index, A.Const):
        s = f"x{t.index.value}{tag}"
    elif (isinstance(t.index, A.Read) and t.index.ref == r
          and isinstance(t.index.index, A.Const)):
        s = f"*x{t.index.index.value}{tag}"
    else:
        return None
    return f"old({s})" if A.is_old(r) else s


def pretty_lterm(t, prec: int = 0) -> str:
    if isinstance(t, A.Const):
        return str(t.value)
    if isinstance(t, A.LogicalVar):
        return t.name
    if isinstance(t, A.Read):
        s = _pretty_ref_read(t)
        if s is not None:
            return s
        r = t.ref
        tag = f"<{r.k}>" if isinstance(r, (A.Tag, A.OldTag)) else ""
        s = f"mem{tag}[{pretty_lterm(t.index)}]"
        return f"old({s})" if A.is_old(r) else s
    if isinstance(t, A.ArithOp):
        mine = _MUL if t.op == "*" else _ADD
        s = f"{pretty_lterm(t.left, mine)} {t.op} {pretty_lterm(t.right, mine + 1)}"
        return _paren(s, mine < prec)
    raise TypeError(t)


_IMP = 1
_AOR, _AAND, _ANOT, _ACMP = 2, 3, 4, 5


def pretty_assertion(a, prec: int = 0) -> str:
    if isinstance(a, A.BoolConst):
        return "true" if a.value else "false"
    if isinstance(a, A.Compare):
        return _paren(f"{pretty_lterm(a.left)} {a.op} {pretty_lterm(a.right)}", prec >= _ACMP)
    if isinstance(a, A.AImplies):
        s = f"{pretty_assertion(a.left, _IMP + 1)} ==> {pretty_assertion(a.right, _IMP)}"
        return _paren(s, prec > _IMP)
    if isinstance(a, (A.AOr, A.AAnd)):
        mine, op = (_AOR, "||") if isinstance(a, A.AOr) else (_AAND, "&&")
        s = f"{pretty_assertion(a.left, mine)} {op} {pretty_assertion(a.right, mine + 1)}"
        return _paren(s, mine < prec)
    if isinstance(a, A.ANot):
        return "!" + pretty_assertion(a.arg, _ACMP)
    if isinstance(a, (A.Forall, A.Exists)):
        kind = "forall" if isinstance(a, A.Forall) else "exists"
        bound = "" if a.bound is None else f" < {pretty_lterm(a.bound)}"
        s = f"{kind} {a.var}{bound}. {pretty_assertion(a.body)}"
        return _paren(s, prec > 0)
    raise TypeError(a)


def pretty_com(c: Com, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(c, Seq):
        first = c.first
        if isinstance(first, Seq):
            head = pad + "{\n" + pretty_com(first, indent + 1) + "\n" + pad + "}"
        else:
            head = pretty_com(first, indent)
        return head + ";\n" + pretty_com(c.second, indent)
    if isinstance(c, Skip):
        return pad + "skip"
    if isinstance(c, Assign):
        return f"{pad}x{c.addr} := {pretty_aexp(c.value)}"
    if isinstance(c, IndirectAssign):
        return f"{pad}*x{c.addr} := {pretty_aexp(c.value)}"
    if isinstance(c, Assert):
        return f"{pad}assert {pretty_assertion(c.cond)}"
    if isinstance(c, CallProc):
        return f"{pad}call {c.name}"
    if isinstance(c, If):
        return (f"{pad}if ({pretty_bexp(c.cond)}) {{\n{pretty_com(c.then, indent + 1)}\n"
                f"{pad}}} else {{\n{pretty_com(c.orelse, indent + 1)}\n{pad}}}")
    if isinstance(c, While):
        return (f"{pad}while ({pretty_bexp(c.cond)}) invariant {pretty_assertion(c.inv)} {{\n"
                f"{pretty_com(c.body, indent + 1)}\n{pad}}}")
    raise TypeError(c)


def _clauses(pre, post, default_true: bool) -> str:
    out = ""
    if pre is not None and not (default_true and pre == A.ATRUE):
        out += f"\n  requires {pretty_assertion(pre)}"
    if post is not None and not (default_true and post == A.ATRUE):
        out += f"\n  ensures {pretty_assertion(post)}"
    return out


def pretty(pf: ProgramFile) -> str:
    """Canonical text of a program file; ``parse(pretty(p)) == p``."""
    chunks = []
    for d in pf.procs:
        chunks.append(f"proc {d.name}{_clauses(d.pre, d.post, False)}\n{{\n"
                      f"{pretty_com(d.body, 1)}\n}}")
    for r in pf.rel_contracts:
        chunks.append(f"relational [{', '.join(r.names)}]{_clauses(r.pre, r.post, True)}")
    for p in pf.properties:
        blocks = " ~ ".join("{\n" + pretty_com(c, 1) + "\n}" for c in p.commands)
        chunks.append(f"property {p.label} {blocks}{_clauses(p.pre, p.post, True)}")
    return "\n\n".join(chunks) + "\n"
