"""Line-oriented text format (``.fps``) for universes, processes and checks.

Example::

    universe a b
    process p
      delta a=1 b=1/2
      gamma a=1/2 b=1
    end
    let r = -p * OMEGA
    assert refines p r
    query factor p
    query chain c: p => p * p

Expressions use ``-`` (reflect), ``*`` (product), ``+`` (sum), ``|``
(join) and ``&`` (meet).  ``*`` and ``+`` bind tighter than ``|`` and
``&``; within a tier operators cannot be mixed without parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import algebra as A
from .algebra import ExecutionUniverse, FuzzyProcess


class SourceError(Exception):
    """Parse or validation error with a 1-based source position."""

    def __init__(self, line: int, column: int, message: str, token: str = ""):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.token = token

    def to_json(self) -> dict:
        return {"line": self.line, "column": self.column, "message": self.message, "token": self.token}


# -- expressions ---------------------------------------------------------

@dataclass(frozen=True)
class Name:
    id: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Omega:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Paren:
    inner: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[Name, Omega, Neg, BinOp, Paren]

ALGEBRAIC = ("*", "+")
LATTICE = ("|", "&")

_OPS = {
    "*": A.product,
    "+": A.sum,
    "|": A.join,
    "&": A.meet,
}


def format_expr(e: Expr) -> str:
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Omega):
        return "OMEGA"
    if isinstance(e, Neg):
        return "-" + format_expr(e.operand)
    if isinstance(e, Paren):
        return "(" + format_expr(e.inner) + ")"
    return f"{format_expr(e.left)} {e.op} {format_expr(e.right)}"


def strip_parens(e: Expr) -> Expr:
    while isinstance(e, Paren):
        e = e.inner
    return e


def factors(e: Expr) -> list[Expr]:
    """Top-level ``*`` operands of ``e``; a parenthesized group counts as one."""
    if isinstance(e, BinOp) and e.op == "*":
        return factors(e.left) + [e.right]
    return [e]


# -- statements ----------------------------------------------------------

ASSERT_ARITY = {
    "refines": 2,
    "support-refines": 2,
    "robust": 1,
    "chaotic": 1,
    "total": 1,
    "equal": 2,
}


@dataclass(frozen=True)
class Assertion:
    kind: str
    args: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Query:
    kind: str  # solve | factor | chain
    args: tuple
    name: str | None = None
    line: int = field(default=0, compare=False)


Statement = Union[Assertion, Query]


@dataclass
class Document:
    universe: ExecutionUniverse
    processes: dict[str, FuzzyProcess] = field(default_factory=dict)
    lets: dict[str, Expr] = field(default_factory=dict)
    statements: list[Statement] = field(default_factory=list)

    def evaluate(self, expr: Expr) -> FuzzyProcess:
        if isinstance(expr, Name):
            if expr.id in self.processes:
                return self.processes[expr.id]
            if expr.id in self.lets:
                return self.evaluate(self.lets[expr.id])
            raise SourceError(expr.line, expr.col, f"unresolved name {expr.id}", expr.id)
        if isinstance(expr, Omega):
            return A.omega(self.universe)
        if isinstance(expr, Neg):
            return A.reflect(self.evaluate(expr.operand))
        if isinstance(expr, Paren):
            return self.evaluate(expr.inner)
        return _OPS[expr.op](self.evaluate(expr.left), self.evaluate(expr.right))

    def names(self) -> set[str]:
        return set(self.processes) | set(self.lets)


# -- parsing -------------------------------------------------------------

RESERVED = {"universe", "process", "delta", "gamma", "end", "let", "assert", "query", "OMEGA"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_LABEL = re.compile(r"[^\s=#]+")
_RATIONAL = re.compile(r"\d+(?:/\d+)?|\d*\.\d+|\d+\.")
_TOKEN = re.compile(r"\s*(?:(=>)|([A-Za-z_][A-Za-z0-9_]*)|([-*+|&():=])|(\S))")


@dataclass
class _Tok:
    kind: str  # name | op | end
    text: str
    col: int


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _words(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_rational(text: str, line: int, col: int) -> Fraction:
    if not _RATIONAL.fullmatch(text):
        raise SourceError(line, col, f"malformed rational {text!r}", text)
    if "/" in text and int(text.split("/")[1]) == 0:
        raise SourceError(line, col, f"zero denominator in {text!r}", text)
    value = Fraction(text)
    if value > 1:
        raise SourceError(line, col, f"rational {text} out of range [0, 1]", text)
    return value


class _ExprParser:
    def __init__(self, text: str, line: int, offset: int, known: set[str] | None):
        self.line = line
        self.known = known
        self.toks: list[_Tok] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            if m.group(1):
                self.toks.append(_Tok("op", "=>", m.start(1) + 1 + offset))
            elif m.group(2):
                self.toks.append(_Tok("name", m.group(2), m.start(2) + 1 + offset))
            elif m.group(3):
                self.toks.append(_Tok("op", m.group(3), m.start(3) + 1 + offset))
            else:
                c = m.start(4) + 1 + offset
                raise SourceError(line, c, f"unexpected character {m.group(4)!r}", m.group(4))
            pos = m.end()
        self.end_col = len(text) + 1 + offset
        self.i = 0

    def peek(self) -> _Tok:
        if self.i < len(self.toks):
            return self.toks[self.i]
        return _Tok("end", "", self.end_col)

    def take(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def error(self, tok: _Tok, message: str):
        raise SourceError(self.line, tok.col, message, tok.text)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind != "op":
            self.error(t, f"expected {text!r}, found {t.text or 'end of line'!r}")
        return self.take()

    def starts_expr(self) -> bool:
        t = self.peek()
        return t.kind == "name" or t.text in ("-", "(")

    def expr(self) -> Expr:
        return self._tier(LATTICE, self._algebraic)

    def _algebraic(self) -> Expr:
        return self._tier(ALGEBRAIC, self._unary)

    def _tier(self, ops, operand) -> Expr:
        left = operand()
        first = None
        while self.peek().kind == "op" and self.peek().text in ops:
            tok = self.take()
            if first is None:
                first = tok.text
            elif tok.text != first:
                self.error(
                    tok,
                    f"ambiguous mixing of {first!r} and {tok.text!r}; add parentheses",
                )
            right = operand()
            left = BinOp(tok.text, left, right, self.line, tok.col)
        return left

    def _unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return Neg(self._unary(), self.line, t.col)
        return self._atom()

    def _atom(self) -> Expr:
        t = self.take()
        if t.kind == "name":
            if t.text == "OMEGA":
                return Omega(self.line, t.col)
            if self.known is not None and t.text not in self.known:
                self.error(t, f"unresolved name {t.text}")
            return Name(t.text, self.line, t.col)
        if t.kind == "op" and t.text == "(":
            inner = self.expr()
            self.expect(")")
            return Paren(inner, self.line, t.col)
        self.error(t, f"expected an expression, found {t.text or 'end of line'!r}")


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.universe: ExecutionUniverse | None = None
        self.doc: Document | None = None
        self.chains: set[str] = set()

    def parse(self) -> Document:
        i = 0
        n = len(self.lines)
        while i < n:
            raw = _strip_comment(self.lines[i])
            lineno = i + 1
            words = _words(raw)
            i += 1
            if not words:
                continue
            head, col = words[0]
            if self.doc is None:
                if head != "universe":
                    raise SourceError(lineno, col, "the universe declaration must come first", head)
                self._universe(words, lineno)
                continue
            if head == "universe":
                raise SourceError(lineno, col, "duplicate universe declaration", head)
            if head == "process":
                i = self._process(words, lineno, i)
            elif head == "let":
                self._let(raw, words, lineno)
            elif head == "assert":
                self._assert(raw, words, lineno)
            elif head == "query":
                self._query(raw, words, lineno)
            elif head in ("delta", "gamma", "end"):
                raise SourceError(lineno, col, f"{head!r} outside a process block", head)
            else:
                raise SourceError(lineno, col, f"unknown statement {head!r}", head)
        if self.doc is None:
            raise SourceError(max(len(self.lines), 1), 1, "missing universe declaration")
        return self.doc

    def _universe(self, words, lineno):
        labels = words[1:]
        if not labels:
            raise SourceError(lineno, words[0][1] + len("universe"), "universe needs at least one label")
        seen = set()
        for label, col in labels:
            if not _LABEL.fullmatch(label):
                raise SourceError(lineno, col, f"invalid label {label!r}", label)
            if label in seen:
                raise SourceError(lineno, col, f"duplicate label {label}", label)
            seen.add(label)
        self.universe = ExecutionUniverse([w for w, _ in labels])
        self.doc = Document(self.universe)

    def _new_name(self, name: str, lineno: int, col: int):
        if not _IDENT.fullmatch(name) or name in RESERVED:
            raise SourceError(lineno, col, f"invalid name {name!r}", name)
        if name in self.doc.names() or name in self.chains:
            raise SourceError(lineno, col, f"duplicate name {name}", name)

    def _process(self, words, lineno, i) -> int:
        start_col = words[0][1]
        if len(words) != 2:
            col = words[2][1] if len(words) > 2 else start_col + len("process")
            raise SourceError(lineno, col, "expected 'process <name>'", words[2][0] if len(words) > 2 else "")
        name, ncol = words[1]
        self._new_name(name, lineno, ncol)
        maps = {"delta": {}, "gamma": {}}
        while i < len(self.lines):
            raw = _strip_comment(self.lines[i])
            ln = i + 1
            ws = _words(raw)
            i += 1
            if not ws:
                continue
            head, col = ws[0]
            if head == "end":
                if len(ws) > 1:
                    raise SourceError(ln, ws[1][1], "unexpected text after 'end'", ws[1][0])
                self.doc.processes[name] = A.make_process(self.universe, maps["delta"], maps["gamma"])
                return i
            if head not in maps:
                break
            target = maps[head]
            for word, wcol in ws[1:]:
                label, eq, rat = word.partition("=")
                if not eq or not label or not rat:
                    raise SourceError(ln, wcol, f"expected <label>=<rational>, found {word!r}", word)
                if label not in self.universe:
                    raise SourceError(ln, wcol, f"unknown label {label}", label)
                if label in target:
                    raise SourceError(ln, wcol, f"label {label} assigned twice in {head}", label)
                target[label] = parse_rational(rat, ln, wcol + len(label) + 1)
        raise SourceError(lineno, start_col, f"unterminated process block {name}", "process")

    def _exprs(self, raw: str, start: int, lineno: int) -> _ExprParser:
        return _ExprParser(raw[start:], lineno, start, self.doc.names())

    def _let(self, raw, words, lineno):
        m = re.match(r"\s*let\s+(\S+)\s*=", raw)
        if not m:
            col = words[1][1] if len(words) > 1 else words[0][1]
            raise SourceError(lineno, col, "expected 'let <name> = <expr>'", "let")
        name = m.group(1)
        self._new_name(name, lineno, m.start(1) + 1)
        p = self._exprs(raw, m.end(), lineno)
        expr = p.expr()
        if not p.at_end():
            p.error(p.peek(), f"unexpected {p.peek().text!r} after expression")
        self.doc.lets[name] = expr

    def _assert(self, raw, words, lineno):
        if len(words) < 2:
            raise SourceError(lineno, words[0][1], "expected 'assert <kind> <expr> ...'", "assert")
        kind, kcol = words[1]
        if kind not in ASSERT_ARITY:
            raise SourceError(lineno, kcol, f"unknown assertion kind {kind!r}", kind)
        p = self._exprs(raw, kcol - 1 + len(kind), lineno)
        args = self._args(p, ASSERT_ARITY[kind], f"assert {kind}")
        self.doc.statements.append(Assertion(kind, args, lineno))

    def _args(self, p: _ExprParser, count: int, what: str) -> tuple:
        args = []
        while not p.at_end():
            if not p.starts_expr():
                p.error(p.peek(), f"unexpected {p.peek().text!r}")
            args.append(p.expr())
        if len(args) != count:
            col = p.end_col if len(args) < count else args[count].col
            raise SourceError(p.line, col, f"{what} takes {count} expression(s), got {len(args)}")
        return tuple(args)

    def _query(self, raw, words, lineno):
        if len(words) < 2:
            raise SourceError(lineno, words[0][1], "expected 'query <solve|factor|chain> ...'", "query")
        kind, kcol = words[1]
        start = kcol - 1 + len(kind)
        if kind == "solve":
            args = self._args(self._exprs(raw, start, lineno), 2, "query solve")
            self.doc.statements.append(Query("solve", args, None, lineno))
        elif kind == "factor":
            args = self._args(self._exprs(raw, start, lineno), 1, "query factor")
            self.doc.statements.append(Query("factor", args, None, lineno))
        elif kind == "chain":
            m = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:").match(raw, start)
            if not m:
                raise SourceError(lineno, start + 2, "expected 'query chain <name>: <expr> => ...'", "chain")
            name = m.group(1)
            self._new_name(name, lineno, m.start(1) + 1)
            p = self._exprs(raw, m.end(), lineno)
            args = [p.expr()]
            while not p.at_end():
                p.expect("=>")
                args.append(p.expr())
            if len(args) < 2:
                p.error(p.peek(), "a chain needs at least two expressions joined by '=>'")
            self.chains.add(name)
            self.doc.statements.append(Query("chain", tuple(args), name, lineno))
        else:
            raise SourceError(lineno, kcol, f"unknown query {kind!r}", kind)


def parse(text: str) -> Document:
    """Parse ``.fps`` text; raises :class:`SourceError` on any problem."""
    try:
        return _Parser(text).parse()
    except A.AlgebraError as exc:  # pragma: no cover - parser validates first
        raise SourceError(1, 1, str(exc)) from exc


def parse_expression(text: str, doc: Document) -> Expr:
    p = _ExprParser(text, 1, 0, doc.names())
    if p.at_end():
        raise SourceError(1, 1, "empty expression")
    expr = p.expr()
    if not p.at_end():
        p.error(p.peek(), f"unexpected {p.peek().text!r} after expression")
    return expr


# -- serialization -------------------------------------------------------

def format_map(universe: ExecutionUniverse, values) -> str:
    return " ".join(f"{l}={v}" for l, v in zip(universe.labels, values) if v)


def serialize(doc: Document) -> str:
    """Canonical text: processes, then lets, then checks in source order."""
    out = ["universe " + " ".join(doc.universe.labels)]
    for name, p in doc.processes.items():
        out.append(f"process {name}")
        if any(p.dvals):
            out.append("  delta " + format_map(doc.universe, p.dvals))
        if any(p.gvals):
            out.append("  gamma " + format_map(doc.universe, p.gvals))
        out.append("end")
    for name, expr in doc.lets.items():
        out.append(f"let {name} = {format_expr(expr)}")
    for st in doc.statements:
        args = [format_expr(a) for a in st.args]
        if isinstance(st, Assertion):
            out.append(" ".join(["assert", st.kind, *args]))
        elif st.kind == "chain":
            out.append(f"query chain {st.name}: " + " => ".join(args))
        else:
            out.append(" ".join(["query", st.kind, *args]))
    return "\n".join(out) + "\n"


def document_to_json(doc: Document) -> dict:
    statements = []
    for st in doc.statements:
        entry = {
            "type": "assert" if isinstance(st, Assertion) else "query",
            "kind": st.kind,
            "args": [format_expr(a) for a in st.args],
        }
        if isinstance(st, Query) and st.name:
            entry["name"] = st.name
        statements.append(entry)
    return {
        "universe": list(doc.universe.labels),
        "processes": {n: A.process_to_json(p) for n, p in doc.processes.items()},
        "lets": {n: format_expr(e) for n, e in doc.lets.items()},
        "statements": statements,
    }
