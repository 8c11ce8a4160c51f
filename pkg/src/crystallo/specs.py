"""Signatures, terms and equations, the text format, and identity checking.

Source grammar (``#`` starts a line comment)::

    variety  := "variety" IDENT "{" (opdecl | constdecl | eqdecl)* "}"
    opdecl   := "op" IDENT "/" INT ";"
    constdecl:= "const" IDENT ["=" INT] ";"
    eqdecl   := "eq" term "=" term ";"
    term     := IDENT | IDENT "(" term ("," term)* ")"
    algebra  := "algebra" IDENT ":" IDENT "{" "size" INT ";" (tabledecl | constassign)* "}"
    tabledecl:= IDENT ":" "[" [INT ("," INT)*] "]" ";"
    constassign := IDENT "=" INT ";"

The optional ``= INT`` on a constant declaration pins the constant during
model enumeration and is ignored everywhere else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING, Iterable, Mapping, Union

from . import kernels
from .errors import (
    ArityError,
    DuplicateNameError,
    ParseError,
    TableError,
    UnboundVariable,
    UnknownSymbolError,
    ValidationError,
)

if TYPE_CHECKING:
    from .algebra import FiniteAlgebra

__all__ = [
    "Signature",
    "Var",
    "Const",
    "App",
    "Term",
    "Equation",
    "VarietyPresentation",
    "parse_variety",
    "parse_algebra",
    "parse_document",
    "parse_equation",
    "format_variety",
    "format_algebra",
    "format_term",
    "eval_term",
    "check_identities",
    "IdentityReport",
    "Violation",
]


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...] = ()
    consts: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple((str(n), int(a)) for n, a in self.ops))
        object.__setattr__(self, "consts", tuple(str(c) for c in self.consts))
        seen = set()
        for name in [n for n, _ in self.ops] + list(self.consts):
            if name in seen:
                raise DuplicateNameError(f"duplicate symbol {name!r}")
            seen.add(name)
        for name, arity in self.ops:
            if arity < 1:
                raise ArityError(f"operation {name!r} must have positive arity, got {arity}")

    @property
    def op_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.ops)

    def arity(self, name: str) -> int:
        for n, a in self.ops:
            if n == name:
                return a
        if name in self.consts:
            return 0
        raise UnknownSymbolError(f"unknown symbol {name!r}")

    def __contains__(self, name) -> bool:
        return name in self.consts or any(n == name for n, _ in self.ops)

    @property
    def is_pointed(self) -> bool:
        return self.consts == ("0",)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.ops), default=0)


# --------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    op: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


Term = Union[Var, Const, App]


def term_variables(t: Term, acc: list | None = None) -> list[str]:
    """Variables in order of first appearance."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, App):
        for a in t.args:
            term_variables(a, acc)
    return acc


def check_term(t: Term, sig: Signature) -> None:
    if isinstance(t, Var):
        return
    if isinstance(t, Const):
        if t.name not in sig.consts:
            raise UnknownSymbolError(f"unknown constant {t.name!r}")
        return
    if t.op not in sig.op_names:
        if t.op in sig.consts:
            raise ArityError(f"constant {t.op!r} applied to arguments")
        raise UnknownSymbolError(f"unknown operation {t.op!r}")
    arity = sig.arity(t.op)
    if len(t.args) != arity:
        raise ArityError(f"{t.op!r} has arity {arity} but was given {len(t.args)} arguments")
    for a in t.args:
        check_term(a, sig)


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term

    @property
    def variables(self) -> tuple[str, ...]:
        acc = term_variables(self.lhs)
        term_variables(self.rhs, acc)
        return tuple(acc)

    def __str__(self):
        return f"{format_term(self.lhs)} = {format_term(self.rhs)}"


@dataclass(frozen=True)
class VarietyPresentation:
    name: str
    signature: Signature = field(default_factory=Signature)
    equations: tuple[Equation, ...] = ()
    pins: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        object.__setattr__(self, "pins", tuple((str(c), int(v)) for c, v in self.pins))
        for eq in self.equations:
            check_term(eq.lhs, self.signature)
            check_term(eq.rhs, self.signature)
        for c, _ in self.pins:
            if c not in self.signature.consts:
                raise UnknownSymbolError(f"pin for unknown constant {c!r}")

    def __str__(self):
        return format_variety(self)


# ------------------------------------------------------------------- lexing

_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<word>[A-Za-z0-9_]+)|(?P<punct>[{}()\[\],;:/=])")


@dataclass
class _Tok:
    kind: str  # 'word', 'punct', 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind is not None:
            toks.append(_Tok(kind, m.group(kind), line, pos - line_start + 1))
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, expected, message=None):
        t = self.tok
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(message or f"unexpected {got}", t.line, t.col, expected)

    def punct(self, ch):
        if self.tok.kind == "punct" and self.tok.text == ch:
            self.i += 1
            return
        self.error([repr(ch)])

    def at(self, text):
        return self.tok.kind != "eof" and self.tok.text == text

    def keyword(self, kw):
        if self.tok.kind == "word" and self.tok.text == kw:
            self.i += 1
            return
        self.error([repr(kw)])

    def ident(self):
        if self.tok.kind == "word":
            t = self.tok
            self.i += 1
            return t
        self.error(["identifier"])

    def integer(self):
        if self.tok.kind == "word" and self.tok.text.isdigit():
            t = self.tok
            self.i += 1
            return int(t.text)
        self.error(["integer"])

    # raw terms: (name, args or None, token)
    def raw_term(self):
        t = self.ident()
        if self.at("("):
            self.punct("(")
            args = [self.raw_term()]
            while self.at(","):
                self.punct(",")
                args.append(self.raw_term())
            self.punct(")")
            return (t.text, tuple(args), t)
        return (t.text, None, t)

    def variety_block(self):
        self.keyword("variety")
        name = self.ident().text
        self.punct("{")
        ops, consts, pins, raw_eqs = [], [], [], []
        while not self.at("}"):
            if self.tok.kind != "word":
                self.error(["'op'", "'const'", "'eq'", "'}'"])
            kw = self.tok.text
            if kw == "op":
                self.i += 1
                t = self.ident()
                self.punct("/")
                arity = self.integer()
                self.punct(";")
                if arity < 1:
                    raise ArityError(f"{t.line}:{t.col}: operation {t.text!r} needs arity >= 1 (use const)")
                ops.append((t.text, arity, t))
            elif kw == "const":
                self.i += 1
                t = self.ident()
                if self.at("="):
                    self.punct("=")
                    pins.append((t.text, self.integer()))
                self.punct(";")
                consts.append((t.text, t))
            elif kw == "eq":
                self.i += 1
                lhs = self.raw_term()
                self.punct("=")
                rhs = self.raw_term()
                self.punct(";")
                raw_eqs.append((lhs, rhs))
            else:
                self.error(["'op'", "'const'", "'eq'", "'}'"])
        self.punct("}")
        seen = {}
        for n, _, t in ops:
            if n in seen:
                raise DuplicateNameError(f"{t.line}:{t.col}: duplicate symbol {n!r}")
            seen[n] = t
        for n, t in consts:
            if n in seen:
                raise DuplicateNameError(f"{t.line}:{t.col}: duplicate symbol {n!r}")
            seen[n] = t
        sig = Signature(tuple((n, a) for n, a, _ in ops), tuple(n for n, _ in consts))
        eqs = tuple(Equation(_cook(l, sig), _cook(r, sig)) for l, r in raw_eqs)
        return VarietyPresentation(name, sig, eqs, tuple(pins))

    def algebra_block(self):
        self.keyword("algebra")
        name = self.ident().text
        self.punct(":")
        vname = self.ident()
        self.punct("{")
        self.keyword("size")
        size = self.integer()
        self.punct(";")
        tables, consts = [], []
        while not self.at("}"):
            t = self.ident()
            if self.at(":"):
                self.punct(":")
                self.punct("[")
                entries = []
                if not self.at("]"):
                    entries.append(self.integer())
                    while self.at(","):
                        self.punct(",")
                        entries.append(self.integer())
                self.punct("]")
                self.punct(";")
                tables.append((t, entries))
            elif self.at("="):
                self.punct("=")
                consts.append((t, self.integer()))
                self.punct(";")
            else:
                self.error(["':'", "'='"])
        self.punct("}")
        return _RawAlgebra(name, vname, size, tables, consts)

    def document(self):
        varieties, algebras = [], []
        while self.tok.kind != "eof":
            if self.at("variety"):
                varieties.append(self.variety_block())
            elif self.at("algebra"):
                algebras.append(self.algebra_block())
            else:
                self.error(["'variety'", "'algebra'"])
        return varieties, algebras


def _cook(raw, sig: Signature) -> Term:
    name, args, tok = raw
    where = f"{tok.line}:{tok.col}: "
    if args is None:
        if name in sig.consts:
            return Const(name)
        if name in sig.op_names:
            raise ArityError(f"{where}{name!r} has arity {sig.arity(name)} but was given 0 arguments")
        if not name[0].islower():
            raise UnknownSymbolError(f"{where}unknown symbol {name!r} (variables start with a lowercase letter)")
        return Var(name)
    if name not in sig.op_names:
        if name in sig.consts:
            raise ArityError(f"{where}constant {name!r} applied to arguments")
        raise UnknownSymbolError(f"{where}unknown operation {name!r}")
    arity = sig.arity(name)
    if len(args) != arity:
        raise ArityError(f"{where}{name!r} has arity {arity} but was given {len(args)} arguments")
    return App(name, tuple(_cook(a, sig) for a in args))


@dataclass
class _RawAlgebra:
    name: str
    variety_tok: _Tok
    size: int
    tables: list
    consts: list

    def build(self, v: VarietyPresentation) -> "FiniteAlgebra":
        from .algebra import FiniteAlgebra

        if self.variety_tok.text.lower() != v.name.lower():
            t = self.variety_tok
            raise ValidationError(
                f"{t.line}:{t.col}: algebra {self.name!r} declares variety {t.text!r} but {v.name!r} was supplied"
            )
        sig = v.signature
        tables, consts = {}, {}
        for t, entries in self.tables:
            if t.text not in sig.op_names:
                kind = "constant" if t.text in sig.consts else "operation"
                raise UnknownSymbolError(f"{t.line}:{t.col}: unknown {kind} table {t.text!r}")
            if t.text in tables:
                raise DuplicateNameError(f"{t.line}:{t.col}: table {t.text!r} given twice")
            tables[t.text] = tuple(entries)
        for t, value in self.consts:
            if t.text not in sig.consts:
                raise UnknownSymbolError(f"{t.line}:{t.col}: unknown constant {t.text!r}")
            if t.text in consts:
                raise DuplicateNameError(f"{t.line}:{t.col}: constant {t.text!r} assigned twice")
            consts[t.text] = value
        for name in sig.op_names:
            if name not in tables:
                raise TableError(f"algebra {self.name!r}: missing table for {name!r}")
        for name in sig.consts:
            if name not in consts:
                raise TableError(f"algebra {self.name!r}: missing value for constant {name!r}")
        return FiniteAlgebra(sig, self.size, tables, consts, name=self.name)


def parse_document(text: str) -> tuple[list[VarietyPresentation], list[_RawAlgebra]]:
    """All variety blocks (parsed) and algebra blocks (unresolved) of a source."""
    return _Parser(text).document()


def parse_variety(text: str) -> VarietyPresentation:
    p = _Parser(text)
    v = p.variety_block()
    if p.tok.kind != "eof":
        p.error(["end of input"])
    return v


def parse_algebra(text: str, v: VarietyPresentation) -> "FiniteAlgebra":
    p = _Parser(text)
    raw = p.algebra_block()
    if p.tok.kind != "eof":
        p.error(["end of input"])
    return raw.build(v)


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(text)
    raw = p.raw_term()
    if p.tok.kind != "eof":
        p.error(["end of input"])
    return _cook(raw, sig)


def parse_equation(text: str, sig: Signature) -> Equation:
    """``lhs = rhs`` over ``sig`` (no ``eq`` keyword, no semicolon)."""
    p = _Parser(text)
    lhs = p.raw_term()
    p.punct("=")
    rhs = p.raw_term()
    if p.tok.kind != "eof":
        p.error(["end of input"])
    return Equation(_cook(lhs, sig), _cook(rhs, sig))


# ---------------------------------------------------------------- printing


def format_term(t: Term) -> str:
    if isinstance(t, App):
        return f"{t.op}({', '.join(format_term(a) for a in t.args)})"
    return t.name


def format_variety(v: VarietyPresentation) -> str:
    pins = dict(v.pins)
    lines = [f"variety {v.name} {{"]
    lines += [f"  op {n}/{a};" for n, a in v.signature.ops]
    for c in v.signature.consts:
        lines.append(f"  const {c} = {pins[c]};" if c in pins else f"  const {c};")
    lines += [f"  eq {eq};" for eq in v.equations]
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_algebra(a: "FiniteAlgebra", variety_name: str) -> str:
    lines = [f"algebra {a.name} : {variety_name} {{", f"  size {a.size};"]
    for name in a.signature.op_names:
        lines.append(f"  {name}: [{', '.join(map(str, a.tables[name]))}];")
    for c in a.signature.consts:
        lines.append(f"  {c} = {a.consts[c]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- evaluation


def eval_term(t: Term, a: "FiniteAlgebra", env: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise UnboundVariable(f"variable {t.name!r} is not bound") from None
    if isinstance(t, Const):
        return a.consts[t.name]
    return a.op(t.op, *(eval_term(x, a, env) for x in t.args))


def compile_term(t: Term, a: "FiniteAlgebra", variables: Iterable[str]):
    """Flat stack program (see ``kernels.find_violations``) for ``t`` over ``a``."""
    slot = {v: i for i, v in enumerate(variables)}
    offsets = a.offsets
    prog = []

    def emit(u):
        if isinstance(u, Var):
            prog.extend((0, slot[u.name], 0))
        elif isinstance(u, Const):
            prog.extend((1, a.consts[u.name], 0))
        else:
            for x in u.args:
                emit(x)
            prog.extend((2, offsets[u.op], len(u.args)))

    emit(t)
    return kernels.int_buffer(prog)


@dataclass(frozen=True)
class Violation:
    index: int
    equation: Equation
    assignment: dict

    def to_json(self):
        return {"equation": self.index, "text": str(self.equation), "assignment": self.assignment}


@dataclass(frozen=True)
class IdentityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.satisfied


def _decode(code: int, n: int, names: tuple[str, ...]) -> dict:
    out = {}
    for name in reversed(names):
        out[name] = code % n
        code //= n
    return {name: out[name] for name in names}


def check_identities(a: "FiniteAlgebra", eqs: Iterable[Equation], limit: int | None = None) -> IdentityReport:
    """Exhaustive model check of ``eqs`` on ``a``.

    Violations are listed equation by equation, assignments in lexicographic
    order of the equation's variables (order of first appearance, lhs first).
    ``limit`` caps the total number reported.
    """
    found = []
    for index, eq in enumerate(eqs):
        check_term(eq.lhs, a.signature)
        check_term(eq.rhs, a.signature)
        names = eq.variables
        left = compile_term(eq.lhs, a, names)
        right = compile_term(eq.rhs, a, names)
        remaining = -1 if limit is None else limit - len(found)
        if remaining == 0:
            break
        codes = kernels.find_violations(left, right, len(names), a.size, a.flat_tables, remaining)
        found.extend(Violation(index, eq, _decode(c, a.size, names)) for c in codes)
    return IdentityReport(tuple(found))


def satisfies(a: "FiniteAlgebra", eqs: Iterable[Equation]) -> bool:
    return check_identities(a, eqs, limit=1).satisfied


def naive_check(a: "FiniteAlgebra", eqs: Iterable[Equation]) -> list[tuple[int, dict]]:
    """Double loop over equations and assignments with ``eval_term``; test oracle."""
    out = []
    for index, eq in enumerate(eqs):
        names = eq.variables
        for values in product(range(a.size), repeat=len(names)):
            env = dict(zip(names, values))
            if eval_term(eq.lhs, a, env) != eval_term(eq.rhs, a, env):
                out.append((index, env))
    return out
