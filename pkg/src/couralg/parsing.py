"""Expression and model-file parsing.

Expressions are polynomial: rational literals (only exact `a` or `a/b`
forms; floats are rejected), generator names, `^` powers, `+`/`-`, and
multiplication written explicitly or by juxtaposition:

    1/2 t1 t2 - 3 q1^2 p1 t1 + (q1 + 1) dx

Base variables are spelled q1, q2, ... and p1, p2, ...; every other name
must be an odd generator of the signature.  Errors carry line and column.

A model file is a line-oriented document:

    [signature]
    base_dim = 1
    odd = th:A, dx:A*

    [pairing]          # one row per line, comma-separated rationals
    0, 1
    1, 0

    [mu]               # or [theta] and/or [gamma]: one term per line,
    -1 p1 dx           # coefficient followed by a generator word

    [endomorphisms.N]  # comma-separated polynomial entries, one row/line
    q1, 0
    0, -q1

    [tensors.pi]
    0, 1
    -1, 0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import AlgebraSignature, GradedPoly, signature
from .bialgebroid import DoubleModel
from .courant import CourantStructure
from .errors import ModelError, ParseError
from .nijenhuis import Endomorphism

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<number>\d+(?:/\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[\^*+\-()])
      | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str   # number | name | op | end
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int = 1) -> list[_Token]:
    tokens = []
    col = 1
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            col += len(tok)
            continue
        if kind == "bad":
            if tok == ".":
                raise ParseError("floating-point literals are not accepted", line, col)
            raise ParseError(f"unexpected character {tok!r}", line, col)
        tokens.append(_Token(kind, tok, line, col))
        col += len(tok)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _ExprParser:
    def __init__(self, sig: AlgebraSignature, tokens: list[_Token]):
        self.sig = sig
        self.toks = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def next(self) -> _Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_end(self):
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col, expected="end of expression")

    def parse_expr(self) -> GradedPoly:
        t = self.peek()
        sign = 1
        while t.kind == "op" and t.text in "+-":
            self.next()
            if t.text == "-":
                sign = -sign
            t = self.peek()
        acc = self.parse_term() * sign
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in "+-":
                self.next()
                acc = acc + self.parse_term() * (1 if t.text == "+" else -1)
            else:
                return acc

    def parse_term(self) -> GradedPoly:
        acc = self.parse_factor()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text == "*":
                self.next()
                acc = acc * self.parse_factor()
            elif t.kind in ("number", "name") or (t.kind == "op" and t.text == "("):
                acc = acc * self.parse_factor()
            else:
                return acc

    def parse_factor(self) -> GradedPoly:
        base = self.parse_atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.next()
            e = self.next()
            if e.kind != "number" or "/" in e.text:
                raise ParseError("exponent must be a nonnegative integer", e.line, e.col,
                                 expected="integer")
            n = int(e.text)
            acc = self.sig.one()
            for _ in range(n):
                acc = acc * base
            return acc
        return base

    def parse_atom(self) -> GradedPoly:
        t = self.next()
        if t.kind == "number":
            return self.sig.const(Fraction(t.text))
        if t.kind == "name":
            return self._resolve(t)
        if t.kind == "op" and t.text == "(":
            inner = self.parse_expr()
            closing = self.next()
            if not (closing.kind == "op" and closing.text == ")"):
                raise ParseError("unbalanced parenthesis", closing.line, closing.col,
                                 expected="')'")
            return inner
        if t.kind == "op" and t.text in "+-":
            return self.parse_factor() * (1 if t.text == "+" else -1)
        raise ParseError(f"unexpected {t.text!r}", t.line, t.col,
                         expected="number, name or '('")

    def _resolve(self, tok: _Token) -> GradedPoly:
        name = tok.text
        m = re.fullmatch(r"([qp])(\d+)", name)
        if m:
            i = int(m.group(2))
            if not 1 <= i <= self.sig.base_dim:
                raise ParseError(
                    f"base variable {name!r} out of range (base_dim = {self.sig.base_dim})",
                    tok.line, tok.col,
                )
            return self.sig.q(i) if m.group(1) == "q" else self.sig.p(i)
        try:
            return self.sig.tau(name)
        except KeyError:
            raise ParseError(f"unknown generator {name!r}", tok.line, tok.col) from None


def parse_expr(text: str, sig: AlgebraSignature, line: int = 1) -> GradedPoly:
    """Parse a polynomial expression over the given signature."""
    parser = _ExprParser(sig, _tokenize(text, line))
    value = parser.parse_expr()
    parser.expect_end()
    return value


def parse_term_line(text: str, sig: AlgebraSignature, line: int) -> GradedPoly:
    """Parse a structure term: signed rational coefficient, generator word."""
    toks = _tokenize(text, line)
    pos = 0
    sign = 1
    while toks[pos].kind == "op" and toks[pos].text in "+-":
        if toks[pos].text == "-":
            sign = -sign
        pos += 1
    t = toks[pos]
    if t.kind != "number":
        raise ParseError("term must start with a rational coefficient", t.line, t.col,
                         expected="rational")
    coeff = Fraction(t.text) * sign
    pos += 1
    acc = sig.const(coeff)
    while toks[pos].kind != "end":
        t = toks[pos]
        if t.kind != "name":
            raise ParseError(f"unexpected {t.text!r} in generator word", t.line, t.col,
                             expected="generator name")
        factor = _ExprParser(sig, [t, _Token("end", "", t.line, t.col)])._resolve(t)
        pos += 1
        if toks[pos].kind == "op" and toks[pos].text == "^":
            pos += 1
            e = toks[pos]
            if e.kind != "number" or "/" in e.text:
                raise ParseError("exponent must be a nonnegative integer", e.line, e.col)
            for _ in range(int(e.text)):
                acc = acc * factor
            pos += 1
        else:
            acc = acc * factor
    return acc


# ---------------------------------------------------------------------------
# model files


@dataclass
class ModelFile:
    """Parsed model document; see the module docstring for the format."""

    sig: AlgebraSignature
    theta: Optional[GradedPoly]
    mu: Optional[GradedPoly]
    gamma: Optional[GradedPoly]
    endomorphisms: dict = field(default_factory=dict)   # name -> tuple rows
    tensors: dict = field(default_factory=dict)

    @property
    def is_double(self) -> bool:
        return self.mu is not None or self.gamma is not None

    def theta_poly(self) -> GradedPoly:
        """The degree-3 element the file defines (mu + gamma for doubles)."""
        if self.theta is not None:
            return self.theta
        acc = self.sig.zero()
        if self.mu is not None:
            acc = acc + self.mu
        if self.gamma is not None:
            acc = acc + self.gamma
        return acc

    def double_model(self) -> DoubleModel:
        if not self.is_double:
            raise ModelError("model file does not declare [mu]/[gamma] sections")
        z = self.sig.zero()
        return DoubleModel(self.sig, self.mu or z, self.gamma or z)

    def courant(self) -> CourantStructure:
        """Validated Courant structure (raises when the master equation fails)."""
        return CourantStructure.from_theta(self.theta_poly())

    def endomorphism(self, name: str) -> tuple:
        try:
            return self.endomorphisms[name]
        except KeyError:
            raise ModelError(f"model defines no endomorphism {name!r}") from None

    def tensor(self, name: str) -> tuple:
        try:
            return self.tensors[name]
        except KeyError:
            raise ModelError(f"model defines no tensor {name!r}") from None


_SECTION_RE = re.compile(r"\[([A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)?)\]\s*$")


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_model_text(text: str, origin: str = "<model>") -> ModelFile:
    """Parse a model document from a string."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno, 1)
            sections[current] = []
            continue
        if current is None:
            raise ParseError("content before any [section] header", lineno, 1)
        sections[current].append((lineno, line))

    if "signature" not in sections:
        raise ParseError("missing [signature] section", 1, 1)
    base_dim, odd = _parse_signature(sections.pop("signature"))
    if "pairing" not in sections:
        raise ParseError("missing [pairing] section", 1, 1)
    pairing = _parse_pairing(sections.pop("pairing"), len(odd))
    try:
        sig = signature(base_dim, odd, pairing)
    except ValueError as exc:
        raise ModelError(f"{origin}: {exc}") from None

    theta = mu = gamma = None
    endos: dict = {}
    tensors: dict = {}
    for name, lines in sections.items():
        if name == "theta":
            theta = _parse_terms(lines, sig)
        elif name == "mu":
            mu = _parse_terms(lines, sig)
        elif name == "gamma":
            gamma = _parse_terms(lines, sig)
        elif name.startswith("endomorphisms."):
            endos[name.split(".", 1)[1]] = _parse_matrix(lines, sig)
        elif name.startswith("tensors."):
            tensors[name.split(".", 1)[1]] = _parse_matrix(lines, sig)
        else:
            lineno = lines[0][0] if lines else 1
            raise ParseError(f"unknown section [{name}]", lineno, 1)

    if theta is not None and (mu is not None or gamma is not None):
        raise ModelError(f"{origin}: declare either [theta] or [mu]/[gamma], not both")
    if theta is None and mu is None and gamma is None:
        raise ModelError(f"{origin}: no structure section ([theta] or [mu]/[gamma])")
    for poly, what in ((theta, "theta"), (mu, "mu"), (gamma, "gamma")):
        if poly is not None and not poly.has_degree(3):
            raise ModelError(f"{origin}: [{what}] must be homogeneous of degree 3")
    return ModelFile(sig, theta, mu, gamma, endos, tensors)


def parse_model(path) -> ModelFile:
    """Parse a model file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model_text(fh.read(), origin=str(path))


def _parse_signature(lines):
    base_dim = 0
    odd = None
    for lineno, line in lines:
        if "=" not in line:
            raise ParseError("expected key = value", lineno, 1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "base_dim":
            if not value.isdigit():
                raise ParseError("base_dim must be a nonnegative integer", lineno, 1)
            base_dim = int(value)
        elif key == "odd":
            odd = []
            for chunk in value.split(","):
                chunk = chunk.strip()
                if not chunk:
                    raise ParseError("empty generator entry", lineno, 1)
                if ":" in chunk:
                    name, _, lab = chunk.partition(":")
                    name, lab = name.strip(), lab.strip()
                    if lab not in ("A", "A*"):
                        raise ParseError(f"label must be A or A*, got {lab!r}", lineno, 1)
                    odd.append((name, lab))
                else:
                    odd.append(chunk)
        else:
            raise ParseError(f"unknown signature key {key!r}", lineno, 1)
    if odd is None:
        raise ParseError("signature must declare odd generators", lines[0][0] if lines else 1, 1)
    return base_dim, odd


def _parse_pairing(lines, n):
    rows = []
    for lineno, line in lines:
        entries = [e.strip() for e in line.split(",")]
        if len(entries) != n:
            raise ParseError(f"pairing row needs {n} entries, got {len(entries)}", lineno, 1)
        row = []
        for e in entries:
            try:
                row.append(Fraction(e))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"invalid rational {e!r}", lineno, 1) from None
        rows.append(row)
    if len(rows) != n:
        raise ParseError(f"pairing needs {n} rows, got {len(rows)}",
                         lines[0][0] if lines else 1, 1)
    return rows


def _parse_terms(lines, sig) -> GradedPoly:
    acc = sig.zero()
    for lineno, line in lines:
        acc = acc + parse_term_line(line, sig, lineno)
    return acc


def _parse_matrix(lines, sig):
    rows = []
    for lineno, line in lines:
        entries = [parse_expr(e.strip(), sig, lineno) for e in line.split(",")]
        rows.append(tuple(entries))
    if not rows:
        raise ParseError("empty matrix section", 1, 1)
    width = len(rows[0])
    if any(len(r) != width for r in rows) or len(rows) != width:
        raise ModelError("matrix sections must be square")
    return tuple(rows)


# ---------------------------------------------------------------------------
# canonical serialization


def poly_terms_lines(poly: GradedPoly) -> list[str]:
    """Canonical term lines (coefficient + word) of a polynomial."""
    lines = []
    for mono, coeff in poly.sorted_terms():
        word = poly._mono_str(mono)
        lines.append(f"{coeff} {word}".strip())
    return lines


def serialize_model(mf: ModelFile) -> str:
    """Canonical text form; parse(serialize(m)) reproduces m exactly."""
    sig = mf.sig
    out = ["[signature]", f"base_dim = {sig.base_dim}"]
    odd = ", ".join(
        name if lab is None else f"{name}:{lab}"
        for name, lab in zip(sig.odd_names, sig.labels)
    )
    out.append(f"odd = {odd}")
    out.append("")
    out.append("[pairing]")
    for row in sig.pairing:
        out.append(", ".join(str(x) for x in row))
    for name, poly in (("theta", mf.theta), ("mu", mf.mu), ("gamma", mf.gamma)):
        if poly is not None:
            out.append("")
            out.append(f"[{name}]")
            out.extend(poly_terms_lines(poly))
    for kind, table in (("endomorphisms", mf.endomorphisms), ("tensors", mf.tensors)):
        for name in sorted(table):
            out.append("")
            out.append(f"[{kind}.{name}]")
            for row in table[name]:
                out.append(", ".join(str(e) for e in row))
    return "\n".join(out) + "\n"
