"""Exact sparse graded-commutative polynomial algebra.

The algebra has three families of generators:

  q^1 .. q^n   even, degree 0   (base coordinates)
  t_1 .. t_m   odd,  degree 1   (user-named anticommuting generators)
  p_1 .. p_n   even, degree 2   (conjugate momenta of the q's)

A monomial is a triple (q exponents, strictly increasing odd-index word,
p exponents); a polynomial is a dict mapping monomials to nonzero Fraction
coefficients.  The empty dict is zero.  All arithmetic is exact: no floats
appear anywhere in this package, and equality of polynomials is decidable
by dict comparison of canonical forms.

Reordering the odd letters of a word into increasing order multiplies the
coefficient by the parity of the permutation; a repeated odd letter kills
the term.  That sign bookkeeping lives in `normalize_monomial` and
`mono_mul`, and everything else is built on top of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .errors import DegreeError, SignatureMismatchError

Rat = Union[int, Fraction]

LABEL_A = "A"
LABEL_ASTAR = "A*"
_VALID_LABELS = (None, LABEL_A, LABEL_ASTAR)


def rat(x: Rat) -> Fraction:
    """Coerce an int/Fraction (or exact rational string) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)  # Fraction rejects floats in string form
    raise TypeError(f"not an exact rational: {x!r}")


class Monomial(NamedTuple):
    """Canonical monomial: q exponents, increasing odd word, p exponents."""

    q: tuple[int, ...]
    tau: tuple[int, ...]
    p: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.tau) + 2 * sum(self.p)

    @property
    def parity(self) -> int:
        return len(self.tau) & 1


def normalize_monomial(
    raw_tau_word: Sequence[int],
    q_exp: Sequence[int] = (),
    p_exp: Sequence[int] = (),
) -> tuple[Monomial, int]:
    """Sort an odd word into canonical order, returning (monomial, sign).

    sign is the permutation parity (+1/-1), or 0 when an odd index repeats
    (the square of an odd generator vanishes).
    """
    word = list(raw_tau_word)
    sign = 1
    # insertion sort; words are short and parity falls out of the swap count
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            word[j - 1], word[j] = word[j], word[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(word, word[1:]):
        if a == b:
            return Monomial((), (), ()), 0
    return Monomial(tuple(q_exp), tuple(word), tuple(p_exp)), sign


def mono_mul(m1: Monomial, m2: Monomial) -> tuple[Optional[Monomial], int]:
    """Product of canonical monomials: (monomial, sign), or (None, 0)."""
    if m1.tau and m2.tau:
        # merge the two increasing words, counting transpositions
        merged = []
        sign = 1
        i = j = 0
        t1, t2 = m1.tau, m2.tau
        while i < len(t1) and j < len(t2):
            if t1[i] < t2[j]:
                merged.append(t1[i])
                i += 1
            elif t1[i] > t2[j]:
                # t2[j] moves past the rest of t1
                if (len(t1) - i) & 1:
                    sign = -sign
                merged.append(t2[j])
                j += 1
            else:
                return None, 0
        merged.extend(t1[i:])
        merged.extend(t2[j:])
        tau = tuple(merged)
    else:
        tau = m1.tau or m2.tau
        sign = 1
    q = tuple(a + b for a, b in zip(m1.q, m2.q))
    p = tuple(a + b for a, b in zip(m1.p, m2.p))
    return Monomial(q, tau, p), sign


@dataclass(frozen=True)
class AlgebraSignature:
    """The coordinate model: (q, p) pair count, odd generators, pairing.

    pairing is the symmetric matrix g of the odd generators; it must be
    invertible over the rationals and its exact inverse is precomputed.
    Labels, when present, tag generators as belonging to the two halves of
    a double (see `bialgebroid`).
    """

    base_dim: int
    odd_names: tuple[str, ...]
    labels: tuple[Optional[str], ...]
    pairing: tuple[tuple[Fraction, ...], ...]
    pairing_inv: tuple[tuple[Fraction, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.odd_names)
        if self.base_dim < 0:
            raise ValueError("base_dim must be >= 0")
        if len(set(self.odd_names)) != n:
            raise ValueError("odd generator names must be unique")
        for name in self.odd_names:
            if _is_base_name(name):
                raise ValueError(f"odd generator name {name!r} collides with q/p variables")
        if len(self.labels) != n:
            raise ValueError("labels length must match odd generator count")
        for lab in self.labels:
            if lab not in _VALID_LABELS:
                raise ValueError(f"invalid label {lab!r}")
        if any(self.labels):
            n_a = sum(1 for lab in self.labels if lab == LABEL_A)
            n_b = sum(1 for lab in self.labels if lab == LABEL_ASTAR)
            if n_a != n_b or n_a + n_b != n:
                raise ValueError("labels must split the odd generators into equal A and A* halves")
        if len(self.pairing) != n or any(len(row) != n for row in self.pairing):
            raise ValueError("pairing must be a square matrix over the odd generators")
        for a in range(n):
            for b in range(n):
                if self.pairing[a][b] != self.pairing[b][a]:
                    raise ValueError("pairing must be symmetric")
        inv = _invert_rational(self.pairing)
        if inv is None:
            raise ValueError("pairing must be invertible")
        object.__setattr__(self, "pairing_inv", inv)
        # per-signature cache for generator-pair Poisson brackets of monomials
        object.__setattr__(self, "_pb_cache", {})

    def __hash__(self):
        return hash((self.base_dim, self.odd_names, self.labels, self.pairing))

    # -- introspection -------------------------------------------------

    @property
    def n_odd(self) -> int:
        return len(self.odd_names)

    def odd_index(self, name: str) -> int:
        try:
            return self.odd_names.index(name)
        except ValueError:
            raise KeyError(f"unknown odd generator {name!r}") from None

    def zero_exp(self) -> tuple[int, ...]:
        return (0,) * self.base_dim

    # -- element constructors ------------------------------------------

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def const(self, c: Rat) -> "GradedPoly":
        c = rat(c)
        if c == 0:
            return self.zero()
        return GradedPoly(self, {Monomial(self.zero_exp(), (), self.zero_exp()): c})

    def one(self) -> "GradedPoly":
        return self.const(1)

    def q(self, i: int) -> "GradedPoly":
        """The base coordinate q^i (1-based)."""
        if not 1 <= i <= self.base_dim:
            raise IndexError(f"q index {i} out of range 1..{self.base_dim}")
        e = [0] * self.base_dim
        e[i - 1] = 1
        return GradedPoly(self, {Monomial(tuple(e), (), self.zero_exp()): Fraction(1)})

    def p(self, i: int) -> "GradedPoly":
        """The momentum p_i (1-based)."""
        if not 1 <= i <= self.base_dim:
            raise IndexError(f"p index {i} out of range 1..{self.base_dim}")
        e = [0] * self.base_dim
        e[i - 1] = 1
        return GradedPoly(self, {Monomial(self.zero_exp(), (), tuple(e)): Fraction(1)})

    def tau(self, which: Union[str, int]) -> "GradedPoly":
        """An odd generator, by name or 0-based index."""
        a = self.odd_index(which) if isinstance(which, str) else which
        if not 0 <= a < self.n_odd:
            raise IndexError(f"odd index {a} out of range")
        return GradedPoly(
            self, {Monomial(self.zero_exp(), (a,), self.zero_exp()): Fraction(1)}
        )

    def monomial(
        self,
        coeff: Rat = 1,
        tau: Sequence[Union[str, int]] = (),
        q: Sequence[int] = None,
        p: Sequence[int] = None,
    ) -> "GradedPoly":
        """Build a single-term polynomial, normalizing the odd word."""
        q_exp = tuple(q) if q is not None else self.zero_exp()
        p_exp = tuple(p) if p is not None else self.zero_exp()
        if len(q_exp) != self.base_dim or len(p_exp) != self.base_dim:
            raise ValueError("exponent vectors must have length base_dim")
        word = [self.odd_index(a) if isinstance(a, str) else a for a in tau]
        mono, sign = normalize_monomial(word, q_exp, p_exp)
        c = rat(coeff) * sign
        if c == 0:
            return self.zero()
        return GradedPoly(self, {mono: c})


def _is_base_name(name: str) -> bool:
    return (
        len(name) >= 2
        and name[0] in ("q", "p")
        and name[1:].isdigit()
    )


def _invert_rational(matrix) -> Optional[tuple[tuple[Fraction, ...], ...]]:
    """Exact Gauss-Jordan inverse; None when singular."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        f = aug[col][col]
        aug[col] = [x / f for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                fr = aug[r][col]
                aug[r] = [x - fr * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


class GradedPoly:
    """Sparse exact element of the graded algebra.

    Immutable by convention: no method mutates `terms` after construction,
    so values are safe to share and to use concurrently.
    """

    __slots__ = ("sig", "terms")

    def __init__(self, sig: AlgebraSignature, terms: dict):
        clean = {}
        for mono, coeff in terms.items():
            c = coeff if isinstance(coeff, Fraction) else rat(coeff)
            if c != 0:
                clean[mono] = c
        self.sig = sig
        self.terms = clean

    # -- basics ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in the canonical order: lexicographic on (q, tau, p)."""
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def degree(self) -> Optional[int]:
        """Common degree of all terms; None for 0 or inhomogeneous values."""
        degs = {m.degree for m in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def is_homogeneous(self) -> bool:
        return len({m.degree for m in self.terms}) <= 1

    def has_degree(self, k: int) -> bool:
        """True when every term has degree k (vacuously true for zero)."""
        return all(m.degree == k for m in self.terms)

    def homogeneous_part(self, k: int) -> "GradedPoly":
        return GradedPoly(
            self.sig, {m: c for m, c in self.terms.items() if m.degree == k}
        )

    def ensure_degree(self, k: int, what: str = "value") -> "GradedPoly":
        if not self.has_degree(k):
            raise DegreeError(f"{what} must be homogeneous of degree {k}, got {self}")
        return self

    def is_p_free(self) -> bool:
        return all(not any(m.p) for m in self.terms)

    def is_q_free(self) -> bool:
        return all(not any(m.q) for m in self.terms)

    def is_constant(self) -> bool:
        return all(m.degree == 0 and not any(m.q) for m in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise DegreeError(f"not a constant: {self}")
        return next(iter(self.terms.values()))

    # -- arithmetic -------------------------------------------------------

    def _check_sig(self, other: "GradedPoly"):
        if self.sig is not other.sig and self.sig != other.sig:
            raise SignatureMismatchError("operands built over different signatures")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.sig.const(other)
        self._check_sig(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return GradedPoly(self.sig, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.sig, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.sig.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = rat(other)
            if c == 0:
                return self.sig.zero()
            return GradedPoly(self.sig, {m: c * v for m, v in self.terms.items()})
        self._check_sig(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, sign = mono_mul(m1, m2)
                if sign == 0:
                    continue
                c = c1 * c2 * sign
                prev = out.get(m)
                out[m] = c if prev is None else prev + c
        return GradedPoly(self.sig, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (Fraction(1) / rat(other))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.sig.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    # -- display -----------------------------------------------------------

    def _mono_str(self, m: Monomial) -> str:
        parts = []
        for i, e in enumerate(m.q):
            if e == 1:
                parts.append(f"q{i + 1}")
            elif e > 1:
                parts.append(f"q{i + 1}^{e}")
        for a in m.tau:
            parts.append(self.sig.odd_names[a])
        for i, e in enumerate(m.p):
            if e == 1:
                parts.append(f"p{i + 1}")
            elif e > 1:
                parts.append(f"p{i + 1}^{e}")
        return " ".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        chunks = []
        for mono, coeff in self.sorted_terms():
            word = self._mono_str(mono)
            if not word:
                body = str(abs(coeff))
            elif abs(coeff) == 1:
                body = word
            else:
                body = f"{abs(coeff)} {word}"
            if not chunks:
                chunks.append(body if coeff > 0 else f"-{body}")
            else:
                chunks.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"<GradedPoly {self}>"


def mul(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """Graded-commutative product (function form of `*`)."""
    return f * g


def degree(f: GradedPoly) -> Optional[int]:
    """Common degree of all terms of f, or None when inhomogeneous."""
    return f.degree()


def signature(
    base_dim: int,
    odd: Sequence[Union[str, tuple[str, Optional[str]]]],
    pairing: Sequence[Sequence[Rat]],
) -> AlgebraSignature:
    """Convenience constructor: odd entries are names or (name, label)."""
    names = []
    labels = []
    for entry in odd:
        if isinstance(entry, str):
            names.append(entry)
            labels.append(None)
        else:
            name, lab = entry
            names.append(name)
            labels.append(lab)
    mat = tuple(tuple(rat(x) for x in row) for row in pairing)
    return AlgebraSignature(base_dim, tuple(names), tuple(labels), mat)
