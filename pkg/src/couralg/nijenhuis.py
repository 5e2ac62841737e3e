"""Skew endomorphisms, Nijenhuis torsion, classification, deformation.

An endomorphism is a square matrix over the base polynomial ring, indexed
by the odd generators: N(t_a) = sum_b N[b][a] t_b, extended to arbitrary
sections by linearity over base functions.  A skew endomorphism lifts to
the unique degree-2 element with {u, lift} = N(u) for every section u;
the lift is the entry point to all bracket formulas:

    deformed bracket   [u,v]_N = [Nu,v] + [u,Nv] - N[u,v]
                               = {{u, {lift, theta}}, v}        (skew N)
    torsion            T(u,v)  = [Nu, Nv] - N([u,v]_N)
    torsion 3-tensor   -1/2 ({{lift, theta}, lift} + lam theta) (N^2 = lam Id)

The deformed bracket computes both routes and insists they agree, so every
torsion evaluation doubles as a consistency check of the sign conventions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .algebra import AlgebraSignature, GradedPoly, Monomial, Rat, rat
from .courant import (
    CourantStructure,
    _theta_poly,
    courant_bracket,
    dorfman,
    ensure_section,
    pairing,
    partial_op,
    section_components,
)
from .errors import DegreeError, NotCpsError, NotSkewError
from .poisson import poisson_bracket


def _entry_poly(sig: AlgebraSignature, x) -> GradedPoly:
    if isinstance(x, GradedPoly):
        if not (x.has_degree(0) and x.is_p_free()):
            raise DegreeError(f"matrix entry must be a base function: {x}")
        return x
    return sig.const(rat(x))


@dataclass(frozen=True)
class Endomorphism:
    """Matrix of base functions acting on sections in the generator basis."""

    sig: AlgebraSignature
    rows: tuple[tuple[GradedPoly, ...], ...]

    def __post_init__(self):
        n = self.sig.n_odd
        if len(self.rows) != n or any(len(r) != n for r in self.rows):
            raise ValueError("endomorphism matrix must be square over the odd generators")

    @classmethod
    def from_entries(cls, sig: AlgebraSignature, entries) -> "Endomorphism":
        rows = tuple(
            tuple(_entry_poly(sig, x) for x in row) for row in entries
        )
        return cls(sig, rows)

    @classmethod
    def zero(cls, sig: AlgebraSignature) -> "Endomorphism":
        z = sig.zero()
        n = sig.n_odd
        return cls(sig, tuple(tuple(z for _ in range(n)) for _ in range(n)))

    @classmethod
    def identity(cls, sig: AlgebraSignature) -> "Endomorphism":
        return cls.scalar(sig, 1)

    @classmethod
    def scalar(cls, sig: AlgebraSignature, c: Rat) -> "Endomorphism":
        n = sig.n_odd
        cc = sig.const(c)
        z = sig.zero()
        return cls(
            sig, tuple(tuple(cc if i == j else z for j in range(n)) for i in range(n))
        )

    # -- linear algebra over the base ring ------------------------------

    def __add__(self, other: "Endomorphism") -> "Endomorphism":
        return Endomorphism(
            self.sig,
            tuple(
                tuple(a + b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.rows, other.rows)
            ),
        )

    def __sub__(self, other: "Endomorphism") -> "Endomorphism":
        return self + (-other)

    def __neg__(self) -> "Endomorphism":
        return Endomorphism(
            self.sig, tuple(tuple(-a for a in r) for r in self.rows)
        )

    def __mul__(self, c) -> "Endomorphism":
        c = rat(c)
        return Endomorphism(
            self.sig, tuple(tuple(a * c for a in r) for r in self.rows)
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "Endomorphism") -> "Endomorphism":
        n = self.sig.n_odd
        rows = []
        for b in range(n):
            row = []
            for a in range(n):
                acc = self.sig.zero()
                for k in range(n):
                    acc = acc + self.rows[b][k] * other.rows[k][a]
                row.append(acc)
            rows.append(tuple(row))
        return Endomorphism(self.sig, tuple(rows))

    def square(self) -> "Endomorphism":
        return self @ self

    def __eq__(self, other):
        if not isinstance(other, Endomorphism):
            return NotImplemented
        return self.sig == other.sig and self.rows == other.rows

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def apply(self, u: GradedPoly) -> GradedPoly:
        """Apply to a section, linearly over base functions."""
        comps = section_components(u)
        out: dict = {}
        for a, f in comps.items():
            for b in range(self.sig.n_odd):
                entry = self.rows[b][a]
                if entry.is_zero():
                    continue
                prod = f * entry
                for mono, c in prod.terms.items():
                    key = Monomial(mono.q, (b,), mono.p)
                    prev = out.get(key)
                    out[key] = c if prev is None else prev + c
        return GradedPoly(self.sig, out)

    def __str__(self):
        return "[" + "; ".join(
            ", ".join(str(a) for a in row) for row in self.rows
        ) + "]"


def transpose(N: Endomorphism) -> Endomorphism:
    """Adjoint for the pairing of sections: <Nu, v> = <u, transpose(N) v>.

    The generator basis has Gram matrix g^{-1}, so the matrix of the
    adjoint is g N^T g^{-1}.
    """
    sig = N.sig
    n = sig.n_odd
    g = sig.pairing
    ginv = sig.pairing_inv
    rows = []
    for d in range(n):
        row = []
        for c in range(n):
            acc = sig.zero()
            for a in range(n):
                if g[d][a] == 0:
                    continue
                for b in range(n):
                    if ginv[b][c] == 0:
                        continue
                    acc = acc + N.rows[b][a] * (g[d][a] * ginv[b][c])
            row.append(acc)
        rows.append(tuple(row))
    return Endomorphism(sig, tuple(rows))


def is_skew(N: Endomorphism) -> bool:
    """Whether N + transpose(N) = 0 (infinitesimal orthogonality)."""
    return (N + transpose(N)).is_zero()


def lift_endo(N: Endomorphism) -> GradedPoly:
    """The unique degree-2 element with {u, lift} = N(u) for all sections."""
    if not is_skew(N):
        raise NotSkewError("only skew endomorphisms lift to degree-2 elements")
    sig = N.sig
    n = sig.n_odd
    g = sig.pairing
    # M[c][b] = sum_a g[c][a] N[b][a]; skewness makes M antisymmetric
    acc = sig.zero()
    for c in range(n):
        for b in range(c + 1, n):
            entry = sig.zero()
            for a in range(n):
                if g[c][a] != 0:
                    entry = entry + N.rows[b][a] * g[c][a]
            if not entry.is_zero():
                acc = acc + entry * (sig.tau(c) * sig.tau(b))
    return acc


def extract_endo(sig: AlgebraSignature, lifted: GradedPoly) -> Endomorphism:
    """Recover the endomorphism matrix from a degree-2 lift."""
    lifted.ensure_degree(2, "lift")
    n = sig.n_odd
    cols = []
    for a in range(n):
        image = poisson_bracket(sig.tau(a), lifted)
        cols.append(section_components(image))
    z = sig.zero()
    rows = tuple(
        tuple(cols[a].get(b, z) for a in range(n)) for b in range(n)
    )
    return Endomorphism(sig, rows)


class ConsistencyError(AssertionError):
    """Two provably-equal computations disagreed; indicates an engine bug."""


def deformed_bracket(
    theta, N: Endomorphism, u: GradedPoly, v: GradedPoly, cross_check: bool = True
) -> GradedPoly:
    """[u,v]_N = [Nu,v] + [u,Nv] - N[u,v].

    For skew N the derived-bracket route {{u,{lift,theta}},v} is computed
    as well and must agree exactly.
    """
    t = _theta_poly(theta)
    direct = (
        dorfman(t, N.apply(u), v)
        + dorfman(t, u, N.apply(v))
        - N.apply(dorfman(t, u, v))
    )
    if cross_check and is_skew(N):
        lifted = lift_endo(N)
        derived = poisson_bracket(
            poisson_bracket(u, poisson_bracket(lifted, t)), v
        )
        if direct != derived:
            raise ConsistencyError(
                f"deformed bracket routes disagree: {direct} vs {derived}"
            )
    return direct


def torsion_dorfman(theta, N: Endomorphism, u: GradedPoly, v: GradedPoly) -> GradedPoly:
    """T(u,v) = [Nu, Nv] - N([u,v]_N).  Defined for any endomorphism."""
    t = _theta_poly(theta)
    return dorfman(t, N.apply(u), N.apply(v)) - N.apply(
        deformed_bracket(t, N, u, v, cross_check=False)
    )


def torsion_courant(theta, N: Endomorphism, u: GradedPoly, v: GradedPoly) -> GradedPoly:
    """Torsion built from the Courant (skew-symmetrized) bracket."""
    t = _theta_poly(theta)
    def cb(a, b):
        return courant_bracket(t, a, b)
    deformed = cb(N.apply(u), v) + cb(u, N.apply(v)) - N.apply(cb(u, v))
    return cb(N.apply(u), N.apply(v)) - N.apply(deformed)


@dataclass
class IdentityFailure:
    name: str
    inputs: tuple
    difference: GradedPoly


@dataclass
class IdentityReport:
    ok: bool
    checked: int
    failures: list


def check_defect_identities(theta, N: Endomorphism, samples) -> IdentityReport:
    """Exact linearity/symmetry corrections of the torsion of a skew N.

    samples is an iterable of (u, v, w, f) with sections u, v, w and a base
    function f.  The four identities checked:

      scale_shift:      T(fu,v) - f T(u,v) = <u,v> N^2(df) - <u,N^2 v> df
      symmetrization:   T(u,v) + T(v,u) = N^2 d<u,v> - d<u, N^2 v>
      triple_pairing:   <T(u,v),w> + <T(u,w),v> = <N^2[u,w] - [u,N^2 w], v>
      courant_shift:    T_C(u,v) - T(u,v) = 1/2 (d<u,N^2 v> - N^2 d<u,v>)
    """
    if not is_skew(N):
        raise NotSkewError("defect identities hold for skew endomorphisms")
    t = _theta_poly(theta)
    N2 = N.square()
    failures = []
    checked = 0

    def d(f):
        return partial_op(t, f)

    for u, v, w, f in samples:
        Td = lambda a, b: torsion_dorfman(t, N, a, b)
        lhs = Td(f * u, v) - f * Td(u, v)
        rhs = pairing(u, v) * N2.apply(d(f)) - poisson_bracket(u, N2.apply(v)) * d(f)
        checked += 1
        if lhs != rhs:
            failures.append(IdentityFailure("scale_shift", (u, v, f), lhs - rhs))

        lhs = Td(u, v) + Td(v, u)
        rhs = N2.apply(d(pairing(u, v))) - d(poisson_bracket(u, N2.apply(v)))
        checked += 1
        if lhs != rhs:
            failures.append(IdentityFailure("symmetrization", (u, v), lhs - rhs))

        lhs = poisson_bracket(Td(u, v), w) + poisson_bracket(Td(u, w), v)
        rhs = poisson_bracket(
            N2.apply(dorfman(t, u, w)) - dorfman(t, u, N2.apply(w)), v
        )
        checked += 1
        if lhs != rhs:
            failures.append(IdentityFailure("triple_pairing", (u, v, w), lhs - rhs))

        lhs = torsion_courant(t, N, u, v) - Td(u, v)
        rhs = (d(poisson_bracket(u, N2.apply(v))) - N2.apply(d(pairing(u, v)))) * Fraction(1, 2)
        checked += 1
        if lhs != rhs:
            failures.append(IdentityFailure("courant_shift", (u, v), lhs - rhs))

    return IdentityReport(not failures, checked, failures)


def _fraction_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class CpsResult:
    """N^2 = lam Id, with lam = factor^2 * epsilon when resolvable over Q."""

    lam: Fraction
    epsilon: Optional[int]       # -1, 0 or 1
    factor: Optional[Fraction]   # rational c with lam = c^2 * epsilon
    unresolved: bool             # True when |lam| has no rational square root


def cps_check(sig: AlgebraSignature, N: Endomorphism) -> Optional[CpsResult]:
    """Return the scalar lam with N^2 = lam Id, if one exists."""
    N2 = N.square()
    n = sig.n_odd
    lam = None
    for b in range(n):
        for a in range(n):
            entry = N2.rows[b][a]
            if a == b:
                if not entry.is_constant():
                    return None
                val = entry.constant_value()
                if lam is None:
                    lam = val
                elif val != lam:
                    return None
            elif not entry.is_zero():
                return None
    if lam == 0:
        return CpsResult(Fraction(0), 0, Fraction(1), False)
    eps = 1 if lam > 0 else -1
    root = _fraction_sqrt(abs(lam))
    return CpsResult(lam, eps if root is not None else None, root, root is None)


def torsion_tensor(theta, N: Endomorphism) -> GradedPoly:
    """The degree-3 element -1/2 ({{lift, theta}, lift} + lam theta).

    Requires skew N with N^2 a rational multiple of the identity; its
    derived evaluation on section pairs recovers the elementwise torsion.
    """
    if not is_skew(N):
        raise NotSkewError("torsion tensor requires a skew endomorphism")
    cps = cps_check(N.sig, N)
    if cps is None:
        raise NotCpsError("torsion tensor requires N^2 = lam Id")
    t = _theta_poly(theta)
    lifted = lift_endo(N)
    deformer = poisson_bracket(poisson_bracket(lifted, t), lifted)
    return (deformer + cps.lam * t) * Fraction(-1, 2)


@dataclass
class TensorReport:
    """Classification of a skew endomorphism against a Courant structure."""

    skew: bool
    cps: Optional[CpsResult]
    weak_deforming: bool
    deforming: bool
    deforming_scale: Optional[Fraction]
    nijenhuis: Optional[bool]          # set only when cps holds
    weak_nijenhuis: Optional[bool]     # set only when cps holds
    witnesses: list = field(default_factory=list)


def classify(theta, N: Endomorphism) -> TensorReport:
    """Full classification: deforming / weak deforming / (weak) Nijenhuis."""
    if not is_skew(N):
        raise NotSkewError("classification is defined for skew endomorphisms")
    t = _theta_poly(theta)
    sig = N.sig
    lifted = lift_endo(N)
    deformer = poisson_bracket(poisson_bracket(lifted, t), lifted)
    cocycle_defect = poisson_bracket(t, deformer)
    weak_deforming = cocycle_defect.is_zero()

    witnesses = []
    if not weak_deforming:
        witnesses.append(("cocycle_defect", cocycle_defect))

    # deforming: deformer = c * theta for an exact rational c
    if t.is_zero():
        deforming, scale = deformer.is_zero(), Fraction(0)
    elif deformer.is_zero():
        deforming, scale = True, Fraction(0)
    else:
        mono, coeff = next(iter(t.sorted_terms()))
        c = deformer.coeff(mono) / coeff
        residual = deformer - c * t
        deforming = residual.is_zero()
        scale = c if deforming else None
        if not deforming:
            witnesses.append(("proportionality_residual", residual))

    cps = cps_check(sig, N)
    nij = weak_nij = None
    if cps is not None:
        tt = (deformer + cps.lam * t) * Fraction(-1, 2)
        nij = tt.is_zero()
        weak_nij = poisson_bracket(t, tt).is_zero()
        if not nij:
            witnesses.append(("torsion_tensor", tt))

    return TensorReport(
        skew=True,
        cps=cps,
        weak_deforming=weak_deforming,
        deforming=deforming,
        deforming_scale=scale,
        nijenhuis=nij,
        weak_nijenhuis=weak_nij,
        witnesses=witnesses,
    )


@dataclass
class DeformationResult:
    theta_prime: GradedPoly
    valid: bool
    compatible: Optional[bool]
    structure: Optional[CourantStructure]
    witness: Optional[GradedPoly]


def deform(theta, N: Endomorphism) -> DeformationResult:
    """Deform theta to {lift, theta} and test the master equation.

    Validity is equivalent to N being weak deforming; when valid, the sum
    theta + theta' is checked to be a compatible pair.
    """
    if not is_skew(N):
        raise NotSkewError("deformation requires a skew endomorphism")
    t = _theta_poly(theta)
    theta_prime = poisson_bracket(lift_endo(N), t)
    self_bracket = poisson_bracket(theta_prime, theta_prime)
    valid = self_bracket.is_zero()
    compatible = None
    structure = None
    if valid:
        total = t + theta_prime
        compatible = poisson_bracket(total, total).is_zero()
        structure = CourantStructure(t.sig, theta_prime)
    return DeformationResult(
        theta_prime, valid, compatible, structure,
        None if valid else self_bracket,
    )


def is_morphism(
    theta_src,
    theta_dst,
    N: Endomorphism,
    samples: Sequence[tuple[GradedPoly, GradedPoly]] = (),
    max_q_degree: int = 1,
) -> bool:
    """Whether N [u,v]_src = [Nu, Nv]_dst on a spanning family of sections."""
    from .courant import basis_sections

    t_src = _theta_poly(theta_src)
    t_dst = _theta_poly(theta_dst)
    sig = t_src.sig
    pool = basis_sections(sig, max_q_degree if sig.base_dim else 0)
    pairs = list(itertools.product(pool, repeat=2)) + list(samples)
    for u, v in pairs:
        lhs = N.apply(dorfman(t_src, u, v))
        rhs = dorfman(t_dst, N.apply(u), N.apply(v))
        if lhs != rhs:
            return False
    return True
