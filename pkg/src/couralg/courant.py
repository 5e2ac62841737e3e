"""Courant structures: derived anchor, Dorfman/Courant brackets, axioms.

A Courant structure is a degree-3 element theta with {theta, theta} = 0.
Sections of the underlying bundle are the degree-1 elements; the odd
generators themselves serve as the working basis of sections.  All derived
operations are nested Poisson brackets:

    anchor:   rho(u) f = {{u, theta}, f}
    Dorfman:  [u, v]   = {{u, theta}, v}
    partial:  d f      = {theta, f}

The identification of the partial operator with {theta, .} is validated
against its defining property <u, df> = rho(u) f in the test suite rather
than assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .algebra import AlgebraSignature, GradedPoly, Monomial
from .errors import DegreeError, MasterEquationError
from .poisson import is_master, poisson_bracket


def ensure_section(u: GradedPoly, what: str = "section") -> GradedPoly:
    if not u.has_degree(1):
        raise DegreeError(f"{what} must be a degree-1 element, got {u}")
    return u


def ensure_function(f: GradedPoly, what: str = "function") -> GradedPoly:
    if not (f.has_degree(0) and f.is_p_free()):
        raise DegreeError(f"{what} must be a degree-0 base function, got {f}")
    return f


@dataclass(frozen=True)
class CourantStructure:
    """A validated Courant structure: degree-3 theta with zero self-bracket."""

    sig: AlgebraSignature
    theta: GradedPoly

    @classmethod
    def from_theta(cls, theta: GradedPoly) -> "CourantStructure":
        theta.ensure_degree(3, "theta")
        if not is_master(theta):
            raise MasterEquationError(
                "theta does not satisfy the master equation",
                witness=poisson_bracket(theta, theta),
            )
        return cls(theta.sig, theta)

    def d(self, f: GradedPoly) -> GradedPoly:
        return poisson_bracket(self.theta, f)

    def anchor(self, u, f):
        return anchor_apply(self, u, f)

    def dorfman(self, u, v):
        return dorfman(self, u, v)

    def partial(self, f):
        return partial_op(self, f)

    def courant(self, u, v):
        return courant_bracket(self, u, v)


def _theta_poly(theta) -> GradedPoly:
    """Accept a raw degree-3 element or anything exposing `.theta`."""
    return theta if isinstance(theta, GradedPoly) else theta.theta


def anchor_apply(theta, u: GradedPoly, f: GradedPoly) -> GradedPoly:
    """rho(u) f = {{u, theta}, f}."""
    ensure_section(u, "u")
    ensure_function(f, "f")
    t = _theta_poly(theta)
    return poisson_bracket(poisson_bracket(u, t), f)


def dorfman(theta, u: GradedPoly, v: GradedPoly) -> GradedPoly:
    """The Dorfman bracket [u, v] = {{u, theta}, v}."""
    ensure_section(u, "u")
    ensure_section(v, "v")
    t = _theta_poly(theta)
    return poisson_bracket(poisson_bracket(u, t), v)


def partial_op(theta, f: GradedPoly) -> GradedPoly:
    """The operator d with <u, df> = rho(u) f, computed as {theta, f}."""
    ensure_function(f, "f")
    t = _theta_poly(theta)
    return poisson_bracket(t, f)


def pairing(u: GradedPoly, v: GradedPoly) -> GradedPoly:
    """<u, v> = {u, v} for sections."""
    ensure_section(u, "u")
    ensure_section(v, "v")
    return poisson_bracket(u, v)


def courant_bracket(theta, u: GradedPoly, v: GradedPoly) -> GradedPoly:
    """Skew-symmetrization of the Dorfman bracket."""
    return (dorfman(theta, u, v) - dorfman(theta, v, u)) * Fraction(1, 2)


def basis_sections(sig: AlgebraSignature, max_q_degree: int = 0) -> list[GradedPoly]:
    """Odd generators times q-monomials up to the given total degree."""
    out = []
    for mono_q in q_monomials(sig, max_q_degree):
        for a in range(sig.n_odd):
            out.append(
                GradedPoly(sig, {Monomial(mono_q, (a,), sig.zero_exp()): Fraction(1)})
            )
    return out


def q_monomials(sig: AlgebraSignature, max_degree: int) -> list[tuple[int, ...]]:
    """All q-exponent vectors of total degree <= max_degree, sorted."""
    if sig.base_dim == 0:
        return [()]
    exps = []
    for total in range(max_degree + 1):
        for combo in itertools.product(range(total + 1), repeat=sig.base_dim):
            if sum(combo) == total:
                exps.append(combo)
    return exps


@dataclass
class AxiomFailure:
    axiom: str
    inputs: tuple
    difference: GradedPoly

    def describe(self) -> str:
        ins = ", ".join(str(x) for x in self.inputs)
        return f"{self.axiom} fails at ({ins}): residue {self.difference}"


@dataclass
class AxiomReport:
    ok: bool
    checked: int
    failures: list


def verify_courant_axioms(
    theta,
    sections: Sequence[GradedPoly] = (),
    max_q_degree: int = 2,
    include_jacobi: bool = True,
) -> AxiomReport:
    """Check the two pairing axioms (and optionally the Jacobi identity).

    axiom 1:  [u,v] + [v,u] = d<u,v>
    axiom 2:  <[u,v], w> + <v, [u,w]> = <u, d<v,w>>
    Jacobi:   [u,[v,w]] = [[u,v],w] + [v,[u,w]]

    Runs over the odd-generator basis with polynomial coefficients up to
    max_q_degree, plus any extra sections supplied.  Failures are report
    content, not exceptions.
    """
    t = _theta_poly(theta)
    sig = t.sig
    basis = basis_sections(sig, max_q_degree)
    pool = list(basis) + [ensure_section(s) for s in sections]
    failures = []
    checked = 0

    for u, v in itertools.product(pool, repeat=2):
        lhs = dorfman(t, u, v) + dorfman(t, v, u)
        rhs = partial_op(t, poisson_bracket(u, v))
        checked += 1
        if lhs != rhs:
            failures.append(AxiomFailure("axiom1", (u, v), lhs - rhs))

    for u, v, w in itertools.product(pool, repeat=3):
        lhs = poisson_bracket(dorfman(t, u, v), w) + poisson_bracket(
            v, dorfman(t, u, w)
        )
        rhs = poisson_bracket(u, partial_op(t, poisson_bracket(v, w)))
        checked += 1
        if lhs != rhs:
            failures.append(AxiomFailure("axiom2", (u, v, w), lhs - rhs))
        if include_jacobi:
            jac = dorfman(t, u, dorfman(t, v, w)) - dorfman(
                t, dorfman(t, u, v), w
            ) - dorfman(t, v, dorfman(t, u, w))
            checked += 1
            if not jac.is_zero():
                failures.append(AxiomFailure("jacobi", (u, v, w), jac))

    return AxiomReport(not failures, checked, failures)


def section_components(u: GradedPoly) -> dict[int, GradedPoly]:
    """Decompose a section as sum_a f_a(q) t_a; returns {a: f_a}."""
    ensure_section(u)
    sig = u.sig
    comps: dict[int, dict] = {}
    for mono, coeff in u.terms.items():
        if any(mono.p) or len(mono.tau) != 1:
            raise DegreeError(f"not a section of the bundle: {u}")
        a = mono.tau[0]
        comps.setdefault(a, {})[Monomial(mono.q, (), mono.p)] = coeff
    return {a: GradedPoly(sig, d) for a, d in comps.items()}


def section_from_components(sig: AlgebraSignature, comps: dict[int, GradedPoly]) -> GradedPoly:
    """Inverse of `section_components`."""
    acc = sig.zero()
    for a, f in comps.items():
        acc = acc + f * sig.tau(a)
    return acc
