"""Irreducibility of Courant algebroids and Lie algebroids.

An endomorphism phi commutes with the Dorfman bracket when

    (P1)   [u, phi v] = phi [u,v]   and   [phi u, v] = phi [u,v]
    (P2)   [u, phi v] = phi [u,v]   and   phi d<u,v> = d<phi u, v>
    (P1')  [u, phi v] = phi [u,v]   and   [phi u, u] = phi [u,u]

for all sections u, v.  A structure is irreducible when every symmetric
phi satisfying (P1) is a constant multiple of the identity.

The solver expands phi over an ansatz of matrix entries polynomial in the
base coordinates up to a degree bound, imposes the chosen condition on
spanning test sections, and computes the exact rational nullspace.  Over a
point constant endomorphisms exhaust all of End(E), so verdicts there are
complete; over a base the verdict is honest about the degree bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import AlgebraSignature, GradedPoly, Monomial
from .courant import _theta_poly, dorfman, partial_op, q_monomials
from .nijenhuis import Endomorphism, transpose
from .poisson import poisson_bracket


def nullspace(rows: Sequence[Sequence[Fraction]], n_cols: int) -> list[tuple[Fraction, ...]]:
    """Basis of the exact nullspace of a rational matrix.

    Deterministic: Gauss-Jordan with first-nonzero pivoting in column
    order, free variables set to 1 in column order.
    """
    mat = [list(row) for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        f = mat[r][c]
        mat[r] = [x / f for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                fi = mat[i][c]
                mat[i] = [x - fi * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n_cols
        vec[fc] = Fraction(1)
        for row_i, pc in enumerate(pivots):
            vec[pc] = -mat[row_i][fc]
        basis.append(tuple(vec))
    return basis


@dataclass(frozen=True)
class AnsatzSpace:
    """Endomorphism unknowns: matrix entries polynomial in q up to degree d."""

    sig: AlgebraSignature
    indices: tuple[int, ...]      # which odd generators the matrix acts on
    max_q_degree: int
    monos: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, sig, indices=None, max_q_degree: int = 0) -> "AnsatzSpace":
        idx = tuple(indices) if indices is not None else tuple(range(sig.n_odd))
        if max_q_degree < 0:
            raise ValueError("ansatz degree must be >= 0")
        return cls(sig, idx, max_q_degree, tuple(q_monomials(sig, max_q_degree)))

    @property
    def dim(self) -> int:
        k = len(self.indices)
        return k * k * len(self.monos)

    def unknowns(self):
        """(out_index, in_index, q_exponent) triples in deterministic order."""
        for b in self.indices:
            for a in self.indices:
                for mono in self.monos:
                    yield b, a, mono

    def unit(self, b: int, a: int, mono) -> Endomorphism:
        """The endomorphism with a single entry q^mono at (b, a)."""
        sig = self.sig
        z = sig.zero()
        entry = GradedPoly(sig, {Monomial(mono, (), sig.zero_exp()): Fraction(1)})
        rows = [
            [entry if (i == b and j == a) else z for j in range(sig.n_odd)]
            for i in range(sig.n_odd)
        ]
        return Endomorphism(sig, tuple(tuple(r) for r in rows))

    def assemble(self, coeffs: Sequence[Fraction]) -> Endomorphism:
        """Endomorphism from a coefficient vector over `unknowns()`."""
        sig = self.sig
        z = sig.zero()
        rows = [[z] * sig.n_odd for _ in range(sig.n_odd)]
        for (b, a, mono), c in zip(self.unknowns(), coeffs):
            if c:
                rows[b][a] = rows[b][a] + GradedPoly(
                    sig, {Monomial(mono, (), sig.zero_exp()): c}
                )
        return Endomorphism(sig, tuple(tuple(r) for r in rows))


@dataclass
class SolutionSpace:
    basis: list[Endomorphism]
    ansatz: AnsatzSpace
    condition: str
    symmetric: bool

    @property
    def dim(self) -> int:
        return len(self.basis)


def _collect_rows(system_polys, n_unknowns):
    """Turn per-unknown polynomial columns into rational coefficient rows."""
    rows: dict = {}
    for j, polys in enumerate(system_polys):
        for key, poly in polys:
            for mono, coeff in poly.terms.items():
                rows.setdefault((key, mono), [Fraction(0)] * n_unknowns)[j] = coeff
    return [rows[k] for k in sorted(rows, key=lambda kv: (kv[0], kv[1]))]


def solve_commuting(
    theta,
    symmetric: bool,
    max_q_degree: int = 0,
    condition: str = "P1",
    indices=None,
    section_indices=None,
) -> SolutionSpace:
    """Exact solution space of a bracket-commutation condition.

    condition selects the second defining equation: "P1" uses
    [phi u, v] = phi [u,v], "P2" uses phi d<u,v> = d<phi u, v>, "P1prime"
    uses the diagonal form [phi u, u] = phi [u,u] (quantified over sums of
    test sections, which polarizes it).  With symmetric=True the rows
    phi = transpose(phi) are appended.
    """
    t = _theta_poly(theta)
    sig = t.sig
    ansatz = AnsatzSpace.build(sig, indices, max_q_degree)
    sec_idx = tuple(section_indices) if section_indices is not None else ansatz.indices
    test_sections = [
        GradedPoly(sig, {Monomial(mono, (a,), sig.zero_exp()): Fraction(1)})
        for mono in q_monomials(sig, max_q_degree)
        for a in sec_idx
    ]

    unknown_list = list(ansatz.unknowns())
    columns = []
    for b, a, mono in unknown_list:
        phi = ansatz.unit(b, a, mono)
        polys = []
        if condition in ("P1", "P2", "P1prime"):
            for i, u in enumerate(test_sections):
                for j, v in enumerate(test_sections):
                    polys.append(
                        ((0, i, j), dorfman(t, u, phi.apply(v)) - phi.apply(dorfman(t, u, v)))
                    )
        if condition == "P1":
            for i, u in enumerate(test_sections):
                for j, v in enumerate(test_sections):
                    polys.append(
                        ((1, i, j), dorfman(t, phi.apply(u), v) - phi.apply(dorfman(t, u, v)))
                    )
        elif condition == "P2":
            for i, u in enumerate(test_sections):
                for j, v in enumerate(test_sections):
                    lhs = phi.apply(partial_op(t, poisson_bracket(u, v)))
                    rhs = partial_op(t, poisson_bracket(phi.apply(u), v))
                    polys.append(((1, i, j), lhs - rhs))
        elif condition == "P1prime":
            # diagonal condition on u, v and u+v covers the polarization
            singles = list(test_sections)
            sums = [u + v for u, v in itertools.combinations(test_sections, 2)]
            for i, u in enumerate(singles + sums):
                polys.append(
                    ((1, i, 0), dorfman(t, phi.apply(u), u) - phi.apply(dorfman(t, u, u)))
                )
        else:
            raise ValueError(f"unknown condition {condition!r}")
        if symmetric:
            diff = phi - transpose(phi)
            for r in range(sig.n_odd):
                for c in range(sig.n_odd):
                    polys.append(((2, r, c), diff.rows[r][c]))
        columns.append(polys)

    rows = _collect_rows(columns, len(unknown_list))
    kernel = nullspace(rows, len(unknown_list))
    basis = [ansatz.assemble(vec) for vec in kernel]
    return SolutionSpace(basis, ansatz, condition, symmetric)


def solve_p1(theta, symmetric: bool = True, max_q_degree: int = 0) -> SolutionSpace:
    """Solution space of (P1) over the polynomial ansatz."""
    return solve_commuting(theta, symmetric, max_q_degree, "P1")


def _is_scalar_identity(sig, endo: Endomorphism) -> bool:
    c = None
    for i in range(sig.n_odd):
        for j in range(sig.n_odd):
            e = endo.rows[i][j]
            if i == j:
                if not e.is_constant():
                    return False
                v = e.constant_value()
                if c is None:
                    c = v
                elif v != c:
                    return False
            elif not e.is_zero():
                return False
    return True


def span_is_identity_line(sig, basis: list[Endomorphism]) -> bool:
    return len(basis) == 1 and _is_scalar_identity(sig, basis[0]) and not basis[0].is_zero()


def _non_scalar_witness(sig, basis: list[Endomorphism]) -> Optional[Endomorphism]:
    for endo in basis:
        if not _is_scalar_identity(sig, endo):
            return endo
    return None


@dataclass
class IrreducibilityVerdict:
    kind: str                      # "irreducible" | "reducible" | "irreducible_up_to_degree"
    complete: bool                 # True over a point (no base coordinates)
    max_q_degree: int
    solution_dim: int
    witness: Optional[Endomorphism]
    basis: list

    def __str__(self):
        if self.kind == "reducible":
            return f"reducible (witness {self.witness})"
        if self.kind == "irreducible":
            return "irreducible"
        return f"irreducible up to ansatz degree {self.max_q_degree}"


def is_irreducible_courant(theta, max_q_degree: int = 2) -> IrreducibilityVerdict:
    """Verdict for the symmetric (P1) commutant of a Courant structure."""
    t = _theta_poly(theta)
    sig = t.sig
    sol = solve_p1(t, symmetric=True, max_q_degree=max_q_degree)
    return _verdict(sig, sol, max_q_degree)


def is_irreducible_lie_algebroid(db, max_q_degree: int = 2) -> IrreducibilityVerdict:
    """Verdict for the one-sided commutant psi [X,Y] = [X, psi Y] on A."""
    sol = _solve_onesided(db, max_q_degree)
    return _verdict(db.sig, sol, max_q_degree)


def _solve_onesided(db, max_q_degree: int) -> SolutionSpace:
    sig = db.sig
    ansatz = AnsatzSpace.build(sig, db.a_idx, max_q_degree)
    test_sections = [
        GradedPoly(sig, {Monomial(mono, (a,), sig.zero_exp()): Fraction(1)})
        for mono in q_monomials(sig, max_q_degree)
        for a in db.a_idx
    ]
    columns = []
    for b, a, mono in ansatz.unknowns():
        phi = ansatz.unit(b, a, mono)
        polys = []
        for i, u in enumerate(test_sections):
            for j, v in enumerate(test_sections):
                polys.append(
                    ((0, i, j), phi.apply(dorfman(db.mu, u, v)) - dorfman(db.mu, u, phi.apply(v)))
                )
        columns.append(polys)
    rows = _collect_rows(columns, ansatz.dim)
    kernel = nullspace(rows, ansatz.dim)
    basis = [ansatz.assemble(vec) for vec in kernel]
    return SolutionSpace(basis, ansatz, "onesided", False)


def _verdict(sig, sol: SolutionSpace, max_q_degree: int) -> IrreducibilityVerdict:
    complete = sig.base_dim == 0
    # restrict the identity test to the generators the ansatz acts on
    sub = sol.ansatz.indices
    def scalar_on_sub(endo):
        c = None
        for i in sub:
            for j in sub:
                e = endo.rows[i][j]
                if i == j:
                    if not e.is_constant():
                        return False
                    v = e.constant_value()
                    if c is None:
                        c = v
                    elif v != c:
                        return False
                elif not e.is_zero():
                    return False
        return True
    only_identity = len(sol.basis) == 1 and scalar_on_sub(sol.basis[0])
    witness = next((e for e in sol.basis if not scalar_on_sub(e)), None)
    if only_identity:
        kind = "irreducible" if complete else "irreducible_up_to_degree"
    else:
        kind = "reducible"
    return IrreducibilityVerdict(kind, complete, max_q_degree, len(sol.basis), witness, sol.basis)
