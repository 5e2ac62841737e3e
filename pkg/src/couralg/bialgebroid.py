"""Doubles of Lie bialgebroids: block tensors, torsion sums, deformations.

A double model is a signature whose odd generators are labelled A / A* in
dual pairs with the canonical hyperbolic pairing, together with two
degree-3 elements mu (the A-structure) and gamma (the A*-structure).
A Lie bialgebroid satisfies {mu,mu} = {mu,gamma} = {gamma,gamma} = 0 and
its double is the Courant structure mu + gamma.

Structure elements are assembled from structure constants and anchors as

    mu    = - sum rho^i_alpha p_i b^alpha
            - 1/2 sum c^gamma_{alpha beta} b^alpha b^beta a_gamma

with the signs fixed once by requiring the derived Dorfman bracket on the
A-generators to reproduce the input structure constants (a calibration
check shipped in the tests).

Endomorphisms N of A embed as skew block endomorphisms diag(N, -N^T) of
the double; bivectors pi and 2-forms omega fill the off-diagonal blocks.
The degree-2 lift of a block endomorphism is the sum of the lifts of its
blocks, which is what makes the torsion of the double split into A- and
A*-side torsions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import LABEL_A, LABEL_ASTAR, AlgebraSignature, GradedPoly, rat
from .courant import CourantStructure, dorfman, section_components
from .errors import BialgebroidError, DegreeError, ModelError, TorsionNonzeroError
from .nijenhuis import Endomorphism, cps_check, lift_endo, torsion_dorfman
from .poisson import nested_eval, poisson_bracket


# ---------------------------------------------------------------------------
# small exact matrices over the base ring (entries are GradedPoly functions)

def _mat(sig, entries):
    return tuple(
        tuple(x if isinstance(x, GradedPoly) else sig.const(rat(x)) for x in row)
        for row in entries
    )


def _mat_zero(sig, n):
    z = sig.zero()
    return tuple(tuple(z for _ in range(n)) for _ in range(n))


def _mat_id(sig, n):
    one, z = sig.one(), sig.zero()
    return tuple(tuple(one if i == j else z for j in range(n)) for i in range(n))


def _mat_t(m):
    n = len(m)
    return tuple(tuple(m[j][i] for j in range(n)) for i in range(n))


def _mat_neg(m):
    return tuple(tuple(-x for x in row) for row in m)


def _mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def _mat_mul(sig, a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = sig.zero()
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _mat_eq(a, b):
    return all(x == y for r, s in zip(a, b) for x, y in zip(r, s))


def _mat_is_zero(m):
    return all(x.is_zero() for row in m for x in row)


def _mat_is_antisym(m):
    return _mat_is_zero(_mat_add(m, _mat_t(m)))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleModel:
    """A double A + A*: labelled hyperbolic signature with mu and gamma."""

    sig: AlgebraSignature
    mu: GradedPoly
    gamma: GradedPoly
    a_idx: tuple[int, ...] = field(init=False, repr=False, compare=False)
    b_idx: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sig = self.sig
        a_idx = tuple(i for i, lab in enumerate(sig.labels) if lab == LABEL_A)
        b_all = [i for i, lab in enumerate(sig.labels) if lab == LABEL_ASTAR]
        if not a_idx or len(a_idx) != len(b_all) or len(a_idx) + len(b_all) != sig.n_odd:
            raise ModelError("double model needs equal A and A* labelled halves")
        g = sig.pairing
        b_idx = []
        for a in a_idx:
            partners = [b for b in b_all if g[a][b] != 0]
            if len(partners) != 1 or g[a][partners[0]] != 1:
                raise ModelError("pairing must pair each A generator with exactly one A* partner, value 1")
            b_idx.append(partners[0])
        if len(set(b_idx)) != len(b_idx):
            raise ModelError("A* partners must be distinct")
        for x, y in itertools.combinations(a_idx, 2):
            if g[x][y] != 0:
                raise ModelError("pairing must vanish on the A half")
        for x, y in itertools.combinations(b_idx, 2):
            if g[x][y] != 0:
                raise ModelError("pairing must vanish on the A* half")
        self.mu.ensure_degree(3, "mu")
        self.gamma.ensure_degree(3, "gamma")
        object.__setattr__(self, "a_idx", a_idx)
        object.__setattr__(self, "b_idx", tuple(b_idx))

    @property
    def rank(self) -> int:
        return len(self.a_idx)

    @property
    def theta(self) -> GradedPoly:
        return self.mu + self.gamma

    def A(self, i: int) -> GradedPoly:
        """Basis section e_i of A (0-based)."""
        return self.sig.tau(self.a_idx[i])

    def Astar(self, i: int) -> GradedPoly:
        """Dual basis section of A*."""
        return self.sig.tau(self.b_idx[i])

    def a_sections(self) -> list[GradedPoly]:
        return [self.A(i) for i in range(self.rank)]

    def astar_sections(self) -> list[GradedPoly]:
        return [self.Astar(i) for i in range(self.rank)]

    def all_sections(self) -> list[GradedPoly]:
        return self.a_sections() + self.astar_sections()

    def bidegree(self, poly: GradedPoly):
        """Set of (A-count, A*-count) label pairs over the terms of poly."""
        out = set()
        lab = self.sig.labels
        for mono in poly.terms:
            na = sum(1 for t in mono.tau if lab[t] == LABEL_A)
            nb = len(mono.tau) - na
            out.add((na, nb))
        return out


def check_bialgebroid(db: DoubleModel) -> list[tuple[str, GradedPoly]]:
    """Nonzero compatibility brackets of (mu, gamma); empty list when valid."""
    failures = []
    for name, f, g in (
        ("{mu,mu}", db.mu, db.mu),
        ("{mu,gamma}", db.mu, db.gamma),
        ("{gamma,gamma}", db.gamma, db.gamma),
    ):
        br = poisson_bracket(f, g)
        if not br.is_zero():
            failures.append((name, br))
    return failures


def assemble_double(db: DoubleModel) -> CourantStructure:
    """Validate the bialgebroid conditions and return the Courant structure."""
    failures = check_bialgebroid(db)
    if failures:
        names = ", ".join(name for name, _ in failures)
        raise BialgebroidError(f"bialgebroid conditions fail: {names}", failures)
    return CourantStructure(db.sig, db.theta)


# ---------------------------------------------------------------------------
# structure builders


def double_indices(sig: AlgebraSignature) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(A indices, matched A* partner indices) of a labelled signature."""
    probe = DoubleModel(sig, sig.zero(), sig.zero())
    return probe.a_idx, probe.b_idx


def mu_from_structure(sig: AlgebraSignature, brackets, anchor=None) -> GradedPoly:
    """A-structure from constants [e_a, e_b] = c^g_{ab} e_g and anchor rho^i_a.

    brackets[g][a][b] = c^g_{ab} (antisymmetric in a, b); anchor[i][a] over
    the base coordinates.  Works on any labelled double signature.
    """
    a_idx, b_idx = double_indices(sig)
    return _structure_element(sig, a_idx, b_idx, brackets, anchor)


def gamma_from_structure(sig: AlgebraSignature, brackets, anchor=None) -> GradedPoly:
    """A*-structure from constants of the dual brackets and anchor."""
    a_idx, b_idx = double_indices(sig)
    return _structure_element(sig, b_idx, a_idx, brackets, anchor)


def _structure_element(sig, side_idx, dual_idx, brackets, anchor) -> GradedPoly:
    n = len(side_idx)
    acc = sig.zero()
    if anchor is not None:
        for i, row in enumerate(anchor):
            for a, coeff in enumerate(row):
                c = rat(coeff)
                if c:
                    acc = acc - c * sig.p(i + 1) * sig.tau(dual_idx[a])
    if brackets is not None:
        for g in range(n):
            for a in range(n):
                for b in range(n):
                    c = rat(brackets[g][a][b])
                    if c != -rat(brackets[g][b][a]):
                        raise ValueError("structure constants must be antisymmetric in the lower indices")
                    if c:
                        acc = acc - Fraction(1, 2) * c * (
                            sig.tau(dual_idx[a]) * sig.tau(dual_idx[b]) * sig.tau(side_idx[g])
                        )
    return acc


def quadratic_theta(sig: AlgebraSignature, brackets) -> GradedPoly:
    """Courant structure of a quadratic Lie algebra over a point.

    brackets[c][x][y] are the structure constants in the generator basis;
    the pairing must be ad-invariant, which is detected by the total
    antisymmetry of the lowered constants.
    """
    n = sig.n_odd
    g = sig.pairing
    w = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                acc = Fraction(0)
                for x in range(n):
                    for y in range(n):
                        cc = rat(brackets[c][x][y])
                        if cc:
                            acc += g[a][x] * g[b][y] * cc
                w[a][b][c] = acc
    # total antisymmetry of w encodes invariance of the pairing
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if w[a][b][c] != -w[b][a][c] or w[a][b][c] != -w[a][c][b]:
                    raise ValueError("pairing is not invariant for these structure constants")
    acc = sig.zero()
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if w[a][b][c]:
                    acc = acc - Fraction(1, 6) * w[a][b][c] * (
                        sig.tau(a) * sig.tau(b) * sig.tau(c)
                    )
    return acc


# ---------------------------------------------------------------------------
# block endomorphisms


@dataclass(frozen=True)
class BlockEndomorphism:
    """Block map (N: A->A, pi: A*->A, omega: A->A*) of a double.

    The assembled endomorphism [[N, pi], [omega, -N^T]] is skew for the
    canonical pairing exactly because pi and omega are antisymmetric, which
    is enforced here.
    """

    db: DoubleModel
    N: tuple
    pi: tuple
    omega: tuple

    @classmethod
    def build(cls, db: DoubleModel, N=None, pi=None, omega=None) -> "BlockEndomorphism":
        sig = db.sig
        n = db.rank
        Nm = _mat(sig, N) if N is not None else _mat_zero(sig, n)
        pim = _mat(sig, pi) if pi is not None else _mat_zero(sig, n)
        omm = _mat(sig, omega) if omega is not None else _mat_zero(sig, n)
        for name, m in (("N", Nm), ("pi", pim), ("omega", omm)):
            if len(m) != n or any(len(r) != n for r in m):
                raise ValueError(f"block {name} must be {n}x{n}")
        if not _mat_is_antisym(pim):
            raise ValueError("pi must be an antisymmetric matrix (a bivector)")
        if not _mat_is_antisym(omm):
            raise ValueError("omega must be an antisymmetric matrix (a 2-form)")
        return cls(db, Nm, pim, omm)

    def assemble(self) -> Endomorphism:
        """The endomorphism of the double in the full generator basis."""
        db = self.db
        sig = db.sig
        n = db.rank
        z = sig.zero()
        m = sig.n_odd
        rows = [[z] * m for _ in range(m)]
        for beta in range(n):
            for alpha in range(n):
                rows[db.a_idx[beta]][db.a_idx[alpha]] = self.N[beta][alpha]
                rows[db.b_idx[beta]][db.a_idx[alpha]] = self.omega[beta][alpha]
                rows[db.a_idx[beta]][db.b_idx[alpha]] = self.pi[beta][alpha]
                rows[db.b_idx[beta]][db.b_idx[alpha]] = -self.N[alpha][beta]
        return Endomorphism(sig, tuple(tuple(r) for r in rows))


def block_lift(db: DoubleModel, block: BlockEndomorphism) -> GradedPoly:
    """Degree-2 lift of an assembled block endomorphism."""
    return lift_endo(block.assemble())


@dataclass
class BlockCpsReport:
    npi_is_bivector: bool
    omegan_is_two_form: bool
    square_scalar: Optional[Fraction]
    ok: bool


def block_cps(db: DoubleModel, block: BlockEndomorphism) -> BlockCpsReport:
    """Conditions for the assembled block map to square to a scalar."""
    sig = db.sig
    n = db.rank
    npi = _mat_mul(sig, block.N, block.pi)
    cond_i = _mat_is_antisym(npi)
    omn = _mat_mul(sig, block.omega, block.N)
    cond_ii = _mat_is_antisym(omn)
    sq = _mat_add(_mat_mul(sig, block.N, block.N), _mat_mul(sig, block.pi, block.omega))
    lam = None
    scalar = True
    for i in range(n):
        for j in range(n):
            e = sq[i][j]
            if i == j:
                if not e.is_constant():
                    scalar = False
                elif lam is None:
                    lam = e.constant_value()
                elif e.constant_value() != lam:
                    scalar = False
            elif not e.is_zero():
                scalar = False
    ok = cond_i and cond_ii and scalar
    return BlockCpsReport(cond_i, cond_ii, lam if scalar else None, ok)


def lift_a_endo(db: DoubleModel, N) -> GradedPoly:
    """Lift of an A-endomorphism through its skew block diag(N, -N^T)."""
    return block_lift(db, BlockEndomorphism.build(db, N=_mat(db.sig, N)))


def lift_astar_endo(db: DoubleModel, M) -> GradedPoly:
    """Lift of an A*-endomorphism M through the skew block diag(-M^T, M)."""
    Mm = _mat(db.sig, M)
    return lift_a_endo(db, _mat_neg(_mat_t(Mm)))


def lift_bivector(db: DoubleModel, pi) -> GradedPoly:
    return block_lift(db, BlockEndomorphism.build(db, pi=_mat(db.sig, pi)))


def lift_two_form(db: DoubleModel, omega) -> GradedPoly:
    return block_lift(db, BlockEndomorphism.build(db, omega=_mat(db.sig, omega)))


def endo_on_A(db: DoubleModel, N) -> Endomorphism:
    """Full-signature endomorphism acting as N on A sections, 0 on A*."""
    sig = db.sig
    z = sig.zero()
    m = sig.n_odd
    Nm = _mat(sig, N)
    rows = [[z] * m for _ in range(m)]
    for beta in range(db.rank):
        for alpha in range(db.rank):
            rows[db.a_idx[beta]][db.a_idx[alpha]] = Nm[beta][alpha]
    return Endomorphism(sig, tuple(tuple(r) for r in rows))


def endo_on_Astar(db: DoubleModel, M) -> Endomorphism:
    """Full-signature endomorphism acting as M on A* sections, 0 on A."""
    sig = db.sig
    z = sig.zero()
    m = sig.n_odd
    Mm = _mat(sig, M)
    rows = [[z] * m for _ in range(m)]
    for beta in range(db.rank):
        for alpha in range(db.rank):
            rows[db.b_idx[beta]][db.b_idx[alpha]] = Mm[beta][alpha]
    return Endomorphism(sig, tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# tensor lifts


def element_from_pair_values(sig: AlgebraSignature, values) -> GradedPoly:
    """The degree-2 element whose derived evaluation on generator pairs is
    the given antisymmetric matrix of base functions."""
    n = sig.n_odd
    E = _mat(sig, values)
    if not _mat_is_antisym(E):
        raise ValueError("pair values must be antisymmetric")
    g = sig.pairing
    acc = sig.zero()
    for c in range(n):
        for e in range(c + 1, n):
            entry = sig.zero()
            for i in range(n):
                if g[c][i] == 0:
                    continue
                for j in range(n):
                    if g[e][j] == 0:
                        continue
                    entry = entry + E[i][j] * (g[c][i] * g[e][j])
            if not entry.is_zero():
                acc = acc + entry * (sig.tau(c) * sig.tau(e))
    return acc


def lift_tensor(db: DoubleModel, t, kind: str) -> GradedPoly:
    """Degree-3 lift of a covariant 3-tensor of a double.

    kind "A": t maps two A-sections to an A-section, t[g][a][b] with
    t(e_a, e_b) = sum_g t[g][a][b] e_g, antisymmetric in (a, b).
    kind "Astar": same with the roles of A and A* exchanged.
    The lift evaluates cyclically: its triple derived bracket against
    (u, v, w) returns the three duality pairings summed over the cycle.
    """
    sig = db.sig
    n = db.rank
    if kind == "A":
        dual, side = db.b_idx, db.a_idx
    elif kind == "Astar":
        dual, side = db.a_idx, db.b_idx
    else:
        raise ValueError("kind must be 'A' or 'Astar'")
    acc = sig.zero()
    for g in range(n):
        for a in range(n):
            for b in range(n):
                c = t[g][a][b]
                c = c if isinstance(c, GradedPoly) else sig.const(rat(c))
                cneg = t[g][b][a]
                cneg = cneg if isinstance(cneg, GradedPoly) else sig.const(rat(cneg))
                if c != -cneg:
                    raise ValueError("tensor must be antisymmetric in its two same-type slots")
                if not c.is_zero():
                    acc = acc - Fraction(1, 2) * c * (
                        sig.tau(dual[a]) * sig.tau(dual[b]) * sig.tau(side[g])
                    )
    return acc


def torsion_tensor_components(db: DoubleModel, theta: GradedPoly, endo: Endomorphism, side: str):
    """Elementwise torsion over one half of the double, as structure data.

    Returns t[g][a][b] with T(s_a, s_b) = sum_g t[g][a][b] s_g over the
    chosen half's basis sections.  Fails if a value leaves the half.
    """
    idx = db.a_idx if side == "A" else db.b_idx
    secs = db.a_sections() if side == "A" else db.astar_sections()
    n = db.rank
    pos = {gen: k for k, gen in enumerate(idx)}
    t = [[[db.sig.zero() for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            val = torsion_dorfman(theta, endo, secs[a], secs[b])
            for gen, comp in section_components(val).items():
                if gen not in pos:
                    raise DegreeError("torsion value leaves the chosen half of the double")
                t[pos[gen]][a][b] = comp
    return t


# ---------------------------------------------------------------------------
# torsion sum over the double


@dataclass
class TorsionSumReport:
    deformer_degree3: bool
    lift_agrees: bool
    cps_lambda: Optional[Fraction]
    tensor_p_free: Optional[bool]
    sum_formula_ok: Optional[bool]
    restriction_ok: bool
    component_identities_ok: bool
    failures: list


def torsion_sum_check(db: DoubleModel, N) -> TorsionSumReport:
    """Check that the torsion of diag(N, -N^T) splits across the double.

    For any N: the lift of diag(N, -N^T) equals the lift computed through
    the skew-symmetrized 2-tensor route, the restrictions of the double
    torsion to each half are the half torsions, and the six mixed
    component identities hold.  When N^2 = lam Id, the degree-3 torsion of
    the double is a genuine 3-tensor (no momentum terms; the anchor parts
    of the deformer cancel against lam theta) and equals the sum of the
    lifted torsions of N and its transpose.
    """
    sig = db.sig
    n = db.rank
    Nm = _mat(sig, N)
    theta = db.theta
    assembled = BlockEndomorphism.build(db, N=Nm).assemble()
    lifted = lift_endo(assembled)
    failures = []

    deformer = poisson_bracket(poisson_bracket(lifted, theta), lifted)
    degree_ok = deformer.has_degree(3)
    if not degree_ok:
        failures.append(("deformer_degree", deformer))

    # independent lift through the skew-symmetrized 2-tensor values
    pair_values = [[sig.zero()] * sig.n_odd for _ in range(sig.n_odd)]
    for alpha in range(n):
        for beta in range(n):
            pair_values[db.a_idx[alpha]][db.b_idx[beta]] = Nm[beta][alpha]
            pair_values[db.b_idx[beta]][db.a_idx[alpha]] = -Nm[beta][alpha]
    tensor_route = element_from_pair_values(sig, pair_values)
    lift_agrees = tensor_route == lifted
    if not lift_agrees:
        failures.append(("lift_mismatch", tensor_route - lifted))

    NA = endo_on_A(db, Nm)
    NtA = endo_on_Astar(db, _mat_t(Nm))
    N2 = _mat_mul(sig, Nm, Nm)

    # restriction to the halves
    restriction_ok = True
    for x, y in itertools.product(range(n), repeat=2):
        full = torsion_dorfman(theta, assembled, db.A(x), db.A(y))
        half = torsion_dorfman(db.mu, NA, db.A(x), db.A(y))
        if full != half:
            restriction_ok = False
            failures.append(("restriction_A", full - half))
        full = torsion_dorfman(theta, assembled, db.Astar(x), db.Astar(y))
        half = torsion_dorfman(db.gamma, NtA, db.Astar(x), db.Astar(y))
        if full != half:
            restriction_ok = False
            failures.append(("restriction_Astar", full - half))

    comp_ok = _component_identities(db, Nm, assembled, failures)

    cps_lambda = _matrix_scalar(sig, N2)
    sum_ok = None
    tensor_p_free = None
    if cps_lambda is not None:
        t_double = (deformer + cps_lambda * theta) * Fraction(-1, 2)
        tensor_p_free = t_double.is_p_free()
        if not tensor_p_free:
            failures.append(("tensor_p_terms", t_double))
        t_mu = torsion_tensor_components(db, db.mu, NA, "A")
        t_ga = torsion_tensor_components(db, db.gamma, NtA, "Astar")
        rhs = lift_tensor(db, t_mu, "A") + lift_tensor(db, t_ga, "Astar")
        sum_ok = t_double == rhs
        if not sum_ok:
            failures.append(("torsion_sum", t_double - rhs))

    return TorsionSumReport(
        degree_ok, lift_agrees, cps_lambda, tensor_p_free, sum_ok,
        restriction_ok, comp_ok, failures,
    )


def _matrix_scalar(sig, m) -> Optional[Fraction]:
    lam = None
    for i, row in enumerate(m):
        for j, e in enumerate(row):
            if i == j:
                if not e.is_constant():
                    return None
                v = e.constant_value()
                if lam is None:
                    lam = v
                elif v != lam:
                    return None
            elif not e.is_zero():
                return None
    return lam


def _component_identities(db: DoubleModel, Nm, assembled, failures) -> bool:
    """The six mixed-slot expansions of the double torsion, any N."""
    sig = db.sig
    n = db.rank
    theta = db.theta
    NA = endo_on_A(db, Nm)
    NtA = endo_on_Astar(db, _mat_t(Nm))
    N2 = _mat_mul(sig, Nm, Nm)
    N2A = endo_on_A(db, N2)
    Nt2A = endo_on_Astar(db, _mat_t(N2))
    pb = poisson_bracket
    ok = True

    cache: dict = {}

    def _memo(tag, theta_el, endo, u, v, key):
        hit = cache.get((tag, key))
        if hit is None:
            hit = torsion_dorfman(theta_el, endo, u, v)
            cache[(tag, key)] = hit
        return hit

    A, B = db.a_sections(), db.astar_sections()

    def t_full(u, v, key):
        return _memo("full", theta, assembled, u, v, key)

    def t_mu(x, y):
        return _memo("mu", db.mu, NA, A[x], A[y], (x, y))

    def t_ga(x, y):
        return _memo("ga", db.gamma, NtA, B[x], B[y], (x, y))

    for x, y in itertools.product(range(n), repeat=2):
        if t_full(A[x], A[y], ("aa", x, y)) != t_mu(x, y):
            ok = False
            failures.append(("component_aa", (x, y)))
        if t_full(B[x], B[y], ("bb", x, y)) != t_ga(x, y):
            ok = False
            failures.append(("component_bb", (x, y)))

    for x, y, z in itertools.product(range(n), repeat=3):
        # <T(X, eta), Z> against the mu-side correction
        lhs = pb(t_full(A[x], B[y], ("ab", x, y)), A[z])
        rhs = pb(
            t_mu(z, x)
            + dorfman(db.mu, N2A.apply(A[z]), A[x])
            - N2A.apply(dorfman(db.mu, A[z], A[x])),
            B[y],
        )
        if lhs != rhs:
            ok = False
            failures.append(("component_ab_a", (x, y, z), lhs - rhs))

        # <T(X, eta), zeta> against the gamma-side correction
        lhs = pb(t_full(A[x], B[y], ("ab", x, y)), B[z])
        rhs = (
            pb(t_ga(y, z), A[x])
            + nested_eval(pb(db.gamma, N2A.apply(A[x])), B[y], B[z])
            - nested_eval(pb(db.gamma, A[x]), B[y], Nt2A.apply(B[z]))
        )
        if lhs != rhs:
            ok = False
            failures.append(("component_ab_b", (x, y, z), lhs - rhs))

        # <T(xi, Y), zeta> against the gamma-side correction
        lhs = pb(t_full(B[x], A[y], ("ba", x, y)), B[z])
        rhs = pb(
            t_ga(z, x)
            + dorfman(db.gamma, Nt2A.apply(B[z]), B[x])
            - Nt2A.apply(dorfman(db.gamma, B[z], B[x])),
            A[y],
        )
        if lhs != rhs:
            ok = False
            failures.append(("component_ba_b", (x, y, z), lhs - rhs))

        # <T(xi, Y), Z> against the mu-side correction
        lhs = pb(t_full(B[x], A[y], ("ba", x, y)), A[z])
        rhs = (
            pb(t_mu(y, z), B[x])
            + nested_eval(pb(db.mu, Nt2A.apply(B[x])), A[y], A[z])
            - nested_eval(pb(db.mu, B[x]), A[y], N2A.apply(A[z]))
        )
        if lhs != rhs:
            ok = False
            failures.append(("component_ba_a", (x, y, z), lhs - rhs))

    return ok


# ---------------------------------------------------------------------------
# deformations of bialgebroids


@dataclass
class BialgebroidDeformation:
    mu_deformed: GradedPoly
    gamma_deformed: GradedPoly
    mu_master: bool
    gamma_master: bool
    cross_ok: bool
    linearity_ok: bool
    ok: bool
    deformed: Optional[DoubleModel]


def deform_bialgebroid(db: DoubleModel, N, Nprime=None) -> BialgebroidDeformation:
    """Deform mu by N (and gamma by -N^T, or by an unrelated Nprime).

    Emits the candidate pair and the three compatibility brackets; the
    deformed double is returned only when all three vanish.
    """
    sig = db.sig
    lifted = lift_a_endo(db, N)
    mu_d = poisson_bracket(lifted, db.mu)
    if Nprime is None:
        gamma_d = poisson_bracket(lifted, db.gamma)
        linearity_ok = poisson_bracket(lifted, db.theta) == mu_d + gamma_d
    else:
        gamma_d = poisson_bracket(lift_astar_endo(db, Nprime), db.gamma)
        linearity_ok = True
    mu_ok = poisson_bracket(mu_d, mu_d).is_zero()
    gamma_ok = poisson_bracket(gamma_d, gamma_d).is_zero()
    cross_ok = poisson_bracket(mu_d, gamma_d).is_zero()
    ok = mu_ok and gamma_ok and cross_ok
    deformed = DoubleModel(sig, mu_d, gamma_d) if ok else None
    return BialgebroidDeformation(
        mu_d, gamma_d, mu_ok, gamma_ok, cross_ok, linearity_ok, ok, deformed
    )


def is_a_structure(db: DoubleModel, poly: GradedPoly) -> bool:
    """Whether poly has the shape of an A-structure: anchor terms p.b plus
    bracket terms b.b.a with base-function coefficients."""
    lab = db.sig.labels
    for mono in poly.terms:
        na = sum(1 for t in mono.tau if lab[t] == LABEL_A)
        nb = len(mono.tau) - na
        psum = sum(mono.p)
        if not ((psum == 1 and na == 0 and nb == 1) or (psum == 0 and na == 1 and nb == 2)):
            return False
    return True


@dataclass
class TrivialDeformReport:
    torsion_zero: bool
    bracket_square_identity: bool
    weak_deforming: bool
    deformed_master: bool
    deformed_is_a_structure: bool
    deformed_bracket_matches: bool
    theta_deformed: GradedPoly


def trivial_double_deform(db: DoubleModel, N) -> TrivialDeformReport:
    """Deform the double of a trivial bialgebroid by a torsion-free N.

    Requires gamma = 0.  An N with vanishing torsion (no scalar-square
    assumption) satisfies {{lift,mu},lift} = {mu, lift(N^2)}, hence the
    deformer is a cocycle and {lift, mu} is again a Courant structure, the
    double of the deformed A-structure.
    """
    if not db.gamma.is_zero():
        raise ValueError("trivial double deformation requires gamma = 0")
    sig = db.sig
    Nm = _mat(sig, N)
    NA = endo_on_A(db, Nm)
    for x, y in itertools.product(range(db.rank), repeat=2):
        t = torsion_dorfman(db.mu, NA, db.A(x), db.A(y))
        if not t.is_zero():
            raise TorsionNonzeroError(
                "N has nonzero torsion on the base algebroid",
                witness=(db.A(x), db.A(y), t),
            )
    lifted = lift_a_endo(db, Nm)
    K = poisson_bracket(poisson_bracket(lifted, db.mu), lifted)
    rhs = poisson_bracket(db.mu, lift_a_endo(db, _mat_mul(sig, Nm, Nm)))
    identity_ok = K == rhs
    weak = poisson_bracket(db.mu, K).is_zero()
    theta_d = poisson_bracket(lifted, db.mu)
    master_ok = poisson_bracket(theta_d, theta_d).is_zero()
    shape_ok = is_a_structure(db, theta_d)
    bracket_ok = True
    for x, y in itertools.product(range(db.rank), repeat=2):
        lhs = dorfman(theta_d, db.A(x), db.A(y))
        direct = (
            dorfman(db.mu, NA.apply(db.A(x)), db.A(y))
            + dorfman(db.mu, db.A(x), NA.apply(db.A(y)))
            - NA.apply(dorfman(db.mu, db.A(x), db.A(y)))
        )
        if lhs != direct:
            bracket_ok = False
    return TrivialDeformReport(
        True, identity_ok, weak, master_ok, shape_ok, bracket_ok, theta_d
    )


# ---------------------------------------------------------------------------
# compatible pairs: PN and Omega-N structures


def schouten(db: DoubleModel, pi) -> GradedPoly:
    """[pi, pi] for a bivector, via the derived bracket against mu."""
    lifted = lift_bivector(db, pi)
    return poisson_bracket(poisson_bracket(lifted, db.mu), lifted)


def concomitant(db: DoubleModel, pi, N) -> GradedPoly:
    """The compatibility tensor {pi,{N,mu}} + {N,{pi,mu}} of a pair (pi, N)."""
    lp = lift_bivector(db, pi)
    ln = lift_a_endo(db, N)
    return poisson_bracket(lp, poisson_bracket(ln, db.mu)) + poisson_bracket(
        ln, poisson_bracket(lp, db.mu)
    )


@dataclass
class PnReport:
    precond_ok: bool
    poisson_ok: bool
    compat_ok: bool
    torsion_ok: bool
    decomposition_ok: bool
    pn: bool
    weak_deforming: Optional[bool]
    block_torsion_zero: Optional[bool]
    equivalence_ok: Optional[bool]


def pn_check(db: DoubleModel, pi, N) -> PnReport:
    """Poisson-endomorphism compatibility and its deformation consequences.

    Checks pi Poisson, the concomitant zero, N torsion-free, and the exact
    decomposition of the block deformer into endomorphism, bivector and
    concomitant parts; when N squares to a scalar, also the equivalence of
    the full block torsion vanishing with the pair being compatible.
    """
    sig = db.sig
    n = db.rank
    pim = _mat(sig, pi)
    Nm = _mat(sig, N)
    precond = _mat_is_antisym(pim) and _mat_eq(
        _mat_mul(sig, Nm, pim), _mat_mul(sig, pim, _mat_t(Nm))
    )

    sch = schouten(db, pim)
    poisson_ok = sch.is_zero()
    conc = concomitant(db, pim, Nm)
    compat_ok = conc.is_zero()
    NA = endo_on_A(db, Nm)
    torsion_ok = all(
        torsion_dorfman(db.mu, NA, db.A(x), db.A(y)).is_zero()
        for x, y in itertools.product(range(n), repeat=2)
    )

    block = BlockEndomorphism.build(db, N=Nm, pi=pim)
    lifted = block_lift(db, block)
    K_block = poisson_bracket(poisson_bracket(lifted, db.mu), lifted)
    ln = lift_a_endo(db, Nm)
    K_n = poisson_bracket(poisson_bracket(ln, db.mu), ln)
    decomposition_ok = K_block == K_n + sch - conc

    pn = precond and poisson_ok and compat_ok and torsion_ok
    weak = poisson_bracket(db.mu, K_block).is_zero() if pn else None

    block_torsion_zero = None
    equivalence_ok = None
    if _matrix_scalar(sig, _mat_mul(sig, Nm, Nm)) is not None and precond:
        assembled = block.assemble()
        gens = db.all_sections()
        block_torsion_zero = all(
            torsion_dorfman(db.theta, assembled, u, v).is_zero()
            for u, v in itertools.product(gens, repeat=2)
        )
        equivalence_ok = block_torsion_zero == pn

    return PnReport(
        precond, poisson_ok, compat_ok, torsion_ok, decomposition_ok,
        pn, weak, block_torsion_zero, equivalence_ok,
    )


@dataclass
class OmegaNReport:
    precond_ok: bool
    closed_ok: bool
    deformed_closed_ok: bool
    torsion_ok: bool
    omega_square_zero: bool
    omega_n: bool
    weak_deforming: Optional[bool]


def omega_n_check(db: DoubleModel, omega, N) -> OmegaNReport:
    """2-form / endomorphism compatibility and its deformation consequence."""
    sig = db.sig
    n = db.rank
    omm = _mat(sig, omega)
    Nm = _mat(sig, N)
    precond = _mat_is_antisym(omm) and _mat_eq(
        _mat_mul(sig, omm, Nm), _mat_mul(sig, _mat_t(Nm), omm)
    )
    lo = lift_two_form(db, omm)
    ln = lift_a_endo(db, Nm)
    closed_ok = poisson_bracket(db.mu, lo).is_zero()
    deformed_closed_ok = poisson_bracket(poisson_bracket(ln, db.mu), lo).is_zero()
    NA = endo_on_A(db, Nm)
    torsion_ok = all(
        torsion_dorfman(db.mu, NA, db.A(x), db.A(y)).is_zero()
        for x, y in itertools.product(range(n), repeat=2)
    )
    omega_sq = poisson_bracket(poisson_bracket(lo, db.mu), lo)
    omega_square_zero = omega_sq.is_zero()

    omega_n = precond and closed_ok and deformed_closed_ok and torsion_ok
    weak = None
    if omega_n:
        block = BlockEndomorphism.build(db, N=Nm, omega=omm)
        lifted = block_lift(db, block)
        K = poisson_bracket(poisson_bracket(lifted, db.mu), lifted)
        weak = poisson_bracket(db.mu, K).is_zero()
    return OmegaNReport(
        precond, closed_ok, deformed_closed_ok, torsion_ok,
        omega_square_zero, omega_n, weak,
    )
