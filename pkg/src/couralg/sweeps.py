"""Seeded randomized verification sweeps.

Each suite draws random elements with coefficients from a small rational
pool, checks a family of exact identities, and reports one named result
per check with a witness for any failure.  Identical (model, suite, seed)
runs produce identical reports; all verdicts are exact.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import AlgebraSignature, GradedPoly, Monomial
from .bialgebroid import (
    BlockEndomorphism,
    DoubleModel,
    check_bialgebroid,
    torsion_sum_check,
)
from .courant import (
    CourantStructure,
    anchor_apply,
    dorfman,
    partial_op,
    q_monomials,
    verify_courant_axioms,
)
from .nijenhuis import (
    ConsistencyError,
    Endomorphism,
    check_defect_identities,
    classify,
    cps_check,
    deformed_bracket,
    is_skew,
    lift_endo,
)
from .poisson import is_master, nested_eval, poisson_bracket


COEFF_POOL = (
    Fraction(-2), Fraction(-1), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2),
)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    model: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(Check(name, ok, detail))


@dataclass
class ModelHandle:
    """Uniform access to a model for the sweep suites."""

    name: str
    sig: AlgebraSignature
    theta: GradedPoly
    double: Optional[DoubleModel] = None

    @classmethod
    def of(cls, name: str, obj) -> "ModelHandle":
        if isinstance(obj, DoubleModel):
            return cls(name, obj.sig, obj.theta, obj)
        if isinstance(obj, CourantStructure):
            return cls(name, obj.sig, obj.theta, None)
        if isinstance(obj, GradedPoly):
            return cls(name, obj.sig, obj, None)
        # parsed model file
        db = obj.double_model() if obj.is_double else None
        return cls(name, obj.sig, obj.theta_poly(), db)


# ---------------------------------------------------------------------------
# random generators


def random_function(sig, rng, max_q_degree=2, terms=2) -> GradedPoly:
    monos = q_monomials(sig, max_q_degree)
    out = {}
    for _ in range(terms):
        m = Monomial(rng.choice(monos), (), sig.zero_exp())
        c = rng.choice(COEFF_POOL)
        if c:
            out[m] = out.get(m, Fraction(0)) + c
    return GradedPoly(sig, out)


def random_section(sig, rng, max_q_degree=1, terms=3) -> GradedPoly:
    monos = q_monomials(sig, max_q_degree)
    out = {}
    for _ in range(terms):
        m = Monomial(rng.choice(monos), (rng.randrange(sig.n_odd),), sig.zero_exp())
        c = rng.choice(COEFF_POOL)
        if c:
            out[m] = out.get(m, Fraction(0)) + c
    return GradedPoly(sig, out)


def random_endo(sig, rng, max_q_degree=0) -> Endomorphism:
    monos = q_monomials(sig, max_q_degree)
    n = sig.n_odd
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            entry = {}
            c = rng.choice(COEFF_POOL)
            if c:
                entry[Monomial(rng.choice(monos), (), sig.zero_exp())] = c
            row.append(GradedPoly(sig, entry))
        rows.append(tuple(row))
    return Endomorphism(sig, tuple(rows))


def random_skew_endo(sig, rng, max_q_degree=0) -> Endomorphism:
    from .nijenhuis import transpose

    E = random_endo(sig, rng, max_q_degree)
    return E - transpose(E)


def random_matrix(rng, n, pool=COEFF_POOL):
    return [[rng.choice(pool) for _ in range(n)] for _ in range(n)]


def random_antisym(rng, n, pool=COEFF_POOL):
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            c = rng.choice(pool)
            m[i][j] = c
            m[j][i] = -c
    return m


def cps_family(handle: ModelHandle, scales=(1, 2, Fraction(1, 2), -3)):
    """Skew endomorphisms with a scalar square, built from the model shape.

    On a double: blocks diag(N, -N^T) for N in {c Id, c diag(+-1),
    c swap, c J, c nilpotent} plus (pi, omega) rotation blocks.  On an
    unlabelled model: the zero map, and rotation blocks when the identity
    pairing has even rank.
    """
    sig = handle.sig
    out = [("zero", Endomorphism.zero(sig))]
    if handle.double is not None:
        db = handle.double
        n = db.rank

        def blocks(label, **kw):
            out.append((label, BlockEndomorphism.build(db, **kw).assemble()))

        for c in scales:
            c = Fraction(c)
            ident = [[c * int(i == j) for j in range(n)] for i in range(n)]
            blocks(f"scalar_{c}", N=ident)
            sign = [[c * (1 if i == j and i % 2 == 0 else (-1 if i == j else 0))
                     for j in range(n)] for i in range(n)]
            blocks(f"reflection_{c}", N=sign)
            if n >= 2:
                swap = [[Fraction(0)] * n for _ in range(n)]
                swap[0][1] = swap[1][0] = c
                for k in range(2, n):
                    swap[k][k] = c
                blocks(f"swap_{c}", N=swap)
                rot = [[Fraction(0)] * n for _ in range(n)]
                rot[0][1], rot[1][0] = c, -c
                for k in range(2, n):
                    rot[k][k] = Fraction(0)
                if n == 2:
                    blocks(f"rotation_{c}", N=rot)
                nil = [[Fraction(0)] * n for _ in range(n)]
                nil[0][1] = c
                blocks(f"nilpotent_{c}", N=nil)
                jmat = [[Fraction(0)] * n for _ in range(n)]
                for k in range(0, n - 1, 2):
                    jmat[k][k + 1], jmat[k + 1][k] = c, -c
                if n % 2 == 0:
                    blocks(f"complex_{c}", N=jmat)
                pi = [[Fraction(0)] * n for _ in range(n)]
                pi[0][1], pi[1][0] = c, -c
                blocks(f"bivector_{c}", pi=pi)
                if n == 2:
                    blocks(f"pi_omega_{c}", pi=pi, omega=pi)
    else:
        n = sig.n_odd
        if n % 2 == 0 and all(
            sig.pairing[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n)
        ):
            for c in scales:
                c = Fraction(c)
                jmat = [[Fraction(0)] * n for _ in range(n)]
                for k in range(0, n - 1, 2):
                    jmat[k][k + 1], jmat[k + 1][k] = c, -c
                out.append((f"complex_{c}", Endomorphism.from_entries(sig, jmat)))
    return [(label, e) for label, e in out if is_skew(e)]


# ---------------------------------------------------------------------------
# suites


def suite_axioms(handle: ModelHandle, seed: int, n_random: int = 30,
                 max_q_degree: int = 2) -> SuiteResult:
    """Master equation, pairing axioms, Jacobi, anchor and d properties."""
    rng = random.Random(seed)
    res = SuiteResult("axioms", handle.name, seed)
    theta = handle.theta
    sig = handle.sig

    res.add("master_equation", is_master(theta),
            str(poisson_bracket(theta, theta)))

    if handle.double is not None:
        fails = check_bialgebroid(handle.double)
        res.add("bialgebroid_conditions", not fails,
                "; ".join(f"{n} = {b}" for n, b in fails))

    basis_deg = max_q_degree if sig.base_dim else 0
    rep = verify_courant_axioms(theta, max_q_degree=basis_deg)
    res.add("axioms_basis_sweep", rep.ok,
            "; ".join(f.describe() for f in rep.failures[:3]))

    bad = []
    for k in range(n_random):
        u = random_section(sig, rng)
        v = random_section(sig, rng)
        w = random_section(sig, rng)
        a1 = dorfman(theta, u, v) + dorfman(theta, v, u) - partial_op(
            theta, poisson_bracket(u, v)
        )
        a2 = (
            poisson_bracket(dorfman(theta, u, v), w)
            + poisson_bracket(v, dorfman(theta, u, w))
            - poisson_bracket(u, partial_op(theta, poisson_bracket(v, w)))
        )
        jac = dorfman(theta, u, dorfman(theta, v, w)) - dorfman(
            theta, dorfman(theta, u, v), w
        ) - dorfman(theta, v, dorfman(theta, u, w))
        if not (a1.is_zero() and a2.is_zero() and jac.is_zero()):
            bad.append(k)
    res.add("axioms_random_sections", not bad, f"failing draws: {bad[:5]}")

    bad = []
    for k in range(n_random):
        u = random_section(sig, rng)
        f = random_function(sig, rng)
        g = random_function(sig, rng)
        hom = anchor_apply(theta, u, f * g) - (
            anchor_apply(theta, u, f) * g + f * anchor_apply(theta, u, g)
        )
        defining = poisson_bracket(u, partial_op(theta, f)) - anchor_apply(theta, u, f)
        if not (hom.is_zero() and defining.is_zero()):
            bad.append(k)
    res.add("anchor_and_d_properties", not bad, f"failing draws: {bad[:5]}")

    if is_master(theta):
        bad = []
        for k in range(n_random // 3 + 1):
            f = random_section(sig, rng) * random_section(sig, rng)
            dd = poisson_bracket(theta, poisson_bracket(theta, f))
            if not dd.is_zero():
                bad.append(k)
        res.add("differential_squares_to_zero", not bad, f"failing draws: {bad[:5]}")
    return res


def suite_torsion_identities(handle: ModelHandle, seed: int, n_endos: int = 25) -> SuiteResult:
    """Defect identities, paired shift, and the two deformed-bracket routes."""
    rng = random.Random(seed)
    res = SuiteResult("torsion-identities", handle.name, seed)
    theta = handle.theta
    sig = handle.sig
    q_deg = 1 if sig.base_dim else 0

    f_pool = [sig.one()]
    if sig.base_dim:
        f_pool += [sig.q(1), sig.q(1) * sig.q(1)]

    defect_bad = []
    lemma_bad = []
    for k in range(n_endos):
        N = random_skew_endo(sig, rng, q_deg)
        samples = [
            (random_section(sig, rng), random_section(sig, rng),
             random_section(sig, rng), f)
            for f in f_pool
        ]
        rep = check_defect_identities(theta, N, samples)
        if not rep.ok:
            defect_bad.append((k, [f.name for f in rep.failures[:2]]))
        u, v = random_section(sig, rng), random_section(sig, rng)
        try:
            deformed_bracket(theta, N, u, v, cross_check=True)
        except ConsistencyError as exc:
            lemma_bad.append((k, str(exc)[:80]))
    res.add("defect_identities", not defect_bad, f"failures: {defect_bad[:3]}")
    res.add("deformed_bracket_routes", not lemma_bad, f"failures: {lemma_bad[:3]}")

    from .nijenhuis import torsion_dorfman

    shift_bad = []
    for k in range(n_endos):
        N = random_endo(sig, rng, q_deg)
        u, v = random_section(sig, rng), random_section(sig, rng)
        base = torsion_dorfman(theta, N, u, v)
        for kappa in (Fraction(1), Fraction(-2), Fraction(1, 2)):
            shifted = N + Endomorphism.scalar(sig, kappa)
            if torsion_dorfman(theta, shifted, u, v) != base:
                shift_bad.append((k, str(kappa)))
    res.add("paired_tensor_shift", not shift_bad, f"failures: {shift_bad[:3]}")
    return res


def suite_theorem_a3(handle: ModelHandle, seed: int) -> SuiteResult:
    """Closed-form torsion tensor versus elementwise torsion, on scalar-square N."""
    from .nijenhuis import torsion_courant, torsion_dorfman, torsion_tensor

    rng = random.Random(seed)
    res = SuiteResult("theorem-A3", handle.name, seed)
    theta = handle.theta
    sig = handle.sig
    gens = [sig.tau(a) for a in range(sig.n_odd)]
    family = cps_family(handle)
    res.add("cps_instances_available", bool(family), "")
    for label, N in family:
        cps = cps_check(sig, N)
        if cps is None:
            res.add(f"cps_{label}", False, "square is not scalar")
            continue
        tt = torsion_tensor(theta, N)
        bad = []
        for u, v in itertools.product(gens, repeat=2):
            if torsion_dorfman(theta, N, u, v) != nested_eval(tt, u, v):
                bad.append((str(u), str(v)))
            if torsion_courant(theta, N, u, v) != torsion_dorfman(theta, N, u, v):
                bad.append(("courant", str(u), str(v)))
        res.add(f"torsion_tensor_{label}", not bad, f"failures: {bad[:3]}")
    return res


def suite_theorem_cns(handle: ModelHandle, seed: int, n_endos: int = 25) -> SuiteResult:
    """Deformation validity is equivalent to the cocycle condition."""
    rng = random.Random(seed)
    res = SuiteResult("theorem-CNS", handle.name, seed)
    theta = handle.theta
    sig = handle.sig
    q_deg = 1 if sig.base_dim else 0

    equiv_bad = []
    compat_bad = []
    diagram_bad = []
    for k in range(n_endos):
        N = random_skew_endo(sig, rng, q_deg)
        lifted = lift_endo(N)
        theta_prime = poisson_bracket(lifted, theta)
        valid = poisson_bracket(theta_prime, theta_prime).is_zero()
        deformer = poisson_bracket(theta_prime, lifted)
        cocycle = poisson_bracket(theta, deformer).is_zero()
        if valid != cocycle:
            equiv_bad.append(k)
        if valid:
            total = theta + theta_prime
            if not poisson_bracket(total, total).is_zero():
                compat_bad.append(k)
        report = classify(theta, N)
        if report.weak_deforming != valid:
            equiv_bad.append((k, "classify"))
        if report.deforming and not report.weak_deforming:
            diagram_bad.append((k, "deforming->weak"))
        if report.cps is not None:
            if report.nijenhuis and not (report.deforming and report.weak_nijenhuis):
                diagram_bad.append((k, "nijenhuis->"))
            if report.weak_nijenhuis != report.weak_deforming:
                diagram_bad.append((k, "weakNij<->weakDef"))
    res.add("deformation_iff_cocycle", not equiv_bad, f"failures: {equiv_bad[:3]}")
    res.add("compatibility_of_sum", not compat_bad, f"failures: {compat_bad[:3]}")
    res.add("implication_diagram", not diagram_bad, f"failures: {diagram_bad[:3]}")
    return res


def suite_torsion_sum(handle: ModelHandle, seed: int, n_endos: int = 10) -> SuiteResult:
    """Torsion of diag(N, -N^T) on a double splits into half torsions."""
    rng = random.Random(seed)
    res = SuiteResult("torsion-sum", handle.name, seed)
    if handle.double is None:
        res.add("not_a_double_model", True, "suite skipped")
        return res
    db = handle.double
    n = db.rank
    q_deg = 1 if db.sig.base_dim else 0
    monos = q_monomials(db.sig, q_deg)

    any_bad = []
    for k in range(n_endos):
        N = [[_rand_poly(db.sig, rng, monos) for _ in range(n)] for _ in range(n)]
        rep = torsion_sum_check(db, N)
        if not (rep.deformer_degree3 and rep.lift_agrees and rep.restriction_ok
                and rep.component_identities_ok):
            any_bad.append((k, [f[0] for f in rep.failures[:3]]))
    res.add("arbitrary_endomorphism_parts", not any_bad, f"failures: {any_bad[:2]}")

    cps_bad = []
    count = 0
    for c in (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(-3)):
        shapes = {"scalar": [[c * int(i == j) for j in range(n)] for i in range(n)],
                  "reflection": [[c * (1 if i == j == 0 else (-1 if i == j else 0))
                                  for j in range(n)] for i in range(n)]}
        if n >= 2:
            swap = [[Fraction(0)] * n for _ in range(n)]
            swap[0][1] = swap[1][0] = c
            for kk in range(2, n):
                swap[kk][kk] = c
            shapes["swap"] = swap
            nil = [[Fraction(0)] * n for _ in range(n)]
            nil[0][1] = c
            shapes["nilpotent"] = nil
            rot = [[Fraction(0)] * n for _ in range(n)]
            rot[0][1], rot[1][0] = c, -c
            for kk in range(2, n):
                rot[kk][kk] = Fraction(0)
            if n == 2:
                shapes["rotation"] = rot
        for label, N in shapes.items():
            rep = torsion_sum_check(db, N)
            count += 1
            if rep.cps_lambda is None or rep.sum_formula_ok is not True:
                cps_bad.append((label, str(c)))
    res.add("torsion_sum_scalar_square", not cps_bad,
            f"instances: {count}, failures: {cps_bad[:3]}")
    return res


def _rand_poly(sig, rng, monos):
    out = {}
    c = rng.choice(COEFF_POOL)
    if c:
        out[Monomial(rng.choice(monos), (), sig.zero_exp())] = c
    return GradedPoly(sig, out)


SUITES = {
    "axioms": suite_axioms,
    "torsion-identities": suite_torsion_identities,
    "theorem-A3": suite_theorem_a3,
    "theorem-CNS": suite_theorem_cns,
    "torsion-sum": suite_torsion_sum,
}


def run_suites(handle: ModelHandle, which: str, seed: int, scale: int = 1):
    """Run one named suite (or "all"); returns a list of SuiteResult."""
    names = list(SUITES) if which == "all" else [which]
    results = []
    for name in names:
        fn = SUITES[name]
        if name in ("torsion-identities", "theorem-CNS"):
            results.append(fn(handle, seed, n_endos=25 * scale))
        elif name == "torsion-sum":
            results.append(fn(handle, seed, n_endos=6 * scale))
        elif name == "axioms":
            results.append(fn(handle, seed, n_random=30 * scale))
        else:
            results.append(fn(handle, seed))
    return results
