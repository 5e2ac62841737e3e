"""Command-line interface.

Commands load a model file, run one computation or verification, and emit
a report (human text by default, a canonical JSON document with --json).
Exit codes: 0 all checks pass, 1 a mathematical check failed (the report
carries a witness), 2 input or usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction

from .algebra import GradedPoly
from .bialgebroid import (
    BlockEndomorphism,
    DoubleModel,
    check_bialgebroid,
    omega_n_check,
    pn_check,
)
from .courant import verify_courant_axioms
from .errors import CouralgError, ModelError, ParseError
from .irreducibility import is_irreducible_courant, is_irreducible_lie_algebroid
from .nijenhuis import (
    Endomorphism,
    classify,
    cps_check,
    deform,
    is_skew,
    torsion_courant,
    torsion_dorfman,
    torsion_tensor,
)
from .parsing import parse_expr, parse_model
from .poisson import is_master, nested_eval, poisson_bracket
from .sweeps import SUITES, ModelHandle, run_suites


def _report_out(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    _print_human(report)


def _print_human(report: dict, indent: str = "") -> None:
    for key, value in report.items():
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_human(value, indent + "  ")
        elif isinstance(value, list):
            print(f"{indent}{key}:")
            for item in value:
                if isinstance(item, dict):
                    _print_human(item, indent + "  ")
                    print()
                else:
                    print(f"{indent}  {item}")
        else:
            print(f"{indent}{key}: {value}")


def _load(path: str):
    return parse_model(path)


def _resolve_endo(mf, name: str) -> Endomorphism:
    """Endomorphism by name: full-size directly, A-side assembled."""
    rows = mf.endomorphism(name)
    n = len(rows)
    if n == mf.sig.n_odd:
        return Endomorphism(mf.sig, rows)
    if mf.is_double:
        db = mf.double_model()
        if n == db.rank:
            return BlockEndomorphism.build(db, N=rows).assemble()
    raise ModelError(
        f"endomorphism {name!r} is {n}x{n}; expected {mf.sig.n_odd} generators"
        + (f" or the A-side rank {mf.double_model().rank}" if mf.is_double else "")
    )


def _resolve_a_matrix(mf, name: str, kind: str):
    rows = mf.tensor(name) if kind == "tensor" else mf.endomorphism(name)
    db = mf.double_model()
    if len(rows) != db.rank:
        raise ModelError(f"{name!r} must be an A-side {db.rank}x{db.rank} matrix")
    return rows


def cmd_validate(args) -> int:
    mf = _load(args.model)
    theta = mf.theta_poly()
    report = {"command": "validate", "model": args.model}
    checks = []
    ok = True

    degree_ok = theta.has_degree(3)
    checks.append({"check": "degree_3", "ok": degree_ok})
    ok &= degree_ok

    if mf.is_double:
        db = mf.double_model()
        for name, br in (
            ("{mu,mu}", poisson_bracket(db.mu, db.mu)),
            ("{mu,gamma}", poisson_bracket(db.mu, db.gamma)),
            ("{gamma,gamma}", poisson_bracket(db.gamma, db.gamma)),
        ):
            good = br.is_zero()
            entry = {"check": f"bialgebroid {name} = 0", "ok": good}
            if not good:
                entry["witness"] = str(br)
            checks.append(entry)
            ok &= good

    if degree_ok:
        self_br = poisson_bracket(theta, theta)
        master = self_br.is_zero()
        entry = {"check": "master_equation", "ok": master}
        if not master:
            entry["witness"] = str(self_br)
        checks.append(entry)
        ok &= master
        if master:
            rep = verify_courant_axioms(
                theta, max_q_degree=args.max_q_degree if mf.sig.base_dim else 0
            )
            entry = {"check": "courant_axioms", "ok": rep.ok,
                     "cases": rep.checked}
            if not rep.ok:
                entry["witness"] = rep.failures[0].describe()
            checks.append(entry)
            ok &= rep.ok

    report["checks"] = checks
    report["ok"] = ok
    _report_out(report, args.json)
    return 0 if ok else 1


def cmd_bracket(args) -> int:
    mf = _load(args.model)
    f = parse_expr(args.expr_a, mf.sig)
    g = parse_expr(args.expr_b, mf.sig)
    value = poisson_bracket(f, g)
    _report_out(
        {"command": "bracket", "model": args.model,
         "a": str(f), "b": str(g), "value": str(value)},
        args.json,
    )
    return 0


def cmd_dorfman(args) -> int:
    mf = _load(args.model)
    u = parse_expr(args.u, mf.sig)
    v = parse_expr(args.v, mf.sig)
    theta = mf.theta_poly()
    value = poisson_bracket(poisson_bracket(u, theta), v)
    _report_out(
        {"command": "dorfman", "model": args.model,
         "u": str(u), "v": str(v), "value": str(value)},
        args.json,
    )
    return 0


def cmd_torsion(args) -> int:
    mf = _load(args.model)
    N = _resolve_endo(mf, args.endo)
    theta = mf.theta_poly()
    tfun = torsion_courant if args.courant else torsion_dorfman
    sig = mf.sig
    table = []
    for a in range(sig.n_odd):
        for b in range(sig.n_odd):
            u, v = sig.tau(a), sig.tau(b)
            val = tfun(theta, N, u, v)
            if not val.is_zero():
                table.append(
                    {"u": sig.odd_names[a], "v": sig.odd_names[b], "value": str(val)}
                )
    report = {
        "command": "torsion",
        "model": args.model,
        "endomorphism": args.endo,
        "bracket": "courant" if args.courant else "dorfman",
        "skew": is_skew(N),
        "nonzero_values": table,
        "vanishes": not table,
    }
    if is_skew(N):
        cps = cps_check(sig, N)
        if cps is not None:
            tt = torsion_tensor(theta, N)
            report["square_scalar"] = str(cps.lam)
            report["torsion_tensor"] = str(tt)
    report["ok"] = True
    _report_out(report, args.json)
    return 0


def cmd_classify(args) -> int:
    mf = _load(args.model)
    N = _resolve_endo(mf, args.endo)
    rep = classify(mf.theta_poly(), N)
    report = {
        "command": "classify",
        "model": args.model,
        "endomorphism": args.endo,
        "skew": rep.skew,
        "weak_deforming": rep.weak_deforming,
        "deforming": rep.deforming,
    }
    if rep.deforming_scale is not None:
        report["deforming_scale"] = str(rep.deforming_scale)
    if rep.cps is not None:
        report["square_scalar"] = str(rep.cps.lam)
        if rep.cps.factor is not None:
            report["cps_normalization"] = (
                f"({rep.cps.factor})^2 * {rep.cps.epsilon}"
            )
        else:
            report["cps_normalization"] = "proportional over a quadratic extension"
        report["nijenhuis"] = rep.nijenhuis
        report["weak_nijenhuis"] = rep.weak_nijenhuis
    else:
        report["square_scalar"] = None
    if rep.witnesses:
        report["witnesses"] = [
            {"kind": kind, "value": str(poly)} for kind, poly in rep.witnesses
        ]
    report["ok"] = True
    _report_out(report, args.json)
    return 0


def cmd_deform(args) -> int:
    mf = _load(args.model)
    N = _resolve_endo(mf, args.endo)
    result = deform(mf.theta_poly(), N)
    report = {
        "command": "deform",
        "model": args.model,
        "endomorphism": args.endo,
        "theta_deformed": str(result.theta_prime),
        "valid": result.valid,
        "ok": result.valid,
    }
    if result.valid:
        report["compatible_sum"] = result.compatible
    else:
        report["witness"] = str(
            poisson_bracket(result.theta_prime, result.theta_prime)
        )
    _report_out(report, args.json)
    return 0 if result.valid else 1


def cmd_double(args) -> int:
    mf = _load(args.model)
    db = mf.double_model()
    failures = check_bialgebroid(db)
    checks = [
        {"check": name, "ok": True}
        for name in ("{mu,mu}", "{mu,gamma}", "{gamma,gamma}")
        if name not in {n for n, _ in failures}
    ] + [
        {"check": name, "ok": False, "witness": str(br)} for name, br in failures
    ]
    ok = not failures
    report = {"command": "double", "model": args.model, "checks": checks}
    if ok:
        theta = db.theta
        report["theta"] = str(theta)
        # Dorfman bracket restricted to each half reproduces the half brackets
        restrict_ok = True
        for x, y in itertools.product(range(db.rank), repeat=2):
            u, v = db.A(x), db.A(y)
            full = poisson_bracket(poisson_bracket(u, db.theta), v)
            half = poisson_bracket(poisson_bracket(u, db.mu), v)
            if full != half:
                restrict_ok = False
            u, v = db.Astar(x), db.Astar(y)
            full = poisson_bracket(poisson_bracket(u, db.theta), v)
            half = poisson_bracket(poisson_bracket(u, db.gamma), v)
            if full != half:
                restrict_ok = False
        report["bracket_restricts_to_halves"] = restrict_ok
        ok &= restrict_ok
    report["ok"] = ok
    _report_out(report, args.json)
    return 0 if ok else 1


def cmd_pn(args) -> int:
    mf = _load(args.model)
    db = mf.double_model()
    pi = _resolve_a_matrix(mf, args.pi, "tensor")
    N = _resolve_a_matrix(mf, args.endo, "endo")
    rep = pn_check(db, pi, N)
    report = {
        "command": "pn",
        "model": args.model,
        "pi": args.pi,
        "endomorphism": args.endo,
        "preconditions": rep.precond_ok,
        "poisson": rep.poisson_ok,
        "compatible": rep.compat_ok,
        "torsion_free": rep.torsion_ok,
        "deformer_decomposition": rep.decomposition_ok,
        "pn_structure": rep.pn,
    }
    if rep.weak_deforming is not None:
        report["weak_deforming"] = rep.weak_deforming
    if rep.block_torsion_zero is not None:
        report["block_torsion_zero"] = rep.block_torsion_zero
        report["torsion_iff_pn"] = rep.equivalence_ok
    ok = rep.decomposition_ok and rep.pn and (rep.weak_deforming is not False) and (
        rep.equivalence_ok is not False
    )
    report["ok"] = ok
    _report_out(report, args.json)
    return 0 if ok else 1


def cmd_omegan(args) -> int:
    mf = _load(args.model)
    db = mf.double_model()
    omega = _resolve_a_matrix(mf, args.omega, "tensor")
    N = _resolve_a_matrix(mf, args.endo, "endo")
    rep = omega_n_check(db, omega, N)
    ok = (
        rep.precond_ok and rep.closed_ok and rep.deformed_closed_ok
        and rep.torsion_ok and rep.omega_square_zero
        and (rep.weak_deforming is not False)
    )
    report = {
        "command": "omegan",
        "model": args.model,
        "omega": args.omega,
        "endomorphism": args.endo,
        "preconditions": rep.precond_ok,
        "closed": rep.closed_ok,
        "closed_for_deformed": rep.deformed_closed_ok,
        "torsion_free": rep.torsion_ok,
        "omega_square_term_zero": rep.omega_square_zero,
        "omega_n_structure": rep.omega_n,
        "ok": ok,
    }
    if rep.weak_deforming is not None:
        report["weak_deforming"] = rep.weak_deforming
    _report_out(report, args.json)
    return 0 if ok else 1


def cmd_irreducible(args) -> int:
    mf = _load(args.model)
    if args.lie_algebroid:
        verdict = is_irreducible_lie_algebroid(mf.double_model(), args.max_degree)
    else:
        verdict = is_irreducible_courant(mf.theta_poly(), args.max_degree)
    report = {
        "command": "irreducible",
        "model": args.model,
        "mode": "lie-algebroid" if args.lie_algebroid else "courant",
        "verdict": verdict.kind,
        "complete": verdict.complete,
        "max_degree": verdict.max_q_degree,
        "solution_dimension": verdict.solution_dim,
    }
    if verdict.witness is not None:
        report["witness"] = str(verdict.witness)
    report["ok"] = True
    _report_out(report, args.json)
    return 0


def cmd_verify(args) -> int:
    mf = _load(args.model)
    handle = ModelHandle.of(args.model, mf)
    results = run_suites(handle, args.suite, args.seed, args.scale)
    ok = all(r.ok for r in results)
    report = {
        "command": "verify",
        "model": args.model,
        "suite": args.suite,
        "seed": args.seed,
        "suites": [
            {
                "suite": r.suite,
                "ok": r.ok,
                "checks": [
                    {"check": c.name, "ok": c.ok, **({"witness": c.detail} if not c.ok else {})}
                    for c in r.checks
                ],
            }
            for r in results
        ],
        "ok": ok,
    }
    _report_out(report, args.json)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="couralg",
        description="Exact graded Poisson calculus on Courant algebroids",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model", help="path to a .model file")
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "master equation and Courant axioms")
    p.add_argument("--max-q-degree", type=int, default=2)

    p = add("bracket", cmd_bracket, "Poisson bracket of two expressions")
    p.add_argument("expr_a")
    p.add_argument("expr_b")

    p = add("dorfman", cmd_dorfman, "Dorfman bracket of two sections")
    p.add_argument("u")
    p.add_argument("v")

    p = add("torsion", cmd_torsion, "torsion of a named endomorphism")
    p.add_argument("endo")
    p.add_argument("--courant", action="store_true",
                   help="use the skew-symmetrized bracket")

    p = add("classify", cmd_classify, "classify a named skew endomorphism")
    p.add_argument("endo")

    p = add("deform", cmd_deform, "deform the structure by an endomorphism")
    p.add_argument("endo")

    add("double", cmd_double, "assemble and check a bialgebroid double")

    p = add("pn", cmd_pn, "check a (bivector, endomorphism) pair")
    p.add_argument("pi")
    p.add_argument("endo")

    p = add("omegan", cmd_omegan, "check a (2-form, endomorphism) pair")
    p.add_argument("omega")
    p.add_argument("endo")

    p = add("irreducible", cmd_irreducible, "irreducibility verdict")
    p.add_argument("--max-degree", type=int, default=2)
    p.add_argument("--lie-algebroid", action="store_true")

    p = add("verify", cmd_verify, "run a randomized verification suite")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--scale", type=int, default=1,
                   help="multiply the sample counts")

    return ap


def run_command(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, ModelError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except CouralgError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
