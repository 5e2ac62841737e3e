"""Builders for the standard concrete models used in tests and demos.

All builders are cached so a model's signature object (and its bracket
cache) is shared across a session.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .algebra import LABEL_A, LABEL_ASTAR, AlgebraSignature, GradedPoly, signature
from .bialgebroid import DoubleModel, gamma_from_structure, mu_from_structure
from .courant import CourantStructure


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def double_signature(base_dim: int, a_names, b_names) -> AlgebraSignature:
    """Labelled signature of a double with the canonical hyperbolic pairing."""
    n = len(a_names)
    if len(b_names) != n:
        raise ValueError("A and A* halves must have the same rank")
    odd = [(nm, LABEL_A) for nm in a_names] + [(nm, LABEL_ASTAR) for nm in b_names]
    pairing = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        pairing[i][n + i] = pairing[n + i][i] = 1
    return signature(base_dim, odd, pairing)


@lru_cache(maxsize=None)
def so3() -> CourantStructure:
    """Quadratic Lie algebra so(3): three odd generators, identity pairing."""
    sig = signature(0, ["t1", "t2", "t3"], _eye(3))
    theta = sig.tau("t1") * sig.tau("t2") * sig.tau("t3")
    return CourantStructure.from_theta(theta)


@lru_cache(maxsize=None)
def so3_so3() -> CourantStructure:
    """Direct sum of two commuting so(3) factors."""
    sig = signature(0, [f"t{i}" for i in range(1, 7)], _eye(6))
    theta = (
        sig.tau("t1") * sig.tau("t2") * sig.tau("t3")
        + sig.tau("t4") * sig.tau("t5") * sig.tau("t6")
    )
    return CourantStructure.from_theta(theta)


@lru_cache(maxsize=None)
def abelian(n: int = 2) -> CourantStructure:
    """Abelian model: identity pairing, zero Courant structure."""
    sig = signature(0, [f"t{i}" for i in range(1, n + 1)], _eye(n))
    return CourantStructure.from_theta(sig.zero())


@lru_cache(maxsize=None)
def gt1() -> DoubleModel:
    """Generalized tangent bundle of the line, polynomial coefficients.

    A = T R with basis section th (the coordinate vector field) and dual
    dx; the anchor is the identity.
    """
    sig = double_signature(1, ["th"], ["dx"])
    mu = mu_from_structure(sig, None, anchor=[[1]])
    return DoubleModel(sig, mu, sig.zero())


@lru_cache(maxsize=None)
def tangent_r2() -> DoubleModel:
    """Tangent double of the plane: A = T R^2, gamma = 0."""
    sig = double_signature(2, ["d1", "d2"], ["x1", "x2"])
    mu = mu_from_structure(sig, None, anchor=[[1, 0], [0, 1]])
    return DoubleModel(sig, mu, sig.zero())


@lru_cache(maxsize=None)
def aff1_double() -> DoubleModel:
    """Trivial double of the nonabelian 2-dim Lie algebra [e1,e2] = e2."""
    sig = double_signature(0, ["e1", "e2"], ["f1", "f2"])
    c = [[[0, 0], [0, 0]], [[0, 1], [-1, 0]]]  # c[g][a][b]; [e1,e2] = e2
    mu = mu_from_structure(sig, c)
    return DoubleModel(sig, mu, sig.zero())


@lru_cache(maxsize=None)
def sl2_bialgebra() -> DoubleModel:
    """The coboundary bialgebra of sl(2) with r = E wedge F.

    A: [H,E] = 2E, [H,F] = -2F, [E,F] = H (basis order H, E, F).
    A*: [H*,E*] = -E*, [H*,F*] = -F*, [E*,F*] = 0.
    """
    sig = double_signature(0, ["H", "E", "F"], ["Hs", "Es", "Fs"])
    c = [
        # target H: [E,F] = H
        [[0, 0, 0], [0, 0, 1], [0, -1, 0]],
        # target E: [H,E] = 2E
        [[0, 2, 0], [-2, 0, 0], [0, 0, 0]],
        # target F: [H,F] = -2F
        [[0, 0, -2], [0, 0, 0], [2, 0, 0]],
    ]
    d = [
        # target H*: none
        [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
        # target E*: [H*,E*] = -E*
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
        # target F*: [H*,F*] = -F*
        [[0, 0, -1], [0, 0, 0], [1, 0, 0]],
    ]
    mu = mu_from_structure(sig, c)
    gamma = gamma_from_structure(sig, d)
    return DoubleModel(sig, mu, gamma)


ALL_BUILDERS = {
    "so3": so3,
    "so3_so3": so3_so3,
    "abelian2": abelian,
    "gt1": gt1,
    "tangent_r2": tangent_r2,
    "aff1": aff1_double,
    "sl2bi": sl2_bialgebra,
}
