"""The canonical degree -2 graded Poisson bracket and derived operators.

The bracket is fixed on generators by

    {q^i, p_j} = delta^i_j        {t_a, t_b} = g^{ab}        all others 0

and extended to monomials as a biderivation with Koszul signs:

    {x f, h} = x {f, h} + (-1)^{|f||h|} {x, h} f
    {x, y_1..y_k} = sum_j (-1)^{|x||y_1..y_{j-1}|} y_1..  {x, y_j}  ..y_k

Every generator-pair bracket is a scalar, so the recursion terminates in
single contractions.  The resulting bracket satisfies, for homogeneous f, g:

    deg {f,g} = deg f + deg g - 2
    {f,g} = -(-1)^{deg f deg g} {g,f}
    {f, gh} = {f,g} h + (-1)^{deg f deg g} g {f,h}
    {f,{g,h}} = {{f,g},h} + (-1)^{deg f deg g} {g,{f,h}}

all of which are pinned by the test suite.  Monomial-pair brackets are
cached on the signature, which makes repeated sweeps over the same model
cheap.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import AlgebraSignature, GradedPoly, Monomial, mono_mul
from .errors import DegreeError, MasterEquationError, SignatureMismatchError


def _first_factor(m: Monomial):
    """Split m = x * rest, peeling one generator unit in canonical order.

    Returns (kind, index, rest) with kind in {'q','tau','p'}, or None when
    m is the empty monomial.
    """
    for i, e in enumerate(m.q):
        if e:
            q = list(m.q)
            q[i] -= 1
            return "q", i, Monomial(tuple(q), m.tau, m.p)
    if m.tau:
        return "tau", m.tau[0], Monomial(m.q, m.tau[1:], m.p)
    for i, e in enumerate(m.p):
        if e:
            p = list(m.p)
            p[i] -= 1
            return "p", i, Monomial(m.q, m.tau, tuple(p))
    return None


def _gen_bracket(sig: AlgebraSignature, kind: str, idx: int, m: Monomial) -> dict:
    """{x, m} for a single generator x; dict of monomial -> coefficient."""
    out: dict = {}
    if kind == "q":
        # only {q^i, p_i} = 1 contributes: a p_i-derivative
        e = m.p[idx]
        if e:
            p = list(m.p)
            p[idx] -= 1
            out[Monomial(m.q, m.tau, tuple(p))] = Fraction(e)
    elif kind == "p":
        # {p_i, q^i} = -1: minus the q^i-derivative
        e = m.q[idx]
        if e:
            q = list(m.q)
            q[idx] -= 1
            out[Monomial(tuple(q), m.tau, m.p)] = Fraction(-e)
    else:
        g_inv = sig.pairing_inv[idx]
        for j, b in enumerate(m.tau):
            c = g_inv[b]
            if c == 0:
                continue
            tau = m.tau[:j] + m.tau[j + 1:]
            sign = -1 if j & 1 else 1
            mono = Monomial(m.q, tau, m.p)
            prev = out.get(mono)
            val = c * sign
            out[mono] = val if prev is None else prev + val
            if out[mono] == 0:
                del out[mono]
    return out


def _dict_mul_mono(sig, d: dict, mono: Monomial, left: bool) -> dict:
    """Multiply every monomial of d by mono (on the given side)."""
    if mono.degree == 0 and not any(mono.q):
        return d  # multiplying by 1
    out: dict = {}
    for m, c in d.items():
        prod, sign = mono_mul(mono, m) if left else mono_mul(m, mono)
        if sign == 0:
            continue
        val = c * sign
        prev = out.get(prod)
        out[prod] = val if prev is None else prev + val
        if out[prod] == 0:
            del out[prod]
    return out


def _mono_bracket(sig: AlgebraSignature, m1: Monomial, m2: Monomial) -> dict:
    """Cached bracket of two canonical monomials."""
    cache = sig._pb_cache
    key = (m1, m2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    split = _first_factor(m1)
    if split is None:
        result: dict = {}
    else:
        kind, idx, rest = split
        if rest.degree == 0 and not any(rest.q):
            result = _gen_bracket(sig, kind, idx, m2)
        else:
            # {x rest, m2} = x {rest, m2} + (-1)^{|rest||m2|} {x, m2} rest
            x_mono = Monomial(
                tuple(int(kind == "q" and i == idx) for i in range(sig.base_dim)),
                (idx,) if kind == "tau" else (),
                tuple(int(kind == "p" and i == idx) for i in range(sig.base_dim)),
            )
            left_part = _dict_mul_mono(sig, _mono_bracket(sig, rest, m2), x_mono, left=True)
            right_part = _dict_mul_mono(sig, _gen_bracket(sig, kind, idx, m2), rest, left=False)
            sign = -1 if (rest.parity & m2.parity) else 1
            result = dict(left_part)
            for m, c in right_part.items():
                val = c * sign
                prev = result.get(m)
                result[m] = val if prev is None else prev + val
                if result[m] == 0:
                    del result[m]
    cache[key] = result
    return result


def poisson_bracket(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """The canonical graded Poisson bracket {f, g}."""
    if f.sig is not g.sig and f.sig != g.sig:
        raise SignatureMismatchError("bracket operands over different signatures")
    sig = f.sig
    out: dict = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            c12 = c1 * c2
            for m, c in _mono_bracket(sig, m1, m2).items():
                val = c12 * c
                prev = out.get(m)
                out[m] = val if prev is None else prev + val
    return GradedPoly(sig, out)


def is_master(theta: GradedPoly) -> bool:
    """Whether the degree-3 element satisfies {theta, theta} = 0."""
    if not theta.has_degree(3):
        raise DegreeError("master equation requires a degree-3 element")
    return poisson_bracket(theta, theta).is_zero()


def d_operator(theta, f: GradedPoly) -> GradedPoly:
    """The differential {theta, f} of a validated degree-3 element.

    Accepts either a raw GradedPoly (validated here) or a structure object
    exposing `.theta` with the master equation already checked.
    """
    theta_poly = getattr(theta, "theta", theta)
    if theta_poly is theta:  # raw polynomial: validate
        if not is_master(theta_poly):
            raise MasterEquationError(
                "element does not satisfy the master equation",
                witness=poisson_bracket(theta_poly, theta_poly),
            )
    return poisson_bracket(theta_poly, f)


def nested_eval(w: GradedPoly, *elements: GradedPoly) -> GradedPoly:
    """Left-nested derived evaluation {{..{{e1, w}, e2}..}, ek}.

    With w of degree k and k degree-1 arguments this computes the value of
    the multilinear form that w induces on sections.
    """
    acc = w
    first = True
    for e in elements:
        acc = poisson_bracket(e, acc) if first else poisson_bracket(acc, e)
        first = False
    return acc
