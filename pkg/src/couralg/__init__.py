"""Exact graded Poisson calculus on Courant algebroids.

The package computes with the canonical degree -2 Poisson bracket of the
symplectic realization of a quadratic vector bundle: Courant structures
and their Dorfman brackets, Nijenhuis torsion and deformation theory of
skew endomorphisms, doubles of Lie bialgebroids, and irreducibility.  All
arithmetic is exact over the rationals.
"""

from .algebra import (
    AlgebraSignature,
    GradedPoly,
    Monomial,
    degree,
    mul,
    normalize_monomial,
    rat,
    signature,
)
from .bialgebroid import (
    BlockEndomorphism,
    DoubleModel,
    assemble_double,
    block_cps,
    block_lift,
    check_bialgebroid,
    concomitant,
    deform_bialgebroid,
    gamma_from_structure,
    lift_a_endo,
    lift_bivector,
    lift_tensor,
    lift_two_form,
    mu_from_structure,
    omega_n_check,
    pn_check,
    quadratic_theta,
    schouten,
    torsion_sum_check,
    trivial_double_deform,
)
from .courant import (
    CourantStructure,
    anchor_apply,
    courant_bracket,
    dorfman,
    pairing,
    partial_op,
    section_components,
    section_from_components,
    verify_courant_axioms,
)
from .errors import (
    BialgebroidError,
    CouralgError,
    DegreeError,
    MasterEquationError,
    ModelError,
    NotCpsError,
    NotSkewError,
    ParseError,
    SignatureMismatchError,
    TorsionNonzeroError,
)
from .irreducibility import (
    AnsatzSpace,
    is_irreducible_courant,
    is_irreducible_lie_algebroid,
    nullspace,
    solve_commuting,
    solve_p1,
)
from .nijenhuis import (
    CpsResult,
    Endomorphism,
    TensorReport,
    check_defect_identities,
    classify,
    cps_check,
    deform,
    deformed_bracket,
    extract_endo,
    is_morphism,
    is_skew,
    lift_endo,
    torsion_courant,
    torsion_dorfman,
    torsion_tensor,
    transpose,
)
from .parsing import ModelFile, parse_expr, parse_model, parse_model_text, serialize_model
from .poisson import d_operator, is_master, nested_eval, poisson_bracket
