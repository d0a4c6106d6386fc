"""Built-in models with their operator tables, expected verdicts and connections.

Expected connections are transcribed from closed forms written in terms of
``J`` and ``*J`` (or directly in chiral form) and are never produced by
exponentiating the operators, so they serve as an independent check of
:func:`sigmalax.lax.build_lax`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import exact
from .algebra import GradedLieAlgebra, direct_sum, sl
from .errors import BadParameters, NoClosedForm, UnknownModel
from .integrability import INTEGRABLE, NOT_INTEGRABLE, WITH_CONSTRAINTS
from .lax import LaurentConnection
from .operators import (
    ChiralOperatorPair,
    find_constraint_projectors,
    from_action,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    name: str
    params: tuple
    algebra: GradedLieAlgebra
    pair: ChiralOperatorPair
    projectors: list = field(default_factory=list)
    expected_lax: LaurentConnection | None = None
    expected_verdict: str | None = None
    notes: str = ""


# closed-form transcriptions ----------------------------------------------------------


def from_dual_form(alg: GradedLieAlgebra, grades: Mapping[int, tuple[dict, dict]]) -> LaurentConnection:
    """Connection written as ``sum_k (sum_p a_kp e^(p l)) J(k) + (sum_p b_kp e^(p l)) *J(k)``.

    ``grades[k] = (a, b)`` with ``a``, ``b`` dicts from power to coefficient.
    Since ``J = J+ + J-`` and ``*J = J+ - J-``, the chiral coefficients are
    ``a + b`` and ``a - b``.
    """
    terms = []
    for k, (a, b) in grades.items():
        proj = alg.grade_projector(k)
        for p in set(a) | set(b):
            av, bv = exact.frac(a.get(p, 0)), exact.frac(b.get(p, 0))
            terms.append((p, "+", proj * (av + bv)))
            terms.append((p, "-", proj * (av - bv)))
    return LaurentConnection.from_terms(alg.dim, terms)


def from_chiral_form(alg: GradedLieAlgebra, terms: Sequence[tuple]) -> LaurentConnection:
    """Connection from ``(power, grade, chirality)`` with chirality ``+``, ``-`` or ``""`` (both)."""
    out = []
    for p, k, ch in terms:
        proj = alg.grade_projector(k)
        for c in ("+", "-"):
            if ch in ("", c):
                out.append((p, c, proj))
    return LaurentConnection.from_terms(alg.dim, out)


def _zn_expected(alg: GradedLieAlgebra, n: int) -> LaurentConnection:
    # sum_k e^(-k l) J+(k) + sum_k e^(k l) J-(N - k), k = 0..N-1
    terms = [(-k, k, "+") for k in range(n)] + [(k, (n - k) % n, "-") for k in range(n)]
    return from_chiral_form(alg, terms)


# models ---------------------------------------------------------------------------------


def _zn_pair(alg: GradedLieAlgebra, n: int) -> ChiralOperatorPair:
    # S+ = -k on grades 0..N-1 and S- = N - k on grades 1..N (grade N is grade 0)
    plus = [-k for k in range(n)]
    minus = [(n - k) if k else 0 for k in range(n)]
    return ChiralOperatorPair.from_eigenvalues(alg, plus, minus)


def z2_symmetric() -> ModelSpec:
    alg = sl(2, "cyclic", 2)
    pair = from_action(alg, [0, -1], [0, 0])
    lax = from_dual_form(alg, {
        0: ({0: 1}, {}),
        1: ({-1: HALF, 1: HALF}, {-1: HALF, 1: -HALF}),
    })
    return ModelSpec("z2_symmetric", (), alg, pair, find_constraint_projectors(pair), lax,
                     INTEGRABLE, "symmetric space on sl(2) with the Z2 grading by Ad diag(1, -1)")


def z3_coset() -> ModelSpec:
    alg = sl(3, "cyclic", 3)
    pair = _zn_pair(alg, 3)
    lax = from_dual_form(alg, {
        0: ({0: 1}, {}),
        1: ({-1: HALF, 2: HALF}, {-1: HALF, 2: -HALF}),
        2: ({-2: HALF, 1: HALF}, {-2: HALF, 1: -HALF}),
    })
    return ModelSpec("z3_coset", (), alg, pair, find_constraint_projectors(pair), lax,
                     INTEGRABLE, "Z3 coset on sl(3), operator eigenvalues S+ = (0,-1,-2), S- = (0,2,1)")


def z4_superspace() -> ModelSpec:
    alg = sl(4, "cyclic", 4)
    pair = ChiralOperatorPair.from_eigenvalues(alg, [0, -1, -2, 1], [0, -1, 2, 1])
    lax = from_chiral_form(alg, [(-2, 2, "+"), (-1, 1, ""), (0, 0, ""), (1, 3, ""), (2, 2, "-")])
    projectors = [p for p in find_constraint_projectors(pair) if p.grade in (1, 3)]
    return ModelSpec("z4_superspace", (), alg, pair, projectors, lax, WITH_CONSTRAINTS,
                     "bosonic Z4-graded sl(4); odd grades 1 and 3 carry constraints")


def zn_coset(n: int = 4) -> ModelSpec:
    n = _int_param(n, "N")
    if n < 2:
        raise BadParameters("zn_coset needs N >= 2")
    alg = sl(n, "cyclic", n)
    pair = _zn_pair(alg, n)
    return ModelSpec("zn_coset", (n,), alg, pair, find_constraint_projectors(pair),
                     _zn_expected(alg, n), INTEGRABLE, f"Z{n} coset on sl({n})")


def _pcm_verdict(alpha: Fraction, beta: Fraction) -> str:
    if alpha == beta or alpha == -beta:
        return INTEGRABLE
    if beta == 0:
        return WITH_CONSTRAINTS
    return NOT_INTEGRABLE


def pcm_gauge_fixed(alpha=1, beta=2) -> ModelSpec:
    alpha, beta = exact.frac(alpha), exact.frac(beta)
    alg = sl(2)
    pair = from_action(alg, [beta], [0], alpha)
    try:
        lax = _pcm_expected(alg, alpha, beta)
    except NoClosedForm:
        lax = None
    return ModelSpec("pcm_gauge_fixed", (alpha, beta), alg, pair, find_constraint_projectors(pair),
                     lax, _pcm_verdict(alpha, beta), "principal chiral model with a WZ term, one copy of the group")


def _pcm_expected(alg: GradedLieAlgebra, alpha: Fraction, beta: Fraction) -> LaurentConnection:
    eye = exact.identity(alg.dim)
    if beta == 0:
        # exp(alpha l) J
        return LaurentConnection.from_terms(alg.dim, [(alpha, "+", eye), (alpha, "-", eye)])
    if alpha == beta:
        # exp(2 beta l) J+ + J-
        return LaurentConnection.from_terms(alg.dim, [(2 * beta, "+", eye), (0, "-", eye)])
    if alpha == -beta:
        # J+ + exp(-2 beta l) J-
        return LaurentConnection.from_terms(alg.dim, [(0, "+", eye), (-2 * beta, "-", eye)])
    raise NoClosedForm("the gauge-fixed model needs three distinct exponents away from its special loci")


def wzw(beta=1) -> ModelSpec:
    beta = exact.frac(beta)
    if beta == 0:
        raise BadParameters("wzw needs beta != 0")
    spec = pcm_gauge_fixed(beta, beta)
    return ModelSpec("wzw", (beta,), spec.algebra, spec.pair, spec.projectors,
                     spec.expected_lax, INTEGRABLE, "gauge-fixed principal chiral model at alpha = beta")


def pcm_constrained(alpha=1) -> ModelSpec:
    alpha = exact.frac(alpha)
    spec = pcm_gauge_fixed(alpha, 0)
    verdict = WITH_CONSTRAINTS if alpha != 0 else INTEGRABLE
    return ModelSpec("pcm_constrained", (alpha,), spec.algebra, spec.pair, spec.projectors,
                     spec.expected_lax, verdict, "beta = 0: equation of motion becomes [J+, J-] = 0")


def doubled_blocks(alpha: Fraction, beta: Fraction, sign: int) -> np.ndarray:
    """The 2x2 block ``(1/2b) [[a + s b, -a - s b], [a - s b, -a + s b]]``."""
    a, b = alpha, beta * sign
    return exact.matrix([[a + b, -a - b], [a - b, -a + b]]) / (2 * beta)


def pcm_doubled(alpha=1, beta=1) -> ModelSpec:
    alpha, beta = exact.frac(alpha), exact.frac(beta)
    if beta == 0:
        raise BadParameters("pcm_doubled needs beta != 0")
    base = sl(2)
    alg = direct_sum(base)
    eye = exact.identity(base.dim)
    sp = np.kron(doubled_blocks(alpha, beta, 1), eye)
    sm = np.kron(doubled_blocks(alpha, beta, -1), eye)
    pair = ChiralOperatorPair.from_matrices(alg, sp, sm)
    full = exact.identity(alg.dim)
    # J + (e^l - 1) S+ J+ - (e^-l - 1) S- J-
    lax = LaurentConnection.from_terms(alg.dim, [
        (0, "+", full - sp), (1, "+", sp),
        (0, "-", full + sm), (-1, "-", -sm),
    ])
    return ModelSpec("pcm_doubled", (alpha, beta), alg, pair, find_constraint_projectors(pair), lax,
                     INTEGRABLE, "principal chiral model on g + g with opposite WZ terms on the summands")


def general_z2_pair(alg: GradedLieAlgebra, alpha, beta, gamma) -> ChiralOperatorPair:
    """``S+-(0) = alpha +- beta`` and ``S+-(1) = alpha +- gamma`` via the action map."""
    return from_action(alg, [beta, gamma], [0, 0], alpha)


def general_z2_verdict(alpha, beta, gamma) -> str:
    """Verdict from the three scalar conditions of the Z2 family.

    ``(a - b)(a + b) - p0 a = (a + 2g - b - p1)(a - b) = (a + b)(a + b - 2g - p1) = 0``
    with ``p0`` free only when ``b = 0`` and ``p1`` free only when ``g = 0``.
    """
    a, b, g = (exact.frac(x) for x in (alpha, beta, gamma))

    def holds(p0, p1):
        return (
            (a - b) * (a + b) - p0 * a == 0
            and (a + 2 * g - b - p1) * (a - b) == 0
            and (a + b) * (a + b - 2 * g - p1) == 0
        )

    if holds(0, 0):
        return INTEGRABLE
    p0s = [exact.ZERO]
    if b == 0:
        p0s.append(a)  # the only value that can fix the first condition when a != 0
    p1s = [exact.ZERO]
    if g == 0:
        p1s += [a - b + 2 * g, a + b - 2 * g]
    if any(holds(p0, p1) for p0 in p0s for p1 in p1s):
        return WITH_CONSTRAINTS
    return NOT_INTEGRABLE


def general_z2(alpha=1, beta=2, gamma=3) -> ModelSpec:
    alpha, beta, gamma = (exact.frac(x) for x in (alpha, beta, gamma))
    alg = sl(3, "cyclic", 2)
    pair = general_z2_pair(alg, alpha, beta, gamma)
    return ModelSpec("general_z2", (alpha, beta, gamma), alg, pair, find_constraint_projectors(pair),
                     None, general_z2_verdict(alpha, beta, gamma),
                     "three-constant Z2 action on sl(3) with grade 0 = gl(2)")


def new_z2(beta=1) -> ModelSpec:
    beta = exact.frac(beta)
    if beta == 0:
        raise BadParameters("new_z2 needs beta != 0")
    spec = general_z2(beta, beta, 0)
    # exp(2 l) J+(0) + J-(0) + exp(l) J(1), up to rescaling l by beta
    lax = from_chiral_form(spec.algebra, [(2, 0, "+"), (0, 0, "-"), (1, 1, "")])
    return ModelSpec("new_z2", (beta,), spec.algebra, spec.pair, spec.projectors, lax,
                     WITH_CONSTRAINTS, "Z2 model at gamma = 0, beta = alpha with constraint [J+(0), J(1)] = 0")


def _int_param(v, name: str) -> int:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise BadParameters(f"{name} must be an integer")
        return int(v)
    try:
        return int(v)
    except (TypeError, ValueError) as exc:
        raise BadParameters(f"{name} must be an integer") from exc


REGISTRY: dict[str, tuple[Callable[..., ModelSpec], tuple[str, ...]]] = {
    "z2_symmetric": (z2_symmetric, ()),
    "z3_coset": (z3_coset, ()),
    "z4_superspace": (z4_superspace, ()),
    "zn_coset": (zn_coset, ("N",)),
    "pcm_gauge_fixed": (pcm_gauge_fixed, ("alpha", "beta")),
    "pcm_doubled": (pcm_doubled, ("alpha", "beta")),
    "pcm_constrained": (pcm_constrained, ("alpha",)),
    "general_z2": (general_z2, ("alpha", "beta", "gamma")),
    "wzw": (wzw, ("beta",)),
    "new_z2": (new_z2, ("beta",)),
}


def names() -> list[str]:
    return list(REGISTRY)


def parse_name(text: str) -> tuple[str, list]:
    """``"general_z2(1,1,0)"`` -> ``("general_z2", [1, 1, 0])``; values may be ``p/q``."""
    text = text.strip()
    if "(" not in text:
        return text, []
    if not text.endswith(")"):
        raise UnknownModel(f"malformed model name {text!r}")
    name, args = text[:-1].split("(", 1)
    values = []
    for a in args.split(","):
        a = a.strip()
        if a:
            try:
                values.append(exact.frac(a))
            except (ValueError, ZeroDivisionError) as exc:
                raise BadParameters(f"bad parameter {a!r}") from exc
    return name.strip(), values


def builtin(name: str, params: Sequence | None = None) -> ModelSpec:
    """Look up a model; ``name`` may carry its parameters, e.g. ``"zn_coset(5)"``."""
    base, inline = parse_name(name)
    if base not in REGISTRY:
        raise UnknownModel(f"unknown model {base!r}; known: {', '.join(REGISTRY)}")
    factory, argnames = REGISTRY[base]
    args = list(params) if params else inline
    if len(args) > len(argnames):
        raise BadParameters(f"{base} takes at most {len(argnames)} parameters")
    return factory(*args)


def expected_lax(name: str, params: Sequence | None = None) -> LaurentConnection:
    spec = builtin(name, params)
    if spec.expected_lax is None:
        raise NoClosedForm(f"{spec.name}{spec.params} has no closed-form connection of exponential type")
    return spec.expected_lax
