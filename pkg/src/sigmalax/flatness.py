"""Order-by-order and sampled flatness of ``A(l) = exp(l S+) J+ + exp(l S-) J-``.

The derivative terms are eliminated with the order-zero and order-one
equations. Writing ``t1`` for ``J+`` and ``t2`` for ``J-``, the flatness
two-form at parameter ``l`` is

    F(l) = exp(l S+) dJ+ + exp(l S-) dJ- + [exp(l S+) t1, exp(l S-) t2]

and its n-th derivative at ``l = 0`` is

    F_n = S+^n dJ+ + S-^n dJ- + sum_p binom(n, p) [S+^p t1, S-^(n-p) t2].

Series coefficients below are these derivatives (``n!`` times the Taylor
coefficients), which keeps everything integral-friendly and does not affect
which orders vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import exact
from .bilinear import PairBilinears, mm, pair_index, transformed_brackets
from .errors import UnresolvedKernelComponent
from .operators import ChiralOperatorPair, ConstraintProjector, find_constraint_projectors

HALF = Fraction(1, 2)
DEFAULT_SEED = 7919


def _projector_rows(pair: ChiralOperatorPair, projectors) -> np.ndarray:
    """Echelon basis of the functionals the declared constraints set to zero."""
    if projectors is None:
        projectors = find_constraint_projectors(pair)
    if not projectors:
        return exact.zeros(0, pair.dim)
    stacked = np.concatenate([p.pi for p in projectors], axis=0)
    r, piv = exact.rref(stacked)
    return r[: len(piv)]


def uncovered_rows(pair: ChiralOperatorPair, projectors) -> np.ndarray:
    """Left-kernel directions of ``S+ - S-`` that no declared projector covers."""
    basis = list(_projector_rows(pair, projectors))
    out = []
    for n in pair.left_kernel:
        trial = np.array(basis + [n], dtype=object)
        if exact.rank(trial) > len(basis):
            basis = list(exact.rref(trial)[0][: len(basis) + 1])
            out.append(n)
    return np.array(out, dtype=object) if out else exact.zeros(0, pair.dim)


@dataclass
class DerivativeSolution:
    dj_plus: np.ndarray
    dj_minus: np.ndarray
    modulo_constraints: bool  # the pair sits on a constraint position


def solve_dJ(pair: ChiralOperatorPair, projectors: Sequence[ConstraintProjector] | None,
             t1: np.ndarray, t2: np.ndarray) -> DerivativeSolution:
    """Solve the order-zero and order-one equations for ``dJ+-``.

    ``dJ+ = D^+ w-  - K B / 2`` and ``dJ- = -D^+ w+ - K B / 2`` where ``K`` is
    the projector onto the kernel of ``D``. This is the pseudo-inverse solution
    with the kernel part of ``-B`` shared evenly, so ``dJ+ + dJ- = -B`` holds
    exactly. The leftover order-one residual is ``-P w``, which must be killed
    by the declared constraints.
    """
    alg = pair.algebra
    sp, sm = pair.sigma_plus, pair.sigma_minus
    b = alg.bracket(t1, t2)
    c = alg.bracket(sp @ t1, t2) + alg.bracket(t1, sm @ t2)
    wp = sp @ b - c
    wm = sm @ b - c
    free = uncovered_rows(pair, projectors)
    if free.shape[0] and not exact.is_zero(free @ wp):
        raise UnresolvedKernelComponent(
            "the equations leave a kernel component that no constraint removes"
        )
    kb = pair.kernel_projector @ b * HALF
    dj_plus = pair.pinv @ wm - kb
    dj_minus = -(pair.pinv @ wp) - kb
    constrained = not exact.is_zero(pair.cokernel_projector @ wp)
    return DerivativeSolution(dj_plus, dj_minus, constrained)


@dataclass
class FlatnessSeriesReport:
    orders_checked: int
    residuals: dict  # order -> list of ((a, b), vector)
    modulo_constraints: bool
    max_float_residual: float | None = None
    seed: int | None = None

    @property
    def flat(self) -> bool:
        return all(not rows for rows in self.residuals.values())

    @property
    def first_nonzero_order(self) -> int | None:
        for n in sorted(self.residuals):
            if self.residuals[n]:
                return n
        return None

    def to_json(self) -> dict:
        return {
            "orders_checked": self.orders_checked,
            "flat": self.flat,
            "first_nonzero_order": self.first_nonzero_order,
            "modulo_constraints": self.modulo_constraints,
            "residuals": {
                str(n): [{"pair": list(p), "value": exact.to_strings(v)} for p, v in rows]
                for n, rows in sorted(self.residuals.items())
            },
            "max_float_residual": self.max_float_residual,
            "seed": self.seed,
        }


def _all_pairs_dj(pair: ChiralOperatorPair, projectors, bil: PairBilinears):
    d = pair.dim
    free = uncovered_rows(pair, projectors)
    if free.shape[0]:
        bad = mm(free, bil.w_plus)
        cols = [c for c in range(d * d) if any(x != 0 for x in bad[:, c])]
        if cols:
            raise UnresolvedKernelComponent(
                f"kernel component at basis pair {pair_index(d, cols[0])} is not removed by any constraint"
            )
    kb = mm(pair.kernel_projector, bil.bracket) * HALF
    dj_plus = mm(pair.pinv, bil.w_minus) - kb
    dj_minus = -mm(pair.pinv, bil.w_plus) - kb
    return dj_plus, dj_minus


def series_coefficients(pair: ChiralOperatorPair, projectors=None, order: int = 8,
                        bil: PairBilinears | None = None) -> list[np.ndarray]:
    """Raw ``F_n`` for ``n = 0..order`` on all basis pairs (``dim x dim**2`` each)."""
    bil = bil or PairBilinears(pair)
    dj_plus, dj_minus = _all_pairs_dj(pair, projectors, bil)
    f = bil.f
    pp = [exact.identity(pair.dim)]
    pm = [exact.identity(pair.dim)]
    for _ in range(order):
        pp.append(exact.matmul(pp[-1], pair.sigma_plus))
        pm.append(exact.matmul(pm[-1], pair.sigma_minus))
    out = []
    for n in range(order + 1):
        term = mm(pp[n], dj_plus) + mm(pm[n], dj_minus)
        for p in range(n + 1):
            term = term + transformed_brackets(f, pp[p], pm[n - p]) * comb(n, p)
        out.append(term)
    return out


def constraint_values(pair: ChiralOperatorPair, projectors, bil: PairBilinears) -> np.ndarray:
    """Declared constraint functionals evaluated on every basis pair."""
    rows = _projector_rows(pair, projectors)
    if rows.shape[0] == 0:
        return exact.zeros(0, pair.dim ** 2)
    return mm(rows, bil.w_plus)


def flatness_series(pair: ChiralOperatorPair, projectors=None, order: int = 8) -> FlatnessSeriesReport:
    """Check ``F_n = 0`` for ``n <= order`` modulo the declared constraints.

    Reduction is global: ``F_n`` passes if it equals one fixed linear map
    applied to the constraint values, simultaneously for every basis pair.
    On the constraint surface such an ``F_n`` vanishes identically.
    """
    if order < 2:
        raise ValueError("order must be at least 2")
    bil = PairBilinears(pair)
    coeffs = series_coefficients(pair, projectors, order, bil)
    cons = constraint_values(pair, projectors, bil)
    reducer = exact.RowReducer(cons) if not exact.is_zero(cons) else None
    d = pair.dim
    residuals = {}
    for n, fn in enumerate(coeffs):
        rem = fn if reducer is None else np.array([reducer.reduce(row) for row in fn], dtype=object)
        residuals[n] = [
            (pair_index(d, c), rem[:, c]) for c in range(d * d) if any(x != 0 for x in rem[:, c])
        ]
    return FlatnessSeriesReport(order, residuals, reducer is not None)


# floating cross-check ----------------------------------------------------------------


def _surface_sample(pair, rows, bil, rng, span: int = 3):
    """Random integer ``t1`` and a random ``t2`` on the constraint surface of ``t1``."""
    d = pair.dim
    t1 = exact.vector(rng.integers(-span, span + 1, size=d).tolist())
    if rows.shape[0] == 0:
        return t1, exact.vector(rng.integers(-span, span + 1, size=d).tolist())
    w = bil.w_plus.reshape(d, d, d)  # [c, a, b]
    lin = np.tensordot(w, t1, axes=(1, 0))  # [c, b]: t2 -> w(t1, t2)
    kernel = exact.nullspace(mm(rows, lin))
    if kernel.shape[0] == 0:
        return t1, exact.zeros(d)
    coeffs = exact.vector(rng.integers(-span, span + 1, size=kernel.shape[0]).tolist())
    return t1, coeffs @ kernel


def flatness_numeric(pair: ChiralOperatorPair, projectors=None,
                     lambdas: Sequence[float] = (-2.0, -1.0, 0.5, 1.0, 3.0),
                     trials: int = 100, seed: int = DEFAULT_SEED) -> float:
    """Largest relative flatness residual over random samples.

    Each sample draws integer ``t1`` and a ``t2`` satisfying the declared
    constraints, solves for ``dJ+-`` exactly and evaluates ``F(l)`` with dense
    matrix exponentials. The residual is ``|F|_inf`` divided by the largest
    of ``|dJ+- terms|_inf`` and ``|exp(l S+) t1|_inf |exp(l S-) t2|_inf``.
    """
    rng = np.random.default_rng(seed)
    alg = pair.algebra
    bil = PairBilinears(pair)
    rows = _projector_rows(pair, projectors)
    sp = exact.to_float(pair.sigma_plus)
    sm = exact.to_float(pair.sigma_minus)
    exps = [(expm(lam * sp), expm(lam * sm)) for lam in lambdas]
    worst = 0.0
    for _ in range(trials):
        t1, t2 = _surface_sample(pair, rows, bil, rng)
        sol = solve_dJ(pair, projectors, t1, t2)
        a, b = exact.to_float(t1), exact.to_float(t2)
        djp, djm = exact.to_float(sol.dj_plus), exact.to_float(sol.dj_minus)
        for ep, em in exps:
            xa, xb = ep @ a, em @ b
            terms = (ep @ djp, em @ djm, alg.bracket(xa, xb))
            # the bracket is measured against the size of its inputs so that
            # exact cancellation is not divided by its own rounding error
            scale = max(np.max(np.abs(terms[0])), np.max(np.abs(terms[1])),
                        np.max(np.abs(xa)) * np.max(np.abs(xb)))
            if scale == 0:
                continue
            worst = max(worst, float(np.max(np.abs(sum(terms)))) / scale)
    return worst
