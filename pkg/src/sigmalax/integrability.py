"""The quadratic integrability condition on a chiral operator pair.

Notation used throughout (``t1`` plays ``J+``, ``t2`` plays ``J-``)::

    D  = S+ - S-              P = 1 - D D^+   (projector onto the left kernel of D)
    B  = [t1, t2]             C = [S+ t1, t2] + [t1, S- t2]
    w+- = S+- B - C

The condition, for either sign, reads

    (X-+ + Pi) S+- B - (X-+ + Pi + S+-) C
        + [S+ S+ t1, t2] + 2 [S+ t1, S- t2] + [t1, S- S- t2] = 0

with ``X-+ = D S-+ D^+ + S-+ P`` (the similarity-transformed operator,
extended to the kernel so that it reduces to ``S-+`` for commuting pairs) and
``Pi`` any map with ``Pi D = 0``. The equations of motion leave ``P w`` as
constraints; ``Pi`` only ever acts through ``Pi w+-``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .algebra import GradedLieAlgebra
from .bilinear import PairBilinears, mm, pair_index
from .operators import ChiralOperatorPair, ConstraintProjector

INTEGRABLE = "integrable"
WITH_CONSTRAINTS = "integrable-with-constraints"
NOT_INTEGRABLE = "not-integrable"
BRANCHES = ("+", "-")


@dataclass
class IntegrabilityReport:
    verdict: str
    mode: str  # "graded" or "general"
    residual_table: dict = field(default_factory=dict)
    factor_tables: dict = field(default_factory=dict)
    product_table: list | None = None
    vacuous: list = field(default_factory=list)
    constraint_positions: list = field(default_factory=list)
    chosen_pi: object = None
    failing_branches: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def integrable(self) -> bool:
        return self.verdict != NOT_INTEGRABLE

    def to_json(self) -> dict:
        def table(t):
            return [[exact.fstr(x) for x in row] for row in t]

        out: dict = {"verdict": self.verdict, "mode": self.mode}
        if self.mode == "graded":
            out["factor_tables"] = {k: table(v) for k, v in self.factor_tables.items()}
            out["product_table"] = table(self.product_table)
            out["residual_tables"] = {k: table(v) for k, v in self.residual_table.items()}
            out["vacuous"] = [list(p) for p in self.vacuous]
            out["chosen_pi"] = (
                None if self.chosen_pi is None
                else {str(k): exact.fstr(v) for k, v in sorted(self.chosen_pi.items())}
            )
        else:
            out["residuals"] = {
                b: [{"pair": list(p), "value": exact.to_strings(v)} for p, v in rows]
                for b, rows in self.residual_table.items()
            }
            out["chosen_pi"] = None if self.chosen_pi is None else exact.to_strings(self.chosen_pi)
        out["constraint_positions"] = [list(p) for p in self.constraint_positions]
        out["failing_branches"] = list(self.failing_branches)
        out["notes"] = list(self.notes)
        return out


# helpers -------------------------------------------------------------------------


def similarity_operator(pair: ChiralOperatorPair, branch: str) -> np.ndarray:
    """``X = D S D^+ + S P`` with ``S = S-`` for branch ``+`` and ``S+`` for ``-``."""
    s = pair.sigma_minus if branch == "+" else pair.sigma_plus
    d = pair.difference
    mul = exact.matmul
    return mul(mul(d, s), pair.pinv) + mul(s, pair.cokernel_projector)


def series_pi(pair: ChiralOperatorPair) -> np.ndarray:
    """The map ``-(S+ + S-) P`` that the order-two flatness coefficient supplies."""
    return -exact.matmul(pair.sigma_plus + pair.sigma_minus, pair.cokernel_projector)


def kernel_drift(pair: ChiralOperatorPair) -> np.ndarray:
    """``D S+ (1 - D^+ D)``.

    It vanishes when ``D`` is invertible or the two operators commute. In
    general the order-two flatness coefficient equals the condition with
    ``Pi = series_pi(pair)`` plus ``+- drift [t1, t2] / 2``.
    """
    return exact.matmul(exact.matmul(pair.difference, pair.sigma_plus), pair.kernel_projector)


def mapcond_all(pair: ChiralOperatorPair, pi: np.ndarray | None, branch: str,
                bil: PairBilinears | None = None) -> np.ndarray:
    """Condition residual for every basis pair (``dim x dim**2``)."""
    bil = bil or PairBilinears(pair)
    x = similarity_operator(pair, branch)
    if pi is not None:
        x = x + pi
    return mm(x, bil.w(branch)) - mm(bil.sigma(branch), bil.cross) + bil.quad


def mapcond_residual(pair: ChiralOperatorPair, pi: np.ndarray | None, t1: np.ndarray,
                     t2: np.ndarray, branch: str = "+") -> np.ndarray:
    """Condition residual on a single pair of elements, straight from the expanded form."""
    alg = pair.algebra
    sp, sm = pair.sigma_plus, pair.sigma_minus
    s_own = sp if branch == "+" else sm
    x = similarity_operator(pair, branch)
    if pi is not None:
        x = x + pi
    b = alg.bracket(t1, t2)
    c = alg.bracket(sp @ t1, t2) + alg.bracket(t1, sm @ t2)
    return (
        x @ (s_own @ b)
        - (x + s_own) @ c
        + alg.bracket(sp @ (sp @ t1), t2)
        + 2 * alg.bracket(sp @ t1, sm @ t2)
        + alg.bracket(t1, sm @ (sm @ t2))
    )


def _solve_rows(target: np.ndarray, basis: np.ndarray) -> np.ndarray | None:
    """Solve ``z @ basis == target`` row by row; None if inconsistent."""
    m = basis.shape[0]
    if m == 0:
        return np.empty((target.shape[0], 0), dtype=object) if exact.is_zero(target) else None
    # [basis^T | target^T] reduced: consistent iff no pivot in target columns
    aug = np.concatenate([basis.T, target.T], axis=1)
    r, pivots = exact.rref(aug)
    if any(p >= m for p in pivots):
        return None
    z = exact.zeros(target.shape[0], m)
    for i, p in enumerate(pivots):
        z[:, p] = r[i, m:]
    return z


# graded check ------------------------------------------------------------------------


def factor(pair: ChiralOperatorPair, plus_grade: int, minus_grade: int, branch: str) -> Fraction:
    """``S_own(m) - S+(k) - S-(j)`` with ``m = k + j`` taken mod N."""
    n = pair.algebra.grading_order
    m = (plus_grade + minus_grade) % n
    own = pair.eigen_plus if branch == "+" else pair.eigen_minus
    return own[m] - pair.eigen_plus[plus_grade % n] - pair.eigen_minus[minus_grade % n]


def check_graded(algebra: GradedLieAlgebra, pair: ChiralOperatorPair) -> IntegrabilityReport:
    """Grade-by-grade form of the condition for pairs that are scalar on each grade.

    Tables are indexed ``[j][k]`` with ``j`` the grade of ``J-`` and ``k`` the
    grade of ``J+``. The factor tables hold ``S+(k) + S-(j) - S+-(j+k)``; on
    a pair with bracket in grade ``m`` the condition becomes
    ``(M-+ + pi_m) M+- = 0`` where ``M+-`` is minus the factor entry and
    ``pi_m`` may be nonzero only on grades where ``S+`` and ``S-`` agree.
    """
    pair.require_graded()
    n = algebra.grading_order
    kernel = set(pair.kernel_grades())
    factors = {
        b: [[-factor(pair, k, j, b) for k in range(n)] for j in range(n)] for b in BRANCHES
    }
    product = [[factors["+"][j][k] * factors["-"][j][k] for k in range(n)] for j in range(n)]
    vacuous = [(j, k) for j in range(n) for k in range(n) if not algebra.bracket_nonzero(k, j)]

    # pi_m must equal -M at every live pair with M != 0 landing in kernel grade m
    demands: dict[int, set] = {m: set() for m in kernel}
    constraints = []
    for j in range(n):
        for k in range(n):
            if (j, k) in vacuous:
                continue
            m = (j + k) % n
            mval = factor(pair, k, j, "+")
            if m in kernel and mval != 0:
                demands[m].add(-mval)
                constraints.append((j, k))
    chosen = {}
    consistent = True
    for m in sorted(kernel):
        vals = demands[m]
        if len(vals) > 1:
            consistent = False
            chosen[m] = min(vals)
        else:
            chosen[m] = next(iter(vals), exact.ZERO)

    residual = {}
    for b in BRANCHES:
        other = "-" if b == "+" else "+"
        tab = []
        for j in range(n):
            row = []
            for k in range(n):
                m = (j + k) % n
                val = (factor(pair, k, j, other) + chosen.get(m, 0)) * factor(pair, k, j, b)
                row.append(exact.frac(val))
            tab.append(row)
        residual[b] = tab

    failing = [
        b for b in BRANCHES
        if any(residual[b][j][k] != 0 for j in range(n) for k in range(n) if (j, k) not in vacuous)
    ]
    if failing or not consistent:
        verdict = NOT_INTEGRABLE
        failing = failing or list(BRANCHES)
    elif constraints:
        verdict = WITH_CONSTRAINTS
    else:
        verdict = INTEGRABLE
    notes = []
    if not consistent:
        notes.append("constraint grades demand conflicting projector eigenvalues")
    return IntegrabilityReport(
        verdict=verdict,
        mode="graded",
        residual_table=residual,
        factor_tables=factors,
        product_table=product,
        vacuous=vacuous,
        constraint_positions=constraints,
        chosen_pi=chosen if verdict != NOT_INTEGRABLE else None,
        failing_branches=failing,
        notes=notes,
    )


# general check -----------------------------------------------------------------------


def check_general(algebra: GradedLieAlgebra, pair: ChiralOperatorPair) -> IntegrabilityReport:
    """Expanded condition on every basis pair, solving exactly for ``Pi = Z N``.

    ``N`` is a basis of the left kernel of ``D``; the unknown ``Z`` is shared by
    both branches. Residual lists hold the nonzero ``Pi = 0`` residuals.
    """
    d = algebra.dim
    bil = PairBilinears(pair)
    nrows = pair.left_kernel
    cvals = mm(nrows, bil.w_plus) if nrows.shape[0] else np.empty((0, d * d), dtype=object)
    base = {b: mapcond_all(pair, None, b, bil) for b in BRANCHES}

    constraint_cols = [c for c in range(d * d) if any(x != 0 for x in cvals[:, c])]
    constraints = [pair_index(d, c) for c in constraint_cols]
    residuals = {
        b: [(pair_index(d, c), base[b][:, c]) for c in range(d * d) if any(x != 0 for x in base[b][:, c])]
        for b in BRANCHES
    }
    notes = []
    if not exact.is_zero(kernel_drift(pair)):
        notes.append(
            "operators do not commute and S+ - S- is singular; "
            "the condition and the order-two flatness coefficient differ by a kernel term"
        )

    all_zero = not residuals["+"] and not residuals["-"]
    if all_zero:
        z = exact.zeros(d, nrows.shape[0])
    else:
        z = _solve_rows(
            -np.concatenate([base["+"], base["-"]], axis=1),
            np.concatenate([cvals, cvals], axis=1),
        )
    failing: list[str] = []
    if z is None:
        failing = [b for b in BRANCHES if _solve_rows(-base[b], cvals) is None] or ["joint"]
        verdict = NOT_INTEGRABLE
        pi = None
    else:
        pi = z @ nrows if nrows.shape[0] else exact.zeros(d, d)
        verdict = INTEGRABLE if all_zero and not constraints else WITH_CONSTRAINTS
    return IntegrabilityReport(
        verdict=verdict,
        mode="general",
        residual_table=residuals,
        constraint_positions=constraints,
        chosen_pi=pi,
        failing_branches=failing,
        notes=notes,
    )


def check(pair: ChiralOperatorPair) -> IntegrabilityReport:
    """Graded check when the pair allows it, otherwise the general one."""
    if pair.grading_diagonal:
        return check_graded(pair.algebra, pair)
    return check_general(pair.algebra, pair)


# constraints and equations of motion ----------------------------------------------


@dataclass(frozen=True)
class ConstraintDescriptor:
    """``projector(S(m) - S+(k) - S-(j)) [T_k, T_j]`` for one projector and position."""

    projector: str
    position: tuple
    coefficient: object
    active: bool

    def describe(self) -> str:
        if isinstance(self.position[0], int) and len(self.position) == 2 and not isinstance(self.coefficient, np.ndarray):
            j, k = self.position
            return f"{self.projector}: {exact.fstr(self.coefficient)} [J+({k}), J-({j})]"
        return f"{self.projector}: pair {self.position}"


def derive_constraints(algebra: GradedLieAlgebra, pair: ChiralOperatorPair,
                       projectors: Sequence[ConstraintProjector]) -> list[ConstraintDescriptor]:
    """One descriptor per projector and (live) position it sees.

    For grade projectors the position is ``(j, k)`` with ``j`` the ``J-`` grade
    and ``k`` the ``J+`` grade, and only pairs whose bracket lands in the
    projector's grade are emitted. For general projectors the position is the
    basis pair ``(a, b)`` and only pairs where the projector sees the bracket
    are emitted.
    """
    out: list[ConstraintDescriptor] = []
    if not projectors:
        return out
    n = algebra.grading_order
    if pair.grading_diagonal and all(p.grade is not None for p in projectors):
        for p in projectors:
            for j in range(n):
                for k in range(n):
                    if (j + k) % n != p.grade or not algebra.bracket_nonzero(k, j):
                        continue
                    coeff = factor(pair, k, j, "+")
                    out.append(ConstraintDescriptor(p.label, (j, k), coeff, coeff != 0))
        return out
    bil = PairBilinears(pair)
    d = algebra.dim
    for p in projectors:
        seen = p.pi @ bil.bracket
        vals = p.pi @ bil.w_plus
        for c in range(d * d):
            if exact.is_zero(seen[:, c]) and exact.is_zero(vals[:, c]):
                continue
            v = vals[:, c]
            out.append(ConstraintDescriptor(p.label, pair_index(d, c), v, not exact.is_zero(v)))
    return out


@dataclass(frozen=True)
class Equation:
    """``lhs + sum coeff [J+(k), J-(j)] = 0``; constraints have an empty lhs."""

    lhs: str
    terms: tuple  # of (coefficient, plus_grade, minus_grade)

    def render(self) -> str:
        parts = [self.lhs] if self.lhs else []
        for coeff, k, j in self.terms:
            c = "" if coeff == 1 else ("-" if coeff == -1 else f"{exact.fstr(coeff)} ")
            parts.append(f"{c}[J+({k}), J-({j})]")
        body = " + ".join(parts).replace("+ -", "- ")
        return f"{body or '0'} = 0"


@dataclass
class EOMDescriptor:
    """Solved order-zero and order-one flatness equations.

    ``equations`` is filled for grading-diagonal pairs. For general pairs the
    operator coefficients are kept as matrices: ``dJ+ = plus_solution(w-)``
    etc., with the kernel of ``D`` shared evenly.
    """

    mode: str
    equations: list = field(default_factory=list)
    operators: dict = field(default_factory=dict)

    def render(self) -> list[str]:
        if self.equations:
            return [e.render() for e in self.equations]
        return [
            "S+ dJ+ + S- dJ- + [S+ J+, J-] + [J+, S- J-] = 0",
            "dJ+ + dJ- + [J+, J-] = 0",
        ]


def eom_descriptor(algebra: GradedLieAlgebra, pair: ChiralOperatorPair) -> EOMDescriptor:
    if not pair.grading_diagonal:
        return EOMDescriptor(
            "general",
            operators={
                "dJ+": pair.sigma_plus,
                "dJ-": pair.sigma_minus,
                "[S+ J+, J-]": pair.sigma_plus,
                "[J+, S- J-]": pair.sigma_minus,
                "inverse": pair.pinv,
                "constraint": pair.cokernel_projector,
            },
        )
    n = algebra.grading_order
    kernel = set(pair.kernel_grades())
    eqs: list[Equation] = []
    for m in range(n):
        if not algebra.grade_indices(m):
            continue
        live = [
            (k, j) for k in range(n) for j in range(n)
            if (k + j) % n == m and algebra.bracket_nonzero(k, j)
        ]
        if m in kernel:
            eqs.append(Equation(f"dJ({m})", tuple((exact.ONE, k, j) for k, j in live)))
            cons = [(factor(pair, k, j, "+"), k, j) for k, j in live if factor(pair, k, j, "+") != 0]
            for coeff, k, j in cons:
                eqs.append(Equation("", ((exact.ONE, k, j),)))
            continue
        dm = pair.eigen_plus[m] - pair.eigen_minus[m]
        # D dJ+ = M- B and D dJ- = -M+ B on grade m
        plus = tuple(
            (-factor(pair, k, j, "-") / dm, k, j) for k, j in live if factor(pair, k, j, "-") != 0
        )
        minus = tuple(
            (factor(pair, k, j, "+") / dm, k, j) for k, j in live if factor(pair, k, j, "+") != 0
        )
        eqs.append(Equation(f"dJ+({m})", plus))
        eqs.append(Equation(f"dJ-({m})", minus))
    return EOMDescriptor("graded", equations=eqs)
