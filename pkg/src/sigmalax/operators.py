"""Chiral operator pairs and the constraint projectors they admit.

A pair ``(S+, S-)`` acts on the chiral components of the current: ``S+`` on
``J+ = (J + *J)/2`` and ``S-`` on ``J- = (J - *J)/2``. Operators are stored as
exact matrices on algebra coefficients; pairs that are scalar on every grade
additionally keep their per-grade eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .algebra import GradedLieAlgebra
from .errors import (
    DegenerateForm,
    DimensionMismatch,
    NotGradingDiagonal,
    SymmetryClassViolation,
    ValidationError,
)

GRADING_DIAGONAL = "grading-diagonal"
GENERAL_MATRIX = "general-matrix"


def _grade_matrix(alg: GradedLieAlgebra, eigenvalues: Sequence) -> np.ndarray:
    values = [exact.frac(v) for v in eigenvalues]
    if len(values) != alg.grading_order:
        raise DimensionMismatch(
            f"expected {alg.grading_order} grade eigenvalues, got {len(values)}"
        )
    return exact.diag([values[g] for g in alg.grades])


def _grade_eigenvalues(alg: GradedLieAlgebra, m: np.ndarray) -> tuple[Fraction, ...] | None:
    """Per-grade eigenvalues if ``m`` is a scalar on every grade block."""
    if not exact.is_diagonal(m):
        return None
    values: list[Fraction | None] = [None] * alg.grading_order
    for i, g in enumerate(alg.grades):
        if values[g] is None:
            values[g] = m[i, i]
        elif values[g] != m[i, i]:
            return None
    # grades without basis elements carry no information
    return tuple(exact.ZERO if v is None else v for v in values)


def _as_operator(alg: GradedLieAlgebra, data) -> np.ndarray:
    if isinstance(data, np.ndarray) and data.ndim == 2:
        m = np.array([[exact.frac(x) for x in row] for row in data], dtype=object)
    elif data and isinstance(data[0], (list, tuple, np.ndarray)):
        m = exact.matrix(data)
    else:
        return _grade_matrix(alg, data)
    if m.shape != (alg.dim, alg.dim):
        raise DimensionMismatch(f"operator shape {m.shape} does not match dim {alg.dim}")
    return m


@dataclass(frozen=True, eq=False)
class ConstraintProjector:
    """A map ``pi`` with ``pi @ (S+ - S-) == 0``.

    ``grade`` is set for grade projectors of grading-diagonal pairs.
    """

    pi: np.ndarray
    label: str = ""
    grade: int | None = None

    def annihilates(self, difference: np.ndarray) -> bool:
        return exact.is_zero(self.pi @ difference)


@dataclass(frozen=True, eq=False)
class ChiralOperatorPair:
    algebra: GradedLieAlgebra
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    alpha: Fraction = exact.ZERO
    eigen_plus: tuple[Fraction, ...] | None = None
    eigen_minus: tuple[Fraction, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # constructors -------------------------------------------------------

    @classmethod
    def from_eigenvalues(cls, alg: GradedLieAlgebra, plus: Sequence, minus: Sequence,
                         alpha=0) -> "ChiralOperatorPair":
        """Grading-diagonal pair; ``plus[k]`` is the full eigenvalue of S+ on grade k."""
        return cls.from_matrices(alg, _grade_matrix(alg, plus), _grade_matrix(alg, minus), alpha)

    @classmethod
    def from_matrices(cls, alg: GradedLieAlgebra, plus, minus, alpha=0) -> "ChiralOperatorPair":
        sp = _as_operator(alg, plus)
        sm = _as_operator(alg, minus)
        ep = _grade_eigenvalues(alg, sp)
        em = _grade_eigenvalues(alg, sm)
        if ep is None or em is None:
            ep = em = None
        return cls(alg, sp, sm, exact.frac(alpha), ep, em)

    # derived data -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def representation(self) -> str:
        return GRADING_DIAGONAL if self.eigen_plus is not None else GENERAL_MATRIX

    @property
    def grading_diagonal(self) -> bool:
        return self.eigen_plus is not None

    @property
    def difference(self) -> np.ndarray:
        return self.sigma_plus - self.sigma_minus

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def pinv(self) -> np.ndarray:
        return self._memo("pinv", lambda: exact.pinv(self.difference))

    @property
    def cokernel_projector(self) -> np.ndarray:
        """``I - D D^+``: orthogonal projector onto the left kernel of D = S+ - S-."""
        return self._memo("coker", lambda: exact.identity(self.dim) - exact.matmul(self.difference, self.pinv))

    @property
    def kernel_projector(self) -> np.ndarray:
        """``I - D^+ D``: orthogonal projector onto the kernel of D."""
        return self._memo("ker", lambda: exact.identity(self.dim) - exact.matmul(self.pinv, self.difference))

    @property
    def left_kernel(self) -> np.ndarray:
        return self._memo("lker", lambda: exact.left_nullspace(self.difference))

    @property
    def commutes(self) -> bool:
        return self._memo(
            "comm",
            lambda: exact.is_zero(
                exact.matmul(self.sigma_plus, self.sigma_minus) - exact.matmul(self.sigma_minus, self.sigma_plus)
            ),
        )

    @property
    def invertible_difference(self) -> bool:
        return self.left_kernel.shape[0] == 0

    def kernel_grades(self) -> list[int]:
        """Grades on which S+ and S- agree (grading-diagonal pairs only)."""
        self.require_graded()
        return [
            k for k in range(self.algebra.grading_order)
            if self.eigen_plus[k] == self.eigen_minus[k] and self.algebra.grade_indices(k)
        ]

    def require_graded(self) -> None:
        if not self.grading_diagonal:
            raise NotGradingDiagonal("operator pair is not scalar on every grade")

    def scaled(self, c) -> "ChiralOperatorPair":
        c = exact.frac(c)
        return ChiralOperatorPair.from_matrices(
            self.algebra, self.sigma_plus * c, self.sigma_minus * c, self.alpha * c
        )

    def swapped(self) -> "ChiralOperatorPair":
        """Exchange the roles of the two chiralities."""
        return ChiralOperatorPair.from_matrices(
            self.algebra, self.sigma_minus, self.sigma_plus, self.alpha
        )


# construction from action data ----------------------------------------------


def killing_transpose(alg: GradedLieAlgebra, m: np.ndarray) -> np.ndarray:
    """Adjoint of ``m`` with respect to the invariant form: ``K^-1 m^t K``."""
    try:
        kinv = exact.inverse(alg.killing)
    except ZeroDivisionError as exc:
        raise DegenerateForm("invariant form is degenerate; transpose undefined") from exc
    return exact.matmul(exact.matmul(kinv, m.T), alg.killing)


def from_action(alg: GradedLieAlgebra, sym_part, antisym_part, alpha=0) -> ChiralOperatorPair:
    """Operator pair of the action with a symmetric map on ``*J`` and antisymmetric map on ``J``.

    ``sym_part`` multiplies ``*J`` and must be symmetric under the invariant
    form; ``antisym_part`` multiplies ``J`` and must be antisymmetric. Either
    may be given as a matrix or as per-grade eigenvalues. Returns
    ``S+- = antisym +- sym + alpha``.
    """
    s = _as_operator(alg, sym_part)
    a = _as_operator(alg, antisym_part)
    k = alg.killing
    mul = exact.matmul
    if not exact.is_zero(mul(k, s) - mul(s.T, k)):
        raise SymmetryClassViolation("the *J coefficient map is not symmetric under the invariant form")
    if not exact.is_zero(mul(k, a) + mul(a.T, k)):
        raise SymmetryClassViolation("the J coefficient map is not antisymmetric under the invariant form")
    alpha = exact.frac(alpha)
    eye = exact.identity(alg.dim) * alpha
    return ChiralOperatorPair.from_matrices(alg, a + s + eye, a - s + eye, alpha)


def from_dual_action(alg: GradedLieAlgebra, on_current: Sequence, on_dual: Sequence,
                     alpha=0) -> ChiralOperatorPair:
    """Pair for an operator written as ``S(J_k) = a_k J_k + b_k *J_k``.

    Such an operator multiplies ``J+_k`` by ``a_k + b_k`` and ``J-_k`` by
    ``a_k - b_k``.
    """
    a = [exact.frac(v) for v in on_current]
    b = [exact.frac(v) for v in on_dual]
    if len(a) != len(b):
        raise DimensionMismatch("eigenvalue lists differ in length")
    return ChiralOperatorPair.from_eigenvalues(
        alg, [x + y for x, y in zip(a, b)], [x - y for x, y in zip(a, b)], alpha
    )


def check_transpose_relation(pair: ChiralOperatorPair) -> tuple[bool, np.ndarray]:
    """Test ``(S+)^T == -S- + 2 alpha`` with the transpose taken under the invariant form."""
    residual = (
        killing_transpose(pair.algebra, pair.sigma_plus)
        + pair.sigma_minus
        - exact.identity(pair.dim) * (2 * pair.alpha)
    )
    return exact.is_zero(residual), residual


def chiral_split(j: np.ndarray, star_j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(J + *J)/2`` and ``(J - *J)/2``."""
    half = Fraction(1, 2) if j.dtype == object else 0.5
    return (j + star_j) * half, (j - star_j) * half


def chiral_join(j_plus: np.ndarray, j_minus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`chiral_split`."""
    return j_plus + j_minus, j_plus - j_minus


def find_constraint_projectors(pair: ChiralOperatorPair) -> list[ConstraintProjector]:
    """A basis of projectors annihilating ``S+ - S-``.

    Grading-diagonal pairs get one grade projector per grade where the two
    eigenvalues agree. Otherwise the left kernel is orthogonalised and each
    vector ``n`` yields the rank-one projector ``n n^t / (n.n)``; the sum of
    these is the orthogonal projector onto the left kernel.
    """
    alg = pair.algebra
    if pair.grading_diagonal:
        return [
            ConstraintProjector(alg.grade_projector(k), f"grade {k}", k)
            for k in pair.kernel_grades()
        ]
    rows = pair.left_kernel
    if rows.shape[0] == 0:
        return []
    out = []
    for i, n in enumerate(exact.gram_schmidt(rows)):
        pi = np.outer(n, n) / (n @ n)
        out.append(ConstraintProjector(pi, f"kernel {i}"))
    return out


def difference_pseudo_inverse(pair: ChiralOperatorPair) -> np.ndarray:
    """Moore-Penrose inverse of ``S+ - S-``: inverse on the image, zero on its complement."""
    return pair.pinv


def validate_projectors(pair: ChiralOperatorPair, projectors: Sequence[ConstraintProjector]) -> None:
    d = pair.difference
    for p in projectors:
        if p.pi.shape != (pair.dim, pair.dim):
            raise DimensionMismatch(f"projector {p.label!r} has shape {p.pi.shape}")
        if not p.annihilates(d):
            raise ValidationError(f"projector {p.label!r} does not annihilate S+ - S-")
