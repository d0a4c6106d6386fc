"""Exact rational linear algebra on numpy object arrays of ``Fraction``.

Everything here works on plain ``numpy.ndarray`` with ``dtype=object`` whose
entries are :class:`fractions.Fraction`. numpy's ``@`` operator handles object
arrays, so only the elimination routines need hand-written loops.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(value) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused: model data must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def fstr(value: Fraction) -> str:
    return str(Fraction(value))


def vector(values: Iterable) -> np.ndarray:
    return np.array([frac(v) for v in values], dtype=object)


def matrix(rows: Sequence[Sequence]) -> np.ndarray:
    rows = [list(r) for r in rows]
    n = len(rows)
    m = len(rows[0]) if n else 0
    out = np.empty((n, m), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != m:
            raise ValueError("ragged matrix")
        for j, v in enumerate(r):
            out[i, j] = frac(v)
    return out


def zeros(*shape: int) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def identity(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = ONE
    return out


def diag(values: Iterable) -> np.ndarray:
    values = [frac(v) for v in values]
    out = zeros(len(values), len(values))
    for i, v in enumerate(values):
        out[i, i] = v
    return out


def is_zero(a: np.ndarray) -> bool:
    return all(x == 0 for x in np.asarray(a).flat)


def is_diagonal(a: np.ndarray) -> bool:
    n, m = a.shape
    return all(a[i, j] == 0 for i in range(n) for j in range(m) if i != j)


def _scaled(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer array ``n`` and denominator ``q`` with ``a == n / q``."""
    q = lcm_denominator(a.flat)
    out = np.empty(a.shape, dtype=object)
    flat = out.reshape(-1)
    for i, x in enumerate(a.flat):
        # ints and Fractions both expose numerator/denominator
        flat[i] = x.numerator * (q // x.denominator) if x else 0
    return out, q


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product computed over Python integers after clearing denominators.

    Much faster than multiplying Fraction arrays directly because the inner
    loop runs on ints.
    """
    na, qa = _scaled(a)
    nb, qb = _scaled(b)
    prod = na @ nb
    q = qa * qb
    out = np.empty(prod.shape, dtype=object)
    flat = out.reshape(-1)
    for i, x in enumerate(prod.flat):
        flat[i] = Fraction(x, q) if x else ZERO
    return out


def rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    r = np.array(a, dtype=object, copy=True)
    nrows, ncols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        piv = None
        for i in range(row, nrows):
            if r[i, col] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        p = r[row, col]
        if p != 1:
            r[row] = r[row] / p
        for i in range(nrows):
            if i != row and r[i, col] != 0:
                r[i] = r[i] - r[i, col] * r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of the right kernel, one basis vector per row."""
    nrows, ncols = a.shape
    if nrows == 0:
        return identity(ncols)
    r, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = zeros(len(free), ncols)
    for k, fc in enumerate(free):
        basis[k, fc] = ONE
        for i, pc in enumerate(pivots):
            basis[k, pc] = -r[i, fc]
    return basis


def left_nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of row vectors ``n`` with ``n @ a == 0``."""
    return nullspace(a.T.copy())


def inverse(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = np.concatenate([a, identity(n)], axis=1)
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return r[:, n:]


def pinv(a: np.ndarray) -> np.ndarray:
    """Exact Moore-Penrose pseudo-inverse via a full-rank factorisation.

    With ``a = F @ G`` (``F`` the pivot columns, ``G`` the non-zero rows of the
    reduced echelon form) the pseudo-inverse is
    ``G.T (G G.T)^-1 (F.T F)^-1 F.T``.
    """
    n, m = a.shape
    if is_diagonal(a) and n == m:
        return diag([ZERO if a[i, i] == 0 else ONE / a[i, i] for i in range(n)])
    r, pivots = rref(a)
    k = len(pivots)
    if k == 0:
        return zeros(m, n)
    f = a[:, pivots]
    g = r[:k, :]
    return g.T @ inverse(g @ g.T) @ inverse(f.T @ f) @ f.T


def gram_schmidt(rows: np.ndarray) -> np.ndarray:
    """Rational orthogonalisation (no normalisation) of the given rows."""
    out: list[np.ndarray] = []
    for v in rows:
        w = np.array(v, dtype=object, copy=True)
        for u in out:
            w = w - (w @ u) / (u @ u) * u
        if not is_zero(w):
            out.append(w)
    if not out:
        return zeros(0, rows.shape[1] if rows.ndim == 2 else 0)
    return np.array(out, dtype=object)


class RowReducer:
    """Reduce vectors modulo the row space of a fixed matrix.

    ``reduce(v)`` returns the canonical remainder of ``v`` after eliminating
    the pivot columns of the echelon basis; it is zero iff ``v`` lies in the
    row span.
    """

    def __init__(self, basis_rows: np.ndarray):
        if basis_rows.size == 0:
            self.rows = basis_rows
            self.pivots: list[int] = []
        else:
            r, pivots = rref(basis_rows)
            self.rows = r[: len(pivots)]
            self.pivots = pivots

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        w = np.array(v, dtype=object, copy=True)
        for row, col in zip(self.rows, self.pivots):
            if w[col] != 0:
                w = w - w[col] * row
        return w

    def coefficients(self, v: np.ndarray) -> np.ndarray:
        """Coefficients on the echelon basis; only meaningful if ``reduce(v)`` is zero."""
        return np.array([v[col] for col in self.pivots], dtype=object)


def to_float(a: np.ndarray) -> np.ndarray:
    return np.array(a, dtype=float)


def to_strings(a: np.ndarray) -> list:
    """Nested lists of ``"p/q"`` strings."""
    if a.ndim == 1:
        return [fstr(x) for x in a]
    return [to_strings(row) for row in a]


def from_strings(data) -> np.ndarray:
    if data and isinstance(data[0], (list, tuple)):
        return matrix(data)
    return vector(data)


def lcm_denominator(values: Iterable[Fraction]) -> int:
    return math.lcm(1, *(v.denominator for v in values))
