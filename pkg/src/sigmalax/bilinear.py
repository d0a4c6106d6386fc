"""All-basis-pair evaluation of the bilinears that enter the flatness condition.

With ``J+`` and ``J-`` along the two light-cone directions, every two-form in
the flatness condition is a multiple of the volume form, so each check reduces
to an algebra-valued bilinear in ``(t1, t2)`` (``t1`` playing ``J+``, ``t2``
playing ``J-``). A bilinear is stored as a ``dim x dim**2`` matrix whose column
``a * dim + b`` is its value on the basis pair ``(T_a, T_b)``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import exact
from .operators import ChiralOperatorPair


def structure(pair_or_alg, numeric: bool = False) -> np.ndarray:
    alg = getattr(pair_or_alg, "algebra", pair_or_alg)
    f = alg.structure_tensor()
    return exact.to_float(f) if numeric else f


def transformed_brackets(f: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Columns ``[x T_a, y T_b]`` for every basis pair."""
    d = f.shape[0]
    if f.dtype != object:
        # g[a, b', c] = sum_a' x[a', a] f[a', b', c]
        g = np.tensordot(x.T, f, axes=(1, 0))
        # h[a, c, b] = sum_b' g[a, b', c] y[b', b]
        h = np.tensordot(g, y, axes=(1, 0))
        return h.transpose(1, 0, 2).reshape(d, d * d)
    # exact: clear denominators, then walk the nonzero structure constants over ints
    fi, qf = exact._scaled(f)
    xi, qx = exact._scaled(x)
    yi, qy = exact._scaled(y)
    xcols = [[(a, xi[ap, a]) for a in range(d) if xi[ap, a]] for ap in range(d)]
    ycols = [[(b, yi[bp, b]) for b in range(d) if yi[bp, b]] for bp in range(d)]
    acc: dict[tuple[int, int], int] = {}
    for ap, bp, c in zip(*np.nonzero(fi)):
        fv = fi[ap, bp, c]
        for a, xv in xcols[ap]:
            w = fv * xv
            for b, yv in ycols[bp]:
                key = (c, a * d + b)
                acc[key] = acc.get(key, 0) + w * yv
    q = qf * qx * qy
    out = exact.zeros(d, d * d)
    for (c, col), v in acc.items():
        if v:
            out[c, col] = Fraction(v, q)
    return out


def mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b if a.dtype != object else exact.matmul(a, b)


def plain_brackets(f: np.ndarray) -> np.ndarray:
    d = f.shape[0]
    return f.transpose(2, 0, 1).reshape(d, d * d)


def pair_index(d: int, col: int) -> tuple[int, int]:
    return divmod(col, d)


class PairBilinears:
    """Bilinears of a chiral pair evaluated on all basis pairs.

    ``bracket``: ``B = [t1, t2]``
    ``cross``: ``C = [S+ t1, t2] + [t1, S- t2]``
    ``w_plus`` / ``w_minus``: ``S+- B - C``
    ``quad``: ``[S+ S+ t1, t2] + 2 [S+ t1, S- t2] + [t1, S- S- t2]``
    """

    def __init__(self, pair: ChiralOperatorPair, numeric: bool = False):
        self.pair = pair
        self.numeric = numeric
        f = structure(pair, numeric)
        self.f = f
        conv = exact.to_float if numeric else (lambda m: m)
        sp = conv(pair.sigma_plus)
        sm = conv(pair.sigma_minus)
        eye = np.eye(pair.dim) if numeric else exact.identity(pair.dim)
        self.sp, self.sm, self.eye = sp, sm, eye
        self.bracket = plain_brackets(f)
        self.cross = transformed_brackets(f, sp, eye) + transformed_brackets(f, eye, sm)
        self.w_plus = mm(sp, self.bracket) - self.cross
        self.w_minus = mm(sm, self.bracket) - self.cross
        self._quad = None

    @property
    def quad(self) -> np.ndarray:
        if self._quad is None:
            f, sp, sm, eye = self.f, self.sp, self.sm, self.eye
            two = 2.0 if self.numeric else Fraction(2)
            self._quad = (
                transformed_brackets(f, mm(sp, sp), eye)
                + transformed_brackets(f, sp, sm) * two
                + transformed_brackets(f, eye, mm(sm, sm))
            )
        return self._quad

    def w(self, branch: str) -> np.ndarray:
        return self.w_plus if branch == "+" else self.w_minus

    def sigma(self, branch: str) -> np.ndarray:
        return self.sp if branch == "+" else self.sm
