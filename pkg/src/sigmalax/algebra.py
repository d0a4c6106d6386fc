"""Finite-dimensional Lie algebras with an optional Z_N grading.

Algebras are stored through sparse structure constants ``f^c_{ab}``
(``[T_a, T_b] = sum_c f^c_{ab} T_c``). Elements are plain 1-D numpy arrays of
coefficients, ``dtype=object`` holding Fractions in exact mode or ``float`` in
numeric mode.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import exact
from .errors import (
    AntisymmetryViolation,
    DimensionMismatch,
    GradeOutOfRange,
    GradingNotClosed,
    JacobiViolation,
    ParseError,
    ValidationError,
)

Entry = tuple[int, int, int, Fraction]


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    dim: int
    table: Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]
    grading_order: int
    grades: tuple[int, ...]
    killing: np.ndarray
    names: tuple[str, ...]
    description: dict | None = field(default=None, repr=False)

    # construction -----------------------------------------------------

    @classmethod
    def from_constants(
        cls,
        dim: int,
        entries: Iterable[Entry],
        grades: Sequence[int] | None = None,
        grading_order: int = 1,
        killing: np.ndarray | None = None,
        names: Sequence[str] | None = None,
        description: dict | None = None,
    ) -> "GradedLieAlgebra":
        """Validate raw structure constants and build the algebra.

        ``entries`` are ``(a, b, c, value)`` meaning ``f^c_{ab} = value``;
        absent entries are zero. Raises the specific violation with the
        offending index tuple.
        """
        if dim < 1:
            raise ValidationError("dimension must be positive")
        if grading_order < 1:
            raise ValidationError("grading order must be positive")
        raw: dict[tuple[int, int], dict[int, Fraction]] = defaultdict(dict)
        for a, b, c, value in entries:
            for idx in (a, b, c):
                if not 0 <= idx < dim:
                    raise ValidationError(f"structure constant index {(a, b, c)} out of range")
            value = exact.frac(value)
            if value == 0:
                continue
            if c in raw[(a, b)]:
                raise ValidationError(f"duplicate structure constant {(a, b, c)}")
            raw[(a, b)][c] = value
        grades = tuple(0 for _ in range(dim)) if grades is None else tuple(int(g) for g in grades)
        if len(grades) != dim:
            raise ValidationError("grade map length differs from dimension")
        for i, g in enumerate(grades):
            if not 0 <= g < grading_order:
                raise GradeOutOfRange(f"basis element {i} has grade {g} outside [0, {grading_order})")

        _check_antisymmetry(raw)
        _check_grading(raw, grades, grading_order)
        table = {
            key: tuple(sorted(row.items()))
            for key, row in sorted(raw.items())
            if row
        }
        names = tuple(names) if names is not None else tuple(f"T{i}" for i in range(dim))
        alg = cls(dim, table, grading_order, grades, exact.zeros(dim, dim), names, description)
        _check_jacobi(alg)
        form = alg._trace_form() if killing is None else np.array(killing, dtype=object)
        if form.shape != (dim, dim):
            raise ValidationError("invariant form has the wrong shape")
        object.__setattr__(alg, "killing", form)
        _check_form(alg)
        return alg

    # elements ---------------------------------------------------------

    def element(self, values: Iterable) -> np.ndarray:
        v = exact.vector(values)
        self._check(v)
        return v

    def basis_vector(self, i: int) -> np.ndarray:
        v = exact.zeros(self.dim)
        v[i] = exact.ONE
        return v

    def zero(self) -> np.ndarray:
        return exact.zeros(self.dim)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def _check(self, x: np.ndarray) -> None:
        if np.ndim(x) != 1 or len(x) != self.dim:
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got shape {np.shape(x)}")

    # algebra operations -------------------------------------------------

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """``[x, y]_c = sum_ab f^c_{ab} x_a y_b``; dtype follows the inputs."""
        self._check(x)
        self._check(y)
        numeric = x.dtype != object or y.dtype != object
        out = np.zeros(self.dim) if numeric else exact.zeros(self.dim)
        xs = [(a, x[a]) for a in range(self.dim) if x[a] != 0]
        ys = [(b, y[b]) for b in range(self.dim) if y[b] != 0]
        table = self.table
        for a, xa in xs:
            for b, yb in ys:
                row = table.get((a, b))
                if row is None:
                    continue
                w = xa * yb
                for c, f in row:
                    out[c] += f * w
        return out

    def project_grade(self, x: np.ndarray, k: int) -> np.ndarray:
        self._check(x)
        if not 0 <= k < self.grading_order:
            raise GradeOutOfRange(f"grade {k} outside [0, {self.grading_order})")
        out = x.copy()
        for i, g in enumerate(self.grades):
            if g != k:
                out[i] = 0 * out[i]
        return out

    def killing_form(self, x: np.ndarray, y: np.ndarray):
        self._check(x)
        self._check(y)
        return x @ self.killing @ y

    # structural helpers -------------------------------------------------

    def grade_indices(self, k: int) -> list[int]:
        return [i for i, g in enumerate(self.grades) if g == k]

    def grade_projector(self, k: int) -> np.ndarray:
        return exact.diag([1 if g == k else 0 for g in self.grades])

    def ad(self, a: int) -> np.ndarray:
        """Matrix of ``ad_{T_a}`` acting on coefficient vectors."""
        m = exact.zeros(self.dim, self.dim)
        for b in range(self.dim):
            for c, f in self.table.get((a, b), ()):
                m[c, b] = f
        return m

    def bracket_nonzero(self, j: int, k: int) -> bool:
        """True if ``[g_(j), g_(k)]`` is not identically zero."""
        return (j % self.grading_order, k % self.grading_order) in self._nonzero_grade_pairs

    @property
    def _nonzero_grade_pairs(self) -> frozenset:
        cached = self.__dict__.get("_nz_cache")
        if cached is None:
            cached = frozenset((self.grades[a], self.grades[b]) for (a, b) in self.table)
            object.__setattr__(self, "_nz_cache", cached)
        return cached

    def structure_tensor(self) -> np.ndarray:
        """Dense ``f[a, b, c] = f^c_{ab}`` (object dtype), cached."""
        cached = self.__dict__.get("_f_cache")
        if cached is None:
            cached = exact.zeros(self.dim, self.dim, self.dim)
            for (a, b), row in self.table.items():
                for c, f in row:
                    cached[a, b, c] = f
            object.__setattr__(self, "_f_cache", cached)
        return cached

    def entries(self) -> list[Entry]:
        return [(a, b, c, f) for (a, b), row in self.table.items() for c, f in row]

    def _trace_form(self) -> np.ndarray:
        # tr(ad_a ad_b) = sum_{c,e} f^c_{a e} f^e_{b c}
        by_ec: dict[tuple[int, int], list[tuple[int, Fraction]]] = defaultdict(list)
        for (b, c), row in self.table.items():
            for e, f in row:
                by_ec[(e, c)].append((b, f))
        k = exact.zeros(self.dim, self.dim)
        for (a, e), row in self.table.items():
            for c, f in row:
                for b, g in by_ec.get((e, c), ()):
                    k[a, b] += f * g
        return k


# validation -----------------------------------------------------------------


def _check_antisymmetry(raw: Mapping[tuple[int, int], Mapping[int, Fraction]]) -> None:
    for (a, b), row in sorted(raw.items()):
        for c, f in sorted(row.items()):
            if a == b:
                raise AntisymmetryViolation((a, b, c), "f^c_aa must vanish")
            other = raw.get((b, a), {}).get(c, 0)
            if other != -f:
                raise AntisymmetryViolation((a, b, c), f"f={f} but f^c_ba={other}")


def _check_grading(raw, grades: Sequence[int], n: int) -> None:
    for (a, b), row in sorted(raw.items()):
        for c in sorted(row):
            if grades[c] != (grades[a] + grades[b]) % n:
                raise GradingNotClosed(
                    (a, b, c),
                    f"grades {grades[a]}+{grades[b]} mod {n} != {grades[c]}",
                )


def _check_jacobi(alg: GradedLieAlgebra) -> None:
    table = alg.table

    def double(a: int, b: int, c: int, acc: dict) -> None:
        # acc += [[T_a, T_b], T_c]
        for e, f in table.get((a, b), ()):
            for d, g in table.get((e, c), ()):
                acc[d] += f * g

    for a, b, c in combinations(range(alg.dim), 3):
        acc: dict[int, Fraction] = defaultdict(Fraction)
        double(a, b, c, acc)
        double(b, c, a, acc)
        double(c, a, b, acc)
        bad = sorted(d for d, v in acc.items() if v != 0)
        if bad:
            raise JacobiViolation((a, b, c, bad[0]), f"cyclic sum component {acc[bad[0]]}")


def _check_form(alg: GradedLieAlgebra) -> None:
    k = alg.killing
    if not (k == k.T).all():
        raise ValidationError("invariant form is not symmetric")
    # k([T_a,T_b],T_c) + k(T_b,[T_a,T_c]) = 0, i.e. ad_a^T K + K ad_a = 0
    d = alg.dim
    rows = [[(c, k[e, c]) for c in range(d) if k[e, c] != 0] for e in range(d)]
    by_a: dict[int, list] = defaultdict(list)
    for (a, b), row in alg.table.items():
        by_a[a].append((b, row))
    for a in range(d):
        m: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for b, row in by_a.get(a, ()):
            for e, f in row:
                for c, kv in rows[e]:
                    m[(b, c)] += f * kv
                    m[(c, b)] += f * kv
        bad = sorted(key for key, v in m.items() if v != 0)
        if bad:
            raise ValidationError(f"invariant form not ad-invariant at basis triple {(a, *bad[0])}")


# matrix realisations -------------------------------------------------------------


class _MatrixBasis:
    """Coordinates with respect to a basis of (possibly complex) matrices.

    Each element is a pair ``(re, im)`` of square Fraction matrices.
    """

    def __init__(self, mats: Sequence[tuple[np.ndarray, np.ndarray]]):
        self.mats = list(mats)
        cols = [np.concatenate([re.ravel(), im.ravel()]) for re, im in self.mats]
        self.flat = np.array(cols, dtype=object).T  # L x d
        _, pivots = exact.rref(self.flat.T.copy())
        if len(pivots) != len(self.mats):
            raise ValidationError("matrix basis is linearly dependent")
        self.rows = pivots
        self.solver = exact.inverse(self.flat[pivots, :])

    def coords(self, re: np.ndarray, im: np.ndarray) -> np.ndarray:
        v = np.concatenate([re.ravel(), im.ravel()])
        sub = v[self.rows]
        nz = [i for i, t in enumerate(sub) if t != 0]
        x = self.solver[:, nz] @ sub[nz] if nz else exact.zeros(len(self.mats))
        xnz = [i for i, t in enumerate(x) if t != 0]
        back = self.flat[:, xnz] @ x[xnz] if xnz else np.zeros(len(v), dtype=object)
        if any(t != 0 for t in back - v):
            raise ValidationError("commutator left the span of the basis")
        return x

    def structure(self) -> list[Entry]:
        entries: list[Entry] = []
        for a, b in combinations(range(len(self.mats)), 2):
            ra, ia = self.mats[a]
            rb, ib = self.mats[b]
            re = (ra @ rb - ia @ ib) - (rb @ ra - ib @ ia)
            im = (ra @ ib + ia @ rb) - (rb @ ia + ib @ ra)
            for c, v in enumerate(self.coords(re, im)):
                if v != 0:
                    entries.append((a, b, c, v))
                    entries.append((b, a, c, -v))
        return entries


def _unit(n: int, i: int, j: int) -> np.ndarray:
    # plain ints keep the matrix products cheap
    m = np.zeros((n, n), dtype=object)
    m[i, j] = 1
    return m


def _real(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return m, np.zeros(m.shape, dtype=object)


def _label(prefix: str, n: int, i: int, j: int) -> str:
    return f"{prefix}{i + 1}{j + 1}" if n < 10 else f"{prefix}{i + 1}_{j + 1}"


def sl(n: int, grading: str = "none", order: int | None = None) -> GradedLieAlgebra:
    """sl(n) in the Chevalley basis, or the Cartan-adapted basis for ``grading="cartan"``.

    Gradings: ``none``; ``cyclic`` (``E_ij`` has grade ``(j - i) mod N``,
    Cartan generators grade 0; this is the inner automorphism
    ``Ad diag(1, w, ..., w^(n-1))`` with ``w^N = 1``, conjugate to the cyclic
    permutation automorphism); ``cartan`` (``X -> -X^T``, N = 2).
    """
    if n < 2:
        raise ValidationError("sl(n) needs n >= 2")
    desc = {"preset": "sl", "n": n, "grading": grading}
    if grading == "cartan":
        mats, names, grades = [], [], []
        for i in range(n - 1):
            mats.append(_real(_unit(n, i, i) - _unit(n, i + 1, i + 1)))
            names.append(f"H{i + 1}" if n > 2 else "H")
            grades.append(1)
        for i, j in combinations(range(n), 2):
            mats.append(_real(_unit(n, i, j) + _unit(n, j, i)))
            names.append(_label("S", n, i, j))
            grades.append(1)
        for i, j in combinations(range(n), 2):
            mats.append(_real(_unit(n, i, j) - _unit(n, j, i)))
            names.append(_label("A", n, i, j))
            grades.append(0)
        basis = _MatrixBasis(mats)
        return GradedLieAlgebra.from_constants(
            len(mats), basis.structure(), grades, 2, names=names, description=desc
        )

    mats, names, pos = [], [], []
    for i in range(n - 1):
        mats.append(_real(_unit(n, i, i) - _unit(n, i + 1, i + 1)))
        names.append(f"H{i + 1}" if n > 2 else "H")
        pos.append(None)
    for i, j in combinations(range(n), 2):
        mats.append(_real(_unit(n, i, j)))
        names.append(_label("E", n, i, j) if n > 2 else "E")
        pos.append((i, j))
    for i, j in combinations(range(n), 2):
        mats.append(_real(_unit(n, j, i)))
        names.append(_label("E", n, j, i) if n > 2 else "F")
        pos.append((j, i))
    if grading == "none":
        big_n, grades = 1, [0] * len(mats)
    elif grading == "cyclic":
        big_n = n if order is None else int(order)
        if big_n < 1:
            raise ValidationError("grading order must be positive")
        grades = [0 if p is None else (p[1] - p[0]) % big_n for p in pos]
        desc["N"] = big_n
    else:
        raise ParseError(f"unknown grading rule {grading!r} for sl(n)", "grading")
    basis = _MatrixBasis(mats)
    return GradedLieAlgebra.from_constants(
        len(mats), basis.structure(), grades, big_n, names=names, description=desc
    )


def so(n: int) -> GradedLieAlgebra:
    """so(n) on the antisymmetric basis ``E_ij - E_ji`` (i < j), ungraded."""
    if n < 3:
        raise ValidationError("so(n) needs n >= 3")
    mats = [_real(_unit(n, i, j) - _unit(n, j, i)) for i, j in combinations(range(n), 2)]
    names = [_label("A", n, i, j) for i, j in combinations(range(n), 2)]
    basis = _MatrixBasis(mats)
    return GradedLieAlgebra.from_constants(
        len(mats), basis.structure(), None, 1, names=names,
        description={"preset": "so", "n": n, "grading": "none"},
    )


def su(n: int, grading: str = "none") -> GradedLieAlgebra:
    """Compact real form su(n) with rational structure constants.

    Basis: ``i H_k``, ``E_ij - E_ji`` and ``i (E_ij + E_ji)``. The ``cartan``
    grading is complex conjugation, fixing so(n).
    """
    if n < 2:
        raise ValidationError("su(n) needs n >= 2")
    if grading not in ("none", "cartan"):
        raise ParseError(f"unknown grading rule {grading!r} for su(n)", "grading")
    zero = np.zeros((n, n), dtype=object)
    mats, names, grades = [], [], []
    for i in range(n - 1):
        mats.append((zero, _unit(n, i, i) - _unit(n, i + 1, i + 1)))
        names.append(f"iH{i + 1}")
        grades.append(1)
    for i, j in combinations(range(n), 2):
        mats.append((zero, _unit(n, i, j) + _unit(n, j, i)))
        names.append(_label("iS", n, i, j))
        grades.append(1)
    for i, j in combinations(range(n), 2):
        mats.append((_unit(n, i, j) - _unit(n, j, i), zero))
        names.append(_label("A", n, i, j))
        grades.append(0)
    if grading == "none":
        grades, big_n = [0] * len(mats), 1
    else:
        big_n = 2
    basis = _MatrixBasis(mats)
    return GradedLieAlgebra.from_constants(
        len(mats), basis.structure(), grades, big_n, names=names,
        description={"preset": "su", "n": n, "grading": grading},
    )


def direct_sum(g: GradedLieAlgebra, grading: str = "none") -> GradedLieAlgebra:
    """``g (+) g``.

    ``none`` keeps the summand's grading on both copies with basis
    ``(T_a, 0), (0, T_a)``. ``swap`` uses ``(T_a, T_a)`` (grade 0) and
    ``(T_a, -T_a)`` (grade 1); it needs an ungraded summand.
    """
    d = g.dim
    entries: list[Entry] = []
    if grading == "none":
        for a, b, c, f in g.entries():
            entries.append((a, b, c, f))
            entries.append((a + d, b + d, c + d, f))
        grades = list(g.grades) * 2
        order = g.grading_order
        names = [f"{s}_1" for s in g.names] + [f"{s}_2" for s in g.names]
    elif grading == "swap":
        if g.grading_order != 1:
            raise ValidationError("swap grading needs an ungraded summand")
        for a, b, c, f in g.entries():
            entries.append((a, b, c, f))  # [u, u] = u
            entries.append((a, b + d, c + d, f))  # [u, v] = v
            entries.append((a + d, b, c + d, f))  # [v, u] = v
            entries.append((a + d, b + d, c, f))  # [v, v] = u
        grades = [0] * d + [1] * d
        order = 2
        names = [f"{s}_+" for s in g.names] + [f"{s}_-" for s in g.names]
    else:
        raise ParseError(f"unknown grading rule {grading!r} for direct_sum", "grading")
    desc = None
    if g.description is not None:
        desc = {"preset": "direct_sum", "summand": g.description, "grading": grading}
    return GradedLieAlgebra.from_constants(
        2 * d, entries, grades, order, names=names, description=desc
    )


# JSON ---------------------------------------------------------------------------


def build_algebra(spec: Mapping) -> GradedLieAlgebra:
    """Build an algebra from its JSON description (preset or raw constants)."""
    if not isinstance(spec, Mapping):
        raise ParseError("algebra description must be an object", "algebra")
    if "preset" in spec:
        name = spec["preset"]
        grading = spec.get("grading", "none")
        if name == "direct_sum":
            if "summand" not in spec:
                raise ParseError("direct_sum needs a summand", "algebra.summand")
            return direct_sum(build_algebra(spec["summand"]), grading)
        n = spec.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise ParseError("preset needs an integer n", "algebra.n")
        if name == "sl":
            return sl(n, grading, spec.get("N"))
        if name == "su":
            return su(n, grading)
        if name == "so":
            if grading != "none":
                raise ParseError("so(n) supports only grading 'none'", "algebra.grading")
            return so(n)
        raise ParseError(f"unknown preset {name!r}", "algebra.preset")
    try:
        dim = spec["dim"]
        raw = spec.get("f", [])
    except KeyError as exc:
        raise ParseError("raw algebra needs 'dim' and 'f'", "algebra") from exc
    entries = []
    for i, item in enumerate(raw):
        if len(item) != 4:
            raise ParseError("structure constant entries are [a, b, c, value]", f"algebra.f[{i}]")
        a, b, c, v = item
        try:
            entries.append((int(a), int(b), int(c), exact.frac(v)))
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), f"algebra.f[{i}]") from exc
    killing = spec.get("killing")
    if killing is not None:
        killing = exact.matrix(killing)
    return GradedLieAlgebra.from_constants(
        int(dim), entries, spec.get("grades"), int(spec.get("N", 1)),
        killing=killing, names=spec.get("names"),
    )


def algebra_to_json(alg: GradedLieAlgebra) -> dict:
    if alg.description is not None:
        return dict(alg.description)
    return {
        "dim": alg.dim,
        "f": [[a, b, c, exact.fstr(f)] for a, b, c, f in alg.entries()],
        "grades": list(alg.grades),
        "N": alg.grading_order,
        "names": list(alg.names),
        "killing": exact.to_strings(alg.killing),
    }
