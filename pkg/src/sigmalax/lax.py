"""The connection ``A(l) = exp(l S+) J+ + exp(l S-) J-`` as a Laurent object.

When both operators are diagonalisable with rational eigenvalues, ``exp(l S)``
is a finite sum ``sum_mu exp(mu l) P_mu`` over spectral projectors. All
eigenvalues are divided by one positive rational ``scale`` so that the
resulting powers are coprime integers; ``evaluate`` undoes the rescaling so
the connection is a function of the original ``l``. Otherwise the Taylor
coefficients ``S^n / n!`` are kept to a fixed order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

from . import exact
from .errors import NonIntegerSpectrum, NotExact, SeriesTruncationWarning
from .operators import ChiralOperatorPair

SERIES_ORDER = 8
SERIES_RADIUS = 1.0
CHIRALITIES = ("+", "-")


@dataclass(frozen=True, eq=False)
class LaurentConnection:
    """``plus_coeffs[p]`` multiplies ``J+`` by ``exp(p * scale * l)`` (exact mode).

    In series mode ``plus_coeffs[n]`` is the coefficient of ``l**n``.
    """

    dim: int
    plus_coeffs: dict
    minus_coeffs: dict
    exact: bool = True
    scale: Fraction = Fraction(1)
    labels: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_terms(cls, dim: int, terms: Iterable[tuple], scale=1) -> "LaurentConnection":
        """Build from ``(power, chirality, matrix)`` triples, summing repeats.

        Powers may be rational; they are divided by their content (and the
        scale multiplied accordingly) so stored powers are coprime integers.
        """
        terms = [(exact.frac(p), ch, np.asarray(m, dtype=object)) for p, ch, m in terms]
        content = _content([p for p, _, _ in terms])
        plus: dict[int, np.ndarray] = {}
        minus: dict[int, np.ndarray] = {}
        for p, ch, m in terms:
            if ch not in CHIRALITIES:
                raise ValueError(f"chirality must be '+' or '-', got {ch!r}")
            q = p / content
            assert q.denominator == 1
            target = plus if ch == "+" else minus
            key = int(q)
            target[key] = target[key] + m if key in target else m.copy()
        plus = {p: m for p, m in plus.items() if not exact.is_zero(m)}
        minus = {p: m for p, m in minus.items() if not exact.is_zero(m)}
        return cls(dim, plus, minus, True, exact.frac(scale) * content)

    def coeffs(self, chirality: str) -> dict:
        return self.plus_coeffs if chirality == "+" else self.minus_coeffs

    @property
    def powers(self) -> list[int]:
        return sorted(set(self.plus_coeffs) | set(self.minus_coeffs))


def _content(values: Sequence[Fraction]) -> Fraction:
    """Positive rational ``s`` with ``values / s`` coprime integers (1 if all zero)."""
    nonzero = [Fraction(v) for v in values if v != 0]
    if not nonzero:
        return Fraction(1)
    num = math.gcd(*(v.numerator for v in nonzero))
    den = math.lcm(*(v.denominator for v in nonzero))
    return Fraction(num, den)


# spectral decomposition ----------------------------------------------------------


def rational_spectrum(m: np.ndarray) -> list[Fraction] | None:
    """Distinct rational eigenvalues if ``m`` is diagonalisable over Q, else None."""
    n = m.shape[0]
    if exact.is_diagonal(m):
        return sorted(set(m[i, i] for i in range(n)))
    # projector-type relation m^2 = c m
    sq = exact.matmul(m, m)
    i, j = next(zip(*np.nonzero(m != 0)))
    c = sq[i, j] / m[i, j]
    if c != 0 and exact.is_zero(sq - m * c):
        return sorted({exact.ZERO, c})
    lam = sympy.Symbol("lam")
    poly = sympy.Matrix(m.tolist()).charpoly(lam)
    roots: list[Fraction] = []
    for fac, _mult in sympy.factor_list(poly.as_expr(), lam)[1]:
        if sympy.degree(fac, lam) != 1:
            return None
        r = sympy.solve(fac, lam)[0]
        roots.append(Fraction(int(r.p), int(r.q)))
    roots = sorted(set(roots))
    # diagonalisable iff the product of (m - mu) vanishes
    prod = exact.identity(n)
    for mu in roots:
        prod = exact.matmul(prod, m - exact.identity(n) * mu)
    return roots if exact.is_zero(prod) else None


def spectral_projectors(m: np.ndarray, spectrum: Sequence[Fraction]) -> dict:
    """Lagrange interpolation ``P_mu = prod_{nu != mu} (m - nu) / (mu - nu)``."""
    n = m.shape[0]
    eye = exact.identity(n)
    out = {}
    if exact.is_diagonal(m):
        for mu in spectrum:
            out[mu] = exact.diag([1 if m[i, i] == mu else 0 for i in range(n)])
        return out
    for mu in spectrum:
        p = eye
        for nu in spectrum:
            if nu != mu:
                p = exact.matmul(p, (m - eye * nu)) * (1 / (mu - nu))
        out[mu] = p
    return out


def build_lax(pair: ChiralOperatorPair, series_order: int = SERIES_ORDER) -> LaurentConnection:
    """Exponentiate the pair into a connection.

    Falls back to a truncated series (with a :class:`NonIntegerSpectrum`
    warning) when either operator lacks a rational eigenbasis.
    """
    specs = [rational_spectrum(pair.sigma_plus), rational_spectrum(pair.sigma_minus)]
    labels = tuple(pair.algebra.grades) if pair.grading_diagonal else None
    if any(s is None for s in specs):
        warnings.warn(
            "operator spectrum is not rational and diagonalisable; storing a truncated series",
            NonIntegerSpectrum,
            stacklevel=2,
        )
        return _series(pair, series_order, labels)
    terms = []
    for ch, m, spec in zip(CHIRALITIES, (pair.sigma_plus, pair.sigma_minus), specs):
        for mu, proj in spectral_projectors(m, spec).items():
            terms.append((mu, ch, proj))
    conn = LaurentConnection.from_terms(pair.dim, terms)
    return LaurentConnection(conn.dim, conn.plus_coeffs, conn.minus_coeffs, True, conn.scale, labels)


def _series(pair: ChiralOperatorPair, order: int, labels) -> LaurentConnection:
    coeffs = []
    for m in (pair.sigma_plus, pair.sigma_minus):
        c = {0: exact.identity(pair.dim)}
        term = exact.identity(pair.dim)
        for n in range(1, order + 1):
            term = exact.matmul(term, m) * Fraction(1, n)
            c[n] = term
        coeffs.append(c)
    return LaurentConnection(pair.dim, coeffs[0], coeffs[1], False, Fraction(1), labels)


# evaluation ---------------------------------------------------------------------------


def evaluate_parts(conn: LaurentConnection, lam, j_plus: np.ndarray,
                   j_minus: np.ndarray, radius: float = SERIES_RADIUS):
    """``(exp(l S+) j_plus, exp(l S-) j_minus)``.

    ``lam == 0`` stays exact; any other value is evaluated in floating point.
    """
    if lam == 0:
        return j_plus.copy(), j_minus.copy()
    lam = float(lam)
    if not conn.exact and abs(lam) > radius:
        warnings.warn(
            f"series connection evaluated at |l| = {abs(lam)} beyond radius {radius}",
            SeriesTruncationWarning,
            stacklevel=2,
        )
    parts = []
    for ch, v in zip(CHIRALITIES, (j_plus, j_minus)):
        vf = np.asarray(v, dtype=float)
        acc = np.zeros(conn.dim)
        for p, m in conn.coeffs(ch).items():
            w = math.exp(p * float(conn.scale) * lam) if conn.exact else lam ** p
            acc += w * (exact.to_float(m) @ vf)
        parts.append(acc)
    return parts[0], parts[1]


def evaluate(conn: LaurentConnection, lam, j_plus: np.ndarray, j_minus: np.ndarray) -> np.ndarray:
    a, b = evaluate_parts(conn, lam, j_plus, j_minus)
    return a + b


def evaluate_z(conn: LaurentConnection, z, j_plus: np.ndarray, j_minus: np.ndarray) -> np.ndarray:
    """Exact evaluation at ``z = exp(scale * l)`` for rational nonzero ``z``."""
    if not conn.exact:
        raise NotExact("series connections have no Laurent variable")
    z = exact.frac(z)
    out = exact.zeros(conn.dim)
    for ch, v in zip(CHIRALITIES, (j_plus, j_minus)):
        for p, m in conn.coeffs(ch).items():
            out = out + (m @ v) * z ** p
    return out


def laurent_coefficients(conn: LaurentConnection) -> list[tuple[int, np.ndarray, str]]:
    if not conn.exact:
        raise NotExact("connection is stored as a truncated series")
    out = [(p, m, ch) for ch in CHIRALITIES for p, m in conn.coeffs(ch).items()]
    return sorted(out, key=lambda t: (t[0], CHIRALITIES.index(t[2])))


def same_connection(a: LaurentConnection, b: LaurentConnection) -> bool:
    """Coefficient-by-coefficient equality of the normalised Laurent data."""
    if a.exact != b.exact or a.dim != b.dim:
        return False
    for ch in CHIRALITIES:
        ca, cb = a.coeffs(ch), b.coeffs(ch)
        if set(ca) != set(cb):
            return False
        if any(not exact.is_zero(ca[p] - cb[p]) for p in ca):
            return False
    return True


# shift identities -----------------------------------------------------------------------


def shift_residual_exact(conn: LaurentConnection, pair: ChiralOperatorPair) -> Fraction:
    """Largest entry of the coefficient-level shift identities.

    ``A(l + l') = exp(l' S) A(l)`` as polynomials in ``exp(l)``, ``exp(l')``
    is equivalent to ``C_q C_p = delta_pq C_p`` for each chirality, and
    ``dA/dl = S A`` to ``scale * p * C_p = S C_p``.
    """
    if not conn.exact:
        raise NotExact("exact shift identities need a Laurent connection")
    worst = exact.ZERO
    for ch, s in zip(CHIRALITIES, (pair.sigma_plus, pair.sigma_minus)):
        cs = conn.coeffs(ch)
        total = exact.zeros(conn.dim, conn.dim)
        for p, cp in cs.items():
            total = total + cp
            worst = max(worst, _maxabs(exact.matmul(s, cp) - cp * (conn.scale * p)))
            for q, cq in cs.items():
                target = cp if p == q else exact.zeros(conn.dim, conn.dim)
                worst = max(worst, _maxabs(exact.matmul(cq, cp) - target))
        worst = max(worst, _maxabs(total - exact.identity(conn.dim)))
    return worst


def _maxabs(m: np.ndarray) -> Fraction:
    return max((abs(x) for x in m.flat), default=exact.ZERO)


def shift_check(conn: LaurentConnection, pair: ChiralOperatorPair, lam, lam_prime,
                j_plus: np.ndarray, j_minus: np.ndarray):
    """Residual of ``A(l + l') = exp(l' S) A(l)``, applied per chirality.

    Exact Laurent connections are checked at the coefficient level and return
    an exact zero when the identity holds. Otherwise a relative max-norm
    residual is returned using dense matrix exponentials.
    """
    if conn.exact and isinstance(lam, (int, Fraction)) and isinstance(lam_prime, (int, Fraction)):
        return shift_residual_exact(conn, pair)
    from scipy.linalg import expm

    shifted = evaluate(conn, float(lam) + float(lam_prime), j_plus, j_minus)
    ap, am = evaluate_parts(conn, lam, j_plus, j_minus)
    lp = float(lam_prime)
    moved = expm(lp * exact.to_float(pair.sigma_plus)) @ np.asarray(ap, dtype=float) + \
        expm(lp * exact.to_float(pair.sigma_minus)) @ np.asarray(am, dtype=float)
    scale = max(np.max(np.abs(shifted)), np.max(np.abs(moved)), 1e-300)
    return float(np.max(np.abs(shifted - moved)) / scale)


# export -------------------------------------------------------------------------------------


def to_json(conn: LaurentConnection) -> dict:
    if conn.exact:
        terms = [
            {"power": p, "chirality": ch, "matrix": exact.to_strings(m)}
            for p, m, ch in laurent_coefficients(conn)
        ]
    else:
        terms = [
            {"order": n, "chirality": ch, "matrix": exact.to_strings(m)}
            for ch in CHIRALITIES for n, m in sorted(conn.coeffs(ch).items())
        ]
    return {"exact": conn.exact, "scale": exact.fstr(conn.scale), "terms": terms}


def from_json(data: dict) -> LaurentConnection:
    terms = data["terms"]
    dim = len(terms[0]["matrix"]) if terms else 0
    if not data.get("exact", True):
        plus, minus = {}, {}
        for t in terms:
            (plus if t["chirality"] == "+" else minus)[t["order"]] = exact.matrix(t["matrix"])
        return LaurentConnection(dim, plus, minus, False, exact.frac(data.get("scale", "1")))
    conn = LaurentConnection.from_terms(
        dim, [(t["power"], t["chirality"], exact.matrix(t["matrix"])) for t in terms]
    )
    scale = exact.frac(data.get("scale", "1"))
    return LaurentConnection(conn.dim, conn.plus_coeffs, conn.minus_coeffs, True, scale * conn.scale)


def _grades_of(m: np.ndarray, grades: Sequence[int]) -> list[int] | None:
    """Grades ``k`` such that ``m`` is the sum of their grade projectors."""
    if not exact.is_diagonal(m):
        return None
    hit = {}
    for i, g in enumerate(grades):
        v = m[i, i]
        if v not in (0, 1) or hit.get(g, v) != v:
            return None
        hit[g] = v
    return sorted(g for g, v in hit.items() if v == 1)


def _exp_label(p: int, unit: str = "l") -> str:
    if p == 0:
        return ""
    if p == 1:
        return f"e^({unit}) "
    if p == -1:
        return f"e^(-{unit}) "
    return f"e^({p}{unit}) "


def pretty(conn: LaurentConnection) -> list[str]:
    """One line per Laurent term: ``e^(p l) J+(k)``; ``J(k)`` when both chiralities share a power."""
    if not conn.exact:
        return [
            f"l^{n}/{math.factorial(n)} coefficient ({ch}): {exact.to_strings(m)}"
            for ch in CHIRALITIES for n, m in sorted(conn.coeffs(ch).items())
        ]
    lines = []
    unit = "l" if conn.scale == 1 else f"{exact.fstr(conn.scale)} l"
    for p in conn.powers:
        cp, cm = conn.plus_coeffs.get(p), conn.minus_coeffs.get(p)
        gp = _grades_of(cp, conn.labels) if cp is not None and conn.labels else None
        gm = _grades_of(cm, conn.labels) if cm is not None and conn.labels else None
        pieces = []
        if gp is not None or gm is not None or (cp is None and cm is None):
            both = sorted(set(gp or []) & set(gm or []))
            pieces += [f"J({k})" for k in both]
            pieces += [f"J+({k})" for k in (gp or []) if k not in both]
            pieces += [f"J-({k})" for k in (gm or []) if k not in both]
        if cp is not None and gp is None:
            pieces.append(f"M{p:+d}[+] J+")
        if cm is not None and gm is None:
            pieces.append(f"M{p:+d}[-] J-")
        for piece in pieces:
            lines.append(f"{_exp_label(p, unit)}{piece}".strip())
    return lines


def in_parametrization(conn: LaurentConnection, which: str = "z") -> list[tuple[str, str, np.ndarray]]:
    """Laurent terms rewritten for ``z = exp(l)`` or ``z = (x + 1)/(x - 1)``."""
    z, x = sympy.symbols("z x")
    out = []
    for p, m, ch in laurent_coefficients(conn):
        power = sympy.Rational(conn.scale.numerator, conn.scale.denominator) * p
        if which == "z":
            expr = z ** power
        elif which == "x":
            expr = ((x + 1) / (x - 1)) ** power
        else:
            raise ValueError("parametrization must be 'z' or 'x'")
        out.append((str(expr), ch, m))
    return out
