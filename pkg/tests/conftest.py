from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from sigmalax import exact
from sigmalax.operators import ChiralOperatorPair

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def sl_matrix(name: str, n: int) -> np.ndarray:
    """Defining-representation matrix for a Chevalley basis label (H, E, F, Hi, Eij)."""
    m = np.zeros((n, n), dtype=object)
    m.fill(Fraction(0))
    if n == 2 and name in ("H", "E", "F"):
        name = {"H": "H1", "E": "E12", "F": "E21"}[name]
    if name.startswith("H"):
        i = int(name[1:]) - 1
        m[i, i], m[i + 1, i + 1] = Fraction(1), Fraction(-1)
    else:
        i, j = int(name[1]) - 1, int(name[2]) - 1
        m[i, j] = Fraction(1)
    return m


def random_matrix(rng: np.random.Generator, d: int, span: int = 2) -> np.ndarray:
    return exact.matrix(rng.integers(-span, span + 1, size=(d, d)).tolist())


def random_pair(rng: np.random.Generator, alg, kind: str = "generic") -> ChiralOperatorPair:
    """Random operator pair of a given shape.

    ``generic``: independent integer matrices; ``graded``: random per-grade
    scalars with some grades forced equal; ``commuting``: two polynomials in one
    matrix; ``singular``: non-commuting with ``S+ - S-`` of rank < dim.
    """
    d = alg.dim
    if kind == "generic":
        return ChiralOperatorPair.from_matrices(alg, random_matrix(rng, d), random_matrix(rng, d))
    if kind == "graded":
        n = alg.grading_order
        plus = rng.integers(-3, 4, size=n).tolist()
        minus = rng.integers(-3, 4, size=n).tolist()
        for k in range(n):
            if rng.random() < 0.4:
                minus[k] = plus[k]
        return ChiralOperatorPair.from_eigenvalues(alg, plus, minus)
    if kind == "commuting":
        x = random_matrix(rng, d, 1)
        a, b, c = (int(v) for v in rng.integers(-2, 3, size=3))
        eye = exact.identity(d)
        return ChiralOperatorPair.from_matrices(alg, x * a + eye * b, exact.matmul(x, x) * c + eye * b)
    if kind == "singular":
        x, y = random_matrix(rng, d), random_matrix(rng, d)
        y[:, :2] = x[:, :2]
        return ChiralOperatorPair.from_matrices(alg, x, y)
    raise ValueError(kind)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


# acceptance summary ----------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(ACCEPTANCE[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
