from __future__ import annotations


import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sl_matrix
from sigmalax import exact
from sigmalax.algebra import GradedLieAlgebra, algebra_to_json, build_algebra, direct_sum, sl, so, su
from sigmalax.errors import (
    AntisymmetryViolation,
    GradeOutOfRange,
    GradingNotClosed,
    JacobiViolation,
    ParseError,
)


def antisym(entries):
    return [e for a, b, c, v in entries for e in ((a, b, c, v), (b, a, c, -v))]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sl_brackets_match_matrix_commutators(n):
    alg = sl(n)
    mats = [sl_matrix(name, n) for name in alg.names]
    flat = np.array([m.reshape(-1) for m in mats], dtype=object).T  # n^2 x dim
    for a in range(alg.dim):
        for b in range(alg.dim):
            comm = mats[a] @ mats[b] - mats[b] @ mats[a]
            got = alg.bracket(alg.basis_vector(a), alg.basis_vector(b))
            assert ((flat @ got).reshape(n, n) == comm).all()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_killing_form_is_2n_times_trace_form(n):
    alg = sl(n)
    mats = [sl_matrix(name, n) for name in alg.names]
    expected = exact.matrix([[2 * n * np.trace(x @ y) for y in mats] for x in mats])
    assert (alg.killing == expected).all()


@pytest.mark.parametrize("n,order", [(2, 2), (3, 3), (4, 4), (4, 2), (5, 5)])
def test_cyclic_grading_is_closed_under_brackets(n, order):
    alg = sl(n, "cyclic", order)
    for a, b, c, _ in alg.entries():
        assert (alg.grades[a] + alg.grades[b] - alg.grades[c]) % order == 0


def test_cyclic_grading_of_sl3_by_name():
    alg = sl(3, "cyclic", 3)
    grade = dict(zip(alg.names, alg.grades))
    assert grade["E12"] == grade["E23"] == grade["E31"] == 1
    assert grade["E13"] == grade["E21"] == grade["E32"] == 2
    assert grade["H1"] == grade["H2"] == 0


def test_killing_form_pairs_grade_k_with_grade_minus_k():
    alg = sl(4, "cyclic", 4)
    for a in range(alg.dim):
        for b in range(alg.dim):
            if alg.killing[a, b] != 0:
                assert (alg.grades[a] + alg.grades[b]) % 4 == 0


@pytest.mark.parametrize("alg", [sl(2, "cartan"), su(2), su(2, "cartan"), so(3), so(4), direct_sum(sl(2), "swap")],
                         ids=["sl2-cartan", "su2", "su2-cartan", "so3", "so4", "sl2+sl2-swap"])
def test_presets_pass_validation_and_are_nondegenerate(alg):
    rebuilt = GradedLieAlgebra.from_constants(alg.dim, alg.entries(), alg.grades, alg.grading_order)
    assert exact.rank(rebuilt.killing) == alg.dim


def test_direct_sum_summands_commute():
    alg = direct_sum(sl(2))
    for a in range(3):
        for b in range(3, 6):
            assert exact.is_zero(alg.bracket(alg.basis_vector(a), alg.basis_vector(b)))


def test_one_sided_constant_is_an_antisymmetry_violation():
    with pytest.raises(AntisymmetryViolation) as err:
        GradedLieAlgebra.from_constants(2, [(0, 1, 1, 1)])
    assert err.value.index == (0, 1, 1)


def test_jacobi_violation_is_reported():
    entries = antisym([(0, 1, 1, 1), (0, 2, 2, 1), (1, 2, 0, 1)])
    with pytest.raises(JacobiViolation):
        GradedLieAlgebra.from_constants(3, entries)


def test_grading_not_closed_names_the_triple():
    entries = antisym([(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)])
    with pytest.raises(GradingNotClosed) as err:
        GradedLieAlgebra.from_constants(3, entries, [0, 1, 0], 2)
    assert len(err.value.index) == 3


def test_grade_out_of_range():
    with pytest.raises(GradeOutOfRange):
        GradedLieAlgebra.from_constants(2, [], [0, 3], 2)


def test_bracket_nonzero_detects_vacuous_grade_pairs():
    alg = sl(3, "cyclic", 3)
    assert not alg.bracket_nonzero(0, 0)  # the Cartan subalgebra is abelian
    assert alg.bracket_nonzero(1, 2)


def test_project_grade_splits_an_element():
    alg = sl(3, "cyclic", 3)
    x = exact.vector(range(1, 9))
    total = sum(alg.project_grade(x, k) for k in range(3))
    assert (total == x).all()


@given(st.lists(st.integers(-3, 3), min_size=8, max_size=8), st.lists(st.integers(-3, 3), min_size=8, max_size=8))
def test_bracket_antisymmetric_and_form_invariant(xs, ys):
    alg = sl(3)
    x, y = exact.vector(xs), exact.vector(ys)
    z = exact.vector([1, 0, -1, 2, 0, 1, 1, -2])
    assert exact.is_zero(alg.bracket(x, y) + alg.bracket(y, x))
    assert alg.killing_form(alg.bracket(x, y), z) == alg.killing_form(x, alg.bracket(y, z))


@pytest.mark.parametrize("alg", [sl(3, "cyclic", 3), direct_sum(sl(2)), so(3)], ids=["sl3", "sl2+sl2", "so3"])
def test_json_round_trip(alg):
    rebuilt = build_algebra(algebra_to_json(alg))
    assert rebuilt.dim == alg.dim and rebuilt.grades == alg.grades
    assert (rebuilt.structure_tensor() == alg.structure_tensor()).all()


def test_raw_json_algebra_builds():
    spec = {"dim": 3, "f": [[a, b, c, str(v)] for a, b, c, v in sl(2).entries()]}
    assert (build_algebra(spec).killing == sl(2).killing).all()


@pytest.mark.parametrize("spec,field", [
    ({"preset": "sl"}, "algebra.n"),
    ({"preset": "xx", "n": 2}, "algebra.preset"),
    ({"dim": 2, "f": [[0, 1, 1]]}, "algebra.f[0]"),
])
def test_bad_algebra_json_names_the_field(spec, field):
    with pytest.raises(ParseError) as err:
        build_algebra(spec)
    assert err.value.field == field
