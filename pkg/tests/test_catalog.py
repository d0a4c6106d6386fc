from __future__ import annotations

from fractions import Fraction

import pytest

from sigmalax import catalog
from sigmalax.errors import BadParameters, NoClosedForm, UnknownModel
from sigmalax.integrability import check

DEFAULTS = catalog.names()
PARAMETRISED = ["zn_coset(3)", "zn_coset(6)", "pcm_gauge_fixed(2,2)", "pcm_gauge_fixed(-1,0)",
                "pcm_doubled(0,1)", "general_z2(1,1,1)", "general_z2(1,-1,0)", "general_z2(0,0,3)",
                "general_z2(2,0,0)", "wzw(-2)", "new_z2(3/2)", "pcm_constrained(0)"]


@pytest.mark.parametrize("name", DEFAULTS + PARAMETRISED)
def test_model_is_consistent_and_verdict_matches(name):
    spec = catalog.builtin(name)
    assert spec.pair.dim == spec.algebra.dim
    assert all(p.annihilates(spec.pair.difference) for p in spec.projectors)
    assert check(spec.pair).verdict == spec.expected_verdict


@pytest.mark.parametrize("name", ["z2_symmetric", "z3_coset", "z4_superspace", "zn_coset(5)", "new_z2(1)"])
def test_vacuous_grade_pairs_carry_no_condition(name):
    report = check(catalog.builtin(name).pair)
    for j, k in report.vacuous:
        assert report.factor_tables["+"][j][k] == 0 == report.factor_tables["-"][j][k]


def test_z2_eigenvalues():
    pair = catalog.builtin("z2_symmetric").pair
    assert pair.eigen_plus == (0, -1) and pair.eigen_minus == (0, 1)


def test_z4_eigenvalue_table():
    pair = catalog.builtin("z4_superspace").pair
    assert pair.eigen_plus == (0, -1, -2, 1) and pair.eigen_minus == (0, -1, 2, 1)


@pytest.mark.parametrize("beta", [1, 2, "1/3"])
def test_new_model_eigenvalues(beta):
    b = Fraction(beta)
    pair = catalog.builtin("new_z2", [b]).pair
    assert pair.eigen_plus == (2 * b, b) and pair.eigen_minus == (0, b)


def test_zn2_reproduces_z2_report():
    a = check(catalog.builtin("zn_coset(2)").pair).to_json()
    b = check(catalog.builtin("z2_symmetric").pair).to_json()
    assert a == b


@pytest.mark.parametrize("text,expected", [
    ("zn_coset(5)", ("zn_coset", [5])),
    ("general_z2( 1, 1/2 ,0)", ("general_z2", [1, Fraction(1, 2), 0])),
    ("z3_coset", ("z3_coset", [])),
])
def test_parse_name(text, expected):
    assert catalog.parse_name(text) == expected


def test_explicit_params_override_inline():
    assert catalog.builtin("wzw(1)", [3]).params == (3,)


@pytest.mark.parametrize("name,params", [
    ("zn_coset", [1]), ("zn_coset", ["5/2"]), ("wzw", [0]), ("pcm_doubled", [1, 0]),
    ("new_z2", [0]), ("z2_symmetric", [1]), ("general_z2(1,x,0)", None),
])
def test_bad_parameters(name, params):
    with pytest.raises(BadParameters):
        catalog.builtin(name, params)


def test_unknown_model():
    with pytest.raises(UnknownModel):
        catalog.builtin("sine_gordon")


@pytest.mark.parametrize("name", ["pcm_gauge_fixed(1,2)", "general_z2(1,2,3)"])
def test_no_closed_form(name):
    with pytest.raises(NoClosedForm):
        catalog.expected_lax(name)


def test_dual_form_transcription_splits_chiralities():
    alg = catalog.builtin("z2_symmetric").algebra
    conn = catalog.from_dual_form(alg, {1: ({2: 1}, {2: 1})})
    g1 = alg.grade_projector(1)
    assert set(conn.plus_coeffs) == {1} and conn.scale == 2
    assert (conn.plus_coeffs[1] == g1 * 2).all() and not conn.minus_coeffs


def test_general_z2_scalar_rule_on_named_cases():
    v = catalog.general_z2_verdict
    assert v(1, 1, 1) == v(1, -1, -1) == "integrable"
    assert v(1, 1, 0) == v(2, 0, 0) == "integrable-with-constraints"
    assert v(0, 0, 5) == v(0, 0, 0) == "integrable"
    assert v(1, 2, 3) == v(0, 1, 0) == "not-integrable"
