from __future__ import annotations

from fractions import Fraction

import pytest

from conftest import random_pair
from sigmalax import catalog, exact
from sigmalax.algebra import sl
from sigmalax.bilinear import PairBilinears, mm
from sigmalax.errors import UnresolvedKernelComponent
from sigmalax.flatness import flatness_numeric, flatness_series, series_coefficients, solve_dJ
from sigmalax.integrability import kernel_drift, mapcond_all, series_pi

INTEGRABLE_MODELS = ["z2_symmetric", "z3_coset", "z4_superspace", "pcm_doubled(1,2)", "wzw(1)",
                     "pcm_constrained(1)", "new_z2(1)", "general_z2(0,0,2)", "general_z2(1,0,0)"]


def order_two_gap(pair):
    """F_2 minus the condition at the series projector, minus the drift term, per branch."""
    bil = PairBilinears(pair)
    f2 = series_coefficients(pair, None, 2, bil)[2]
    drift = mm(kernel_drift(pair), bil.bracket) * Fraction(1, 2)
    return [
        f2 - (mapcond_all(pair, series_pi(pair), b, bil) + drift * sign)
        for b, sign in (("+", 1), ("-", -1))
    ]


@pytest.mark.parametrize("kind", ["generic", "singular", "commuting"])
@pytest.mark.parametrize("n", [2, 3])
def test_order_two_coefficient_is_the_condition(kind, n, rng):
    alg = sl(n)
    for _ in range(3):
        pair = random_pair(rng, alg, kind)
        assert all(exact.is_zero(g) for g in order_two_gap(pair))
        if kind != "singular":
            assert exact.is_zero(kernel_drift(pair))


def test_drift_is_nonzero_for_some_singular_pairs(rng):
    pairs = [random_pair(rng, sl(2), "singular") for _ in range(5)]
    assert any(not exact.is_zero(kernel_drift(p)) for p in pairs)


@pytest.mark.parametrize("name", ["z4_superspace", "pcm_doubled(2,1)", "general_z2(1,2,3)"])
def test_derivative_solution_satisfies_low_orders(name, rng):
    spec = catalog.builtin(name)
    pair, alg = spec.pair, spec.algebra
    for _ in range(3):
        t1 = exact.vector(rng.integers(-3, 4, size=pair.dim).tolist())
        t2 = exact.vector(rng.integers(-3, 4, size=pair.dim).tolist())
        sol = solve_dJ(pair, None, t1, t2)
        b = alg.bracket(t1, t2)
        c = alg.bracket(pair.sigma_plus @ t1, t2) + alg.bracket(t1, pair.sigma_minus @ t2)
        w = pair.sigma_plus @ b - c
        assert exact.is_zero(sol.dj_plus + sol.dj_minus + b)
        first = pair.sigma_plus @ sol.dj_plus + pair.sigma_minus @ sol.dj_minus + c
        assert exact.is_zero(first + pair.cokernel_projector @ w)


@pytest.mark.parametrize("name", INTEGRABLE_MODELS)
def test_integrable_models_are_flat_to_order_eight(name):
    spec = catalog.builtin(name)
    report = flatness_series(spec.pair, spec.projectors, 8)
    assert report.flat and report.first_nonzero_order is None


@pytest.mark.parametrize("name", ["pcm_gauge_fixed(1,2)", "general_z2(1,2,3)", "general_z2(2,1,0)"])
def test_non_integrable_models_fail_at_order_two(name):
    spec = catalog.builtin(name)
    assert flatness_series(spec.pair, spec.projectors, 4).first_nonzero_order == 2


def test_undeclared_constraints_are_refused():
    spec = catalog.builtin("z4_superspace")
    with pytest.raises(UnresolvedKernelComponent):
        flatness_series(spec.pair, [], 2)


def test_order_must_be_at_least_two():
    with pytest.raises(ValueError):
        flatness_series(catalog.builtin("z2_symmetric").pair, None, 1)


def test_constrained_models_are_flat_only_modulo_constraints():
    spec = catalog.builtin("z4_superspace")
    assert flatness_series(spec.pair, spec.projectors, 3).modulo_constraints
    spec = catalog.builtin("z3_coset")
    assert not flatness_series(spec.pair, spec.projectors, 3).modulo_constraints


@pytest.mark.parametrize("name", ["z2_symmetric", "new_z2(1)", "pcm_doubled(1,3)", "pcm_constrained(2)"])
def test_numeric_flatness_of_integrable_models(name):
    spec = catalog.builtin(name)
    assert flatness_numeric(spec.pair, spec.projectors, trials=20) < 1e-10


def test_numeric_flatness_detects_the_witness():
    spec = catalog.builtin("general_z2(1,2,3)")
    assert flatness_numeric(spec.pair, spec.projectors, trials=20) > 1e-3


def test_numeric_flatness_is_reproducible():
    spec = catalog.builtin("general_z2(1,2,3)")
    a = flatness_numeric(spec.pair, spec.projectors, trials=5, seed=11)
    b = flatness_numeric(spec.pair, spec.projectors, trials=5, seed=11)
    assert a == b


def test_report_json_lists_residual_pairs():
    spec = catalog.builtin("pcm_gauge_fixed(1,2)")
    data = flatness_series(spec.pair, None, 2).to_json()
    assert data["flat"] is False and data["residuals"]["2"]
