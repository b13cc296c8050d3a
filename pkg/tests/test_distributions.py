import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeevt import (CLASSICAL, FREE, ExtremeValueLaw, TabulatedCdf, classical_law, eval_cdf,
                     free_law, integrate, make_law, quantile, tabulate, uniform)
from freeevt.errors import InvalidLaw, InvalidProbability, ParseError

GAMMAS = (0.0, 0.5, 1.0, 2.0, -0.5, -1.0, -2.0)


def test_free_gumbel_values():
    F = free_law(0.0)
    assert eval_cdf(F, 0.0) == 0.0
    assert eval_cdf(F, 1e6) == 1.0


def test_free_frechet_values():
    F = free_law(2.0)
    assert eval_cdf(F, 1.0) == 0.0
    assert eval_cdf(F, 2.0) == 0.75


def test_free_weibull_values():
    F = free_law(-1.0)
    assert eval_cdf(F, -0.5) == 0.5
    assert eval_cdf(F, -1.0) == 0.0
    assert eval_cdf(F, 0.3) == 1.0


def test_classical_values_against_mpmath():
    assert abs(eval_cdf(classical_law(0.0), 0.0) - float(mp.e ** -1)) <= 1e-16
    for x in (-1.0, 0.3, 2.5):
        assert abs(eval_cdf(classical_law(0.0), x) - float(mp.exp(-mp.exp(-x)))) <= 1e-15
        assert abs(eval_cdf(classical_law(-2.0), -abs(x)) - float(mp.exp(-mp.mpf(abs(x)) ** 2))) <= 1e-15
    assert eval_cdf(classical_law(1.0), -1.0) == 0.0
    assert eval_cdf(classical_law(-1.0), 1.0) == 1.0


def test_far_left_tail():
    for g in GAMMAS:
        for calc in (classical_law, free_law):
            assert eval_cdf(calc(g), -1e9) <= 1e-300


def test_free_laws_vanish_at_edge():
    assert eval_cdf(free_law(0.0), 0.0) == 0.0
    for g in (0.5, 1.0, 2.0):
        assert eval_cdf(free_law(g), 1.0) == 0.0
    for g in (-0.5, -1.0, -2.0):
        assert eval_cdf(free_law(g), -1.0) == 0.0


@pytest.mark.parametrize("g", GAMMAS)
@pytest.mark.parametrize("ctor", [classical_law, free_law])
def test_density_integrates_to_one(ctor, g):
    F = ctor(g)
    assert abs(integrate(F.density, (F.support_lo, F.support_hi), breakpoints=F.breakpoints) - 1) <= 1e-9


@pytest.mark.parametrize("g", GAMMAS)
def test_monotone_on_random_grid(g):
    rng = np.random.default_rng(7)
    xs = np.sort(rng.uniform(-20, 40, 2000))
    for F in (classical_law(g), free_law(g)):
        v = np.asarray(eval_cdf(F, xs))
        assert np.all(np.diff(v) >= 0)


def test_quantile_examples():
    assert abs(quantile(free_law(0.0), 1 - math.exp(-1)) - 1.0) <= 1e-14
    assert abs(quantile(classical_law(1.0), math.exp(-1)) - 1.0) <= 1e-14
    assert quantile(TabulatedCdf([0, 1], [0, 1]).to_cdf(), 0.5) == 0.5


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_bad_probability(p):
    with pytest.raises(InvalidProbability, match="invalid probability"):
        quantile(free_law(0.0), p)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(1e-6, 1 - 1e-6), g=st.sampled_from(GAMMAS), free=st.booleans())
def test_quantile_eval_consistency(p, g, free):
    F = free_law(g) if free else classical_law(g)
    q = quantile(F, p)
    assert eval_cdf(F, q) >= p - 1e-12
    eps = 1e-9 * max(1.0, abs(q))
    assert eval_cdf(F, q - eps) < p + 1e-9


def test_law_validation():
    with pytest.raises(InvalidLaw, match="invalid law"):
        ExtremeValueLaw(FREE, "gumbel", 1.0)
    with pytest.raises(InvalidLaw):
        ExtremeValueLaw(CLASSICAL, "frechet", -1.0)
    with pytest.raises(InvalidLaw):
        ExtremeValueLaw(FREE, "weibull", -1e-9)
    assert make_law(ExtremeValueLaw.from_gamma(2.0, FREE)).support_lo == 1.0


def test_tabulated_interpolation_and_outside():
    F = TabulatedCdf([0, 1], [0, 1]).to_cdf()
    assert eval_cdf(F, 0.25) == 0.25
    assert eval_cdf(F, -3.0) == 0.0 and eval_cdf(F, 7.0) == 1.0


@pytest.mark.parametrize("payload", [
    {"x": [0, 1], "F": [0]},
    {"x": [1, 0], "F": [0, 1]},
    {"x": [0, 1], "F": [0.6, 0.4]},
    {"x": [0, 1], "F": [0, 1.2]},
    {"F": [0, 1]},
    {"x": [0, "a"], "F": [0, 1]},
])
def test_tabulated_rejects_bad_input(payload):
    with pytest.raises(ParseError, match="parse error"):
        TabulatedCdf.from_dict(payload)


def test_tabulated_json_round_trip():
    rng = np.random.default_rng(3)
    x = np.cumsum(rng.uniform(0.1, 1, 20))
    F = np.sort(rng.uniform(0, 1, 20))
    tab = TabulatedCdf(x, F)
    back = TabulatedCdf.from_json(tab.to_json())
    assert np.array_equal(back.x, tab.x) and np.array_equal(back.F, tab.F)
    assert json.loads(tab.to_json()).keys() == {"x", "F"}


def test_tabulate_round_trip_on_export_grid():
    G = classical_law(0.0)
    xs = np.linspace(-3, 8, 400)
    T = tabulate(G, xs).to_cdf()
    exact = np.abs(np.asarray(eval_cdf(T, xs[:-1])) - np.asarray(eval_cdf(G, xs[:-1])))
    assert np.max(exact) <= 1e-15
    # the tail mass beyond the grid sits as an atom on the last knot
    assert eval_cdf(T, xs[-1]) == 1.0
    mid = 0.5 * (xs[1:] + xs[:-1])
    h = xs[1] - xs[0]
    # linear interpolation error is at most h^2/8 times max |G''|
    fine = np.linspace(-3, 8, 100001)
    M = np.max(np.abs(np.exp(-np.exp(-fine)) * np.exp(-fine) * (np.exp(-fine) - 1)))
    assert np.max(np.abs(np.asarray(eval_cdf(T, mid)) - np.asarray(eval_cdf(G, mid)))) <= h * h * M / 8


def test_uniform_helper():
    U = uniform(0.0, 2.0)
    assert eval_cdf(U, 0.5) == 0.25
