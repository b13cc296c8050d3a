import json
import math

import mpmath as mp
import numpy as np
import pytest

from freeevt import (BoundReport, DensityProfile, SteinSolution, apply_density_operator,
                     apply_stein_operator, eta_boundary_bound, eta_boundary_numeric, free_law,
                     eval_cdf, gamma_functional, profile_decomposition_bound, remainder_term,
                     stein_bound, validate_density_profile, worked_family)
from freeevt.errors import DomainError, HypothesisViolation, ProfileFactorizationError

LN2 = math.log(2)


def test_solution_examples():
    assert abs(SteinSolution(0.0, 1.0)(2.0) - (1 - math.exp(-1))) <= 1e-15
    assert abs(SteinSolution(0.0, 1.0)(0.0)) <= 1e-16
    assert SteinSolution(1.0, 2.0)(1.0) == 0.0
    assert abs(SteinSolution(-1.0, -2.0)(-3.0) - 1 / 3) <= 1e-15


@pytest.mark.parametrize("g, w", [(1.0, 0.0), (1.0, -1.0), (-1.0, 0.0), (-2.0, 0.5)])
def test_solution_domain(g, w):
    with pytest.raises(DomainError, match="domain error"):
        SteinSolution(g, 1.0 if g > 0 else -1.0)(w)


@pytest.mark.parametrize("g", [0.0, 0.5, 1.0, 2.0, -0.5, -1.0, -2.0])
def test_solution_continuous_at_x(g):
    xs = [-1.3, 0.4, 2.0] if g == 0 else ([0.3, 1.0, 4.0] if g > 0 else [-4.0, -1.0, -0.3])
    for x in xs:
        phi = SteinSolution(g, x)
        assert abs(phi(x + 1e-12) - phi(x - 1e-12)) <= 1e-9


def test_stein_operator_examples():
    assert abs(apply_stein_operator(0.0, np.exp, 0.0)) <= 1e-12
    assert abs(apply_stein_operator(2.0, lambda w: w * w, 3.0)) <= 1e-10
    val = apply_stein_operator(0.0, SteinSolution(0.0, 1.0), 0.5)
    assert abs(val - math.exp(-1)) <= 1e-15
    with pytest.raises(DomainError):
        apply_stein_operator(1.0, np.exp, -1.0)


def test_density_operator_examples():
    one = lambda w: 1.0
    g2 = worked_family(0.0, 2).profile
    assert abs(apply_density_operator(0.0, g2, one, 0.0) + 0.5) <= 1e-12
    f2 = worked_family(1.0, 2).profile
    assert abs(apply_density_operator(1.0, f2, one, 1.0) + 0.5) <= 1e-12
    assert apply_density_operator(-1.0, worked_family(-1.0, 3).profile, lambda w: 0.0, -1.0) == 0.0
    with pytest.raises(DomainError):
        apply_density_operator(0.0, g2, one, g2.A - 1.0)


def test_gamma_functional_examples():
    assert abs(gamma_functional(0.0, worked_family(0.0, 10).profile, 0.0) - 0.1) <= 1e-15
    assert abs(gamma_functional(1.0, worked_family(1.0, 5).profile, 1.0) - 0.2) <= 1e-15
    assert abs(gamma_functional(-1.0, worked_family(-1.0, 4).profile, -1.0) - 0.25) <= 1e-15
    with pytest.raises(DomainError):
        gamma_functional(1.0, worked_family(1.0, 5).profile, 0.1)


def test_remainder_examples():
    assert remainder_term(0.0, 0.0) == 0.0
    assert abs(remainder_term(0.0, -0.5) - (1 - math.exp(-0.5))) <= 1e-16
    assert abs(remainder_term(2.0, 0.5) - 0.1875) <= 1e-16
    with pytest.raises(DomainError):
        remainder_term(1.0, -0.5)
    with pytest.raises(DomainError):
        remainder_term(-1.0, 0.5)


def test_eta_bound_examples():
    mp.mp.dps = 30
    A = -mp.log(2 * mp.log(2))
    ref = (1 - mp.e ** A) * mp.log(2)
    assert abs(eta_boundary_bound(0.0, worked_family(0.0, 2).profile) - float(ref)) <= 1e-15
    assert abs(float(ref) - 0.1931472) <= 1e-7
    A1 = 1 / (2 * mp.log(2))
    u_edge = mp.log(2) / A1
    ref = A1 * (1 - A1) * u_edge
    assert abs(eta_boundary_bound(1.0, worked_family(1.0, 2).profile) - float(ref)) <= 1e-15
    flat = DensityProfile(u=lambda t: t, rho=lambda t: t, A=0.0, B=1.0, edge_density=0.0, n=2)
    assert eta_boundary_bound(0.0, flat) == 0.0


def test_eta_numeric_examples():
    mp.mp.dps = 30
    g2 = worked_family(0.0, 2).profile
    assert eta_boundary_numeric(0.0, g2, g2.A - 1.0) == 0.0
    A = -mp.log(2 * mp.log(2))
    ref = (mp.e ** (A - 1) - mp.e ** -1) * mp.log(2)
    assert abs(eta_boundary_numeric(0.0, g2, 1.0) - float(ref)) <= 1e-12
    f2 = worked_family(1.0, 2).profile
    A1 = 1 / (2 * mp.log(2))
    # t phi_2(t) u(t) at A+ with phi_2(t) = (t - 1)/2 and A u(A+) = log 2
    ref = (A1 - 1) / 2 * mp.log(2)
    assert abs(eta_boundary_numeric(1.0, f2, 2.0) - float(ref)) <= 1e-12


def test_bound_examples():
    assert abs(stein_bound(0.0, worked_family(0.0, 10).profile).total - 0.1) <= 1e-8
    assert abs(stein_bound(2.0, worked_family(2.0, 100).profile).total - 0.01) <= 1e-8
    assert abs(stein_bound(-1.0, worked_family(-1.0, 2).profile).total - 0.5) <= 1e-8


def test_bound_report_fields_and_json():
    fam = worked_family(0.0, 2)
    rep = stein_bound(0.0, fam.profile, cdf=fam.cdf)
    assert rep.total == pytest.approx(rep.integral_term + rep.boundary_term, abs=1e-16)
    assert rep.integral_term >= 0 and rep.boundary_term >= 0
    assert rep.reference_rate == 0.5
    assert rep.measured_dk <= rep.total + 1e-6
    assert abs(rep.integral_term - (1 - LN2)) <= 1e-12
    d = json.loads(rep.to_json())
    assert list(d) == list(BoundReport.JSON_KEYS)


@pytest.mark.parametrize("g", [0.0, 1.0, -1.0])
@pytest.mark.parametrize("n", [2, 10, 100])
def test_bound_dominates_measured_distance(g, n):
    fam = worked_family(g, n)
    rep = stein_bound(g, fam.profile, cdf=fam.cdf)
    assert rep.measured_dk <= rep.total + 1e-6


def test_validate_examples():
    assert validate_density_profile(0.0, worked_family(0.0, 2).profile).ok
    assert validate_density_profile(-2.0, worked_family(-2.0, 3).profile).ok


def _broken():
    return DensityProfile(u=lambda t: np.where((t > 0) & (t < 1), 1.0, 0.0),
                          rho=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                          A=0.0, B=1.0, edge_density=1.0, n=2)


def test_broken_profile_rejected():
    rep = validate_density_profile(0.0, _broken())
    assert not rep.ok
    assert "G-Cond1-1" in rep.failures
    with pytest.raises(HypothesisViolation) as exc:
        stein_bound(0.0, _broken())
    assert "G-Cond1-1" in str(exc.value)
    assert "G-Cond1-1" in exc.value.conditions


def test_wrong_sign_support_fails_cond1():
    prof = worked_family(0.0, 2).profile
    rep = validate_density_profile(1.0, prof)
    assert rep.failures == ("F-Cond1",)


def test_unbounded_t_rho_rejected():
    # u(t) = exp(-t^2) on (1, inf) is fine for Gumbel-type rho but t*rho = -2t^2 is unbounded
    c = 1.0 / float(mp.quad(lambda t: mp.e ** (-t * t), [1, mp.inf]))
    prof = DensityProfile(u=lambda t: np.where(t > 1, c * np.exp(-t * t), 0.0),
                          rho=lambda t: -2.0 * np.asarray(t, dtype=float),
                          A=1.0, B=math.inf, edge_density=c * math.exp(-1), n=2)
    rep = validate_density_profile(1.0, prof)
    assert "F-Cond4" in rep.failures
    assert "G-Cond3" in validate_density_profile(0.0, prof).failures


def test_rho_mismatch_fails_cond2():
    fam = worked_family(-1.0, 4)
    p = fam.profile
    bad = DensityProfile(u=p.u, rho=lambda t: p.rho(t) + 0.3, A=p.A, B=p.B,
                         edge_density=p.edge_density, n=p.n)
    assert validate_density_profile(-1.0, bad).failures == ("W-Cond2",)


def test_decomposition_constant_factor():
    # u = exp(-0.5) e^{-x} on (-0.5, inf): sup term 0, boundary term 1 - e^{-0.5}
    c = math.exp(-0.5)
    prof = DensityProfile(u=lambda t: np.where(t > -0.5, c * np.exp(-t), 0.0),
                          rho=lambda t: -np.ones_like(np.asarray(t, dtype=float)),
                          A=-0.5, B=math.inf, edge_density=c * math.exp(0.5), n=2)
    val = profile_decomposition_bound(0.0, lambda t: np.full_like(np.asarray(t, dtype=float), c), prof)
    assert abs(val - (1 - math.exp(-0.5))) <= 1e-9


@pytest.mark.parametrize("g", [0.0, 1.0, 2.0, -1.0])
@pytest.mark.parametrize("n", [2, 10, 100])
def test_decomposition_closed_form(g, n):
    # sup |C'/C| (or |x C'/C| / |gamma|) equals -log(1 - 1/n), attained at A
    fam = worked_family(g, n)
    ell = -math.log1p(-1.0 / n)
    boundary = stein_bound(g, fam.profile).boundary_term
    val = profile_decomposition_bound(g, fam.factor, fam.profile)
    assert abs(val - (ell + boundary)) <= 1e-5 * ell


def test_decomposition_mismatch():
    fam = worked_family(0.0, 3)
    with pytest.raises(ProfileFactorizationError, match="profile does not factor as claimed"):
        profile_decomposition_bound(0.0, lambda t: 2.0 * fam.factor(t), fam.profile)


@pytest.mark.parametrize("g", [0.0, 0.5, 1.0, 2.0, -0.5, -1.0, -2.0])
def test_solution_sup_norm(g):
    xs = np.linspace(-3, 8, 25) if g == 0 else (np.linspace(0.05, 10, 25) if g > 0 else np.linspace(-5, -0.01, 25))
    ws = np.linspace(-6, 12, 500) if g == 0 else (np.linspace(1e-3, 15, 500) if g > 0 else np.linspace(-8, -1e-3, 500))
    for x in xs:
        assert np.max(np.abs(SteinSolution(g, float(x))(ws))) <= 1 + 1e-15


def test_ode_residual_uses_free_law():
    for g in (0.0, 1.0, -1.0):
        x = {0.0: 0.7, 1.0: 1.5, -1.0: -0.4}[g]
        w = np.array([x - 0.3, x + 0.2]) if g == 0 else np.array([x * 0.5, x * 1.5])
        res = apply_stein_operator(g, SteinSolution(g, x), w) - ((w <= x) - eval_cdf(free_law(g), x))
        assert np.max(np.abs(res)) <= 1e-12
