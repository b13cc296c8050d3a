"""Stein operators for the free extreme value laws and the resulting upper
bounds on the Kolmogorov distance.

Sign conventions follow the regime of ``gamma``:

* ``gamma == 0``: ``J phi(w) = phi'(w) - phi(w)`` on the real line,
* ``gamma > 0``:  ``J phi(w) = w phi'(w) / gamma - phi(w)`` on ``w > 0``,
* ``gamma < 0``:  ``J phi(w) = -w phi'(w) / gamma + phi(w)`` on ``w < 0``.

For a density ``u`` on ``(A, B)`` with ``rho = (log u)'`` the density-adapted
operator integrates to a pure boundary term at ``A``, so

    |F(x) - Psi(x)| <= E|Gamma(W)| + r(A) u(A+)

uniformly in x.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .distributions import FRECHET, GUMBEL, WEIBULL, free_law, regime_of
from .errors import DomainError, HypothesisViolation, ProfileFactorizationError
from .numerics import Tolerance, default_tolerance, differentiate, integrate, one_sided_limit


def _finalize(out, w):
    out = np.asarray(out, dtype=float)
    return float(out) if np.ndim(w) == 0 else out


def _check_half_line(gamma, w):
    w = np.asarray(w, dtype=float)
    if gamma > 0 and np.any(w <= 0):
        raise DomainError("domain error: gamma > 0 needs w > 0")
    if gamma < 0 and np.any(w >= 0):
        raise DomainError("domain error: gamma < 0 needs w < 0")
    return w


@dataclass(frozen=True)
class SteinSolution:
    """Bounded solution ``phi_x`` of ``J phi = 1{w <= x} - Psi(x)``.

    Continuous everywhere, differentiable except at ``w = x``; the derivative
    returned there is the left one.
    """

    gamma: float
    x: float

    def __call__(self, w):
        return _finalize(self._value(_check_half_line(self.gamma, w)), w)

    def derivative(self, w):
        return _finalize(self._slope(_check_half_line(self.gamma, w)), w)

    def _value(self, w):
        g, x = self.gamma, self.x
        left = w <= x
        with np.errstate(all="ignore"):
            if g == 0:
                d = np.minimum(w - x, 0.0)
                if x <= 0:
                    return np.where(left, np.expm1(d), 0.0)
                return np.where(left, np.exp(d) - math.exp(-x), -math.expm1(-x))
            if g > 0:
                if x <= 0:
                    return np.zeros_like(w)
                r = np.minimum(w, x) / x
                if x < 1:
                    return np.where(left, r ** g - 1.0, 0.0)
                xg = x ** -g
                return np.where(left, xg * (np.minimum(w, x) ** g - 1.0), 1.0 - xg)
            a = -g
            if x > 0:
                return np.zeros_like(w)
            aw = np.maximum(-w, -x)
            if x < -1:
                return np.where(left, 1.0 - (-x / aw) ** a, 0.0)
            xa = (-x) ** a
            return np.where(left, xa * (1.0 - aw ** -a), xa - 1.0)

    def _slope(self, w):
        g, x = self.gamma, self.x
        left = w <= x
        with np.errstate(all="ignore"):
            if g == 0:
                return np.where(left, np.exp(np.minimum(w - x, 0.0)), 0.0)
            if g > 0:
                if x <= 0:
                    return np.zeros_like(w)
                wm = np.minimum(w, x)
                return np.where(left, g * wm ** (g - 1) * x ** -g, 0.0)
            a = -g
            if x > 0:
                return np.zeros_like(w)
            aw = np.maximum(-w, -x)
            return np.where(left, -a * (-x) ** a * aw ** (-a - 1), 0.0)


def _phi_and_slope(phi, w):
    if hasattr(phi, "derivative"):
        return phi(w), phi.derivative(w)
    w = float(w)
    scale = 1.0 if w == 0 else min(1.0, 0.5 * abs(w))
    return float(phi(w)), differentiate(phi, w, scale)


def apply_stein_operator(gamma: float, phi, w: float) -> float:
    """Value of the Stein operator for the free law with parameter ``gamma``."""
    _check_half_line(gamma, w)
    p, dp = _phi_and_slope(phi, w)
    if gamma == 0:
        return dp - p
    if gamma > 0:
        return w * dp / gamma - p
    return -w * dp / gamma + p


@dataclass(frozen=True)
class DensityProfile:
    """A density ``u`` on ``(A, B)`` with its log-derivative ``rho`` and the
    right limit ``edge_density = u(A+)``."""

    u: Callable
    rho: Callable
    A: float
    B: float
    edge_density: float
    n: int

    def contains(self, w) -> bool:
        w = np.asarray(w, dtype=float)
        return bool(np.all((w > self.A) & (w < self.B)))


def _check_open(profile, w):
    if not profile.contains(w):
        raise DomainError(f"domain error: point outside ({profile.A}, {profile.B})")


def apply_density_operator(gamma: float, profile: DensityProfile, phi, w: float) -> float:
    """Density-adapted Stein operator built from ``rho = (log u)'``."""
    _check_open(profile, w)
    if hasattr(phi, "derivative"):
        wa = np.asarray(w, dtype=float)
        p, dp = phi(wa), phi.derivative(wa)
    else:
        wa = np.float64(w)
        p, dp = _phi_and_slope(phi, w)
    rho = np.asarray(profile.rho(wa), dtype=float)
    if gamma == 0:
        return _finalize(dp + p * rho, w)
    val = (wa * dp + p * (1.0 + wa * rho)) / gamma
    return _finalize(val if gamma > 0 else -val, w)


def _gamma_values(gamma, rho, t):
    if gamma == 0:
        return 1.0 + rho(t)
    return 1.0 + (1.0 + t * rho(t)) / gamma


def gamma_functional(gamma: float, profile: DensityProfile, x):
    """``1 + rho(x)`` for gamma = 0, ``1 + (1 + x rho(x)) / gamma`` otherwise."""
    _check_open(profile, x)
    return _finalize(_gamma_values(gamma, profile.rho, np.asarray(x, dtype=float)), x)


def _shrink(A):
    a = abs(A)
    return min(a, 1.0 / a)


def remainder_term(gamma: float, A: float) -> float:
    """Edge coefficient ``r_A``; multiplied by ``u(A+)`` it is the boundary term."""
    if gamma == 0:
        return -math.expm1(-abs(A))
    if gamma > 0 and not A > 0:
        raise DomainError("domain error: gamma > 0 needs A > 0")
    if gamma < 0 and not A < 0:
        raise DomainError("domain error: gamma < 0 needs A < 0")
    return (A / gamma) * -math.expm1(abs(gamma) * math.log(_shrink(A)))


def eta_boundary_bound(gamma: float, profile: DensityProfile) -> float:
    """Uniform-in-x bound on ``|eta_x|`` (no ``1/gamma`` factor)."""
    if profile.edge_density == 0:
        return 0.0
    A = profile.A
    if gamma == 0:
        return -math.expm1(-abs(A)) * profile.edge_density
    return abs(A) * -math.expm1(abs(gamma) * math.log(_shrink(A))) * profile.edge_density


def _edge_step(profile, x=None):
    width = profile.B - profile.A if math.isfinite(profile.B) else 1.0
    h = min(1e-2 * max(1.0, abs(profile.A)), 0.25 * width)
    if profile.A > 0:
        h = min(h, 0.25 * profile.A)
    if x is not None and x > profile.A:
        h = min(h, 0.25 * (x - profile.A))
    return h


def eta_boundary_numeric(gamma: float, profile: DensityProfile, x: float) -> float:
    """``lim_{t -> A+} phi_x(t) u(t)`` (gamma = 0) or ``t phi_x(t) u(t)``."""
    phi = SteinSolution(gamma, x)
    if gamma == 0:
        def f(t):
            return phi(t) * float(profile.u(np.float64(t)))
    else:
        def f(t):
            return t * phi(t) * float(profile.u(np.float64(t)))
    return one_sided_limit(f, profile.A, "above", h0=_edge_step(profile, x))


@dataclass
class BoundReport:
    n: int
    gamma: float
    integral_term: float
    boundary_term: float
    total: float
    eta_bound: float
    measured_dk: Optional[float] = None
    reference_rate: float = field(init=False)

    def __post_init__(self):
        self.reference_rate = 1.0 / self.n

    JSON_KEYS = ("n", "gamma", "integral_term", "boundary_term", "total",
                 "measured_dk", "reference_rate")

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in self.JSON_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def stein_bound(gamma: float, profile: DensityProfile, cdf=None,
                tol: Tolerance | None = None, validate: bool = True) -> BoundReport:
    """Upper bound on the Kolmogorov distance between the law with density
    ``profile.u`` and the free extreme value law with parameter ``gamma``.

    With ``cdf`` given, the measured distance is attached to the report.
    """
    if validate:
        report = validate_density_profile(gamma, profile)
        if not report.ok:
            raise HypothesisViolation(report.summary(), report.failures)
    tol = tol or default_tolerance()
    rho, u = profile.rho, profile.u

    def integrand(t):
        with np.errstate(all="ignore"):
            return np.abs(_gamma_values(gamma, rho, t)) * u(t)

    integral = integrate(integrand, (profile.A, profile.B), tol)
    boundary = remainder_term(gamma, profile.A) * profile.edge_density
    if boundary < 0:
        raise HypothesisViolation(f"negative boundary term {boundary!r}", ("boundary",))
    measured = None
    if cdf is not None:
        from .metrics import kolmogorov_distance
        measured = kolmogorov_distance(cdf, free_law(gamma))
    return BoundReport(n=profile.n, gamma=gamma, integral_term=integral,
                       boundary_term=boundary, total=integral + boundary,
                       eta_bound=eta_boundary_bound(gamma, profile), measured_dk=measured)


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationReport:
    gamma: float
    n: int
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c.name for c in self.checks if not c.passed)

    def summary(self) -> str:
        bad = [f"{c.name}: {c.detail}" for c in self.checks if not c.passed]
        return "; ".join(bad) if bad else "all conditions hold"

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "n": self.n, "ok": self.ok,
                "conditions": [asdict(c) for c in self.checks]}


_LABELS = {GUMBEL: "G", FRECHET: "F", WEIBULL: "W"}
_BOUNDED_CAP = 1e8


def _interior_grid(A, B, size=257):
    s = np.linspace(0.0, 1.0, size)[1:-1]
    if math.isfinite(B):
        near = np.geomspace(1e-9, 1e-2, 12)
        s = np.unique(np.concatenate([s, near, 1.0 - near]))
        return A + (B - A) * s
    t = s / (1.0 - s)
    return A + np.unique(np.concatenate([t, np.geomspace(1e-9, 1e-2, 12), np.geomspace(1e2, 1e8, 7)]))


def _edge_sequence(f, point, side, span):
    """Samples of f approaching ``point`` (possibly infinite) from ``side``."""
    # reach far enough that slow power decay such as t**-0.1 registers
    if math.isinf(point):
        ts = np.sign(point) * np.logspace(1, 300, 30)
    else:
        sign = 1.0 if side == "above" else -1.0
        floor = 1e-13 * abs(point) if point != 0 else 1e-300
        ts = point + sign * np.geomspace(0.1 * span, min(floor, 1e-12 * span), 30)
    with np.errstate(all="ignore"):
        return ts, np.asarray(f(ts), dtype=float)


def _converges(vals):
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > _BOUNDED_CAP:
        return False
    d = np.abs(np.diff(vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    return bool(d[-1] <= 1e-9 * scale or d[-1] <= 0.5 * max(d[0], d[1]))


def _tends_to_zero(vals):
    a = np.abs(vals)
    if not np.all(np.isfinite(a)):
        return False
    peak = float(np.max(a))
    return bool(peak == 0.0 or (a[-1] <= 1e-4 * peak and np.all(np.diff(a[-4:]) <= 0)))


def _edge_limit(f, point, side, span):
    ts, vals = _edge_sequence(f, point, side, span)
    return vals, _converges(vals)


def _positive_up_to_underflow(vals):
    """u > 0 on the grid, except for a trailing run of zeros entered only after
    u has already decayed below 1e-100 of its peak (floating-point underflow)."""
    pos = vals > 0
    if np.all(pos):
        return True
    first_zero = int(np.argmin(pos))
    if first_zero == 0 or np.any(pos[first_zero:]):
        return False
    return bool(vals[first_zero - 1] <= 1e-100 * np.max(vals))


def validate_density_profile(gamma: float, profile: DensityProfile) -> ValidationReport:
    """Check the support, edge, differentiability and boundedness conditions
    the bound relies on, numerically and with evidence values."""
    label = _LABELS[regime_of(gamma)]
    A, B, u, rho = profile.A, profile.B, profile.u, profile.rho
    checks = []

    # support
    grid = None
    if gamma > 0:
        ok_edges = math.isfinite(A) and 0 < A < B
        need = "0 < A < B <= inf"
    elif gamma < 0:
        ok_edges = math.isfinite(A) and A < B <= 0
        need = "-inf < A < B <= 0"
    else:
        ok_edges = math.isfinite(A) and A < B
        need = "-inf < A < B <= inf"
    evidence = {"A": A, "B": B}
    if ok_edges:
        grid = _interior_grid(A, B)
        with np.errstate(all="ignore"):
            uvals = np.asarray(u(grid), dtype=float)
        positive = bool(np.all(np.isfinite(uvals)) and np.all(uvals >= 0) and _positive_up_to_underflow(uvals))
        evidence["min_u_on_grid"] = float(np.min(uvals))
        ok_edges = positive
        detail = "support is [A, B] with u > 0 inside" if positive else "u is not positive on (A, B)"
    else:
        detail = f"edges violate {need}"
    checks.append(ConditionCheck(f"{label}-Cond1", ok_edges, detail, evidence))
    if not ok_edges:
        return ValidationReport(gamma, profile.n, tuple(checks))

    span = (B - A) if math.isfinite(B) else 1.0

    # edge limits
    if gamma == 0:
        weighted = u
        what = "u"
    else:
        def weighted(t):
            return t * u(t)
        what = "t*u(t)"
    left_vals, left_ok = _edge_limit(weighted, A, "above", span)
    _, right_vals = _edge_sequence(weighted, B, "below", span)
    right_zero = _tends_to_zero(right_vals)
    edge_ok = left_ok and right_zero and profile.edge_density >= 0 and math.isfinite(profile.edge_density)
    if not left_ok:
        detail = f"{what} has no finite limit at A+"
    elif not right_zero:
        detail = f"{what} does not vanish at B- (last sample {right_vals[-1]:.3g})"
    else:
        detail = f"finite {what} at A+, vanishing at B-"
    checks.append(ConditionCheck(f"{label}-Cond1-1", edge_ok, detail, {
        "left_limit_estimate": float(left_vals[-1]), "right_last_sample": float(right_vals[-1]),
        "edge_density": profile.edge_density}))

    # differentiability: finite differences of u agree with u * rho
    probe = grid[np.linspace(len(grid) // 8, 7 * len(grid) // 8, 9).astype(int)]
    worst = 0.0
    diff_ok = True
    for t in probe:
        t = float(t)
        scale = 0.5 * min(t - A, (B - t) if math.isfinite(B) else 1.0, 1.0)
        if gamma != 0:
            scale = min(scale, 0.5 * abs(t))
        try:
            du = differentiate(lambda s: float(u(np.float64(s))), t, scale)
        except DomainError:
            diff_ok = False
            break
        expected = float(u(np.float64(t))) * float(rho(np.float64(t)))
        worst = max(worst, abs(du - expected) / max(abs(expected), abs(float(u(np.float64(t)))), 1e-300))
    diff_ok = diff_ok and worst <= 1e-5
    checks.append(ConditionCheck(
        f"{label}-Cond2", diff_ok,
        "u is differentiable with u' = u rho" if diff_ok else "finite differences of u disagree with u*rho",
        {"max_relative_mismatch": worst}))

    # boundedness of rho (gamma = 0) or t*rho (gamma != 0)
    if gamma == 0:
        target, tname = rho, "rho"
    else:
        def target(t):
            return t * rho(t)
        tname = "t*rho(t)"
    with np.errstate(all="ignore"):
        gvals = np.asarray(target(grid), dtype=float)
    _, lo_ok = _edge_limit(target, A, "above", span)
    _, hi_ok = _edge_limit(target, B, "below", span)
    finite = bool(np.all(np.isfinite(gvals)))
    sup = float(np.max(np.abs(gvals))) if finite else math.inf
    bounded = finite and sup <= _BOUNDED_CAP and lo_ok and hi_ok
    name = f"{label}-Cond3" if gamma == 0 else f"{label}-Cond4"
    checks.append(ConditionCheck(
        name, bounded, f"{tname} bounded and continuous" if bounded else f"{tname} unbounded",
        {"grid_sup": sup}))
    return ValidationReport(gamma, profile.n, tuple(checks))


# ------------------------------------------------------- factorized profiles

def _base(gamma):
    if gamma == 0:
        return lambda x: np.exp(-x)
    if gamma > 0:
        return lambda x: x ** (-gamma - 1)
    return lambda x: np.abs(x) ** (-gamma - 1)


def profile_decomposition_bound(gamma: float, C: Callable, profile: DensityProfile) -> float:
    """Bound for densities of the form ``u = C * base``.

    ``base`` is ``exp(-x)``, ``x**(-gamma-1)`` or ``|x|**(-gamma-1)``. Returns
    ``sup|C'/C|`` (gamma = 0) or ``sup|x C'/C| / |gamma|`` plus the boundary
    summand written through ``C(A+)``. Dominates :func:`stein_bound` because
    ``u`` integrates to 1.
    """
    A, B = profile.A, profile.B
    grid = _interior_grid(A, B, size=129)
    base = _base(gamma)
    with np.errstate(all="ignore"):
        uv = np.asarray(profile.u(grid), dtype=float)
        cv = np.asarray(C(grid), dtype=float) * base(grid)
    mismatch = np.abs(uv - cv) / np.maximum(np.abs(uv), 1e-300)
    if not np.all(mismatch <= 1e-10):
        raise ProfileFactorizationError("profile does not factor as claimed")

    def log_c(s):
        return math.log(float(C(np.float64(s))))

    def ratio(t):
        scale = 0.5 * min(t - A, (B - t) if math.isfinite(B) else 1.0, 1.0)
        if gamma != 0:
            scale = min(scale, 0.5 * abs(t))
        d = differentiate(log_c, t, scale)
        return abs(d) if gamma == 0 else abs(t * d)

    # stay 1e-6 away from the edges: closer in, the difference quotients of
    # log C drown in rounding while the ratio itself moves by ~1e-6 at most
    gap_lo = 1e-6 * max(1.0, abs(A))
    gap_hi = 1e-6 * max(1.0, abs(B)) if math.isfinite(B) else 0.0
    pts = [float(t) for t in grid if t - A >= gap_lo and (not math.isfinite(B) or B - t >= gap_hi)]
    pts += [A + gap_lo] + ([B - gap_hi] if math.isfinite(B) else [])
    sup = max(ratio(t) for t in pts)
    c_edge = one_sided_limit(lambda t: float(C(np.float64(t))), A, "above", h0=_edge_step(profile))
    m = -math.expm1(-abs(A)) if gamma == 0 else -math.expm1(abs(gamma) * math.log(_shrink(A)))
    if gamma == 0:
        return sup + math.exp(-A) * m * c_edge
    return sup / abs(gamma) + abs(A) ** -gamma * m * c_edge / abs(gamma)
