"""Distribution functions and the classical / free extreme value laws.

A :class:`Cdf` bundles an evaluable distribution function with whatever
closed-form extras are known about it (survival function, density,
log-density derivative, quantile). All callables are numpy-vectorized.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidLaw, InvalidProbability, ParseError

CLASSICAL, FREE = "classical", "free"
GUMBEL, FRECHET, WEIBULL = "gumbel", "frechet", "weibull"
MIN_ABS_GAMMA = 1e-6


def _scalar_or_array(out, x):
    out = np.asarray(out, dtype=float)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Cdf:
    """Distribution function with optional closed-form companions.

    ``sf`` is the survival function ``1 - F``; when given it is the primary
    representation and lets the max-convolution algebra work on small
    complements without cancellation.
    """

    eval: Callable
    support_lo: float = -math.inf
    support_hi: float = math.inf
    density: Optional[Callable] = None
    log_density_derivative: Optional[Callable] = None
    breakpoints: tuple = ()
    sf: Optional[Callable] = None
    quantile_fn: Optional[Callable] = None
    name: str = ""

    def __call__(self, x):
        return eval_cdf(self, x)

    def survival(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            if self.sf is not None:
                out = self.sf(x_arr)
            else:
                out = 1.0 - np.asarray(self.eval(x_arr), dtype=float)
        return _scalar_or_array(np.clip(out, 0.0, 1.0), x)


@dataclass(frozen=True)
class ExtremeValueLaw:
    calculus: str
    regime: str
    gamma: float

    def __post_init__(self):
        if self.calculus not in (CLASSICAL, FREE):
            raise InvalidLaw(f"invalid law: unknown calculus {self.calculus!r}")
        g = self.gamma
        if not math.isfinite(g):
            raise InvalidLaw("invalid law: gamma must be finite")
        if self.regime == GUMBEL:
            ok = g == 0
        elif self.regime == FRECHET:
            ok = g >= MIN_ABS_GAMMA
        elif self.regime == WEIBULL:
            ok = g <= -MIN_ABS_GAMMA
        else:
            raise InvalidLaw(f"invalid law: unknown regime {self.regime!r}")
        if not ok:
            raise InvalidLaw(f"invalid law: gamma={g} inconsistent with regime {self.regime}")

    @classmethod
    def from_gamma(cls, gamma: float, calculus: str = FREE) -> "ExtremeValueLaw":
        regime = GUMBEL if gamma == 0 else FRECHET if gamma > 0 else WEIBULL
        return cls(calculus, regime, float(gamma))


def regime_of(gamma: float) -> str:
    return GUMBEL if gamma == 0 else FRECHET if gamma > 0 else WEIBULL


# closed forms; x is always a float ndarray here

def _classical(gamma):
    if gamma == 0:
        def sf(x):
            return -np.expm1(-np.exp(-x))

        def dens(x):
            return np.exp(-x - np.exp(-x))

        def rho(x):
            return -1.0 + np.exp(-x)

        def q(p):
            return -np.log(-np.log(p))

        return sf, dens, rho, q, -math.inf, math.inf, ()
    if gamma > 0:
        def sf(x):
            xp = np.where(x > 0, x, 1.0)
            return np.where(x > 0, -np.expm1(-xp ** -gamma), 1.0)

        def dens(x):
            xp = np.where(x > 0, x, 1.0)
            return np.where(x > 0, gamma * xp ** (-gamma - 1) * np.exp(-xp ** -gamma), 0.0)

        def rho(x):
            return -(gamma + 1) / x + gamma * x ** (-gamma - 1)

        def q(p):
            return (-np.log(p)) ** (-1.0 / gamma)

        return sf, dens, rho, q, 0.0, math.inf, (0.0,)
    alpha = -gamma

    def sf(x):
        ax = np.where(x < 0, -x, 1.0)
        return np.where(x < 0, -np.expm1(-ax ** alpha), 0.0)

    def dens(x):
        ax = np.where(x < 0, -x, 1.0)
        return np.where(x < 0, alpha * ax ** (alpha - 1) * np.exp(-ax ** alpha), 0.0)

    def rho(x):
        return (alpha - 1) / x + alpha * np.abs(x) ** (alpha - 1)

    def q(p):
        return -((-np.log(p)) ** (1.0 / alpha))

    return sf, dens, rho, q, -math.inf, 0.0, (0.0,)


def _free(gamma):
    if gamma == 0:
        def sf(x):
            return np.where(x >= 0, np.exp(-np.maximum(x, 0.0)), 1.0)

        def dens(x):
            return np.where(x >= 0, np.exp(-np.maximum(x, 0.0)), 0.0)

        def rho(x):
            return np.full_like(x, -1.0)

        def q(p):
            return -np.log1p(-p)

        return sf, dens, rho, q, 0.0, math.inf, (0.0,)
    if gamma > 0:
        def sf(x):
            return np.where(x >= 1, np.maximum(x, 1.0) ** -gamma, 1.0)

        def dens(x):
            return np.where(x >= 1, gamma * np.maximum(x, 1.0) ** (-gamma - 1), 0.0)

        def rho(x):
            return -(gamma + 1) / x

        def q(p):
            return (1.0 - p) ** (-1.0 / gamma)

        return sf, dens, rho, q, 1.0, math.inf, (1.0,)
    alpha = -gamma

    def sf(x):
        ax = np.clip(-x, 0.0, 1.0)
        return np.where(x < -1, 1.0, np.where(x <= 0, ax ** alpha, 0.0))

    def dens(x):
        ax = np.where((x >= -1) & (x < 0), -x, 1.0)
        return np.where((x >= -1) & (x < 0), alpha * ax ** (alpha - 1), 0.0)

    def rho(x):
        return (alpha - 1) / x

    def q(p):
        return -((1.0 - p) ** (1.0 / alpha))

    return sf, dens, rho, q, -1.0, 0.0, (-1.0, 0.0)


def make_law(law: ExtremeValueLaw) -> Cdf:
    """Closed-form classical or free extreme value distribution."""
    build = _classical if law.calculus == CLASSICAL else _free
    sf, dens, rho, q, lo, hi, bps = build(law.gamma)
    tag = "Phi" if law.calculus == CLASSICAL else "Psi"
    return Cdf(
        eval=lambda x: 1.0 - sf(x),
        support_lo=lo, support_hi=hi,
        density=dens, log_density_derivative=rho,
        breakpoints=bps, sf=sf, quantile_fn=q,
        name=f"{tag}_{law.gamma:g}",
    )


def classical_law(gamma: float) -> Cdf:
    return make_law(ExtremeValueLaw.from_gamma(gamma, CLASSICAL))


def free_law(gamma: float) -> Cdf:
    return make_law(ExtremeValueLaw.from_gamma(gamma, FREE))


def eval_cdf(F: Cdf, x):
    """Evaluate ``F`` at scalar or array ``x``, clamped to [0, 1]."""
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        if F.sf is not None:
            out = 1.0 - np.asarray(F.sf(x_arr), dtype=float)
        else:
            out = np.asarray(F.eval(x_arr), dtype=float)
    return _scalar_or_array(np.clip(out, 0.0, 1.0), x)


def _bracket_level(F: Cdf, p: float, strict: bool):
    """Finite (lo, hi) with F(lo) below the level and F(hi) at or above it."""
    def above(x):
        v = eval_cdf(F, x)
        return v > p if strict else v >= p

    lo = F.support_lo if math.isfinite(F.support_lo) else None
    hi = F.support_hi if math.isfinite(F.support_hi) else None
    if lo is None:
        lo = (hi - 1.0) if hi is not None else -1.0
        step = 1.0
        while above(lo):
            lo -= step
            step *= 2.0
            if not math.isfinite(lo):
                raise InvalidProbability(f"level {p} is never undershot")
    if hi is None or not above(hi):
        hi = max(lo, 0.0) + 1.0 if hi is None else hi
        step = max(1.0, abs(hi))
        while not above(hi):
            hi += step
            step *= 2.0
            if not math.isfinite(hi):
                raise InvalidProbability(f"level {p} is never reached")
    if above(lo):
        return lo, lo
    return lo, hi


def level_crossing(F: Cdf, p: float, strict: bool = False) -> float:
    """``inf{x : F(x) >= p}`` (or ``> p`` when ``strict``) by bisection on the
    monotone predicate, so flat stretches resolve to the correct end."""
    lo, hi = _bracket_level(F, p, strict)
    if lo == hi:
        return lo
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        v = eval_cdf(F, mid)
        if (v > p) if strict else (v >= p):
            hi = mid
        else:
            lo = mid
    return hi


def quantile(F: Cdf, p: float) -> float:
    """Generalized inverse ``inf{x : F(x) >= p}`` for ``p`` in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise InvalidProbability(f"invalid probability {p!r}")
    if F.quantile_fn is not None:
        return float(F.quantile_fn(np.float64(p)))
    return level_crossing(F, p)


def point_mass(c: float) -> Cdf:
    """Distribution function of the constant ``c``: ``1_[c, inf)``."""
    c = float(c)
    return Cdf(
        eval=lambda x: np.where(x >= c, 1.0, 0.0),
        support_lo=c, support_hi=c, breakpoints=(c,),
        sf=lambda x: np.where(x >= c, 0.0, 1.0),
        quantile_fn=lambda p: c + 0.0 * p,
        name=f"delta_{c:g}",
    )


@dataclass(frozen=True)
class TabulatedCdf:
    """Piecewise-linear distribution function through the knots ``(x, F)``.

    Below the first knot the value is 0 and above the last it is 1, so a first
    value above 0 or a last value below 1 is an atom at that knot.
    """

    x: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if x.ndim != 1 or x.shape != F.shape or x.size < 2:
            raise ParseError("parse error: x and F must be equal-length arrays of length >= 2")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(F))):
            raise ParseError("parse error: non-finite knot")
        if np.any(np.diff(x) <= 0):
            raise ParseError("parse error: x must be strictly increasing")
        if np.any(np.diff(F) < 0) or F[0] < 0 or F[-1] > 1:
            raise ParseError("parse error: F must be nondecreasing within [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "F", F)

    def to_cdf(self) -> Cdf:
        xs, Fs = self.x, self.F
        slopes = np.diff(Fs) / np.diff(xs)

        def ev(t):
            return np.where(t < xs[0], 0.0, np.where(t >= xs[-1], 1.0, np.interp(t, xs, Fs)))

        def dens(t):
            i = np.clip(np.searchsorted(xs, t, side="right") - 1, 0, len(slopes) - 1)
            return np.where((t >= xs[0]) & (t < xs[-1]), slopes[i], 0.0)

        def rho(t):
            return np.zeros_like(np.asarray(t, dtype=float))

        def q(p):
            i = int(np.searchsorted(Fs, p, side="left"))
            if i >= len(Fs):
                return float(xs[-1])
            if i == 0 or Fs[i] == p:
                return float(xs[i])
            x0, x1, f0, f1 = xs[i - 1], xs[i], Fs[i - 1], Fs[i]
            return float(x0 + (p - f0) * (x1 - x0) / (f1 - f0))

        return Cdf(eval=ev, support_lo=float(xs[0]), support_hi=float(xs[-1]),
                   density=dens, log_density_derivative=rho,
                   breakpoints=tuple(float(v) for v in xs), quantile_fn=q, name="tabulated")

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "F": self.F.tolist()}

    @classmethod
    def from_dict(cls, obj) -> "TabulatedCdf":
        if not isinstance(obj, dict) or "x" not in obj or "F" not in obj:
            raise ParseError('parse error: expected an object with keys "x" and "F"')
        try:
            return cls(np.asarray(obj["x"], dtype=float), np.asarray(obj["F"], dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"parse error: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "TabulatedCdf":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"parse error: {exc}") from None
        return cls.from_dict(obj)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def tabulate(F: Cdf, x) -> TabulatedCdf:
    """Sample ``F`` on the grid ``x`` (export for the JSON schema)."""
    x = np.asarray(x, dtype=float)
    return TabulatedCdf(x, np.maximum.accumulate(np.asarray(eval_cdf(F, x))))


def uniform(lo: float = 0.0, hi: float = 1.0) -> Cdf:
    return TabulatedCdf(np.array([lo, hi]), np.array([0.0, 1.0])).to_cdf()
