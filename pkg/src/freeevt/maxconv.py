"""Free max-convolution, classical max powers, renormalization and the left
support edge of a free max power.

Results are built symbolically on top of their inputs. Survival functions are
propagated (``1 - F^n = min(n (1 - F), 1)``), which keeps the algebra exact up
to a couple of ulps and avoids cancellation in the upper tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral

import numpy as np

from .distributions import (CLASSICAL, Cdf, ExtremeValueLaw, eval_cdf, level_crossing,
                            quantile)
from .errors import DegeneratePower, InvalidPower, NoNormingKnown


@dataclass(frozen=True)
class NormingSequence:
    a: float
    b: float
    n: int = 1

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("norming scale a must be positive")


def _sf(F: Cdf):
    if F.sf is not None:
        return F.sf
    return lambda x: 1.0 - np.asarray(F.eval(x), dtype=float)


def _merge_breakpoints(*groups):
    out = sorted({float(b) for g in groups for b in g if math.isfinite(b)})
    return tuple(out)


def free_max_conv_pair(F: Cdf, G: Cdf) -> Cdf:
    """``x -> max{F(x) + G(x) - 1, 0}``."""
    sf_f, sf_g = _sf(F), _sf(G)

    def sf(x):
        return np.minimum(sf_f(x) + sf_g(x), 1.0)

    dens = None
    rho = None
    if F.density is not None and G.density is not None:
        def dens(x):
            return np.where(sf(x) < 1.0, F.density(x) + G.density(x), 0.0)

        if F.log_density_derivative is not None and G.log_density_derivative is not None:
            def rho(x):
                f, g = F.density(x), G.density(x)
                return (f * F.log_density_derivative(x) + g * G.log_density_derivative(x)) / (f + g)

    partial = Cdf(eval=lambda x: 1.0 - sf(x), sf=sf)
    lo = level_crossing(partial, 0.0, strict=True)
    hi = min(F.support_hi, G.support_hi)
    return Cdf(eval=lambda x: 1.0 - sf(x), support_lo=lo, support_hi=hi,
               density=dens, log_density_derivative=rho,
               breakpoints=_merge_breakpoints(F.breakpoints, G.breakpoints, [lo]),
               sf=sf, name=f"({F.name} maxconv {G.name})")


def _check_power(n):
    if isinstance(n, bool) or not isinstance(n, Integral) or n < 1:
        raise InvalidPower(f"invalid power n={n!r}; need an integer >= 1")
    return int(n)


def free_max_power(F: Cdf, n: int) -> Cdf:
    """n-fold free max-convolution power ``max{nF - (n-1), 0}``."""
    n = _check_power(n)
    if n == 1:
        return F
    sf_f = _sf(F)

    def sf(x):
        return np.minimum(n * sf_f(x), 1.0)

    edge = support_left_edge(F, n)
    dens = rho = None
    if F.density is not None:
        def dens(x):
            return np.where(x > edge, n * F.density(x), 0.0)
    if F.log_density_derivative is not None:
        def rho(x):
            return np.where(x > edge, F.log_density_derivative(x), np.nan)

    qf = None
    if F.quantile_fn is not None:
        def qf(p):
            return F.quantile_fn(1.0 - (1.0 - p) / n)

    return Cdf(eval=lambda x: 1.0 - sf(x), support_lo=edge, support_hi=F.support_hi,
               density=dens, log_density_derivative=rho,
               breakpoints=_merge_breakpoints(F.breakpoints, [edge]),
               sf=sf, quantile_fn=qf, name=f"{F.name}^[free {n}]")


def classical_max_power(F: Cdf, n: int) -> Cdf:
    """``x -> F(x)**n``, the law of the maximum of n independent copies."""
    n = _check_power(n)
    if n == 1:
        return F
    sf_f = _sf(F)

    def sf(x):
        return -np.expm1(n * np.log1p(-sf_f(x)))

    dens = rho = None
    if F.density is not None:
        def dens(x):
            return n * (1.0 - sf_f(x)) ** (n - 1) * F.density(x)
        if F.log_density_derivative is not None:
            def rho(x):
                return (n - 1) * F.density(x) / (1.0 - sf_f(x)) + F.log_density_derivative(x)

    qf = None
    if F.quantile_fn is not None:
        def qf(p):
            return F.quantile_fn(p ** (1.0 / n))

    return Cdf(eval=lambda x: 1.0 - sf(x), support_lo=F.support_lo, support_hi=F.support_hi,
               density=dens, log_density_derivative=rho, breakpoints=F.breakpoints,
               sf=sf, quantile_fn=qf, name=f"{F.name}^{n}")


def renormalize(F: Cdf, s: NormingSequence) -> Cdf:
    """``x -> F(a x + b)``."""
    a, b = float(s.a), float(s.b)
    sf_f = _sf(F)
    dens = rho = qf = None
    if F.density is not None:
        def dens(x):
            return a * F.density(a * x + b)
    if F.log_density_derivative is not None:
        def rho(x):
            return a * F.log_density_derivative(a * x + b)
    if F.quantile_fn is not None:
        def qf(p):
            return (F.quantile_fn(p) - b) / a
    return Cdf(eval=lambda x: 1.0 - sf_f(a * x + b),
               support_lo=(F.support_lo - b) / a, support_hi=(F.support_hi - b) / a,
               density=dens, log_density_derivative=rho,
               breakpoints=tuple((t - b) / a for t in F.breakpoints),
               sf=lambda x: sf_f(a * x + b), quantile_fn=qf,
               name=f"{F.name}({a:g}x{b:+g})")


def norming_constants(law: ExtremeValueLaw, n: int) -> NormingSequence:
    """Norming sequence under which the classical law's free max power
    converges to the free law with the same gamma: ``(1, log n)`` for Gumbel,
    ``(n**(1/gamma), 0)`` otherwise."""
    n = _check_power(n)
    if law.calculus != CLASSICAL:
        raise NoNormingKnown("no norming known for a non-classical sample law")
    if law.gamma == 0:
        return NormingSequence(1.0, math.log(n), n)
    return NormingSequence(float(n) ** (1.0 / law.gamma), 0.0, n)


_EDGE_DELTA = 1e-6


def support_left_edge(F: Cdf, n: int) -> float:
    """``inf{x : F(x) > 1 - 1/n}``, where the n-fold free max power starts."""
    n = _check_power(n)
    if n == 1:
        return F.support_lo
    p = 1.0 - 1.0 / n
    top = eval_cdf(F, F.support_hi) if math.isfinite(F.support_hi) else 1.0
    if math.isfinite(F.support_hi) and not top > p:
        raise DegeneratePower(f"degenerate power: F never exceeds 1 - 1/{n}")
    if F.quantile_fn is not None:
        x0 = quantile(F, p)
        step = 1e-12 * max(1.0, abs(x0))
        if eval_cdf(F, x0 + step) > p:
            return x0
        # flat stretch at level p: walk to its right end
        return level_crossing(F, p, strict=True)
    try:
        return level_crossing(F, p, strict=True)
    except Exception as exc:  # bracket search ran off to infinity
        raise DegeneratePower(f"degenerate power: {exc}") from None
