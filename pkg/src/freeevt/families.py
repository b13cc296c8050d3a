"""Renormalized free max powers of the classical extreme value laws, in
closed form, plus a generic builder for user-supplied sample laws.

For the classical sample ``Phi_gamma`` and its norming sequence, the
renormalized n-fold free max power has cdf ``max{n exp(-y(t)/n) - (n-1), 0}``
with ``y(t) = exp(-t)``, ``t**-gamma`` or ``|t|**-gamma``; it starts at the
edge ``A_n`` where ``y(A_n) = -n log(1 - 1/n)``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import Cdf, ExtremeValueLaw, classical_law, CLASSICAL
from .errors import InvalidPower, NoDensity
from .maxconv import (NormingSequence, free_max_power, norming_constants, renormalize,
                      support_left_edge)
from .numerics import differentiate, one_sided_limit
from .stein import DensityProfile, stein_bound


@dataclass(frozen=True)
class WorkedFamily:
    gamma: float
    n: int
    cdf: Cdf
    profile: DensityProfile
    norming: NormingSequence
    # C with u = C * base on (A, B); None when no factorization is known
    factor: Optional[Callable] = None

    def bound(self, measure: bool = False, **kw):
        return stein_bound(self.gamma, self.profile, cdf=self.cdf if measure else None, **kw)


def edge_level(n: int) -> float:
    """``-n log(1 - 1/n) - 1``, computed without cancellation for large n."""
    if n >= 20:
        # sum_{k>=2} n**(1-k) / k
        x = 1.0 / n
        total, term, k = 0.0, x, 2
        while True:
            add = term / k
            total += add
            if add < 1e-18 * total:
                return total
            term *= x
            k += 1
    return -n * math.log1p(-1.0 / n) - 1.0


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidPower(f"worked family requires n >= 2, got {n!r}")
    return int(n)


def _sf_from_level(n, y):
    # 1 - F = n (1 - exp(-y/n)), capped at 1
    return np.minimum(-n * np.expm1(-y / n), 1.0)


@functools.lru_cache(maxsize=256)
def gumbel_family(n: int) -> WorkedFamily:
    n = _check_n(n)
    excess = edge_level(n)
    A = -math.log1p(excess)
    ell = -math.log1p(-1.0 / n)

    def y(t):
        return np.exp(-t)

    def sf(t):
        return np.where(t > A, _sf_from_level(n, y(t)), 1.0)

    def u(t):
        with np.errstate(all="ignore"):
            return np.where(t > A, np.exp(-t - np.exp(-t) / n), 0.0)

    def rho(t):
        return -1.0 + np.exp(-t) / n

    def factor(t):
        return np.exp(-np.exp(-t) / n)

    def qf(p):
        return -np.log(-n * np.log1p(-(1.0 - p) / n))

    cdf = Cdf(eval=lambda t: 1.0 - sf(t), support_lo=A, density=u, log_density_derivative=rho,
              breakpoints=(A,), sf=sf, quantile_fn=qf, name=f"gumbel_family_{n}")
    profile = DensityProfile(u=u, rho=rho, A=A, B=math.inf, edge_density=(n - 1) * ell, n=n)
    return WorkedFamily(0.0, n, cdf, profile, NormingSequence(1.0, math.log(n), n), factor)


@functools.lru_cache(maxsize=256)
def frechet_family(gamma: float, n: int) -> WorkedFamily:
    if not gamma > 0:
        raise ValueError(f"frechet_family needs gamma > 0, got {gamma}")
    n = _check_n(n)
    g = float(gamma)
    excess = edge_level(n)
    A = math.exp(-math.log1p(excess) / g)
    ell = -math.log1p(-1.0 / n)

    def y(t):
        return np.where(t > 0, t, 1.0) ** -g

    def sf(t):
        return np.where(t > A, _sf_from_level(n, y(t)), 1.0)

    def u(t):
        with np.errstate(all="ignore"):
            tp = np.where(t > A, t, 1.0)
            return np.where(t > A, g * tp ** (-g - 1) * np.exp(-tp ** -g / n), 0.0)

    def rho(t):
        return -(g + 1) / t + (g / n) * t ** (-g - 1)

    def factor(t):
        return g * np.exp(-t ** -g / n)

    def qf(p):
        return (-n * np.log1p(-(1.0 - p) / n)) ** (-1.0 / g)

    cdf = Cdf(eval=lambda t: 1.0 - sf(t), support_lo=A, density=u, log_density_derivative=rho,
              breakpoints=(A,), sf=sf, quantile_fn=qf, name=f"frechet_family_{g:g}_{n}")
    profile = DensityProfile(u=u, rho=rho, A=A, B=math.inf,
                             edge_density=g * (n - 1) * ell / A, n=n)
    return WorkedFamily(g, n, cdf, profile, NormingSequence(float(n) ** (1.0 / g), 0.0, n), factor)


@functools.lru_cache(maxsize=256)
def weibull_family(gamma: float, n: int) -> WorkedFamily:
    if not gamma < 0:
        raise ValueError(f"weibull_family needs gamma < 0, got {gamma}")
    n = _check_n(n)
    g = float(gamma)
    alpha = -g
    excess = edge_level(n)
    A = -math.exp(math.log1p(excess) / alpha)
    ell = -math.log1p(-1.0 / n)

    def y(t):
        return np.where(t < 0, -t, 1.0) ** alpha

    def sf(t):
        return np.where(t >= 0, 0.0, np.where(t > A, _sf_from_level(n, y(t)), 1.0))

    def u(t):
        with np.errstate(all="ignore"):
            inside = (t > A) & (t < 0)
            at = np.where(inside, -t, 1.0)
            return np.where(inside, alpha * at ** (alpha - 1) * np.exp(-at ** alpha / n), 0.0)

    def rho(t):
        return -(g + 1) / t - (g / n) * np.abs(t) ** (-g - 1)

    def factor(t):
        return alpha * np.exp(-np.abs(t) ** alpha / n)

    def qf(p):
        return -((-n * np.log1p(-(1.0 - p) / n)) ** (1.0 / alpha))

    cdf = Cdf(eval=lambda t: 1.0 - sf(t), support_lo=A, support_hi=0.0, density=u,
              log_density_derivative=rho, breakpoints=(A, 0.0), sf=sf, quantile_fn=qf,
              name=f"weibull_family_{g:g}_{n}")
    profile = DensityProfile(u=u, rho=rho, A=A, B=0.0,
                             edge_density=alpha * (n - 1) * ell / abs(A), n=n)
    return WorkedFamily(g, n, cdf, profile, NormingSequence(float(n) ** (1.0 / g), 0.0, n), factor)


def worked_family(gamma: float, n: int) -> WorkedFamily:
    """Closed-form family for the classical sample law with parameter ``gamma``."""
    if gamma == 0:
        return gumbel_family(n)
    if gamma > 0:
        return frechet_family(float(gamma), n)
    return weibull_family(float(gamma), n)


_EDGE_GUARD = 1e-12


def generic_family(U: Cdf, gamma: float, norming: NormingSequence) -> WorkedFamily:
    """Renormalized free max power of an arbitrary sample law ``U``.

    ``norming.n`` is the power. The density is ``n a U'(a x + b)`` above the
    edge and its log-derivative ``a rho_U(a x + b)``; both fall back to
    numerical differentiation when ``U`` does not supply them.
    """
    n = _check_n(norming.n)
    a, b = float(norming.a), float(norming.b)
    power = free_max_power(U, n)
    cdf = renormalize(power, norming)
    A = (support_left_edge(U, n) - b) / a
    B = (U.support_hi - b) / a

    if U.density is not None:
        dens_u = U.density
    else:
        def dens_u(s):
            s = np.atleast_1d(np.asarray(s, dtype=float))
            out = [differentiate(lambda v: float(U(v)), float(v), 1e-3 * max(1.0, abs(v)))
                   for v in s]
            return np.asarray(out)
        try:
            dens_u(np.array([U.support_lo + 1.0 if math.isfinite(U.support_lo) else 0.0]))
        except Exception as exc:
            raise NoDensity(f"no density: {exc}") from None

    def u(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            val = np.where((t > A) & (t < B), n * a * np.asarray(dens_u(a * t + b), dtype=float), 0.0)
        return float(val) if val.ndim == 0 else val

    if U.log_density_derivative is not None:
        rho_u = U.log_density_derivative

        def rho(t):
            return a * rho_u(a * np.asarray(t, dtype=float) + b)
    else:
        def rho(t):
            t = np.asarray(t, dtype=float)
            out = []
            for v in np.atleast_1d(t):
                v = float(v)
                room = min(v - A - _EDGE_GUARD, (B - v) if math.isfinite(B) else 1.0, 1.0)
                out.append(differentiate(lambda s: math.log(float(u(s))), v, 0.5 * room))
            arr = np.asarray(out)
            return float(arr[0]) if t.ndim == 0 else arr.reshape(t.shape)

    width = (B - A) if math.isfinite(B) else 1.0
    edge_density = one_sided_limit(lambda t: float(u(t)), A, "above",
                                   h0=min(1e-2 * max(1.0, abs(A)), 0.25 * width))
    profile = DensityProfile(u=u, rho=rho, A=A, B=B, edge_density=max(edge_density, 0.0), n=n)
    return WorkedFamily(float(gamma), n, cdf, profile, norming, None)


def classical_sample_family(gamma: float, n: int) -> WorkedFamily:
    """Same object as :func:`worked_family`, assembled through the generic path."""
    law = ExtremeValueLaw.from_gamma(gamma, CLASSICAL)
    return generic_family(classical_law(gamma), gamma, norming_constants(law, n))
