"""Deterministic numerical kernel: quadrature, root finding, differentiation
and one-sided limits.

Every routine is a pure function of its inputs. Integrands are called with
numpy arrays of abscissae and must broadcast; scalar-only callables are
wrapped transparently.
"""
from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, LimitNotDetected, NoSignChange, QuadratureError

TOL_ENV_VAR = "FREEEVT_TOL"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or not self.lo < self.hi:
            raise DomainError(f"invalid interval ({self.lo}, {self.hi})")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_refinements: int = 60

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or self.abs_tol + self.rel_tol <= 0:
            raise ValueError("tolerances must be nonnegative with a positive sum")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be positive")


def default_tolerance() -> Tolerance:
    """Default tolerance, optionally overridden by ``$FREEEVT_TOL`` (a float
    applied to both the absolute and the relative tolerance)."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw:
        try:
            value = float(raw)
        except ValueError:
            raise ValueError(f"{TOL_ENV_VAR} must be a float, got {raw!r}") from None
        return Tolerance(abs_tol=value, rel_tol=value)
    return Tolerance()


def _as_interval(iv) -> Interval:
    return iv if isinstance(iv, Interval) else Interval(float(iv[0]), float(iv[1]))


def vectorized(f: Callable) -> Callable:
    """Return a callable that accepts arrays, broadcasting scalar results."""

    def g(t):
        t = np.asarray(t, dtype=float)
        try:
            out = f(t)
        except (TypeError, ValueError):
            out = np.array([f(float(v)) for v in t.ravel()], dtype=float).reshape(t.shape)
        return np.broadcast_to(np.asarray(out, dtype=float), t.shape)

    return g


# Gauss-Kronrod 7/15 pair (nonnegative abscissae; the rule is symmetric).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[:-1], [0.0]])
_W_K = np.concatenate([_WGK[:-1], _WGK[:-1], [_WGK[-1]]])
# Gauss nodes are the odd-indexed Kronrod abscissae.
_W_G = np.zeros(15)
_W_G[[1, 3, 5]] = _WG[:3]
_W_G[[8, 10, 12]] = _WG[:3]
_W_G[14] = _WG[3]

_MAX_PANELS = 20000
_TAIL_POWER = 4


def _gk15(g, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    with np.errstate(all="ignore"):
        vals = g(mid + half * _NODES)
    if not np.all(np.isfinite(vals)):
        bad = (mid + half * _NODES)[~np.isfinite(vals)][0]
        raise DomainError(f"integrand is not finite at {bad!r}")
    kron = half * float(np.dot(_W_K, vals))
    gauss = half * float(np.dot(_W_G, vals))
    return kron, abs(kron - gauss)


def _mapped(f, iv: Interval):
    """Integrand on a finite parameter interval plus that interval."""
    if iv.finite:
        return f, iv.lo, iv.hi
    if math.isinf(iv.lo) and math.isinf(iv.hi):
        raise DomainError("at most one infinite endpoint per integration call")
    # t = a + s**k with s = (1-r)/r, so the infinite end sits at r=0 where
    # floating point resolves the tail; k > 1 flattens slow power tails
    k = _TAIL_POWER

    def jac(r):
        s = (1.0 - r) / r
        return s, k * s ** (k - 1) / (r * r)

    if math.isinf(iv.hi):
        a = iv.lo
        first = np.nextafter(a, math.inf)

        def g(r):
            s, d = jac(r)
            return f(np.maximum(a + s ** k, first)) * d
    else:
        b = iv.hi
        last = np.nextafter(b, -math.inf)

        def g(r):
            s, d = jac(r)
            return f(np.minimum(b - s ** k, last)) * d
    return g, 0.0, 1.0


def _smoothstep(g, lo, hi):
    """``t = lo + L (3u^2 - 2u^3)`` on ``u in (0, 1)``. The Jacobian vanishes
    at both ends, which softens integrable endpoint singularities
    (``t**-a`` becomes roughly ``u**(1-2a)``) and leaves smooth integrands smooth."""
    L = hi - lo
    inner_lo, inner_hi = np.nextafter(lo, hi), np.nextafter(hi, lo)

    def h(u):
        u = np.asarray(u, dtype=float)
        v = 1.0 - u
        # measure from the nearer end so tiny offsets survive rounding
        t = np.where(u < 0.5, lo + L * u * u * (3.0 - 2.0 * u), hi - L * v * v * (1.0 + 2.0 * u))
        return g(np.clip(t, inner_lo, inner_hi)) * (6.0 * L) * u * v

    return h, 0.0, 1.0


def _splittable(lo, mid, hi):
    # outermost nodes of both halves must stay strictly inside the panel
    q = 0.25 * (hi - lo) * _XGK[0]
    m1, m2 = 0.5 * (lo + mid), 0.5 * (mid + hi)
    return lo < m1 - q and m2 + q < hi and lo < mid < hi


def _adaptive(pieces, tol: Tolerance):
    heap = []
    frozen_val = frozen_err = 0.0
    for g, lo, hi in pieces:
        val, err = _gk15(g, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, val, 0, id(g), g))
    total = sum(item[3] for item in heap)
    total_err = sum(-item[0] for item in heap)
    panels = len(heap)
    while True:
        if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return total, total_err
        if not heap or panels > _MAX_PANELS or frozen_err > max(tol.abs_tol, tol.rel_tol * abs(total)):
            raise QuadratureError(
                f"quadrature failure: error estimate {total_err:.3e} after {panels} panels",
                partial=total, error=total_err)
        neg_err, lo, hi, val, depth, key, g = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if depth >= tol.max_refinements or not _splittable(lo, mid, hi):
            frozen_val += val
            frozen_err += -neg_err
            continue
        v1, e1 = _gk15(g, lo, mid)
        v2, e2 = _gk15(g, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1, depth + 1, key, g))
        heapq.heappush(heap, (-e2, mid, hi, v2, depth + 1, key, g))
        panels += 1
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err


def integrate(f: Callable, iv, tol: Tolerance | None = None,
              breakpoints: Sequence[float] = (), full_output: bool = False):
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``iv``.

    Panels never straddle a registered breakpoint; the real line is split at
    0 when no breakpoint is given. A semi-infinite range is mapped onto (0, 1)
    by ``t = a + ((1-r)/r)**4``, and every piece then goes through a smoothstep
    substitution that tames endpoint singularities.

    Raises ``QuadratureError`` (carrying the partial estimate) when the error
    target is not met and ``DomainError`` when ``f`` returns NaN or inf.
    """
    tol = tol or default_tolerance()
    iv = _as_interval(iv)
    g = vectorized(f)
    cuts = sorted({float(b) for b in breakpoints if iv.lo < b < iv.hi})
    if not iv.finite and not cuts and math.isinf(iv.lo) and math.isinf(iv.hi):
        cuts = [0.0]
    edges = [iv.lo, *cuts, iv.hi]
    pieces = [_smoothstep(*_mapped(g, Interval(a, b))) for a, b in zip(edges[:-1], edges[1:])]
    value, err = _adaptive(pieces, tol)
    return (value, err) if full_output else value


def find_root(g: Callable[[float], float], bracket, tol: Tolerance | None = None) -> float:
    """Root of ``g`` inside a finite sign-changing bracket (Brent's method)."""
    tol = tol or default_tolerance()
    iv = _as_interval(bracket)
    if not iv.finite:
        raise DomainError("find_root needs a finite bracket")
    glo, ghi = float(g(iv.lo)), float(g(iv.hi))
    if math.isnan(glo) or math.isnan(ghi):
        raise DomainError("function is NaN at a bracket endpoint")
    if glo == 0.0:
        return iv.lo
    if ghi == 0.0:
        return iv.hi
    if glo * ghi > 0:
        raise NoSignChange(f"no sign change on [{iv.lo}, {iv.hi}]: g = {glo:.3e}, {ghi:.3e}")
    xtol = tol.abs_tol if tol.abs_tol > 0 else 1e-300
    return float(brentq(g, iv.lo, iv.hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                        maxiter=max(100, 4 * tol.max_refinements)))


def _checked(f, t):
    v = float(f(t))
    if not math.isfinite(v):
        raise DomainError(f"function is not finite at {t!r}")
    return v


def differentiate(f: Callable[[float], float], x: float, scale: float = 1.0) -> float:
    """Central-difference derivative with Ridders' Richardson extrapolation.

    ``scale`` is the distance over which ``f`` may safely be sampled around
    ``x``; the initial step is a tenth of it.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    con, con2, safe, ntab = 1.4, 1.96, 2.0, 12
    h = 0.1 * scale
    a = np.zeros((ntab, ntab))
    a[0, 0] = (_checked(f, x + h) - _checked(f, x - h)) / (2.0 * h)
    best, err = a[0, 0], math.inf
    for i in range(1, ntab):
        h /= con
        a[0, i] = (_checked(f, x + h) - _checked(f, x - h)) / (2.0 * h)
        fac = con2
        for j in range(1, i + 1):
            a[j, i] = (a[j - 1, i] * fac - a[j - 1, i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j, i] - a[j - 1, i]), abs(a[j, i] - a[j - 1, i - 1]))
            if errt <= err:
                err, best = errt, a[j, i]
        if abs(a[i, i] - a[i - 1, i - 1]) >= safe * err:
            break
    return float(best)


_SIDES = {"above": 1.0, "from-above": 1.0, "+": 1.0, "below": -1.0, "from-below": -1.0, "-": -1.0}


def one_sided_limit(f: Callable[[float], float], a: float, side: str = "above",
                    h0: float | None = None, rtol: float = 1e-7) -> float:
    """Limit of ``f(t)`` as ``t -> a`` from one side.

    Evaluates ``f(a +/- h0 / 2**k)`` and Richardson-extrapolates to ``h = 0``,
    assuming an expansion in integer powers of ``h``. ``h0`` must keep the
    samples inside a single smooth piece of ``f``.
    """
    if side not in _SIDES:
        raise ValueError(f"side must be 'above' or 'below', got {side!r}")
    if not math.isfinite(a):
        raise DomainError("one_sided_limit needs a finite point")
    sign = _SIDES[side]
    h = h0 if h0 is not None else 1e-2 * max(1.0, abs(a))
    levels = 14
    table = np.zeros((levels, levels))
    best, err = math.nan, math.inf
    for k in range(levels):
        table[k, 0] = _checked(f, a + sign * h / 2.0**k)
        fac = 1.0
        for j in range(1, k + 1):
            fac *= 2.0
            table[k, j] = table[k, j - 1] + (table[k, j - 1] - table[k - 1, j - 1]) / (fac - 1.0)
        if k == 0:
            continue
        for j in range(1, k + 1):
            errt = max(abs(table[k, j] - table[k, j - 1]), abs(table[k, j] - table[k - 1, j - 1]))
            if errt < err:
                err, best = errt, table[k, j]
        if k >= 3 and abs(table[k, k] - table[k - 1, k - 1]) >= 2.0 * err and err <= rtol * max(1.0, abs(best)):
            break
    if not err <= rtol * max(1.0, abs(best)):
        raise LimitNotDetected(f"limit not detected at {a!r} from {side}: spread {err:.3e}")
    return float(best)
