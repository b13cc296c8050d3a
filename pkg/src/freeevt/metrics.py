"""Kolmogorov distance between distribution functions and convergence tables
pairing the measured distance with the Stein bound."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .distributions import Cdf, classical_law, eval_cdf, free_law, quantile
from .errors import FreeEVTError
from .maxconv import NormingSequence, renormalize
from .numerics import Tolerance, default_tolerance

log = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _seed_points(F: Cdf, seeds: int):
    pts = []
    if F.quantile_fn is not None:
        try:
            with np.errstate(all="ignore"):
                qs = np.asarray(F.quantile_fn(np.arange(1, seeds) / seeds), dtype=float)
            if qs.shape == (seeds - 1,):
                pts = [float(q) for q in qs if math.isfinite(q)]
        except (TypeError, ValueError):
            pts = []
    for k in (range(1, seeds) if not pts else ()):
        try:
            q = quantile(F, k / seeds)
        except FreeEVTError:
            continue
        if math.isfinite(q):
            pts.append(q)
    for b in (*F.breakpoints, F.support_lo, F.support_hi):
        if math.isfinite(b):
            # both one-sided values at a possible jump
            pts.extend((b, float(np.nextafter(b, -math.inf))))
    return pts


def _golden_max(gap, lo, hi, rounds, stall_tol=0.0, patience=5):
    """Golden-section search for the max of ``gap`` on [lo, hi]; stops early
    once the running maximum improves by less than ``stall_tol`` for
    ``patience`` consecutive rounds."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = gap(c), gap(d)
    best = max(fc, fd)
    stall = 0
    for _ in range(rounds):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = gap(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = gap(d)
        new = max(best, fc, fd)
        stall = stall + 1 if new - best < stall_tol else 0
        best = new
        if stall >= patience:
            break
    return best


def kolmogorov_distance(F: Cdf, G: Cdf, tol: Tolerance | None = None,
                        seeds: int = 512, rounds: int = 40, candidates: int = 8) -> float:
    """``sup_x |F(x) - G(x)|``.

    Evaluated on the union of both breakpoint sets (with left limits) and
    quantile-spaced seeds of both laws, then refined by golden-section search
    around the best seeds until the improvement drops below ``tol.abs_tol``. The result is a maximum over evaluations, hence a
    lower bound on the true supremum.
    """
    tol = tol or default_tolerance()
    pts = np.unique(np.asarray(_seed_points(F, seeds) + _seed_points(G, seeds), dtype=float))
    if pts.size == 0:
        pts = np.array([0.0])

    def gap(x):
        return abs(eval_cdf(F, x) - eval_cdf(G, x))

    vals = np.abs(np.asarray(eval_cdf(F, pts)) - np.asarray(eval_cdf(G, pts)))
    best = float(np.max(vals))
    if rounds > 0 and pts.size >= 3:
        order = np.argsort(-vals, kind="stable")[:candidates]
        for i in order:
            for lo, hi in ((pts[max(i - 1, 0)], pts[i]), (pts[i], pts[min(i + 1, pts.size - 1)])):
                if hi - lo > tol.abs_tol:
                    best = max(best, _golden_max(gap, lo, hi, rounds, tol.abs_tol))
    return float(min(max(best, 0.0), 1.0))


def affine_invariance_check(F: Cdf, G: Cdf, a: float, b: float) -> bool:
    """True when ``d_K`` is unchanged by the common reparametrization ``x -> a x + b``."""
    if not a > 0:
        raise ValueError("a must be positive")
    s = NormingSequence(a, b)
    return abs(kolmogorov_distance(renormalize(F, s), renormalize(G, s))
               - kolmogorov_distance(F, G)) <= 1e-9


@dataclass
class ConvergenceRow:
    n: int
    dk: Optional[float]
    stein_total: Optional[float]
    integral_term: Optional[float]
    boundary_term: Optional[float]
    reference: float
    error: Optional[str] = None

    KEYS = ("n", "dk", "stein_total", "integral_term", "boundary_term", "reference")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.KEYS}


def convergence_table(gamma: float, builder: Callable | None = None,
                      n_values: Iterable[int] = (2, 10, 100),
                      sample_law: Cdf | None = None, measure: bool = True):
    """One row per n: measured ``d_K`` against the free law and the Stein bound.

    ``builder(gamma, n)`` returns a :class:`~freeevt.families.WorkedFamily`.
    An n = 1 row compares the sample law itself and reports the trivial bound 1.
    Failures are recorded on the row instead of aborting the table.
    """
    from .families import worked_family
    builder = builder or worked_family
    target = free_law(gamma)
    rows = []
    for n in n_values:
        n = int(n)
        if n == 1:
            U = sample_law if sample_law is not None else classical_law(gamma)
            dk = kolmogorov_distance(U, target) if measure else None
            rows.append(ConvergenceRow(1, dk, 1.0, None, None, 1.0))
            continue
        try:
            fam = builder(gamma, n)
            rep = fam.bound()
            dk = kolmogorov_distance(fam.cdf, target) if measure else None
            rows.append(ConvergenceRow(n, dk, rep.total, rep.integral_term,
                                       rep.boundary_term, 1.0 / n))
        except FreeEVTError as exc:
            log.warning("row n=%d failed: %s", n, exc)
            rows.append(ConvergenceRow(n, None, None, None, None, 1.0 / n, error=str(exc)))
    return rows


def format_number(x) -> str:
    """Shortest round-trip decimal of ``x`` rounded to 15 significant digits."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(f"{x:.15g}") + 0.0)


def json_number(x):
    if x is None or not math.isfinite(float(x)):
        return None
    return float(f"{float(x):.15g}") + 0.0


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ConvergenceRow.KEYS)
    for r in rows:
        w.writerow([r.n] + [format_number(getattr(r, k)) for k in ConvergenceRow.KEYS[1:]])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    out = []
    for r in rows:
        d = {"n": r.n}
        d.update({k: json_number(getattr(r, k)) for k in ConvergenceRow.KEYS[1:]})
        out.append(d)
    return json.dumps(out, indent=2)
