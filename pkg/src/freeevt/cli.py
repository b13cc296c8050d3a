"""Command-line front end.

    freeevt law --family gumbel --free --x 0
    freeevt convolve --input F.json --n 3
    freeevt bound --family frechet --gamma 2 --n 10 --format json
    freeevt validate --family weibull --gamma -2 --n 3
    freeevt table --family gumbel --gamma 0 --n-max 100 --format csv

Exit codes: 0 success, 2 usage or parse error, 3 violated density
hypothesis, 4 numerical failure. ``$FREEEVT_TOL`` overrides the default
quadrature tolerance.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .distributions import (CLASSICAL, FREE, Cdf, ExtremeValueLaw, TabulatedCdf, eval_cdf,
                            make_law)
from .errors import FreeEVTError, HypothesisViolation, NumericError, ParseError
from .families import generic_family, worked_family
from .maxconv import NormingSequence, free_max_conv_pair, free_max_power, norming_constants
from .metrics import (convergence_table, format_number, json_number,
                      rows_to_csv, rows_to_json)
from .numerics import Tolerance, default_tolerance
from .stein import stein_bound, validate_density_profile

EXIT_OK, EXIT_PARSE, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 2, 3, 4
FAMILY_GAMMA_SIGN = {"gumbel": 0, "frechet": 1, "weibull": -1}


class UsageError(ParseError):
    pass


@dataclass
class CliConfig:
    command: str
    family: str = "gumbel"
    gamma: Optional[float] = None
    n: Optional[int] = None
    n_max: Optional[int] = None
    n_values: Optional[list] = None
    free: bool = True
    x: list = field(default_factory=list)
    input_path: Optional[str] = None
    with_path: Optional[str] = None
    output_path: Optional[str] = None
    format: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None

    def tolerance(self) -> Tolerance:
        base = default_tolerance()
        return Tolerance(self.abs_tol if self.abs_tol is not None else base.abs_tol,
                         self.rel_tol if self.rel_tol is not None else base.rel_tol,
                         base.max_refinements)

    def resolved_gamma(self) -> float:
        if self.family == "custom":
            if self.gamma is None:
                raise UsageError("custom family needs --gamma")
            return float(self.gamma)
        sign = FAMILY_GAMMA_SIGN[self.family]
        if self.gamma is None:
            if sign == 0:
                return 0.0
            raise UsageError(f"--gamma is required for family {self.family}")
        g = float(self.gamma)
        if (g > 0) - (g < 0) != sign:
            raise UsageError(f"gamma={g} is inconsistent with family {self.family}")
        return g


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freeevt", description="Free extreme value toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family_choices=("gumbel", "frechet", "weibull", "custom")):
        sp.add_argument("--family", choices=family_choices, default="gumbel")
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--output", dest="output_path")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--abs-tol", type=float)
        sp.add_argument("--rel-tol", type=float)

    sp = sub.add_parser("law", help="evaluate a classical or free extreme value law")
    common(sp, ("gumbel", "frechet", "weibull"))
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--free", dest="free", action="store_true", default=True)
    grp.add_argument("--classical", dest="free", action="store_false")
    sp.add_argument("--x", type=float, nargs="+", required=True)

    sp = sub.add_parser("convolve", help="free max-convolution of tabulated cdfs")
    sp.add_argument("--input", dest="input_path", required=True)
    sp.add_argument("--with", dest="with_path")
    sp.add_argument("--n", type=int)
    sp.add_argument("--output", dest="output_path")
    sp.add_argument("--format", choices=("csv", "json"))

    for name, helptext in (("bound", "Stein bound for one n"),
                           ("validate", "check the density hypotheses")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--input", dest="input_path")
        sp.add_argument("--a", type=float)
        sp.add_argument("--b", type=float)

    sp = sub.add_parser("table", help="convergence table over n")
    common(sp)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--n", dest="n_values", type=int, nargs="+")
    sp.add_argument("--input", dest="input_path")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    return p


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"parse error: cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"parse error: {path}: {exc}") from None


def _custom_family(cfg: CliConfig, gamma: float, n: int):
    """Family from a tabulated cdf file, optionally tagged with a closed-form
    law or carrying a tabulated density. Returns (family, warnings)."""
    if not cfg.input_path:
        raise UsageError("family custom requires --input")
    obj = _read_json(cfg.input_path)
    warnings = []
    tab = TabulatedCdf.from_dict(obj)
    if "law" in obj:
        tag = obj["law"]
        try:
            law = ExtremeValueLaw(tag.get("calculus", CLASSICAL),
                                  tag.get("regime") or ExtremeValueLaw.from_gamma(float(tag["gamma"])).regime,
                                  float(tag["gamma"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"parse error: bad law tag: {exc}") from None
        U = make_law(law)
    else:
        U = tab.to_cdf()
        if "density" in obj:
            dens = np.asarray(obj["density"], dtype=float)
            if dens.shape != tab.x.shape:
                raise ParseError("parse error: density must match x in length")
            xs = tab.x
            U = Cdf(eval=U.eval, support_lo=U.support_lo, support_hi=U.support_hi,
                    density=lambda t: np.where((t >= xs[0]) & (t <= xs[-1]), np.interp(t, xs, dens), 0.0),
                    log_density_derivative=None, breakpoints=U.breakpoints,
                    quantile_fn=U.quantile_fn, name="tabulated")
        warnings.append("rho_n computed by numerical differentiation of a tabulated input; "
                        "accuracy is limited by the tabulation")
        if "density" not in obj:
            warnings.append("no density supplied; using the slopes of the piecewise-linear cdf")
    if cfg.a is not None:
        norming = NormingSequence(cfg.a, cfg.b or 0.0, n)
    elif "law" in obj and obj["law"].get("calculus", CLASSICAL) == CLASSICAL:
        norming = norming_constants(ExtremeValueLaw.from_gamma(float(obj["law"]["gamma"]), CLASSICAL), n)
    else:
        raise UsageError("custom family needs norming constants (--a, --b) or a classical law tag")
    return generic_family(U, gamma, norming), warnings


def _family(cfg: CliConfig, gamma: float, n: int):
    if cfg.family == "custom":
        return _custom_family(cfg, gamma, n)
    return worked_family(gamma, n), []


def _emit(cfg: CliConfig, text: str, out):
    if not text.endswith("\n"):
        text += "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        out.write(text)


def _cmd_law(cfg, out):
    g = cfg.resolved_gamma()
    F = make_law(ExtremeValueLaw.from_gamma(g, FREE if cfg.free else CLASSICAL))
    vals = [eval_cdf(F, x) for x in cfg.x]
    if cfg.format == "json":
        text = json.dumps([{"x": json_number(x), "F": json_number(v)}
                           for x, v in zip(cfg.x, vals)])
    elif cfg.format == "csv":
        text = "x,F\n" + "".join(f"{format_number(x)},{format_number(v)}\n" for x, v in zip(cfg.x, vals))
    else:
        text = "\n".join(format_number(v) for v in vals)
    _emit(cfg, text, out)


def _knots_with_edges(H: Cdf, xs):
    extra = [b for b in H.breakpoints if math.isfinite(b) and xs[0] <= b <= xs[-1]]
    pts = np.unique(np.concatenate([xs, extra]))
    # drop knots that only differ by rounding from their left neighbour
    keep = np.concatenate([[True], np.diff(pts) > 1e-12 * np.maximum(1.0, np.abs(pts[1:]))])
    return pts[keep]


def _cmd_convolve(cfg, out):
    tab = TabulatedCdf.from_dict(_read_json(cfg.input_path))
    F = tab.to_cdf()
    if cfg.with_path:
        tab2 = TabulatedCdf.from_dict(_read_json(cfg.with_path))
        H = free_max_conv_pair(F, tab2.to_cdf())
        xs = np.unique(np.concatenate([tab.x, tab2.x]))
        # pair crossings of F + G = 1 inside each linear piece
        sums = np.asarray(eval_cdf(F, xs)) + np.asarray(eval_cdf(tab2.to_cdf(), xs)) - 1.0
        cross = [xs[i] - sums[i] * (xs[i + 1] - xs[i]) / (sums[i + 1] - sums[i])
                 for i in range(len(xs) - 1) if sums[i] < 0 < sums[i + 1]]
        xs = np.unique(np.concatenate([xs, cross]))
    else:
        if cfg.n is None:
            raise UsageError("convolve needs --n or --with")
        H = free_max_power(F, cfg.n)
        xs = tab.x
    xs = _knots_with_edges(H, xs)
    Fv = np.maximum.accumulate(np.asarray(eval_cdf(H, xs)))
    if cfg.format == "csv":
        text = "x,F\n" + "".join(f"{format_number(a)},{format_number(b)}\n" for a, b in zip(xs, Fv))
    else:
        text = json.dumps({"x": [json_number(v) for v in xs], "F": [json_number(v) for v in Fv]})
    _emit(cfg, text, out)


def _report_text(cfg, d: dict, warnings):
    if cfg.format == "csv":
        keys = list(d)
        return ",".join(keys) + "\n" + ",".join(
            str(d[k]) if k == "n" else format_number(d[k]) for k in keys)
    payload = {k: (v if k == "n" else json_number(v)) for k, v in d.items()}
    if warnings:
        payload["warnings"] = warnings
    return json.dumps(payload, indent=2)


def _cmd_bound(cfg, out):
    g = cfg.resolved_gamma()
    fam, warnings = _family(cfg, g, cfg.n)
    rep = stein_bound(g, fam.profile, cdf=fam.cdf, tol=cfg.tolerance())
    _emit(cfg, _report_text(cfg, rep.to_dict(), warnings), out)


def _cmd_validate(cfg, out):
    g = cfg.resolved_gamma()
    fam, _ = _family(cfg, g, cfg.n)
    rep = validate_density_profile(g, fam.profile)
    _emit(cfg, json.dumps(rep.to_dict(), indent=2, default=float), out)
    if not rep.ok:
        raise HypothesisViolation(rep.summary(), rep.failures)


def _cmd_table(cfg, out):
    g = cfg.resolved_gamma()
    if cfg.n_values:
        ns = cfg.n_values
    elif cfg.n_max:
        ns = list(range(2, cfg.n_max + 1))
    else:
        raise UsageError("table needs --n-max or --n")
    if cfg.family == "custom":
        def builder(gamma, n):
            return _custom_family(cfg, gamma, n)[0]
    else:
        builder = None
    rows = convergence_table(g, builder, ns)
    _emit(cfg, rows_to_json(rows) if cfg.format == "json" else rows_to_csv(rows), out)


_COMMANDS = {"law": _cmd_law, "convolve": _cmd_convolve, "bound": _cmd_bound,
             "validate": _cmd_validate, "table": _cmd_table}


def run(cfg: CliConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        _COMMANDS[cfg.command](cfg, out)
    except HypothesisViolation as exc:
        err.write(f"hypothesis violated: {exc}\n")
        return EXIT_HYPOTHESIS
    except ParseError as exc:
        err.write(f"{exc}\n")
        return EXIT_PARSE
    except NumericError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except FreeEVTError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(**{k: v for k, v in vars(args).items() if k in CliConfig.__dataclass_fields__})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
