"""Command-line front end: spectra, locking reports, landscapes and figure data.

Every subcommand builds a table (ordered columns, ordered rows) and writes it
as CSV or JSON. Floats are written as the shortest decimal that round-trips,
so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .analytic import (
    BRANCHES,
    MINUS,
    PLUS,
    RingParams,
    analytic_eigenvalues,
    analytic_invariants,
    analytic_ratio,
    sample_mode,
    transition_mode,
)
from .bspline import FORMULATIONS, MIXED, STANDARD, SUPPORTED_DEGREES, verify_tables
from .discrete import Discretization, discrete_spectrum, isolated_discrete_spectrum
from .exceptions import ConfigurationError, RingLockError
from .locking import (
    DEFAULT_EPSILON,
    DEFAULT_N_REF,
    POLICIES,
    SAME_CLASS,
    asymptotic_limit,
    asymptotic_limit_numeric,
    branch_errors,
    error_landscape,
    isolated_bending_error,
    isolated_membrane_error,
    locking_report,
)

EXIT_OK = 0
EXIT_WRITE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# tables and formatting


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def _scalar(v):
    """Plain Python value: bool, int, float, str or None (for NaN)."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    return v


def format_value(v) -> str:
    v = _scalar(v)
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    rows = [{c: _scalar(v) for c, v in zip(table.columns, row)} for row in table.rows]
    doc = {"metadata": table.metadata, "rows": rows}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def render(table: Table, fmt: str) -> str:
    return to_json(table) if fmt == "json" else to_csv(table)


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_range(text: str) -> np.ndarray:
    """``min:max:count`` to ``count`` log-spaced values."""
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise ConfigurationError(f"range must look like min:max:count, got {text!r}") from None
    if not (lo > 0 and hi > 0 and count >= 1):
        raise ConfigurationError(f"range needs positive bounds and count, got {text!r}")
    return np.logspace(math.log10(lo), math.log10(hi), count)


def parse_list(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise ConfigurationError(f"expected comma-separated numbers, got {text!r}") from None


def _config(args) -> dict:
    skip = {"func", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _params(args) -> RingParams:
    if not args.tbar > 0:
        raise ConfigurationError(f"tbar must be positive, got {args.tbar}")
    return RingParams(args.tbar, args.radius)


def _disc(args) -> Discretization:
    return Discretization(args.degree, args.elements, args.formulation)


def _branches(sel: str) -> tuple[str, ...]:
    return BRANCHES if sel == "both" else (sel,)


def _metadata(command: str, args, **extra) -> dict:
    return {"version": __version__, "command": command, "config": _config(args), **extra}


def _reference_policy(disc: Discretization, n_ref: int) -> dict:
    if disc.formulation == STANDARD:
        return {"limit": "closed-form"}
    return {"limit": "numeric-proxy", "n_ref": n_ref}


# ---------------------------------------------------------------------------
# table builders (shared by subcommands and recipes)


SPECTRUM_COLUMNS = ["n", "xi", "lambda_minus_exact", "lambda_minus_h", "lambda_plus_exact",
                    "lambda_plus_h", "rho_minus_h", "rho_plus_h", "err_minus", "err_plus"]


def spectrum_table(disc: Discretization, params: RingParams) -> Table:
    spec = discrete_spectrum(disc, params)
    lp, lm = analytic_eigenvalues(spec.mode.astype(float), params)
    with np.errstate(divide="ignore", invalid="ignore"):
        ep = np.where(lp > 0, spec.lambda_plus / lp - 1.0, np.nan)
        em = np.where(lm > 0, spec.lambda_minus / lm - 1.0, np.nan)
    rows = list(zip(spec.n, spec.xi, lm, spec.lambda_minus, lp, spec.lambda_plus,
                    spec.rho_minus, spec.rho_plus, em, ep))
    return Table(list(SPECTRUM_COLUMNS), rows)


def locking_table(disc, params, epsilon, policy, n_ref, branches) -> Table:
    rep = locking_report(disc, params, epsilon, policy, n_ref)
    cols = ["n", "xi", "branch", "mode_class", "error", "reference", "d", "locked"]
    rows = [(r.n, r.xi, r.branch, r.mode_class, r.error, r.reference, r.distance, r.locked)
            for b in branches for r in rep.branch_rows(b)]
    summary = {b: {"locked_count": rep.locked_count(b), "locked_fraction": rep.locked_fraction(b)}
               for b in branches}
    policy_meta = {**_reference_policy(disc, n_ref), "policy": rep.policy, "epsilon": epsilon}
    return Table(cols, rows, {"reference_policy": policy_meta, "summary": summary})


def error_curve(disc: Discretization, params: RingParams, branch: str) -> Table:
    modes, xi, errs = branch_errors(disc, params)
    return Table(["n", "xi", "error"], list(zip(modes, xi, errs[branch])))


def limit_curve(p: int, formulation: str, branch: str, params: RingParams, elements: int,
                n_ref: int = DEFAULT_N_REF) -> Table:
    """Refinement limit on the grid ``2m/elements``."""
    xi = 2.0 * np.arange(2, elements // 2) / elements
    if formulation == STANDARD:
        e = asymptotic_limit(xi, p, branch, params)
    else:
        e = asymptotic_limit_numeric(xi, p, formulation, branch, params, n_ref)[0]
    return Table(["xi", "error"], list(zip(xi, e)))


def distance_curve(disc, params, branch=MINUS, policy=SAME_CLASS) -> Table:
    rep = locking_report(disc, params, DEFAULT_EPSILON, policy)
    return Table(["n", "xi", "d", "locked"], [(r.n, r.xi, r.distance, r.locked) for r in rep.branch_rows(branch)])


def landscape_long(xi, h, ibar, p, branch) -> Table:
    land = error_landscape(xi, h, ibar, p, branch)
    rows = []
    for i, hv in enumerate(land.h):
        for j, iv in enumerate(land.ibar):
            rows.append((hv, iv, land.error[i, j], land.a0_ratio[i], land.a2_ratio[i], land.near_crossing[i, j]))
    return Table(["h", "ibar", "error", "a0_ratio", "a2_ratio", "near_crossing"], rows)


def landscape_matrix(xi, h, ibar, p, branch) -> Table:
    """Rows over ``h``, one column per ``ibar`` (header carries the values)."""
    land = error_landscape(xi, h, ibar, p, branch)
    cols = ["h\\ibar"] + [format_value(v) for v in land.ibar]
    return Table(cols, [(hv, *land.error[i]) for i, hv in enumerate(land.h)])


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args) -> list[tuple[str | None, Table]]:
    disc = _disc(args)
    t = spectrum_table(disc, _params(args))
    t.metadata = _metadata("spectrum", args)
    return [(args.out, t)]


def cmd_locking(args):
    disc = _disc(args)
    t = locking_table(disc, _params(args), args.epsilon, args.policy, args.n_ref, _branches(args.branch))
    t.metadata = {**_metadata("locking", args), **t.metadata}
    return [(args.out, t)]


def cmd_landscape(args):
    h = parse_range(args.h_range) if args.h_range else np.pi / np.logspace(math.log10(8), math.log10(1024), 43)
    ib = parse_range(args.ibar_range) if args.ibar_range else np.logspace(-8, -3, 26)
    xi = float(args.xi) if args.xi else 0.1
    t = landscape_long(xi, h, ib, args.degree, args.branch)
    t.metadata = _metadata("landscape", args)
    return [(args.out, t)]


def cmd_asymptotic(args):
    params = _params(args)
    if args.xi:
        xi = parse_list(args.xi)
    else:
        xi = 2.0 * np.arange(1, args.elements // 2 + 1) / args.elements
    if args.degree not in SUPPORTED_DEGREES:
        raise ConfigurationError(f"degree must be one of {SUPPORTED_DEGREES}")
    cols = ["xi"]
    data = [xi]
    for b in _branches(args.branch):
        cols.append(f"limit_{b}")
        if args.formulation == STANDARD:
            data.append(np.atleast_1d(asymptotic_limit(xi, args.degree, b, params)))
        else:
            data.append(asymptotic_limit_numeric(xi, args.degree, args.formulation, b, params, args.n_ref)[0])
    cols += ["isolated_membrane", "isolated_bending"]
    data += [np.atleast_1d(isolated_membrane_error(xi, args.degree)),
             np.atleast_1d(isolated_bending_error(xi, args.degree))]
    disc_like = Discretization(args.degree, 2 * args.degree, args.formulation)
    t = Table(cols, list(zip(*data)),
              _metadata("asymptotic", args, reference_policy=_reference_policy(disc_like, args.n_ref)))
    return [(args.out, t)]


def cmd_modes(args):
    theta, u, w = sample_mode(args.mode, args.branch, _params(args), args.phase, args.samples)
    t = Table(["theta", "u", "w"], list(zip(theta, u, w)), _metadata("modes", args))
    return [(args.out, t)]


def cmd_verify_tables(args):
    degrees = [args.degree] if args.degree else list(SUPPORTED_DEGREES)
    reports = [r for p in degrees for r in verify_tables(p)]
    for r in reports:
        print(r.summary())
        for row in r.rows:
            for k, pub, got in row.mismatches():
                print(f"  {'/'.join(row.names)}[{k}]: published {pub}, computed {got}")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# figure recipes

MESHES = (32, 64, 128, 256)
LOCKING_TBAR = 0.015


@dataclass(frozen=True)
class FigureRecipe:
    ident: str
    description: str
    build: Callable[[], list[tuple[str, Table]]]


def _analytic_ratios(tbar):
    params = RingParams(tbar)
    n = np.arange(2, 2001)
    out = []
    for b in BRANCHES:
        rho = [analytic_ratio(int(k), b, params) for k in n]
        out.append((f"rho-{b}", Table(["n", "rho"], list(zip(n, rho)))))
    return out


def _analytic_eigenvalues(tbar):
    params = RingParams(tbar)
    n = np.logspace(0, 4, 401)
    lp, lm = analytic_eigenvalues(n, params)
    K, M = analytic_invariants(n, params)
    KL = np.sqrt(np.clip(K * K - M, 0.0, None))
    nhat = transition_mode(tbar)
    Khat, Mhat = analytic_invariants(nhat, params)
    return [
        ("lambda-plus", Table(["n", "lambda"], list(zip(n, lp)))),
        ("lambda-minus", Table(["n", "lambda"], list(zip(n, lm)))),
        ("KL", Table(["n", "KL"], list(zip(n, KL)))),
        ("KL-minimum", Table(["n_hat", "KL"], [(nhat, math.sqrt(max(Khat * Khat - Mhat, 0.0)))])),
    ]


def _minimal_point():
    out = []
    n = np.logspace(0, 4, 401)
    for tbar in (0.1, 0.01, 0.001):
        K, M = analytic_invariants(n, RingParams(tbar))
        out.append((f"L2-t{tbar}", Table(["n", "L2"], list(zip(n, 1.0 - M / (K * K))))))
    return out


def _transition_mode():
    t = np.logspace(-4, math.log10(0.5), 50)
    nhat = [transition_mode(float(x)) for x in t]
    fit = 10 ** (-0.9985 * np.log10(t) + 0.5421)
    return [("n-hat", Table(["tbar", "n_hat"], list(zip(t, nhat)))),
            ("n-hat-fit", Table(["tbar", "n_hat"], list(zip(t, fit))))]


def _discrete_eigenvalues():
    params = RingParams(0.1)
    out = []
    for N in (32, 64, 128, 256, 512, 1024):
        spec = discrete_spectrum(Discretization(2, N), params, np.arange(N // 2 + 1))
        out.append((f"N{N}", Table(["n", "lambda_minus_h", "rho_minus_h"],
                                   list(zip(spec.mode, spec.lambda_minus, spec.rho_minus)))))
    n = np.arange(0, 513)
    lm = analytic_eigenvalues(n, params)[1]
    rho = [analytic_ratio(int(k), MINUS, params) if k > 1 else math.nan for k in n]
    out.append(("exact", Table(["n", "lambda_minus", "rho_minus"], list(zip(n, lm, rho)))))
    return out


def _invariance(kind):
    out = []
    for N in MESHES:
        xi, lh, lam = isolated_discrete_spectrum(kind, 2, N)
        out.append((f"N{N}", Table(["xi", "error"], list(zip(xi, lh / lam - 1.0)))))
    return out


def _errors(formulation, p, tbar, meshes, branches=(MINUS,)):
    params = RingParams(tbar)
    out = []
    for b in branches:
        for N in meshes:
            out.append((f"{formulation}-p{p}-{b}-N{N}", error_curve(Discretization(p, N, formulation), params, b)))
        out.append((f"{formulation}-p{p}-{b}-limit",
                    limit_curve(p, formulation, b, params, 2 * max(meshes))))
    return out


def _distances(formulation, p, tbar=LOCKING_TBAR):
    params = RingParams(tbar)
    return [(f"{formulation}-p{p}-N{N}", distance_curve(Discretization(p, N, formulation), params))
            for N in MESHES]


def _amplitude_error():
    params = RingParams(LOCKING_TBAR)
    out = []
    for form in FORMULATIONS:
        for N in MESHES:
            modes = np.arange(2, N // 2)
            spec = discrete_spectrum(Discretization(2, N, form), params, modes)
            exact = np.array([analytic_ratio(int(m), MINUS, params) for m in modes])
            out.append((f"{form}-N{N}", Table(["n", "xi", "error"],
                                              list(zip(modes, spec.xi, spec.rho_minus / exact - 1.0)))))
    return out


def _landscape_n2():
    # n = 2 fixed, so xi = 2 h / pi moves with h
    h = np.pi / np.logspace(math.log10(4), math.log10(1024), 33)
    ib = np.logspace(-8, -3, 26)
    rows = []
    for hv in h:
        land = error_landscape(2.0 * hv / np.pi, [hv], ib, 2, MINUS)
        rows.append((hv, *land.error[0]))
    return [("matrix", Table(["h\\ibar"] + [format_value(v) for v in ib], rows))]


def _landscape_xi01():
    h = np.pi / np.logspace(math.log10(8), math.log10(1024), 43)
    ib = np.logspace(-8, -3, 26)
    return [("matrix", landscape_matrix(0.1, h, ib, 2, MINUS))]


def _recipes() -> dict[str, FigureRecipe]:
    items = [
        FigureRecipe("fig-analytical-ratios-t0.1", "amplitude ratios U/W per branch, tbar=0.1",
                     lambda: _analytic_ratios(0.1)),
        FigureRecipe("fig-analytical-ratios-t0.01", "amplitude ratios U/W per branch, tbar=0.01",
                     lambda: _analytic_ratios(0.01)),
        FigureRecipe("fig-analytical-eigenvalues-t0.1", "continuum eigenvalues and K*L, tbar=0.1",
                     lambda: _analytic_eigenvalues(0.1)),
        FigureRecipe("fig-analytical-eigenvalues-t0.01", "continuum eigenvalues and K*L, tbar=0.01",
                     lambda: _analytic_eigenvalues(0.01)),
        FigureRecipe("fig-minimal-point", "L_n^2 against n for three thicknesses", _minimal_point),
        FigureRecipe("fig-transition-mode", "transition mode against tbar with the log-linear fit",
                     _transition_mode),
        FigureRecipe("fig-discrete-eigenvalues", "minus-branch eigenvalues and ratios, p=2, tbar=0.1",
                     _discrete_eigenvalues),
        FigureRecipe("fig-invariance-a", "isolated membrane errors on four meshes", lambda: _invariance("membrane")),
        FigureRecipe("fig-invariance-b", "isolated bending errors on four meshes", lambda: _invariance("bending")),
        FigureRecipe("fig-locking-preview", "standard p=2 minus-branch errors with the limit curve",
                     lambda: _errors(STANDARD, 2, LOCKING_TBAR, MESHES)),
        FigureRecipe("fig-locking-criterion", "log distance to the limit, standard p=2",
                     lambda: _distances(STANDARD, 2)),
        FigureRecipe("fig-normalized-spectra-error", "errors of both branches, standard and mixed p=2",
                     lambda: _errors(STANDARD, 2, LOCKING_TBAR, MESHES, BRANCHES)
                     + _errors(MIXED, 2, LOCKING_TBAR, MESHES, BRANCHES)),
        FigureRecipe("fig-locking-p2", "log distance to the limit, standard and mixed p=2",
                     lambda: _distances(STANDARD, 2) + _distances(MIXED, 2)),
        FigureRecipe("fig-spectra-negative-p34", "standard minus-branch errors for p=3 and p=4",
                     lambda: _errors(STANDARD, 3, LOCKING_TBAR, MESHES) + _errors(STANDARD, 4, LOCKING_TBAR, MESHES)),
        FigureRecipe("fig-locking-p34", "log distance to the limit, standard p=3 and p=4",
                     lambda: _distances(STANDARD, 3) + _distances(STANDARD, 4)),
        FigureRecipe("fig-amplitude-error", "minus-branch amplitude ratio errors, p=2", _amplitude_error),
        FigureRecipe("fig-fine-discretizations", "errors of both branches past the transition mode, tbar=0.1",
                     lambda: _errors(STANDARD, 2, 0.1, MESHES, BRANCHES)),
        FigureRecipe("fig-landscape-n2", "n=2 minus-branch error over (h, Ibar)", _landscape_n2),
        FigureRecipe("fig-landscape-xi0.1", "xi=0.1 minus-branch error over (h, Ibar)", _landscape_xi01),
    ]
    return {r.ident: r for r in items}


RECIPES = _recipes()


def cmd_recipe(args):
    if args.figure not in RECIPES:
        lines = "\n".join(f"  {k}: {r.description}" for k, r in RECIPES.items())
        raise ConfigurationError(f"unknown figure id {args.figure!r}; available ids:\n{lines}")
    recipe = RECIPES[args.figure]
    out_dir = args.out or "."
    ext = "json" if args.format == "json" else "csv"
    files = []
    for curve, table in recipe.build():
        table.metadata = {"version": __version__, "figure": recipe.ident, "curve": curve,
                          "description": recipe.description}
        files.append((os.path.join(out_dir, f"{recipe.ident}__{curve}.{ext}"), table))
    return files


# ---------------------------------------------------------------------------
# parser and entry point


def _common(p, *, mesh=True, ring=True, branch=None):
    if mesh:
        p.add_argument("--formulation", choices=FORMULATIONS, default=STANDARD)
        p.add_argument("--degree", type=int, choices=SUPPORTED_DEGREES, default=2)
        p.add_argument("--elements", type=int, default=64, help="number of knot spans N")
    if ring:
        p.add_argument("--tbar", type=float, default=0.1, help="normalized thickness t/R")
        p.add_argument("--radius", type=float, default=1.0)
    if branch:
        p.add_argument("--branch", choices=branch[0], default=branch[1])
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (recipe: output directory); default stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringlock", description="Spectral membrane-locking analysis of a spline ring.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    both = (PLUS, MINUS, "both")

    p = sub.add_parser("spectrum", help="discrete and exact spectrum, one row per Fourier index")
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("locking", help="log distance to the refinement limit and locked flags")
    _common(p, branch=(both, MINUS))
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--policy", choices=POLICIES, default=SAME_CLASS)
    p.add_argument("--n-ref", type=int, default=DEFAULT_N_REF, help="mesh of the numeric limit (mixed)")
    p.set_defaults(func=cmd_locking)

    p = sub.add_parser("landscape", help="standard-formulation error over (h, Ibar) at fixed xi")
    _common(p, mesh=False, ring=False, branch=(BRANCHES, MINUS))
    p.add_argument("--degree", type=int, choices=SUPPORTED_DEGREES, default=2)
    p.add_argument("--xi", help="normalized mode number (default 0.1)")
    p.add_argument("--h-range", help="min:max:count, log-spaced")
    p.add_argument("--ibar-range", help="min:max:count, log-spaced")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("asymptotic", help="refinement-limit error curves")
    _common(p, branch=(both, "both"))
    p.add_argument("--xi", help="comma-separated xi values (default 2m/elements)")
    p.add_argument("--n-ref", type=int, default=DEFAULT_N_REF)
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("modes", help="sampled continuum eigenfunction")
    _common(p, mesh=False, branch=(BRANCHES, MINUS))
    p.add_argument("--mode", type=int, required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--phase", type=float, default=0.0)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("verify-tables", help="check recomputed coefficient tables against the published ones")
    p.add_argument("--degree", type=int, choices=SUPPORTED_DEGREES)
    p.set_defaults(func=cmd_verify_tables)

    p = sub.add_parser("recipe", help="write the data behind one figure, one file per curve")
    p.add_argument("figure", help="figure id, e.g. fig-invariance-a")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output directory (default .)")
    p.set_defaults(func=cmd_recipe)
    return parser


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
        if isinstance(result, int):
            return result
        fmt = getattr(args, "format", "csv")
        for path, table in result:
            _write(path, render(table, fmt))
            if args.command == "recipe":
                print(path)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RingLockError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_WRITE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
