"""Normalized eigenvalue errors, refinement limits and the locking criterion.

A mode at normalized mode number ``xi`` locks when its relative eigenvalue
error ``e_N(xi)`` sits more than ``epsilon`` decades above the error curve
``e_inf(xi)`` reached in the limit of mesh refinement.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analytic import BRANCHES, MINUS, PLUS, RingParams, analytic_eigenvalues, check_branch
from .bspline import MIXED, STANDARD, build_table
from .circulant import RADICAND_TOL
from .discrete import (
    Discretization,
    discrete_spectrum,
    mixed_block_entries,
    standard_block_entries,
    symbols_mixed,
    symbols_standard,
)
from .exceptions import (
    ClosedFormUnavailableError,
    ConfigurationError,
    DomainError,
    UnconvergedProxyWarning,
)

SAME_BRANCH = "same-branch"
SAME_CLASS = "same-class"
POLICIES = (SAME_BRANCH, SAME_CLASS)
MEMBRANE = "membrane"
BENDING = "bending"

DEFAULT_EPSILON = 0.01
DEFAULT_N_REF = 2**20
DRIFT_TOL = 1e-3
# cells with L^2 below this are flagged in landscapes (branch crossing region)
NEAR_CROSSING_L2 = 1e-8


def _xi_array(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any((xi < 0) | (xi > 1)) or not np.all(np.isfinite(xi)):
        raise ConfigurationError("normalized mode numbers must lie in [0, 1]")
    return xi


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _isolated(xi, p: int, row: str, power: int):
    xi = _xi_array(xi)
    theta = np.pi * xi
    t = build_table(p, STANDARD)
    k = t[row].stencil.symbol(theta).real
    m = t["M"].stencil.symbol(theta).real
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(xi > 0, k / (m * theta**power) - 1.0, 0.0)
    return _out(err)


def isolated_membrane_error(xi, p: int):
    """Relative error of ``-u'' = lambda u`` at normalized mode ``xi``; the
    same for every mesh, so ``xi`` alone fixes it."""
    return _isolated(xi, p, "K11m", 2)


def isolated_bending_error(xi, p: int):
    """Relative error of ``u'''' = lambda u`` at normalized mode ``xi``."""
    return _isolated(xi, p, "K22b", 4)


def asymptotic_limit(xi, p: int, branch: str, params: RingParams, formulation: str = STANDARD):
    """``lim_{h -> 0} lambda^h/lambda - 1`` at fixed ``xi``.

    The plus branch tends to the isolated bending error for every thickness.
    The minus branch tends to
    ``[(1 + I) k11/m - I |k12b|^2/(m k22b)]/theta^2 - 1``, written here as
    ``k11/(m theta^2) + I s2/(m k22b theta^2) - 1`` with
    ``s2 = k11 k22b - |k12b|^2`` from an exact product stencil.
    """
    check_branch(branch)
    if formulation == MIXED:
        raise ClosedFormUnavailableError("no closed-form refinement limit for the mixed formulation")
    if formulation != STANDARD:
        raise ConfigurationError(f"unknown formulation {formulation!r}")
    if branch == PLUS:
        return isolated_bending_error(xi, p)
    xi = _xi_array(xi)
    theta = np.pi * xi
    m, k11, _, _, k22b, _, _, s2 = symbols_standard(p, theta)
    ib = params.ibar
    with np.errstate(divide="ignore", invalid="ignore"):
        err = k11 / (m * theta**2) + ib * s2 / (m * k22b * theta**2) - 1.0
    return _out(np.where(xi > 0, err, 0.0))


def _minus_factor(x):
    """``1 - sqrt(1 - x)`` evaluated as ``x/(1 + sqrt(1 - x))``."""
    if np.any(1.0 - x < -RADICAND_TOL):
        raise DomainError(f"negative radicand {np.min(1.0 - x):.3e}")
    return x / (1.0 + np.sqrt(np.clip(1.0 - x, 0.0, None)))


def _branch_ratio(branch, Kratio, x_h, x):
    """``(K^h/K) [1 +- sqrt(1 - x_h)] / [1 +- sqrt(1 - x)]``."""
    if branch == PLUS:
        for v in (x_h, x):
            if np.any(1.0 - v < -RADICAND_TOL):
                raise DomainError(f"negative radicand {np.min(1.0 - v):.3e}")
        num = 1.0 + np.sqrt(np.clip(1.0 - x_h, 0.0, None))
        den = 1.0 + np.sqrt(np.clip(1.0 - x, 0.0, None))
        return Kratio * num / den
    # x = 0 is the rigid mode (lambda = 0): the relative error is infinite
    with np.errstate(divide="ignore", invalid="ignore"):
        return Kratio * _minus_factor(x_h) / _minus_factor(x)


def relative_error_exact(xi, h, params: RingParams, branch: str, p: int):
    """``lambda^h/lambda - 1`` of the standard formulation as a function of
    ``(xi, h)`` with ``h`` continuous.

    Uses ``K = (alpha0 + alpha2 h^2 + h^4)/(2 R^2 h^4)`` and
    ``M/K^2 = h^2 (a0 + a2 h^2 + a4 h^4)/(b0 + ... + h^8)``, together with
    their discrete counterparts, so ``R`` enters only through ``tbar``.
    """
    check_branch(branch)
    xi = _xi_array(xi)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ConfigurationError("mesh size must be positive")
    theta = np.pi * xi
    ib = params.ibar
    m, k11, _, _, k22b, s0, s1, s2 = symbols_standard(p, theta)
    h2, h4 = h * h, h**4
    alpha0, alpha2 = ib * theta**4, (1 + ib) * theta**2
    alpha0h, alpha2h = ib * k22b / m, (1 + ib) * k11 / m
    a0, a2, a4 = 4 * ib * theta**6, -8 * ib * theta**4, 4 * ib * theta**2
    a0h = 4 * ib * (k11 * k22b + ib * s2) / m**2
    a2h = -8 * ib * s1 / m**2
    a4h = 4 * (s0 + ib * k11 * m) / m**2
    Kc = alpha0 + alpha2 * h2 + h4
    Kh = alpha0h + alpha2h * h2 + h4
    # b0 + b2 h^2 + ... + h^8 is the square of the K polynomial
    x = h2 * (a0 + a2 * h2 + a4 * h4) / Kc**2
    x_h = h2 * (a0h + a2h * h2 + a4h * h4) / Kh**2
    return _out(_branch_ratio(branch, Kh / Kc, x_h, x) - 1.0)


# ---------------------------------------------------------------------------
# landscape in (h, Ibar)


@dataclass(frozen=True)
class LandscapeCoefficients:
    beta0: np.ndarray
    beta1: np.ndarray
    beta0h: np.ndarray
    beta1h: np.ndarray
    a1: np.ndarray
    a0h: np.ndarray
    a1h: np.ndarray
    a2h: np.ndarray


def landscape_coefficients(xi: float, h, p: int) -> LandscapeCoefficients:
    """``beta`` and ``a~`` coefficients of ``K`` and ``M`` as polynomials in
    ``Ibar`` (the continuum ``a~0`` and ``a~2`` vanish)."""
    theta = math.pi * float(_xi_array(xi))
    h = np.asarray(h, dtype=float)
    m, k11, _, _, k22b, s0, s1, s2 = (np.asarray(v) for v in symbols_standard(p, theta))
    h2 = h * h
    c = 4 * h2 / m**2
    return LandscapeCoefficients(
        beta0=h2 * theta**2 + h2 * h2,
        beta1=theta**4 + h2 * theta**2,
        beta0h=h2 * k11 / m + h2 * h2,
        beta1h=(k22b + h2 * k11) / m,
        a1=4 * h2 * theta**2 * (theta**2 - h2) ** 2,
        a0h=c * h2 * h2 * s0,
        a1h=c * (k11 * k22b - 2 * h2 * s1 + h2 * h2 * k11 * m),
        a2h=c * s2,
    )


def relative_error_ibar(xi: float, h, ibar, p: int, branch: str):
    """``lambda^h/lambda - 1`` through the ``Ibar``-polynomial route; ``h``
    and ``ibar`` broadcast against each other."""
    check_branch(branch)
    h = np.asarray(h, dtype=float)
    ibar = np.asarray(ibar, dtype=float)
    if np.any(h <= 0) or np.any(ibar <= 0):
        raise ConfigurationError("mesh sizes and Ibar must be positive")
    c = landscape_coefficients(xi, h, p)
    Kc = c.beta0 + c.beta1 * ibar
    Kh = c.beta0h + c.beta1h * ibar
    x = c.a1 * ibar / Kc**2
    x_h = (c.a0h + c.a1h * ibar + c.a2h * ibar**2) / Kh**2
    return _out(_branch_ratio(branch, Kh / Kc, x_h, x) - 1.0)


@dataclass(frozen=True)
class Landscape:
    """Relative errors on an ``h`` (rows) by ``Ibar`` (columns) grid."""

    xi: float
    degree: int
    branch: str
    h: np.ndarray
    ibar: np.ndarray
    error: np.ndarray
    a0_ratio: np.ndarray  # a~0^h / a~1 per h
    a2_ratio: np.ndarray  # a~2^h / a~1 per h
    near_crossing: np.ndarray


def error_landscape(xi: float, h_grid, ibar_grid, p: int, branch: str = MINUS) -> Landscape:
    h = np.asarray(h_grid, dtype=float)
    ib = np.asarray(ibar_grid, dtype=float)
    H, IB = np.meshgrid(h, ib, indexing="ij")
    err = relative_error_ibar(xi, H, IB, p, branch)
    c = landscape_coefficients(xi, h, p)
    cc = landscape_coefficients(xi, H, p)
    L2 = 1.0 - cc.a1 * IB / (cc.beta0 + cc.beta1 * IB) ** 2
    Kh = cc.beta0h + cc.beta1h * IB
    with np.errstate(divide="ignore", invalid="ignore"):
        L2h = 1.0 - (cc.a0h + cc.a1h * IB + cc.a2h * IB**2) / Kh**2
        a0_ratio, a2_ratio = c.a0h / c.a1, c.a2h / c.a1
    flagged = np.minimum(L2, L2h) < NEAR_CROSSING_L2
    return Landscape(float(xi), p, branch, h, ib, np.asarray(err), a0_ratio, a2_ratio, flagged)


# ---------------------------------------------------------------------------
# discrete error spectra and the locking report


def _mode_class(rho) -> np.ndarray:
    return np.where(np.abs(rho) > 1.0, MEMBRANE, BENDING)


def analytic_class(m, branch: str, params: RingParams) -> np.ndarray:
    """Physical class of continuum mode(s) ``m`` on ``branch`` from ``|U/W|``."""
    m = np.asarray(m, dtype=float)
    lam = analytic_eigenvalues(m, params)[0 if branch == PLUS else 1]
    R2 = params.radius**2
    a = m * m * (1 + params.ibar) / R2
    b = m * (1 + params.ibar * m * m) / R2
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = b / (lam - a)
    return _mode_class(rho)


# float errors below this are recomputed in extended precision
REFINE_BELOW = 1e-7
REFINE_DPS = 40


def _mode_errors_mp(disc: Discretization, params: RingParams, j: int, dps: int = REFINE_DPS):
    """``(e_plus, e_minus)`` of Fourier index ``j`` in mpmath arithmetic."""
    import mpmath as mp

    with mp.workdps(dps):
        N = disc.elements
        signed = j - N if 2 * j > N else j
        theta = 2 * mp.pi * signed / N
        h = 2 * mp.pi / N
        R2 = mp.mpf(params.radius) ** 2
        tb2 = mp.mpf(params.tbar) ** 2
        ib = tb2 / 12
        if disc.formulation == STANDARD:
            a, _, d, det = standard_block_entries(symbols_standard(disc.degree, theta, dps), h, R2, ib)
        else:
            a, _, d, det = mixed_block_entries(symbols_mixed(disc.degree, theta, dps), h, R2, ib)
        K = (a + d) / 2
        lp = K * (1 + mp.sqrt(max(mp.mpf(0), 1 - det / K**2)))
        lm = det / lp
        n2 = mp.mpf(min(j, N - j)) ** 2
        Kc = (n2 + 1) * (n2 * tb2 + 12) / (24 * R2)
        Mc = n2 * tb2 * (n2 - 1) ** 2 / (12 * R2 * R2)
        lpc = Kc * (1 + mp.sqrt(max(mp.mpf(0), 1 - Mc / Kc**2)))
        lmc = Mc / lpc
        return float(lp / lpc - 1), float(lm / lmc - 1) if lmc != 0 else math.nan


def branch_errors(disc: Discretization, params: RingParams, modes=None):
    """``(m, xi, {branch: e})`` with ``e = lambda^h/lambda - 1`` against the
    continuum eigenvalue of the same branch and physical mode ``m``.

    Errors that double precision cannot resolve (``|e| < 1e-7``) are
    recomputed in 40-digit arithmetic.
    """
    modes = np.arange(2, disc.elements // 2) if modes is None else np.asarray(modes)
    spec = discrete_spectrum(disc, params, modes)
    lam_plus, lam_minus = analytic_eigenvalues(spec.mode.astype(float), params)
    lam_plus, lam_minus = np.atleast_1d(lam_plus), np.atleast_1d(lam_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        errs = {
            PLUS: np.where(lam_plus > 0, spec.lambda_plus / lam_plus - 1.0, np.nan),
            MINUS: np.where(lam_minus > 0, spec.lambda_minus / lam_minus - 1.0, np.nan),
        }
    small = (np.abs(errs[PLUS]) < REFINE_BELOW) | (np.abs(errs[MINUS]) < REFINE_BELOW)
    for i in np.flatnonzero(small & (spec.mode > 1)):
        errs[PLUS][i], errs[MINUS][i] = _mode_errors_mp(disc, params, int(modes[i]))
    return spec.mode, spec.xi, errs


def _representable(xi, n_ref: int) -> np.ndarray:
    m = np.asarray(xi, dtype=float) * n_ref / 2
    mi = np.rint(m)
    if np.any(np.abs(m - mi) > 1e-9 * np.maximum(1.0, m)):
        raise ConfigurationError(f"xi values are not of the form 2m/{n_ref}")
    return mi.astype(np.int64)


def asymptotic_limit_numeric(xi, degree: int, formulation: str, branch: str, params: RingParams,
                             n_ref: int = DEFAULT_N_REF, drift_tol: float = DRIFT_TOL):
    """``e_{N_ref}(xi)`` as a stand-in for the refinement limit.

    The same curve on ``N_ref/2`` elements measures the remaining drift; a
    relative drift above ``drift_tol`` raises
    :class:`UnconvergedProxyWarning`. Returns ``(curve, drift)``.
    """
    check_branch(branch)
    if n_ref < 4096 or n_ref % 4:
        raise ConfigurationError("n_ref must be a multiple of 4 and at least 4096")
    xi = _xi_array(np.atleast_1d(xi))
    curves = []
    for N in (n_ref, n_ref // 2):
        m = _representable(xi, N)
        disc = Discretization(degree, N, formulation)
        _, _, errs = branch_errors(disc, params, m)
        curves.append(errs[branch])
    ref, half = curves
    with np.errstate(divide="ignore", invalid="ignore"):
        drift = np.abs(ref - half) / np.abs(ref)
    if np.nanmax(drift, initial=0.0) > drift_tol:
        warnings.warn(
            f"reference curve drifts by {np.nanmax(drift):.2e} between N={n_ref // 2} and N={n_ref}",
            UnconvergedProxyWarning,
            stacklevel=2,
        )
    return ref, drift


def reference_error(xi, disc: Discretization, params: RingParams, branch: str, n_ref: int = DEFAULT_N_REF):
    """``e_inf`` on ``branch``: closed form (standard) or large-N proxy (mixed)."""
    if disc.formulation == STANDARD:
        return np.atleast_1d(asymptotic_limit(xi, disc.degree, branch, params))
    return asymptotic_limit_numeric(xi, disc.degree, disc.formulation, branch, params, n_ref)[0]


@dataclass(frozen=True)
class LockingRow:
    n: int
    xi: float
    branch: str
    mode_class: str
    error: float
    reference: float
    distance: float
    locked: bool


@dataclass(frozen=True)
class LockingReport:
    disc: Discretization
    params: RingParams
    epsilon: float
    policy: str
    reference: str
    rows: tuple = field(repr=False)

    def branch_rows(self, branch: str) -> list[LockingRow]:
        return [r for r in self.rows if r.branch == branch]

    def locked_count(self, branch: str = MINUS) -> int:
        return sum(r.locked for r in self.branch_rows(branch))

    def locked_fraction(self, branch: str = MINUS) -> float:
        rows = self.branch_rows(branch)
        return self.locked_count(branch) / len(rows) if rows else 0.0


def locking_report(disc: Discretization, params: RingParams, epsilon: float = DEFAULT_EPSILON,
                   policy: str = SAME_CLASS, n_ref: int = DEFAULT_N_REF) -> LockingReport:
    """Apply the locking criterion to every unique mode ``m = 2..N/2 - 1``.

    ``d = log10 e_N(xi) - log10 e_inf(xi)`` and a mode locks iff
    ``d >= epsilon``. With ``same-branch`` the reference is the limit curve
    of the mode's own branch. With ``same-class`` it is the curve of the
    branch whose limit carries the mode's physical response: bending-type
    modes (``|U/W| < 1``) use the plus-branch curve and membrane-type modes
    the minus-branch curve.
    """
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    if policy not in POLICIES:
        raise ConfigurationError(f"policy must be one of {POLICIES}, got {policy!r}")
    modes, xi, errs = branch_errors(disc, params)
    refs = {b: reference_error(xi, disc, params, b, n_ref) for b in BRANCHES} if len(xi) else {}
    rows = []
    for branch in (MINUS, PLUS):
        cls = analytic_class(modes, branch, params)
        for i, m in enumerate(modes):
            if policy == SAME_BRANCH:
                ref_branch = branch
            else:
                ref_branch = PLUS if cls[i] == BENDING else MINUS
            e = abs(float(errs[branch][i]))
            r = abs(float(refs[ref_branch][i]))
            if not (e > 0 and r > 0):
                d = math.nan
            else:
                d = math.log10(e) - math.log10(r)
            rows.append(LockingRow(int(m), float(xi[i]), branch, str(cls[i]), e, r, d, bool(d >= epsilon)))
    ref_name = "closed-form" if disc.formulation == STANDARD else f"numeric-proxy(N_ref={n_ref})"
    return LockingReport(disc, params, epsilon, policy, ref_name, tuple(rows))


def shared_grid_counts(reports, branch: str = MINUS) -> list[int]:
    """Locked counts restricted to the ``xi`` values every report shares.

    Grids ``{2m/N}`` nest under doubling, so the shared set is the grid of
    the coarsest report.
    """
    reports = list(reports)
    if not reports:
        return []
    shared = set.intersection(*({round(r.xi, 12) for r in rep.branch_rows(branch)} for rep in reports))
    return [sum(r.locked for r in rep.branch_rows(branch) if round(r.xi, 12) in shared) for rep in reports]
