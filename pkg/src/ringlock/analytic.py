"""Continuum spectrum of the thin circular ring.

Fourier modes ``u = U sin(n(theta - phi))``, ``w = W cos(n(theta - phi))``
turn the coupled membrane/bending equations into one 2x2 block per mode
number ``n``. Material constants are normalized (``E/rho = 1``) and the
cross-section is rectangular, so only ``tbar = t/R`` and ``R`` remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circulant import Block2x2, amplitude_ratio, decouple_2x2
from .exceptions import ConfigurationError

PLUS = "plus"
MINUS = "minus"
BRANCHES = (PLUS, MINUS)


@dataclass(frozen=True)
class RingParams:
    """Normalized thickness ``tbar`` and radius ``R``.

    ``tbar = 0`` is accepted and gives the pure membrane limit.
    """

    tbar: float
    radius: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.tbar) and self.tbar >= 0):
            raise ConfigurationError(f"tbar must be finite and non-negative, got {self.tbar}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigurationError(f"radius must be positive, got {self.radius}")

    @property
    def ibar(self) -> float:
        """Normalized moment of inertia ``tbar**2 / 12``."""
        return self.tbar**2 / 12.0


@dataclass(frozen=True)
class AnalyticMode:
    n: int
    lambda_plus: float
    lambda_minus: float
    rho_plus: float
    rho_minus: float


def check_branch(branch: str) -> str:
    if branch not in BRANCHES:
        raise ConfigurationError(f"branch must be one of {BRANCHES}, got {branch!r}")
    return branch


def analytic_block(n: int, params: RingParams) -> Block2x2:
    """Real symmetric 2x2 block ``[[A, B], [B, D]]`` of mode ``n``."""
    if n < 0:
        raise ValueError(f"mode number must be non-negative, got {n}")
    r2 = params.radius**2
    ib = params.ibar
    a = n * n * (1.0 + ib) / r2
    b = n * (1.0 + ib * n * n) / r2
    d = (1.0 + ib * n**4) / r2
    return Block2x2(a, b, b, d)


def analytic_invariants(n, params: RingParams):
    """``(K_n, M_n)`` so that ``lambda = K (1 +- sqrt(1 - M/K^2))``.

    Vectorised over ``n``.
    """
    n = np.asarray(n, dtype=float)
    tb2 = params.tbar**2
    r2 = params.radius**2
    K = (n * n + 1.0) * (n * n * tb2 + 12.0) / (24.0 * r2)
    M = n * n * tb2 * (n * n - 1.0) ** 2 / (12.0 * r2 * r2)
    return K, M


def analytic_L2(n, tbar: float):
    """``L_n^2 = 1 - M_n/K_n^2``; independent of ``R``."""
    K, M = analytic_invariants(n, RingParams(tbar, 1.0))
    return 1.0 - M / (K * K)


def analytic_eigenvalues(n, params: RingParams):
    """``(lambda_plus, lambda_minus)`` for mode number(s) ``n``.

    The minus root is formed as ``M/lambda_plus``, so it is exactly zero for
    ``n`` in ``{0, 1}`` and keeps full relative accuracy when ``M << K^2``.
    """
    K, M = analytic_invariants(n, params)
    L = np.sqrt(np.clip(1.0 - M / (K * K), 0.0, None))
    lam_plus = K * (1.0 + L)
    lam_minus = M / lam_plus
    if np.ndim(lam_plus) == 0:
        return float(lam_plus), float(lam_minus)
    return lam_plus, lam_minus


def analytic_ratio(n: int, branch: str, params: RingParams) -> float:
    """Amplitude ratio ``U/W = B/(lambda - A)`` on one branch.

    ``|ratio| > 1`` marks a membrane-dominated mode.
    """
    check_branch(branch)
    lam_plus, lam_minus = analytic_eigenvalues(n, params)
    lam = lam_plus if branch == PLUS else lam_minus
    return amplitude_ratio(lam, analytic_block(n, params)).real


def analytic_mode(n: int, params: RingParams) -> AnalyticMode:
    lam_plus, lam_minus = analytic_eigenvalues(n, params)
    block = analytic_block(n, params)
    ratios = []
    for lam in (lam_plus, lam_minus):
        try:
            ratios.append(amplitude_ratio(lam, block).real)
        except ArithmeticError:
            ratios.append(math.nan)
    return AnalyticMode(n, lam_plus, lam_minus, ratios[0], ratios[1])


def _real_cubic_roots(a: float, b: float, c: float, d: float) -> list[float]:
    """Real roots of ``a x^3 + b x^2 + c x + d`` (trigonometric/Cardano form)."""
    b, c, d = b / a, c / a, d / a
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        s = math.sqrt(disc)
        return [math.copysign(abs(-q / 2 + s) ** (1 / 3), -q / 2 + s)
                + math.copysign(abs(-q / 2 - s) ** (1 / 3), -q / 2 - s) + shift]
    if p == 0:
        return [shift]
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
    phi = math.acos(arg) / 3.0
    return [m * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]


def transition_mode(tbar: float) -> float:
    """Mode number ``n_hat`` at which ``L_n^2`` is smallest.

    The stationarity condition in ``x = n^2`` is the cubic
    ``-tbar^2 x^3 + (4 tbar^2 + 12) x^2 + (tbar^2 + 48) x - 12 = 0``; its
    unique root above one (its largest root) is polished by Newton's method.

    Examples
    --------
    >>> round(transition_mode(0.1), 1)
    34.8
    """
    if not 0 < tbar < 1:
        raise ConfigurationError(f"tbar must lie in (0, 1), got {tbar}")
    t2 = tbar * tbar
    coef = (-t2, 4 * t2 + 12, t2 + 48, -12.0)
    # h(0) < 0 < h(1) and h -> -inf, so the wanted root is the largest one;
    # the small roots lose accuracy for thin rings and are never inspected
    x = max(_real_cubic_roots(*coef))
    if not x > 1:
        raise ArithmeticError(f"largest root {x} does not exceed 1")
    for _ in range(50):
        f = ((coef[0] * x + coef[1]) * x + coef[2]) * x + coef[3]
        df = (3 * coef[0] * x + 2 * coef[1]) * x + coef[2]
        step = f / df
        x -= step
        if abs(step) <= 1e-15 * x:
            break
    return math.sqrt(x)


def sample_mode(n: int, branch: str, params: RingParams, phase: float = 0.0, samples: int = 64):
    """Eigenfunction ``(theta, u, w)`` on ``samples`` equispaced angles.

    ``W`` is normalized to one and ``U`` is the amplitude ratio. The pure
    circumferential companion of the breathing mode (``n = 0``, minus
    branch) has ``W = 0`` and is returned as ``u = 1``, ``w = 0``.
    """
    check_branch(branch)
    if samples < 1:
        raise ConfigurationError(f"samples must be positive, got {samples}")
    theta = 2.0 * np.pi * np.arange(samples) / samples
    arg = n * (theta - phase)
    if n == 0 and branch == MINUS:
        return theta, np.ones(samples), np.zeros(samples)
    lam = analytic_eigenvalues(n, params)[0 if branch == PLUS else 1]
    rho = amplitude_ratio(lam, analytic_block(n, params)).real
    return theta, rho * np.sin(arg), np.cos(arg)


def decoupled_eigenvalues(n: int, params: RingParams):
    """Same eigenvalues through :func:`decouple_2x2`; a cross-check route."""
    pair = decouple_2x2(analytic_block(n, params))
    return pair.lambda_plus, pair.lambda_minus
