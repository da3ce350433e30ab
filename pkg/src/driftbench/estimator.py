"""Minimum-contrast drift estimation over wavelet spaces.

The estimator minimizes the empirical regression loss

    gamma_n(u) = (1/n) sum_k [(X_{(k+1)D} - X_{kD}) / D - u(X_{kD})]^2

over ``u`` in ``S_l`` with ``||u||_inf <= K0 + 1``.  The unconstrained least
squares problem is solved by a rank-revealing QR factorization (minimum-norm
solution for rank-deficient designs); a solution violating the sup-norm cap
is rescaled onto it and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import CHECK_POINTS
from .paths import Observations
from .wavelets import CoefficientVector, WaveletBasis, l2_distance

RCOND = 1e-10


def empirical_norm(u, obs: Observations) -> float:
    """``(1/n) sum_{k=1}^{n} u(X_{kD})^2`` (the ``k = 0`` term is left out)."""
    vals = np.asarray(u(np.mod(obs.samples[1:], 1.0)), dtype=float)
    return float(np.mean(vals**2))


def empirical_loss(u, obs: Observations) -> float:
    """Average squared residual of the difference quotients over the ``n`` observed increments."""
    resid = obs.responses - np.asarray(u(obs.design), dtype=float)
    return float(np.mean(resid**2))


@dataclass(frozen=True)
class RateSchedule:
    """Resolution schedule ``L1 T^{1/(1+2s)} <= 2^l <= L2 T^{1/(1+2s)}`` with ``T = n D``."""

    s: float
    L1: float = 0.5
    L2: float = 1.0

    def __post_init__(self):
        if self.s <= 0 or not 0 < self.L1 <= self.L2:
            raise ValueError("need s > 0 and 0 < L1 <= L2")

    def target(self, horizon: float) -> float:
        return horizon ** (1.0 / (1.0 + 2.0 * self.s))

    def epsilon(self, horizon: float) -> float:
        return epsilon_n(horizon, self.s)


def epsilon_n(horizon: float, s: float) -> float:
    """``(n D)^{-s/(1+2s)} log(n D)^{1/2}``."""
    return horizon ** (-s / (1.0 + 2.0 * s)) * math.sqrt(math.log(horizon))


@dataclass(frozen=True)
class Resolution:
    level: int
    clamped: bool = False
    widened: bool = False

    def __int__(self):
        return self.level

    def __index__(self):
        return self.level


def select_resolution(n: int, Delta: float, schedule: RateSchedule, max_level: int = 10) -> Resolution:
    """Level whose dimension ``2^l`` lies in the rate bracket.

    When the bracket holds two powers of two the larger one is taken.  An
    empty bracket is widened to the nearest power of two; levels outside
    ``[1, max_level]`` are clamped.  Both events are flagged.
    """
    horizon = n * Delta
    if horizon <= 1:
        raise ValueError("need n * Delta > 1")
    t = schedule.target(horizon)
    lo, hi = schedule.L1 * t, schedule.L2 * t
    tol = 1e-12
    top = math.floor(math.log2(hi) + tol)
    widened = False
    if 2.0**top < lo * (1 - tol):
        widened = True
        centre = math.log2(math.sqrt(lo * hi))
        top = int(round(centre))
    clamped = not 1 <= top <= max_level
    return Resolution(int(min(max(top, 1), max_level)), clamped, widened)


@dataclass(frozen=True)
class EstimatorConfig:
    """Either a fixed level or a rate schedule, with the sup-norm bound ``K0``."""

    basis: WaveletBasis
    K0: float
    level: int | None = None
    schedule: RateSchedule | None = None

    def __post_init__(self):
        if (self.level is None) == (self.schedule is None):
            raise ValueError("give exactly one of a fixed level or a rate schedule")
        if self.level is not None and not 0 <= self.level <= self.basis.max_level:
            raise ValueError(f"level {self.level} outside [0, {self.basis.max_level}]")

    def resolution(self, n: int, Delta: float) -> Resolution:
        if self.level is not None:
            return Resolution(self.level)
        return select_resolution(n, Delta, self.schedule, self.basis.max_level)


@dataclass(frozen=True, eq=False)
class FitResult:
    coeffs: CoefficientVector
    level: int
    gamma: float
    constraint_active: bool
    rank: int
    flags: dict = field(default_factory=dict)

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.coeffs.dim

    def to_dict(self) -> dict:
        out = self.coeffs.to_dict()
        out["metadata"] = {
            "l_n": self.level,
            "gamma_n_value": self.gamma,
            "constraint_active": self.constraint_active,
            "rank": self.rank,
            **self.flags,
        }
        return out


def fit_minimum_contrast(obs: Observations, config: EstimatorConfig) -> FitResult:
    """Least-squares drift fit on ``S_{l_n}`` projected onto the sup-norm ball ``K0 + 1``."""
    res = config.resolution(obs.n, obs.delta)
    level = res.level
    basis = config.basis
    dim = 2**level
    if obs.n < dim:
        raise ValueError(f"n = {obs.n} observations cannot identify {dim} coefficients at level {level}")
    design = basis.design_matrix(obs.design, level)
    y = obs.responses
    sol, _, rank, _ = scipy.linalg.lstsq(design, y, cond=RCOND, lapack_driver="gelsy")
    coeffs = CoefficientVector(level, sol)
    sup = float(np.max(np.abs(basis.expansion(coeffs, np.arange(CHECK_POINTS) / CHECK_POINTS))))
    cap = config.K0 + 1.0
    active = sup > cap
    if active:
        coeffs = coeffs.scaled(cap / sup)
    gamma = float(np.mean((y - design @ coeffs.values) ** 2))
    flags = {"clamped": res.clamped, "widened": res.widened, "rank_deficient": int(rank) < dim}
    return FitResult(coeffs, level, gamma, active, int(rank), flags)


def plug_in_test(bhat: CoefficientVector, b_ref, C: float, eps_n: float, basis: WaveletBasis) -> int:
    """``1{||bhat - b_ref||_2 > C eps_n}``."""
    if eps_n <= 0:
        raise ValueError("eps_n must be positive")
    return int(l2_distance(basis.synthesize(bhat), b_ref) > C * eps_n)
