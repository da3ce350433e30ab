"""Likelihoods for discretely and continuously observed paths.

The transition densities of the diffusion are replaced by the Euler
Gaussian ``N(x + b(x) D, sigma(x)^2 D)``, evaluated on the minimal periodic
representative of each increment.  Continuous-path comparisons between two
drifts use the Girsanov log-ratio computed by Ito sums on a fine grid.
"""

from __future__ import annotations

import math

import numpy as np

from ..model import DriftSpec, ModelParams, SigmaSpec
from ..paths import Observations, SamplePath


def wrap_increment(d):
    """Representative of ``d`` modulo 1 in ``(-1/2, 1/2]``."""
    d = np.asarray(d, dtype=float)
    return d - np.ceil(d - 0.5)


def _drift_function(b):
    return b.function if isinstance(b, DriftSpec) else b


def euler_log_transitions(b, sigma: SigmaSpec, x, y, Delta: float) -> np.ndarray:
    """Log Euler transition densities for increments ``x -> y``."""
    bf = _drift_function(b)
    xs = np.mod(x, 1.0)
    d = wrap_increment(np.asarray(y) - np.asarray(x))
    var = sigma.function(xs) ** 2 * Delta
    return -0.5 * np.log(2 * math.pi * var) - (d - bf(xs) * Delta) ** 2 / (2 * var)


def log_pseudo_likelihood(b, sigma: SigmaSpec, obs: Observations, include_initial: bool = True) -> float:
    """``log pi_b(X_0 mod 1) + sum_k log N(X_{(k+1)D} - X_{kD}; b(X_{kD}) D, sigma(X_{kD})^2 D)``."""
    x = obs.samples
    total = float(np.sum(euler_log_transitions(b, sigma, x[:-1], x[1:], obs.delta)))
    if include_initial:
        drift = b if isinstance(b, DriftSpec) else DriftSpec(b)
        total += float(ModelParams(drift, sigma).invariant_density().log(np.mod(x[0], 1.0)))
    return total


def girsanov_loglik_ratio(b0, b, sigma: SigmaSpec, path, fine_step: float | None = None) -> np.ndarray | float:
    """``int (b0 - b)/sigma^2 dX - 1/2 int (b0^2 - b^2)/sigma^2 dt`` by left-point Ito sums.

    ``path`` is a :class:`SamplePath` or an array of fine values whose last
    axis is time (several paths at once).
    """
    if isinstance(path, SamplePath):
        values, dt = path.values, path.fine_step
    else:
        values, dt = np.asarray(path, dtype=float), fine_step
        if dt is None:
            raise ValueError("fine_step is required for raw arrays")
    left = values[..., :-1]
    xs = np.mod(left, 1.0)
    f0, f1 = _drift_function(b0)(xs), _drift_function(b)(xs)
    s2 = sigma.function(xs) ** 2
    dX = np.diff(values, axis=-1)
    out = np.sum((f0 - f1) / s2 * dX, axis=-1) - 0.5 * np.sum((f0**2 - f1**2) / s2, axis=-1) * dt
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# affine drift families
# ---------------------------------------------------------------------------


def log_invariant_at(b_grid: np.ndarray, sig2_grid: np.ndarray, x0: float) -> float:
    """``log pi_b(x0)`` from drift and ``sigma^2`` values on ``i / N``, ``i = 0..N`` (trapezoid rule)."""
    N = b_grid.size - 1
    h = 1.0 / N
    rate = 2.0 * b_grid / sig2_grid
    I = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]))]) * h
    shift = I.max()
    eI = np.exp(-(I - shift))  # scaled e^{-I}
    J = np.concatenate([[0.0], np.cumsum(0.5 * (eI[1:] + eI[:-1]))]) * h
    inner = np.exp(I[-1]) * (J[-1] - J) + J
    unnorm = np.exp(I - shift) / sig2_grid * inner
    H = np.sum(0.5 * (unnorm[1:] + unnorm[:-1])) * h
    u = (x0 % 1.0) * N
    i = min(int(u), N - 1)
    w = u - i
    return float(np.log(unnorm[i] * (1 - w) + unnorm[i + 1] * w) - np.log(H))


class AffineLikelihood:
    """Euler pseudo-likelihood for drifts ``b = offset + G c`` as a quadratic in ``c``.

    ``loglik(c) = const + c . r - c . Q c / 2 + log pi_b(X_0)`` where ``G`` holds
    the feature values at the design points.
    """

    def __init__(self, obs: Observations, sigma: SigmaSpec, features, m: int, grid: int = 1024):
        self.m = m
        x = obs.design
        offset, G = features(x, m)
        s2 = sigma.function(x) ** 2
        d = wrap_increment(np.diff(obs.samples))
        D = obs.delta
        resid = d - offset * D
        w = 1.0 / s2
        self.r = G.T @ (w * resid)
        self.Q = D * (G.T * w) @ G
        self.const = float(np.sum(-0.5 * np.log(2 * math.pi * s2 * D) - w * resid**2 / (2 * D)))
        gx = np.arange(grid + 1) / grid
        self.grid_offset, self.grid_G = features(gx, m)
        self.grid_sig2 = sigma.function(gx) ** 2
        self.x0 = float(np.mod(obs.samples[0], 1.0))

    def __call__(self, c: np.ndarray) -> float:
        c = np.asarray(c, dtype=float)
        quad = self.const + float(c @ self.r) - 0.5 * float(c @ self.Q @ c)
        b_grid = self.grid_offset + self.grid_G @ c
        return quad + log_invariant_at(b_grid, self.grid_sig2, self.x0)
