"""Euler-Maruyama simulation of the periodic diffusion and path diagnostics.

Coefficients are tabulated once on a ``2**16`` periodic grid and linearly
interpolated at the periodized state inside a compiled kernel.  Each
replication owns a counter-based Philox stream seeded with
``base_seed + r``; the initial value is drawn first (inverse CDF of the
invariant law) and the Gaussian increments afterwards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .model import ModelParams, tabulate

COEFF_TABLE = 2**16


@dataclass(frozen=True)
class PathConfig:
    """Sampling design ``(n, Delta)`` with ``substeps`` Euler steps per ``Delta``.

    ``x0=None`` draws the initial value from the invariant law.
    """

    n: int
    Delta: float
    substeps: int = 50
    seed: int = 0
    L0: float = 10.0
    x0: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.Delta <= 0 or self.substeps < 1:
            raise ValueError("need n >= 1, Delta > 0 and substeps >= 1")

    @property
    def horizon(self) -> float:
        return self.n * self.Delta

    @property
    def fine_step(self) -> float:
        return self.Delta / self.substeps

    @property
    def regime_value(self) -> float:
        """``n Delta^2 log(1 / Delta)``."""
        return self.n * self.Delta**2 * math.log(1.0 / self.Delta) if self.Delta < 1 else math.inf

    def in_regime(self) -> bool:
        return self.regime_value <= self.L0 and self.horizon >= 1.0

    def check_regime(self):
        """Raise unless ``n Delta^2 log(1/Delta) <= L0`` and ``n Delta >= 1``."""
        if not self.in_regime():
            raise ValueError(
                f"design n={self.n}, Delta={self.Delta:g} is outside the high-frequency regime "
                f"(n Delta^2 log(1/Delta) = {self.regime_value:.4g}, L0 = {self.L0}, n Delta = {self.horizon:.4g})"
            )

    def replicate(self, r: int) -> "PathConfig":
        return PathConfig(self.n, self.Delta, self.substeps, self.seed + r, self.L0, self.x0)

    def to_dict(self) -> dict:
        return {"n": self.n, "Delta": self.Delta, "substeps": self.substeps, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Fine Euler path of the unperiodized process on ``[0, n Delta]``."""

    values: np.ndarray
    fine_step: float
    substeps: int
    Delta: float
    seed: int = 0

    @property
    def x0(self) -> float:
        return float(self.values[0])

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.fine_step

    @property
    def n(self) -> int:
        return (self.values.size - 1) // self.substeps

    def save(self, path):
        """Little-endian float64 values plus a JSON sidecar."""
        path = Path(path)
        self.values.astype("<f8").tofile(path)
        meta = {"n": self.n, "Delta": self.Delta, "substeps": self.substeps, "seed": self.seed}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta))

    @classmethod
    def load(cls, path) -> "SamplePath":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        values = np.fromfile(path, dtype="<f8")
        return cls(values, meta["Delta"] / meta["substeps"], meta["substeps"], meta["Delta"], meta["seed"])


@dataclass(frozen=True, eq=False)
class Observations:
    """Discrete data ``(X_0, X_Delta, ..., X_{n Delta})``."""

    delta: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("need at least two samples")
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.size - 1

    @property
    def horizon(self) -> float:
        return self.n * self.delta

    @property
    def design(self) -> np.ndarray:
        """Periodized design points ``X_{k Delta} mod 1``, ``k = 0..n-1``."""
        return np.mod(self.samples[:-1], 1.0)

    @property
    def responses(self) -> np.ndarray:
        """Difference quotients ``(X_{(k+1) Delta} - X_{k Delta}) / Delta``."""
        return np.diff(self.samples) / self.delta

    def to_csv(self, path):
        lines = ["k,t,x"]
        lines += [f"{k},{k * self.delta!r},{x!r}" for k, x in enumerate(self.samples.tolist())]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Observations":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        delta = float(data[1, 1] - data[0, 1]) if data.shape[0] > 1 else 1.0
        return cls(delta, data[:, 2])


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@numba.njit(cache=True, inline="always")
def _interp(table, x):
    n = table.size - 1
    u = (x - math.floor(x)) * n
    i = int(u)
    if i >= n:
        i = n - 1
    w = u - i
    return table[i] * (1.0 - w) + table[i + 1] * w


@numba.njit(cache=True)
def _euler(x0, btab, stab, dt, normals):
    out = np.empty(normals.size + 1)
    out[0] = x0
    sq = math.sqrt(dt)
    x = x0
    for i in range(normals.size):
        x = x + _interp(btab, x) * dt + _interp(stab, x) * sq * normals[i]
        out[i + 1] = x
    return out


@numba.njit(cache=True)
def _euler_endpoints(x0, btab, stab, dt, normals):
    """Many independent short paths; returns the full fine grid per path."""
    reps, steps = normals.shape
    out = np.empty((reps, steps + 1))
    sq = math.sqrt(dt)
    for r in range(reps):
        x = x0[r]
        out[r, 0] = x
        for i in range(steps):
            x = x + _interp(btab, x) * dt + _interp(stab, x) * sq * normals[r, i]
            out[r, i + 1] = x
    return out


@numba.njit(cache=True)
def _modulus(values, dt, max_lag, logm):
    best = 0.0
    n = values.size
    for lag in range(1, max_lag + 1):
        d = lag * dt
        w = math.sqrt(d) * (math.sqrt(math.log(1.0 / d)) + math.sqrt(logm))
        top = 0.0
        for i in range(n - lag):
            v = abs(values[i + lag] - values[i])
            if v > top:
                top = v
        if top / w > best:
            best = top / w
    return best


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


class CoefficientTables:
    """Drift and diffusion coefficient tables shared by all replications of a model."""

    def __init__(self, model: ModelParams, points: int = COEFF_TABLE):
        self.model = model
        self.b = tabulate(model.drift.function, points)
        self.sigma = tabulate(model.sigma.function, points)


def _tables(model: ModelParams) -> CoefficientTables:
    tabs = model.__dict__.get("_coefficient_tables")
    if tabs is None:
        tabs = model._coefficient_tables = CoefficientTables(model)
    return tabs


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def simulate_path(model: ModelParams, config: PathConfig, rng: np.random.Generator | None = None) -> SamplePath:
    """Euler-Maruyama path ``X_{t+d} = X_t + b(X_t mod 1) d + sigma(X_t mod 1) sqrt(d) xi``."""
    rng = _rng(config.seed) if rng is None else rng
    tabs = _tables(model)
    if config.x0 is None:
        x0 = float(model.invariant_density().sample(rng))
    else:
        x0 = float(config.x0)
    normals = rng.standard_normal(config.n * config.substeps)
    values = _euler(x0, tabs.b, tabs.sigma, config.fine_step, normals)
    return SamplePath(values, config.fine_step, config.substeps, config.Delta, config.seed)


def simulate_short_paths(model: ModelParams, config: PathConfig, reps: int) -> np.ndarray:
    """Fine grids of ``reps`` independent paths, replication ``r`` seeded with ``seed + r``.

    Returns an array of shape ``(reps, n * substeps + 1)``.
    """
    tabs = _tables(model)
    steps = config.n * config.substeps
    density = model.invariant_density()
    x0 = np.empty(reps)
    normals = np.empty((reps, steps))
    for r in range(reps):
        rng = _rng(config.seed + r)
        x0[r] = density.sample(rng) if config.x0 is None else config.x0
        normals[r] = rng.standard_normal(steps)
    return _euler_endpoints(x0, tabs.b, tabs.sigma, config.fine_step, normals)


def subsample(path: SamplePath, config: PathConfig | None = None) -> Observations:
    """Every ``substeps``-th node of the fine path."""
    substeps = path.substeps if config is None else config.substeps
    if config is not None and path.values.size != config.n * config.substeps + 1:
        raise ValueError("path length does not match the configuration")
    if (path.values.size - 1) % substeps:
        raise ValueError("path length is not a multiple of substeps")
    return Observations(path.Delta, path.values[::substeps].copy())


def observe(model: ModelParams, config: PathConfig) -> Observations:
    return subsample(simulate_path(model, config), config)


@dataclass(frozen=True)
class IncrementDecomposition:
    """``(X_{(k+1)D} - X_{kD}) / D = bterm + Z + R`` for ``k = 0..n-1``."""

    bterm: np.ndarray
    Z: np.ndarray
    R: np.ndarray


def increments_decomposition(path: SamplePath, obs: Observations, model: ModelParams) -> IncrementDecomposition:
    """Split difference quotients into drift, martingale and discretization parts.

    ``R_k`` is the left-endpoint Riemann sum of ``b(X_s) - b(X_{kD})`` over the
    fine steps of block ``k``, divided by ``D``.
    """
    p = path.substeps
    n = obs.n
    fine = path.values[: n * p + 1]
    bfine = model.drift.function(fine[:-1]).reshape(n, p)
    bterm = bfine[:, 0].copy()
    R = (bfine - bterm[:, None]).sum(axis=1) * path.fine_step / obs.delta
    Z = obs.responses - bterm - R
    return IncrementDecomposition(bterm, Z, R)


def modulus(delta, m: float = 1.0):
    """``w_m(d) = sqrt(d) (sqrt(log(1/d)) + sqrt(log m))``; ``w_1`` is used for ``m < 1``."""
    d = np.asarray(delta, dtype=float)
    logm = math.log(max(m, 1.0))
    return np.sqrt(d) * (np.sqrt(np.log(1.0 / d)) + math.sqrt(logm))


def holder_modulus_stat(path: SamplePath, m: float, mesh_cap: float) -> float:
    """``sup |X_t - X_s| / w_m(|t - s|)`` over fine-grid pairs with ``0 < |t - s| <= mesh_cap``."""
    if mesh_cap > math.exp(-2) * (1 + 1e-12):
        raise ValueError("mesh_cap must not exceed exp(-2)")
    max_lag = int(math.floor(mesh_cap / path.fine_step * (1 + 1e-12)))
    if max_lag < 1:
        raise ValueError("mesh_cap is below the fine step")
    return float(_modulus(path.values, path.fine_step, max_lag, math.log(max(m, 1.0))))
