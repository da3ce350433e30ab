"""Scalar periodic diffusion model ``dX = b(X) dt + sigma(X) dW``.

Holds drift and diffusion specifications, membership in the parameter set
``Theta(K0)`` (``||b||_inf + ||b'||_inf <= K0``), the integrated drift
``I_b``, the invariant density of the periodized process, its closed-form
bounds, the scale function and divergences between invariant densities.

All integrals are computed on a uniform grid of ``grid_size + 1`` nodes on
``[0, 1]``.  Between nodes, ``I_b`` and ``S`` are evaluated by cubic Hermite
interpolation (their derivatives are known at the nodes) and densities by
linear interpolation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from .wavelets import (
    CoefficientVector,
    PeriodicFunction,
    WaveletBasis,
    WaveletExpansion,
    central_difference,
    closed_form,
    constant,
)

CHECK_POINTS = 4096
DEFAULT_GRID = 4096
LOG_DOMAIN_THRESHOLD = 500.0


def _grid(points: int) -> np.ndarray:
    return np.arange(points) / points


def tabulate(f, n: int) -> np.ndarray:
    """Values of a periodic function at ``i / n``, ``i = 0..n``."""
    if isinstance(f, WaveletExpansion) and not n & (n - 1) and n >= f.coeffs.dim:
        vals = f.samples(n)
    else:
        vals = np.asarray(f(_grid(n)), dtype=float)
    return np.append(vals, vals[0])


def theta_norm(function, derivative, points: int = CHECK_POINTS) -> float:
    """``||b||_inf + ||b'||_inf`` on a uniform check grid."""
    x = _grid(points)
    return float(np.max(np.abs(function(x))) + np.max(np.abs(derivative(x))))


def check_theta_membership(drift, K0: float, derivative=None, points: int = CHECK_POINTS) -> bool:
    """Whether a drift lies in ``Theta(K0)`` on the check grid."""
    if isinstance(drift, DriftSpec):
        derivative = drift.derivative if derivative is None else derivative
        drift = drift.function
    if derivative is None:
        derivative = getattr(drift, "derivative", None) or central_difference(drift)
    return theta_norm(drift, derivative, points) <= K0 * (1 + 1e-12)


# ---------------------------------------------------------------------------
# specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """A periodic drift with a ``Theta(K0)`` certificate.

    ``K0=None`` certifies the drift with its own grid norm.  A supplied ``K0``
    is checked and a ``ValueError`` raised if the drift is outside
    ``Theta(K0)``.
    """

    function: PeriodicFunction
    derivative: PeriodicFunction | None = None
    K0: float | None = None
    source: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        fn = self.function
        if not isinstance(fn, PeriodicFunction):
            fn = PeriodicFunction(fn)
            object.__setattr__(self, "function", fn)
        deriv = self.derivative
        if deriv is None:
            deriv = fn.derivative or central_difference(fn)
        elif not isinstance(deriv, PeriodicFunction):
            deriv = PeriodicFunction(deriv)
        object.__setattr__(self, "derivative", deriv)
        norm = theta_norm(fn, deriv)
        if self.K0 is None:
            object.__setattr__(self, "K0", norm)
        elif norm > self.K0 * (1 + 1e-12):
            raise ValueError(f"drift has ||b||_inf + ||b'||_inf = {norm:.6g} > K0 = {self.K0:.6g}")

    def __call__(self, x):
        return self.function(x)

    @property
    def theta_norm(self) -> float:
        return theta_norm(self.function, self.derivative)

    @classmethod
    def closed_form(cls, expr: str, K0: float | None = None) -> "DriftSpec":
        return cls(closed_form(expr), K0=K0, source={"type": "closed_form", "expr": expr})

    @classmethod
    def constant(cls, value: float, K0: float | None = None) -> "DriftSpec":
        return cls(constant(value), K0=K0, source={"type": "constant", "value": float(value)})

    @classmethod
    def from_coefficients(cls, basis: WaveletBasis, coeffs: CoefficientVector, K0: float | None = None) -> "DriftSpec":
        source = {"type": "wavelet", "basis": basis.describe(), **coeffs.to_dict()}
        return cls(basis.synthesize(coeffs), K0=K0, source=source)

    def to_dict(self) -> dict:
        if self.source is None:
            raise ValueError("drift has no serializable representation")
        return dict(self.source)

    @classmethod
    def from_dict(cls, data: dict, K0: float | None = None) -> "DriftSpec":
        kind = data.get("type")
        if kind == "closed_form":
            return cls.closed_form(data["expr"], K0)
        if kind == "constant":
            return cls.constant(data["value"], K0)
        if kind == "wavelet":
            basis = WaveletBasis.from_dict(data.get("basis", {}))
            return cls.from_coefficients(basis, CoefficientVector.from_dict(data), K0)
        raise ValueError(f"unknown drift type {kind!r}")


@dataclass(frozen=True, eq=False)
class SigmaSpec:
    """A known periodic diffusion coefficient bounded in ``[sigma_L, sigma_U]``."""

    function: PeriodicFunction
    sigma_L: float | None = None
    sigma_U: float | None = None
    source: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        fn = self.function
        if not isinstance(fn, PeriodicFunction):
            fn = PeriodicFunction(fn)
            object.__setattr__(self, "function", fn)
        vals = fn(_grid(CHECK_POINTS))
        lo, hi = float(vals.min()), float(vals.max())
        if self.sigma_L is None:
            object.__setattr__(self, "sigma_L", lo)
        if self.sigma_U is None:
            object.__setattr__(self, "sigma_U", hi)
        if self.sigma_L <= 0:
            raise ValueError("sigma must be bounded away from zero")
        tol = 1e-12 * max(1.0, abs(hi))
        if lo < self.sigma_L - tol or hi > self.sigma_U + tol:
            raise ValueError(f"sigma range [{lo:.6g}, {hi:.6g}] exceeds [{self.sigma_L}, {self.sigma_U}]")
        self._check_boundary()

    def _check_boundary(self):
        # the raw evaluator at 0 and 1 must agree for sigma, sigma', sigma''
        ends = np.array([0.0, 1.0])
        f = self.function
        for level in range(3):
            if f is None:
                break
            raw = np.broadcast_to(np.asarray(f._func(ends), dtype=float), ends.shape)
            if abs(raw[0] - raw[1]) > 1e-8:
                raise ValueError(f"sigma derivative {level} is not periodic")
            f = f.derivative

    def __call__(self, x):
        return self.function(x)

    @property
    def second_derivative(self) -> PeriodicFunction | None:
        d = self.function.derivative
        return None if d is None else d.derivative

    @property
    def is_constant(self) -> bool:
        return self.sigma_L == self.sigma_U

    @classmethod
    def constant(cls, value: float = 1.0) -> "SigmaSpec":
        return cls(constant(value), source={"type": "constant", "value": float(value)})

    @classmethod
    def closed_form(cls, expr: str) -> "SigmaSpec":
        return cls(closed_form(expr), source={"type": "closed_form", "expr": expr})

    def to_dict(self) -> dict:
        if self.source is None:
            raise ValueError("sigma has no serializable representation")
        return dict(self.source)

    @classmethod
    def from_dict(cls, data: dict) -> "SigmaSpec":
        kind = data.get("type")
        if kind == "constant":
            return cls.constant(data["value"])
        if kind == "closed_form":
            return cls.closed_form(data["expr"])
        raise ValueError(f"unknown sigma type {kind!r}")


@dataclass(frozen=True)
class InvariantDensity:
    """Invariant density of the periodized process on a uniform grid.

    Attributes
    ----------
    grid : ndarray
        ``grid_size + 1`` nodes ``i / grid_size``.
    values : ndarray
        Density at the nodes (first and last coincide).
    normalizer : float
        ``H_b``.
    cdf : ndarray
        Cumulative trapezoid integral of ``values``; ``cdf[0] = 0``, ``cdf[-1] = 1``.
    """

    grid: np.ndarray
    values: np.ndarray
    normalizer: float
    cdf: np.ndarray

    def __call__(self, x):
        return np.interp(np.mod(x, 1.0), self.grid, self.values)

    def log(self, x):
        return np.log(self(x))

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def expectation(self, f) -> float:
        """``int f pi`` for a periodic ``f`` by the trapezoid rule."""
        fv = np.asarray(f(self.grid[:-1]), dtype=float)
        return float(np.sum(fv * self.values[:-1]) * self.h)

    def quantile(self, u) -> np.ndarray:
        """Inverse CDF by binary search and linear interpolation within a cell."""
        u = np.asarray(u, dtype=float)
        i = np.searchsorted(self.cdf, u, side="right") - 1
        i = np.clip(i, 0, self.grid.size - 2)
        lo, hi = self.cdf[i], self.cdf[i + 1]
        width = np.where(hi > lo, hi - lo, 1.0)
        frac = np.clip((u - lo) / width, 0.0, 1.0)
        return self.grid[i] + frac * self.h

    def sample(self, rng: np.random.Generator, size=None):
        x = self.quantile(rng.random(size))
        return np.minimum(x, np.nextafter(1.0, 0.0))


def sample_invariant(density: InvariantDensity, rng: np.random.Generator, size=None):
    """Draw from the invariant law by inverse CDF."""
    return density.sample(rng, size)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


def _log_phi(d: np.ndarray) -> np.ndarray:
    """``log((e^d - 1) / d)``, stable for all ``d`` (``0`` at ``d = 0``)."""
    d = np.asarray(d, dtype=float)
    out = np.zeros_like(d)
    pos, neg = d > 1e-12, d < -1e-12
    out[pos] = d[pos] + np.log(-np.expm1(-d[pos]) / d[pos])
    out[neg] = np.log(np.expm1(d[neg]) / d[neg])
    small = ~(pos | neg)
    out[small] = 0.5 * d[small]
    return out


def _log_unnormalized_density(I: np.ndarray, h: float) -> np.ndarray:
    """``log(e^{I(x)} (e^{I(1)} int_x^1 e^{-I} + int_0^x e^{-I}))`` on the grid, in the log domain.

    ``I`` is taken piecewise linear between nodes so each cell integral of
    ``e^{-I}`` is exact; used when ``|I|`` is too large for direct evaluation.
    """
    d = np.diff(I)
    N = d.size
    left = np.full(N + 1, -np.inf)  # log int_0^{x_i} e^{I_i - I(y)} dy
    seg_left = math.log(h) + _log_phi(d)
    for i in range(N):
        left[i + 1] = np.logaddexp(left[i] + d[i], seg_left[i])
    right = np.full(N + 1, -np.inf)  # log int_{x_i}^1 e^{I_i + I(1) - I(y)} dy
    seg_right = I[-1] + math.log(h) + _log_phi(-d)
    for i in range(N, 0, -1):
        right[i - 1] = np.logaddexp(right[i] - d[i - 1], seg_right[i - 1])
    return np.logaddexp(left, right)


class ModelParams:
    """Drift, diffusion coefficient and optional smoothness data ``(s, A0)``.

    Parameters
    ----------
    drift : DriftSpec
    sigma : SigmaSpec
    s, A0 : float, optional
        Besov smoothness and radius; checked against the wavelet coefficients
        of the drift when both are given.
    grid_size : int
        Number of intervals of the integration grid.
    """

    def __init__(
        self,
        drift: DriftSpec,
        sigma: SigmaSpec | None = None,
        s: float | None = None,
        A0: float | None = None,
        grid_size: int = DEFAULT_GRID,
        basis: WaveletBasis | None = None,
    ):
        self.drift = drift
        self.sigma = SigmaSpec.constant(1.0) if sigma is None else sigma
        self.s = s
        self.A0 = A0
        self.grid_size = int(grid_size)
        if self.grid_size < 64:
            raise ValueError("grid_size must be at least 64")
        if s is not None and A0 is not None:
            from .wavelets import besov_norm

            basis = basis or WaveletBasis(max_level=8)
            norm = besov_norm(basis.analyze(self.drift.function, basis.max_level), s)
            if norm > A0 * (1 + 1e-9):
                raise ValueError(f"Besov norm {norm:.6g} exceeds A0 = {A0}")

    @property
    def K0(self) -> float:
        return float(self.drift.K0)

    @cached_property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size + 1)

    @cached_property
    def _tables(self) -> dict:
        x = self.grid
        b = tabulate(self.drift.function, self.grid_size)
        sig = tabulate(self.sigma.function, self.grid_size)
        rate = 2.0 * b / sig**2
        I = cumulative_simpson(rate, x=x, initial=0.0)
        with np.errstate(over="ignore"):
            eI = np.exp(-I)
        S = cumulative_simpson(eI, x=x, initial=0.0)
        return {"b": b, "sigma": sig, "rate": rate, "I": I, "S": S, "expmI": eI}

    @cached_property
    def _I_spline(self) -> CubicHermiteSpline:
        t = self._tables
        return CubicHermiteSpline(self.grid, t["I"], t["rate"])

    @cached_property
    def _S_spline(self) -> CubicHermiteSpline:
        t = self._tables
        return CubicHermiteSpline(self.grid, t["S"], t["expmI"])

    def integrated_drift(self, x) -> np.ndarray:
        """``I_b(x) = int_0^x 2 b / sigma^2`` for ``x`` in ``[0, 1]``."""
        return self._I_spline(np.asarray(x, dtype=float))

    @cached_property
    def _density(self) -> InvariantDensity:
        t = self._tables
        x = self.grid
        I, J = t["I"], t["S"]
        if np.max(np.abs(I)) < LOG_DOMAIN_THRESHOLD:
            total = J[-1]
            inner = np.exp(I[-1]) * (total - J) + J
            unnorm = np.exp(I) / t["sigma"] ** 2 * inner
            H = float(np.trapezoid(unnorm, x))
            values = unnorm / H
        else:
            logu = _log_unnormalized_density(I, x[1] - x[0]) - 2.0 * np.log(t["sigma"])
            shift = logu.max()
            scaled = np.exp(logu - shift)
            area = float(np.trapezoid(scaled, x))
            with np.errstate(over="ignore"):
                H = float(area * np.exp(shift))
            values = scaled / area
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(x))])
        cdf /= cdf[-1]
        for arr in (values, cdf):
            arr.setflags(write=False)
        return InvariantDensity(x, values, H, cdf)

    def invariant_density(self, grid_size: int | None = None) -> InvariantDensity:
        if grid_size is None or grid_size == self.grid_size:
            return self._density
        return self.with_grid(grid_size)._density

    def with_grid(self, grid_size: int) -> "ModelParams":
        return ModelParams(self.drift, self.sigma, grid_size=grid_size)

    def density_bounds(self) -> tuple[float, float]:
        return density_bounds(self)

    @property
    def scale_ratio(self) -> float:
        """``q = exp(-I_b(1))``, the factor relating ``S`` on consecutive periods."""
        return float(np.exp(-self._tables["I"][-1]))

    def scale_function(self, x) -> np.ndarray:
        """Scale function ``S(x) = int_0^x exp(-I_b)``, extended to the real line.

        For ``x = j + r`` with integer ``j`` and ``r`` in ``[0, 1)``,
        ``S(x) = S(1) (1 - q^j) / (1 - q) + q^j S(r)`` with ``q = exp(-I_b(1))``.
        """
        x = np.asarray(x, dtype=float)
        j = np.floor(x)
        r = x - j
        S1 = self._tables["S"][-1]
        q = self.scale_ratio
        qj = q**j
        geom = j if abs(q - 1.0) < 1e-14 else (1.0 - qj) / (1.0 - q)
        return S1 * geom + qj * self._S_spline(r)

    def scale_inverse(self, y, tol: float = 1e-12) -> np.ndarray:
        """Inverse of ``S`` on ``[0, S(1)]`` by vectorized bisection."""
        y = np.asarray(y, dtype=float)
        S1 = self._tables["S"][-1]
        if np.any(y < -tol) or np.any(y > S1 + tol):
            raise ValueError("scale_inverse is defined on [0, S(1)]")
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        while np.max(hi - lo, initial=0.0) > tol:
            mid = 0.5 * (lo + hi)
            below = self._S_spline(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def to_dict(self) -> dict:
        out = {"drift": self.drift.to_dict(), "sigma": self.sigma.to_dict(), "K0": self.K0}
        if self.s is not None:
            out["s"] = self.s
        if self.A0 is not None:
            out["A0"] = self.A0
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        drift = DriftSpec.from_dict(data["drift"], data.get("K0"))
        sigma = SigmaSpec.from_dict(data.get("sigma", {"type": "constant", "value": 1.0}))
        return cls(drift, sigma, s=data.get("s"), A0=data.get("A0"), grid_size=data.get("grid_size", DEFAULT_GRID))

    @classmethod
    def load(cls, path) -> "ModelParams":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def __repr__(self):
        return f"ModelParams(drift={self.drift.function!r}, K0={self.K0:.4g}, sigma=[{self.sigma.sigma_L}, {self.sigma.sigma_U}])"


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------


def integrated_drift(model: ModelParams, x):
    return model.integrated_drift(x)


def invariant_density(model: ModelParams, grid_size: int | None = None) -> InvariantDensity:
    return model.invariant_density(grid_size)


def density_bounds(model: ModelParams) -> tuple[float, float]:
    """Closed-form ``(pi_L, pi_U)`` with ``pi_L = 1 / pi_U = sigma_L^2 sigma_U^-2 exp(-12 K0 / sigma_L^2)``."""
    sL, sU = model.sigma.sigma_L, model.sigma.sigma_U
    expo = 12.0 * model.K0 / sL**2
    lower = sL**2 / sU**2 * np.exp(-expo)
    with np.errstate(over="ignore"):
        upper = sU**2 / sL**2 * np.exp(expo)
    return float(lower), float(upper)


def scale_function(model: ModelParams, x):
    return model.scale_function(x)


def scale_function_inverse(model: ModelParams, y):
    return model.scale_inverse(y)


def _paired_densities(model0: ModelParams, model: ModelParams):
    n = max(model0.grid_size, model.grid_size)
    p0 = model0.invariant_density(n)
    p1 = model.invariant_density(n)
    return p0, p1


def kl_invariant(model0: ModelParams, model: ModelParams) -> float:
    """``K(pi_0, pi_b) = int pi_0 log(pi_0 / pi_b)``."""
    p0, p1 = _paired_densities(model0, model)
    integrand = p0.values * np.log(p0.values / p1.values)
    return float(np.trapezoid(integrand, p0.grid))


def hellinger_invariant(model0: ModelParams, model: ModelParams) -> float:
    """Squared Hellinger distance ``int (sqrt(pi_0) - sqrt(pi_b))^2``."""
    p0, p1 = _paired_densities(model0, model)
    return float(np.trapezoid((np.sqrt(p0.values) - np.sqrt(p1.values)) ** 2, p0.grid))


def density_l2(model0: ModelParams, model: ModelParams) -> float:
    p0, p1 = _paired_densities(model0, model)
    return float(np.sqrt(np.trapezoid((p0.values - p1.values) ** 2, p0.grid)))
