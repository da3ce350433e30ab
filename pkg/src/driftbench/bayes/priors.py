"""Random wavelet-series priors on the drift.

A draw is ``b = sum_{l,k} tau_l u_{lk} psi_{lk}`` with ``u_{lk}`` i.i.d. from a
density ``q``.  Three families are provided:

* ``sieve``: the resolution ``m`` is random with mass ``h(m)``;
  ``tau_{-1} = tau_0 = 1`` and ``tau_l = 2^{-3l/2} l^{-2}``.
* ``known_smoothness``: fixed resolution, ``tau_l = 2^{-l(s+1/2)}``.
* ``invariant_density``: the series models ``H = log pi_b`` (up to a constant)
  with ``tau_l = 2^{-l(s+3/2)} l^{-2}`` and the drift is
  ``b = ((sigma^2)' + sigma^2 H') / 2``.

In all three cases the drift is affine in the coefficients, which the
sampler exploits (see :meth:`PriorSpec.features`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..model import DriftSpec, SigmaSpec
from ..wavelets import (
    CoefficientVector,
    PeriodicFunction,
    WaveletBasis,
    WaveletExpansion,
    central_difference,
    level_of,
)

SIEVE = "sieve"
KNOWN_SMOOTHNESS = "known_smoothness"
INVARIANT_DENSITY = "invariant_density"
KINDS = (SIEVE, KNOWN_SMOOTHNESS, INVARIANT_DENSITY)

Q_KINDS = ("uniform", "uniform_positive", "truncated_gaussian")

# the sum over k of |psi_lk| is sampled on a grid; this absorbs the gap to the true sup
SUP_SAFETY = 1.01


def sieve_tau(l: int) -> float:
    return 1.0 if l <= 0 else 2.0 ** (-1.5 * l) / l**2


def smoothness_tau(l: int, s: float) -> float:
    return 1.0 if l < 0 else 2.0 ** (-l * (s + 0.5))


def density_tau(l: int, s: float) -> float:
    return 1.0 if l <= 0 else 2.0 ** (-l * (s + 1.5)) / l**2


def sieve_level_mass(max_level: int) -> np.ndarray:
    """``h(m) = gamma exp(-2^m)`` for ``m = 1..max_level``, normalized; index ``m - 1``."""
    m = np.arange(1, max_level + 1)
    logw = -(2.0**m)
    w = np.exp(logw - logw.max())
    return w / w.sum()


@dataclass(frozen=True)
class CoefficientLaw:
    """The density ``q`` of the standardized coefficients ``u_{lk}``."""

    kind: str = "uniform"
    B: float = 1.0

    def __post_init__(self):
        if self.kind not in Q_KINDS:
            raise ValueError(f"unknown q kind {self.kind!r}")
        if self.B <= 0:
            raise ValueError("B must be positive")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return -self.B, self.B
        if self.kind == "uniform_positive":
            return 0.0, self.B
        return -(self.B + 1.0), self.B + 1.0

    @property
    def bound(self) -> float:
        """``sup |u|`` over the support."""
        return max(abs(v) for v in self.support)

    @property
    def _dist(self):
        lo, hi = self.support
        if self.kind == "truncated_gaussian":
            return stats.truncnorm(lo / self.B, hi / self.B, loc=0.0, scale=self.B)
        return stats.uniform(loc=lo, scale=hi - lo)

    @property
    def zeta(self) -> float:
        """``inf_{|x| <= B} q(x)``; zero when ``q`` vanishes somewhere on ``[-B, B]``."""
        if self.kind == "uniform_positive":
            return 0.0
        return float(self._dist.pdf(self.B))

    def logpdf(self, u) -> np.ndarray:
        return self._dist.logpdf(u)

    def cdf(self, u) -> np.ndarray:
        return self._dist.cdf(u)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "truncated_gaussian":
            return self._dist.rvs(size=size, random_state=rng)
        lo, hi = self.support
        return rng.uniform(lo, hi, size)

    def to_dict(self) -> dict:
        return {"q_kind": self.kind, "B": self.B}


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """A wavelet-series prior.

    Parameters
    ----------
    kind : {"sieve", "known_smoothness", "invariant_density"}
    basis : WaveletBasis
    q : CoefficientLaw
    s : float, optional
        Smoothness used by the level weights (not needed by the sieve).
    level : int, optional
        Fixed resolution of the non-sieve priors.
    Lbar : int
        Largest resolution the sieve may visit.
    sigma : SigmaSpec, optional
        Diffusion coefficient; required to map ``H`` to a drift.
    """

    kind: str
    basis: WaveletBasis
    q: CoefficientLaw = field(default_factory=CoefficientLaw)
    s: float | None = None
    level: int | None = None
    Lbar: int = 6
    sigma: SigmaSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind != SIEVE:
            if self.s is None or self.level is None:
                raise ValueError(f"{self.kind} prior needs s and level")
            if self.level > self.basis.max_level:
                raise ValueError("level above basis.max_level")
        if self.Lbar > self.basis.max_level:
            raise ValueError("Lbar above basis.max_level")
        if self.sigma is None:
            object.__setattr__(self, "sigma", SigmaSpec.constant(1.0))

    # -- weights -------------------------------------------------------------

    def tau(self, l: int) -> float:
        if self.kind == SIEVE:
            return sieve_tau(l)
        if self.kind == KNOWN_SMOOTHNESS:
            return smoothness_tau(l, self.s)
        return density_tau(l, self.s)

    def tau_vector(self, m: int) -> np.ndarray:
        return np.array([self.tau(level_of(j)[0]) for j in range(2**m)])

    @property
    def levels(self) -> list[int]:
        """Resolutions with positive prior mass."""
        return list(range(1, self.Lbar + 1)) if self.kind == SIEVE else [self.level]

    def level_logmass(self, m: int) -> float:
        if self.kind != SIEVE:
            return 0.0 if m == self.level else -math.inf
        if not 1 <= m <= self.Lbar:
            return -math.inf
        return float(np.log(sieve_level_mass(self.Lbar)[m - 1]))

    @property
    def zeta(self) -> float:
        return self.q.zeta

    # -- sampling ------------------------------------------------------------

    def sample(self, rng: np.random.Generator, m: int | None = None) -> CoefficientVector:
        """Draw series coefficients ``tau_l u_{lk}``; the sieve draws ``m`` from ``h`` first."""
        if m is None:
            if self.kind == SIEVE:
                m = int(rng.choice(np.arange(1, self.Lbar + 1), p=sieve_level_mass(self.Lbar)))
            else:
                m = self.level
        u = self.q.sample(rng, 2**m)
        return CoefficientVector(m, self.tau_vector(m) * u)

    def standardize(self, c: CoefficientVector) -> np.ndarray:
        return c.values / self.tau_vector(c.m)

    def log_prior(self, c: CoefficientVector) -> float:
        """Log density of the draw with respect to Lebesgue measure on the ``u`` scale."""
        return self.level_logmass(c.m) + float(np.sum(self.q.logpdf(self.standardize(c))))

    # -- drift map -----------------------------------------------------------

    def drift_function(self, c: CoefficientVector) -> PeriodicFunction:
        if self.kind == INVARIANT_DENSITY:
            return drift_from_logdensity(c, self.sigma, self.basis, certify=False)
        return self.basis.synthesize(c)

    def drift(self, c: CoefficientVector) -> DriftSpec:
        """Drift of a draw, certified against the prior's implied ``K0``."""
        K0 = self.implied_K0(c.m)
        if self.kind == INVARIANT_DENSITY:
            return drift_from_logdensity(c, self.sigma, self.basis, K0=K0)
        return DriftSpec.from_coefficients(self.basis, c, K0=K0)

    def features(self, x, m: int) -> tuple[np.ndarray, np.ndarray]:
        """``(offset, G)`` with ``b(x) = offset + G @ c`` for coefficient vectors of resolution ``m``."""
        x = np.asarray(x, dtype=float)
        if self.kind != INVARIANT_DENSITY:
            return np.zeros(x.size), self.basis.design_matrix(x, m)
        sig = self.sigma.function(x)
        dsig = _sigma_derivative(self.sigma)(x)
        G = 0.5 * (sig**2)[:, None] * self.basis.design_matrix(x, m, deriv=1)
        return sig * dsig, G

    # -- support certificate ---------------------------------------------------

    def implied_K0(self, m: int | None = None) -> float:
        """A ``K0`` with ``||b||_inf + ||b'||_inf <= K0`` for every draw of resolution at most ``m``."""
        m = max(self.levels) if m is None else m
        U = self.q.bound
        consts = lambda d: sum(
            self.tau(l) * U * self.basis.level_sup_constant(l, d) for l in range(-1, m)
        )
        if self.kind != INVARIANT_DENSITY:
            return SUP_SAFETY * (consts(0) + consts(1))
        x = np.arange(4096) / 4096
        sig = self.sigma.function(x)
        d1 = _sigma_derivative(self.sigma)
        dsig = d1(x)
        d2 = d1.derivative or central_difference(d1)
        base_b = np.max(np.abs(sig * dsig))
        base_db = np.max(np.abs(dsig**2 + sig * d2(x)))
        sU2 = np.max(sig**2)
        sup_b = base_b + 0.5 * sU2 * consts(1)
        sup_db = base_db + np.max(np.abs(sig * dsig)) * consts(1) + 0.5 * sU2 * consts(2)
        return SUP_SAFETY * float(sup_b + sup_db)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "Lbar": self.Lbar, **self.q.to_dict(), "basis": self.basis.describe()}
        if self.s is not None:
            out["s"] = self.s
        if self.level is not None:
            out["level"] = self.level
        return out

    @classmethod
    def from_dict(cls, data: dict, sigma: SigmaSpec | None = None) -> "PriorSpec":
        basis = WaveletBasis.from_dict(data.get("basis", {}))
        q = CoefficientLaw(data.get("q_kind", "uniform"), float(data.get("B", 1.0)))
        return cls(
            data["kind"], basis, q, s=data.get("s"), level=data.get("level"), Lbar=int(data.get("Lbar", 6)), sigma=sigma
        )


def _sigma_derivative(sigma: SigmaSpec) -> PeriodicFunction:
    return sigma.function.derivative or central_difference(sigma.function)


def drift_from_logdensity(
    H,
    sigma: SigmaSpec,
    basis: WaveletBasis | None = None,
    K0: float | None = None,
    certify: bool = True,
) -> DriftSpec | PeriodicFunction:
    """Drift ``b = ((sigma^2)' + sigma^2 H') / 2`` whose invariant density is proportional to ``e^H``.

    ``H`` is a coefficient vector (with ``basis``) or a differentiable periodic function.
    With ``certify=False`` the bare periodic function is returned.
    """
    if isinstance(H, CoefficientVector):
        if basis is None:
            raise ValueError("a basis is needed to synthesize H")
        H = basis.synthesize(H)
    dH = H.derivative if isinstance(H, PeriodicFunction) else None
    if dH is None:
        dH = central_difference(H)
    d2H = dH.derivative if isinstance(dH, (PeriodicFunction, WaveletExpansion)) else None
    sig = sigma.function
    dsig = _sigma_derivative(sigma)
    d2sig = dsig.derivative or central_difference(dsig)

    def b(x):
        s = sig(x)
        return s * dsig(x) + 0.5 * s**2 * dH(x)

    def db(x):
        s, ds = sig(x), dsig(x)
        second = d2H(x) if d2H is not None else central_difference(dH)(x)
        return ds**2 + s * d2sig(x) + s * ds * dH(x) + 0.5 * s**2 * second

    fn = PeriodicFunction(b, derivative=PeriodicFunction(db), label="drift-from-log-density")
    if not certify:
        return fn
    return DriftSpec(fn, K0=K0)
