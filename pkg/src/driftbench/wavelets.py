"""Periodized wavelet approximation spaces on the unit circle.

A resolution-``m`` space ``S_m`` is spanned by the constant function and the
periodized wavelets ``psi_{lk}``, ``0 <= l < m``, ``0 <= k < 2**l``; its
dimension is ``2**m``.  Coefficient vectors are stored flat: slot 0 holds the
constant (``l = -1``) and slot ``2**l + k`` holds ``psi_{lk}``.

Two families are available:

* ``"daubechies"``: periodized Daubechies wavelets with ``order`` vanishing
  moments.  The mother wavelet is tabulated exactly at the dyadic points
  ``i / 2**table_level`` by two-scale refinement from its integer values and
  linearly interpolated in between.
* ``"fourier"``: real trigonometric polynomials, slot ``j`` holding
  ``sqrt(2) cos(2 pi (j+1)/2 x)`` for odd ``j`` and ``sqrt(2) sin(2 pi j/2 x)``
  for even ``j``.

Inner products use the composite trapezoid rule on ``quad_points`` uniform
nodes, which for periodic integrands is the plain grid average.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
import pywt

DAUBECHIES = "daubechies"
FOURIER = "fourier"
FAMILIES = (DAUBECHIES, FOURIER)


def flat_index(l: int, k: int) -> int:
    """Position of ``psi_{lk}`` in a flat coefficient array."""
    if l == -1:
        if k != 0:
            raise IndexError("the constant function only has k = 0")
        return 0
    if l < -1 or not 0 <= k < 2**l:
        raise IndexError(f"wavelet index ({l}, {k}) out of range")
    return 2**l + k


def level_of(j: int) -> tuple[int, int]:
    """Inverse of :func:`flat_index`."""
    if j == 0:
        return -1, 0
    l = int(j).bit_length() - 1
    return l, j - 2**l


def _as_points(x) -> np.ndarray:
    return np.mod(np.asarray(x, dtype=float).ravel(), 1.0)


# ---------------------------------------------------------------------------
# periodic functions
# ---------------------------------------------------------------------------


class PeriodicFunction:
    """A 1-periodic real function, vectorized over numpy arrays.

    ``func`` only ever sees points reduced into ``[0, 1)``.  Derivatives are
    optional; when present they are themselves periodic functions.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        derivative: "PeriodicFunction | Callable | None" = None,
        second_derivative: "PeriodicFunction | Callable | None" = None,
        label: str = "",
    ):
        self._func = func
        if derivative is not None and not isinstance(derivative, PeriodicFunction):
            derivative = PeriodicFunction(derivative)
        if second_derivative is not None and not isinstance(second_derivative, PeriodicFunction):
            second_derivative = PeriodicFunction(second_derivative)
        if derivative is not None and second_derivative is not None and derivative._derivative is None:
            derivative._derivative = second_derivative
        self._derivative = derivative
        self.label = label

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        vals = np.asarray(self._func(np.mod(xs, 1.0)), dtype=float)
        return np.broadcast_to(vals, xs.shape).copy() if vals.shape != xs.shape else vals

    @property
    def derivative(self) -> "PeriodicFunction | None":
        return self._derivative

    def __repr__(self):
        return f"PeriodicFunction({self.label or self._func!r})"


def constant(value: float) -> PeriodicFunction:
    value = float(value)
    zero = PeriodicFunction(lambda x: np.zeros_like(x), label="0")
    zero._derivative = zero
    return PeriodicFunction(lambda x: np.full_like(x, value), derivative=zero, label=repr(value))


def closed_form(expr: str) -> PeriodicFunction:
    """Parse an expression in ``x`` (sympy syntax) with exact derivatives.

    >>> f = closed_form("pi*cos(2*pi*x)")
    >>> float(f.derivative(0.25))  # -2 pi^2 sin(pi/2)
    -19.739208802178716
    """
    import sympy

    x = sympy.Symbol("x", real=True)
    e = sympy.sympify(expr, locals={"x": x})
    d1 = sympy.diff(e, x)
    d2 = sympy.diff(d1, x)

    def make(ex):
        fn = sympy.lambdify(x, ex, modules="numpy")
        return lambda t: np.asarray(fn(t), dtype=float)

    f2 = PeriodicFunction(make(d2), label=str(d2))
    f1 = PeriodicFunction(make(d1), derivative=f2, label=str(d1))
    return PeriodicFunction(make(e), derivative=f1, label=str(e))


def central_difference(f: Callable, h: float = 1e-4) -> PeriodicFunction:
    """Fourth-order central difference derivative of a periodic function."""

    def df(x):
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)

    return PeriodicFunction(df, label="central-difference")


# ---------------------------------------------------------------------------
# Daubechies tables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def daubechies_tables(order: int, table_level: int = 16):
    """Exact dyadic values of the Daubechies scaling function and wavelet.

    Returns ``(phi, psi, support)`` with both arrays sampled at
    ``i / 2**table_level`` on ``[0, support]``, ``support = 2 * order - 1``.
    Integer values of ``phi`` come from the eigenvector of the two-scale
    operator; finer dyadic values follow from the refinement equation.
    """
    h = np.asarray(pywt.Wavelet(f"db{order}").rec_lo, dtype=float)
    taps = len(h)
    support = taps - 1
    root2 = np.sqrt(2.0)

    ops = np.zeros((support + 1, support + 1))
    for i in range(support + 1):
        for j in range(support + 1):
            if 0 <= 2 * i - j < taps:
                ops[i, j] = root2 * h[2 * i - j]
    eigvals, eigvecs = np.linalg.eig(ops)
    phi = np.real(eigvecs[:, np.argmin(np.abs(eigvals - 1.0))])
    phi = phi / phi.sum()

    for lev in range(1, table_level + 1):
        half = 2 ** (lev - 1)
        finer = np.zeros(support * 2**lev + 1)
        finer[::2] = phi
        odd = np.arange(1, finer.size, 2)
        for k in range(taps):
            src = odd - k * half
            ok = (src >= 0) & (src < phi.size)
            finer[odd[ok]] += root2 * h[k] * phi[src[ok]]
        phi = finer

    g = np.array([(-1) ** k * h[taps - 1 - k] for k in range(taps)])
    scale = 2**table_level
    nodes = np.arange(phi.size)
    psi = np.zeros_like(phi)
    for k in range(taps):
        src = 2 * nodes - k * scale
        ok = (src >= 0) & (src < phi.size)
        psi[nodes[ok]] += root2 * g[k] * phi[src[ok]]
    phi.setflags(write=False)
    psi.setflags(write=False)
    return phi, psi, support


def _interp_table(table: np.ndarray, t: np.ndarray, scale: int) -> np.ndarray:
    u = t * scale
    i = np.floor(u).astype(np.int64)
    w = u - i
    out = np.zeros_like(t)
    ok = (i >= 0) & (i < table.size - 1)
    ii = i[ok]
    out[ok] = table[ii] * (1.0 - w[ok]) + table[ii + 1] * w[ok]
    # exact right endpoint
    out[i == table.size - 1] = table[-1]
    return out


# ---------------------------------------------------------------------------
# coefficient vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Wavelet coefficients of an element of ``S_m`` in flat layout."""

    m: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if self.m < 0 or vals.size != 2**self.m:
            raise ValueError(f"resolution {self.m} needs {2**self.m} coefficients, got {vals.size}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, m: int) -> "CoefficientVector":
        return cls(m, np.zeros(2**m))

    @classmethod
    def unit(cls, m: int, l: int, k: int) -> "CoefficientVector":
        v = np.zeros(2**m)
        v[flat_index(l, k)] = 1.0
        return cls(m, v)

    @property
    def dim(self) -> int:
        return self.values.size

    def __getitem__(self, lk: tuple[int, int]) -> float:
        return float(self.values[flat_index(*lk)])

    def level(self, l: int) -> np.ndarray:
        if l == -1:
            return self.values[:1]
        return self.values[2**l : 2 ** (l + 1)]

    def items(self) -> Iterator[tuple[int, int, float]]:
        for j, v in enumerate(self.values):
            l, k = level_of(j)
            yield l, k, float(v)

    def resized(self, m: int) -> "CoefficientVector":
        """Zero-pad or truncate to resolution ``m`` (truncation is ``pi_m``)."""
        out = np.zeros(2**m)
        n = min(2**m, self.dim)
        out[:n] = self.values[:n]
        return CoefficientVector(m, out)

    def scaled(self, alpha: float) -> "CoefficientVector":
        return CoefficientVector(self.m, alpha * self.values)

    def __add__(self, other: "CoefficientVector") -> "CoefficientVector":
        m = max(self.m, other.m)
        return CoefficientVector(m, self.resized(m).values + other.resized(m).values)

    def __sub__(self, other: "CoefficientVector") -> "CoefficientVector":
        return self + other.scaled(-1.0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def to_dict(self) -> dict:
        return {"m": self.m, "coeffs": [[l, k, v] for l, k, v in self.items()]}

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientVector":
        m = int(data["m"])
        vals = np.zeros(2**m)
        for l, k, v in data["coeffs"]:
            vals[flat_index(int(l), int(k))] = float(v)
        return cls(m, vals)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CoefficientVector":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"CoefficientVector(m={self.m}, values={np.array2string(self.values, precision=4)})"


# ---------------------------------------------------------------------------
# basis
# ---------------------------------------------------------------------------


class WaveletBasis:
    """Periodized orthonormal basis of ``L^2([0, 1])`` with a dyadic level structure.

    Parameters
    ----------
    family : {"daubechies", "fourier"}
    order : int
        Vanishing moments of the Daubechies family (ignored for Fourier).
    max_level : int
        Largest admissible resolution ``m``.
    quad_points : int
        Number of uniform quadrature nodes (a power of two, at least ``2**max_level``).
    table_level : int
        The mother wavelet is tabulated on the grid ``2**-table_level``.
    """

    def __init__(
        self,
        family: str = DAUBECHIES,
        order: int = 8,
        max_level: int = 10,
        quad_points: int = 2**14,
        table_level: int = 16,
    ):
        if family not in FAMILIES:
            raise ValueError(f"unknown wavelet family {family!r}")
        if quad_points & (quad_points - 1) or quad_points < 2:
            raise ValueError("quad_points must be a power of two")
        if not 0 <= max_level or 2**max_level > quad_points:
            raise ValueError("need 0 <= max_level and 2**max_level <= quad_points")
        self.family = family
        self.order = int(order)
        self.max_level = int(max_level)
        self.quad_points = int(quad_points)
        self.table_level = int(table_level)
        self._grid_tables: dict = {}
        self._sup_constants: dict = {}
        if family == DAUBECHIES:
            _, psi, support = daubechies_tables(self.order, self.table_level)
            scale = 2**self.table_level
            self._support = support
            self._psi = (psi, np.gradient(psi, 1.0 / scale), None)
            d1 = self._psi[1]
            self._psi = (psi, d1, np.gradient(d1, 1.0 / scale))

    # -- bookkeeping -------------------------------------------------------

    def dim(self, m: int) -> int:
        return 2**m

    def indices(self, m: int) -> list[tuple[int, int]]:
        return [level_of(j) for j in range(2**m)]

    @property
    def quad_grid(self) -> np.ndarray:
        return np.arange(self.quad_points) / self.quad_points

    def describe(self) -> dict:
        return {
            "family": self.family,
            "order": self.order,
            "max_level": self.max_level,
            "quad_points": self.quad_points,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WaveletBasis":
        return cls(**{k: data[k] for k in ("family", "order", "max_level", "quad_points") if k in data})

    def _check_level(self, m: int):
        if not 0 <= m <= self.max_level:
            raise ValueError(f"resolution {m} outside [0, {self.max_level}]")

    # -- point evaluation --------------------------------------------------

    def _level_block(self, l: int, x: np.ndarray, ks: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Values of ``psi_{lk}^{(deriv)}`` at points ``x`` for ``k`` in ``ks``; shape (len(x), len(ks))."""
        if l == -1:
            return np.full((x.size, 1), 1.0 if deriv == 0 else 0.0)
        if self.family == FOURIER:
            j = 2**l + ks
            freq = np.where(j % 2 == 1, (j + 1) // 2, j // 2).astype(float)
            is_cos = (j % 2 == 1)[None, :]
            arg = 2 * np.pi * x[:, None] * freq[None, :]
            w = 2 * np.pi * freq[None, :]
            if deriv == 0:
                vals = np.where(is_cos, np.cos(arg), np.sin(arg))
            elif deriv == 1:
                vals = np.where(is_cos, -w * np.sin(arg), w * np.cos(arg))
            else:
                vals = -(w**2) * np.where(is_cos, np.cos(arg), np.sin(arg))
            return np.sqrt(2.0) * vals
        table = self._psi[deriv]
        period = 2**l
        t = np.mod(period * x[:, None] - ks[None, :], period)
        out = np.zeros_like(t)
        for r in range(self._support // period + 1):
            out += _interp_table(table, t + r * period, 2**self.table_level)
        return out * 2 ** (l / 2) * float(period) ** deriv

    def evaluate(self, l: int, k: int, x, deriv: int = 0) -> np.ndarray:
        """Value of the periodized basis function ``psi_{lk}`` (or a derivative) at ``x``."""
        if not -1 <= l < max(self.max_level, 0) or not 0 <= k < (1 if l == -1 else 2**l):
            raise IndexError(f"wavelet index ({l}, {k}) outside the basis")
        xs = _as_points(x)
        vals = self._level_block(l, xs, np.array([k]), deriv)[:, 0]
        return vals.reshape(np.shape(x)) if np.ndim(x) else float(vals[0])

    def design_matrix(self, x, m: int, deriv: int = 0) -> np.ndarray:
        """Matrix ``Phi[i, j] = psi_j^{(deriv)}(x_i)`` for the ``2**m`` basis functions of ``S_m``."""
        self._check_level(m)
        xs = _as_points(x)
        blocks = [self._level_block(-1, xs, np.array([0]), deriv)]
        for l in range(m):
            blocks.append(self._level_block(l, xs, np.arange(2**l), deriv))
        return np.hstack(blocks)

    def expansion(self, coeffs: CoefficientVector, x, deriv: int = 0, chunk: int = 8192) -> np.ndarray:
        """Evaluate ``sum_j c_j psi_j^{(deriv)}(x)``."""
        xs = _as_points(x)
        out = np.zeros(xs.size)
        if coeffs.values[0] != 0.0 and deriv == 0:
            out += coeffs.values[0]
        for l in range(coeffs.m):
            c = coeffs.level(l)
            if not np.any(c):
                continue
            ks = np.nonzero(c)[0]
            for s in range(0, xs.size, chunk):
                out[s : s + chunk] += self._level_block(l, xs[s : s + chunk], ks, deriv) @ c[ks]
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])

    # -- grid transforms ---------------------------------------------------

    def _grid_table(self, l: int, n: int, deriv: int = 0) -> np.ndarray:
        """rFFT of ``psi_{l0}^{(deriv)}`` sampled at ``i / n``."""
        key = (l, n, deriv)
        if key not in self._grid_tables:
            x = np.arange(n) / n
            self._grid_tables[key] = np.fft.rfft(self._level_block(l, x, np.array([0]), deriv)[:, 0])
        return self._grid_tables[key]

    def analyze_samples(self, samples: np.ndarray, m: int) -> CoefficientVector:
        """Coefficients from samples on the uniform grid ``i / N`` (trapezoid rule)."""
        self._check_level(m)
        fx = np.asarray(samples, dtype=float)
        n = fx.size
        if n & (n - 1) or n < 2**m:
            raise ValueError("sample count must be a power of two >= 2**m")
        out = np.empty(2**m)
        out[0] = fx.mean()
        spec = np.fft.rfft(fx)
        for l in range(m):
            if self.family == FOURIER:
                j = 2**l + np.arange(2**l)
                freq = np.where(j % 2 == 1, (j + 1) // 2, j // 2)
                vals = np.where(j % 2 == 1, spec[freq].real, -spec[freq].imag)
                out[2**l : 2 ** (l + 1)] = np.sqrt(2.0) * vals / n
            else:
                corr = np.fft.irfft(spec * np.conj(self._grid_table(l, n)), n=n)
                out[2**l : 2 ** (l + 1)] = corr[:: n // 2**l] / n
        return CoefficientVector(m, out)

    def analyze(self, f: Callable, m: int) -> CoefficientVector:
        """``L^2`` projection coefficients ``<f, psi_{lk}>`` of ``f`` onto ``S_m``."""
        self._check_level(m)
        return self.analyze_samples(np.asarray(f(self.quad_grid), dtype=float), m)

    def synthesize_samples(self, coeffs: CoefficientVector, n: int | None = None, deriv: int = 0) -> np.ndarray:
        """Values of the expansion on the grid ``i / n``, computed by FFT convolution."""
        n = self.quad_points if n is None else int(n)
        if n & (n - 1) or n < coeffs.dim:
            raise ValueError("grid size must be a power of two >= dim")
        if self.family == FOURIER:
            return self.expansion(coeffs, np.arange(n) / n, deriv=deriv)
        out = np.full(n, coeffs.values[0] if deriv == 0 else 0.0)
        for l in range(coeffs.m):
            c = coeffs.level(l)
            if not np.any(c):
                continue
            spikes = np.zeros(n)
            spikes[:: n // 2**l] = c
            out += np.fft.irfft(np.fft.rfft(spikes) * self._grid_table(l, n, deriv), n=n)
        return out

    def synthesize(self, coeffs: CoefficientVector) -> "WaveletExpansion":
        if coeffs.m > self.max_level:
            raise ValueError(f"resolution {coeffs.m} above max_level {self.max_level}")
        return WaveletExpansion(self, coeffs)

    def project(self, f: Callable, m: int) -> "WaveletExpansion":
        """``pi_m f`` as a periodic function."""
        return self.synthesize(self.analyze(f, m))

    # -- sup-norm constants ------------------------------------------------

    def level_sup_constant(self, l: int, deriv: int = 0, points: int = 4096) -> float:
        """``sup_x sum_k |psi_{lk}^{(deriv)}(x)|`` evaluated on a dense grid.

        Bounds ``||sum_k c_k psi_{lk}^{(deriv)}||_inf <= max_k |c_k| * constant``.
        """
        key = (l, deriv)
        if key not in self._sup_constants:
            if l == -1:
                val = 1.0 if deriv == 0 else 0.0
            else:
                # the sum over k is 2^-l periodic for the Daubechies family
                span = 1.0 if self.family == FOURIER else 2.0**-l
                x = np.arange(points) / points * span
                val = float(np.abs(self._level_block(l, x, np.arange(2**l), deriv)).sum(axis=1).max())
            self._sup_constants[key] = val
        return self._sup_constants[key]

    def __repr__(self):
        name = f"db{self.order}" if self.family == DAUBECHIES else "fourier"
        return f"WaveletBasis({name}, max_level={self.max_level}, quad_points={self.quad_points})"


class WaveletExpansion(PeriodicFunction):
    """A finite wavelet series as a periodic function; derivatives come from the tabulated mother wavelet."""

    def __init__(self, basis: WaveletBasis, coeffs: CoefficientVector, deriv: int = 0):
        self.basis = basis
        self.coeffs = coeffs
        self.order = deriv
        super().__init__(self._eval, label=f"wavelet-series(m={coeffs.m}, d={deriv})")
        self._derivative = None

    def _eval(self, x):
        return self.basis.expansion(self.coeffs, x, deriv=self.order)

    @property
    def derivative(self) -> "WaveletExpansion | None":
        if self.order >= 2:
            return None
        if self._derivative is None:
            self._derivative = WaveletExpansion(self.basis, self.coeffs, self.order + 1)
        return self._derivative

    def samples(self, n: int | None = None) -> np.ndarray:
        return self.basis.synthesize_samples(self.coeffs, n, deriv=self.order)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _scaled_norm(v: np.ndarray) -> float:
    """Euclidean norm without overflow or underflow of the squares."""
    top = float(np.max(np.abs(v))) if v.size else 0.0
    return top * float(np.sqrt(np.sum((v / top) ** 2))) if top > 0 else 0.0


def besov_norm(c: CoefficientVector, s: float) -> float:
    """Periodic ``B^s_{2,inf}`` norm: ``|c_{-1,0}| + max_l 2^{ls} ||c_{l.}||_2``."""
    levels = [2.0 ** (l * s) * _scaled_norm(c.level(l)) for l in range(c.m)]
    return float(abs(c.values[0]) + (max(levels) if levels else 0.0))


def besov_inf1_norm(c: CoefficientVector, s: float) -> float:
    """Diagnostic ``B^s_{inf,1}`` norm: ``|c_{-1,0}| + sum_l 2^{l(s+1/2)} max_k |c_{lk}|``."""
    total = abs(c.values[0])
    for l in range(c.m):
        total += 2.0 ** (l * (s + 0.5)) * np.max(np.abs(c.level(l)))
    return float(total)


def l2_distance(f: Callable, g: Callable, quad_points: int = 2**14) -> float:
    """``||f - g||_2`` on ``[0, 1]`` by the trapezoid rule on a uniform periodic grid."""
    x = np.arange(quad_points) / quad_points
    d = np.asarray(f(x), dtype=float) - np.asarray(g(x), dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def sup_norm(f: Callable, points: int = 4096) -> float:
    x = np.arange(points) / points
    return float(np.max(np.abs(f(x))))
