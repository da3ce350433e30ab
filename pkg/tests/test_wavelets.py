import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftbench.wavelets import (
    CoefficientVector,
    PeriodicFunction,
    WaveletBasis,
    besov_inf1_norm,
    besov_norm,
    closed_form,
    flat_index,
    l2_distance,
    level_of,
)

# Periodized db8 psi_{2,1}(0.5) from PyWavelets' cascade (wavefun, level 16),
# periodized by direct summation over shifts.
DB8_PSI_2_1_HALF = 0.5661766314847844


class TestIndexing:
    def test_flat_index_roundtrip(self):
        for j in range(64):
            assert flat_index(*level_of(j)) == j

    def test_dimension(self, db8):
        for m in range(6):
            assert db8.dim(m) == 2**m
            assert len(db8.indices(m)) == 2**m


class TestEvaluate:
    def test_constant_function(self, db8):
        assert db8.evaluate(-1, 0, 0.37) == 1.0

    def test_fourier_cosine_zero(self, fourier):
        assert fourier.evaluate(0, 0, 0.25) == pytest.approx(0.0, abs=1e-15)

    def test_db8_cascade_oracle(self, db8):
        # tolerance covers the linear interpolation of the 2^-16 tables
        assert db8.evaluate(2, 1, 0.5) == pytest.approx(DB8_PSI_2_1_HALF, abs=1e-4)

    @pytest.mark.parametrize("l,k", [(-1, 1), (2, 4), (2, -1), (8, 0), (-2, 0)])
    def test_out_of_range(self, db8, l, k):
        with pytest.raises(IndexError):
            db8.evaluate(l, k, 0.1)

    def test_periodic_extension(self, db8):
        x = np.linspace(0, 1, 17, endpoint=False)
        np.testing.assert_allclose(db8.evaluate(3, 2, x + 3.0), db8.evaluate(3, 2, x), atol=1e-12)

    def test_vector_shape_preserved(self, db8):
        x = np.random.default_rng(0).random((4, 5))
        assert db8.evaluate(2, 1, x).shape == (4, 5)
        c = CoefficientVector(3, np.arange(8.0))
        assert db8.expansion(c, x).shape == (4, 5)


class TestAnalyze:
    def test_unit_function(self, db8):
        f = db8.synthesize(CoefficientVector.unit(3, 1, 0))
        c = db8.analyze(f, 3)
        expected = np.zeros(8)
        expected[flat_index(1, 0)] = 1.0
        np.testing.assert_allclose(c.values, expected, atol=1e-8)

    def test_constant(self, db8):
        c = db8.analyze(lambda x: np.full_like(x, 2.5), 4)
        expected = np.zeros(16)
        expected[0] = 2.5
        np.testing.assert_allclose(c.values, expected, atol=1e-8)

    def test_fourier_cosine_coefficient(self, fourier):
        c = fourier.analyze(lambda x: np.cos(2 * np.pi * x), 1)
        assert c[0, 0] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
        assert c[-1, 0] == pytest.approx(0.0, abs=1e-12)

    def test_level_above_max(self, db8):
        with pytest.raises(ValueError):
            db8.analyze(np.sin, 9)


class TestSynthesize:
    def test_zero(self, db8):
        f = db8.synthesize(CoefficientVector.zeros(4))
        np.testing.assert_array_equal(f(np.linspace(0, 1, 33)), 0.0)

    def test_unit_constant(self, db8):
        f = db8.synthesize(CoefficientVector.unit(4, -1, 0))
        np.testing.assert_allclose(f(np.linspace(0, 1, 33)), 1.0)

    @pytest.mark.parametrize("family", ["daubechies", "fourier"])
    def test_round_trip(self, family):
        basis = WaveletBasis(family, max_level=6)
        c = CoefficientVector(4, np.random.default_rng(3).standard_normal(16))
        back = basis.analyze(basis.synthesize(c), 4)
        np.testing.assert_allclose(back.values, c.values, atol=1e-8)

    def test_grid_synthesis_matches_pointwise(self, db8):
        c = CoefficientVector(5, np.random.default_rng(4).standard_normal(32))
        x = np.arange(256) / 256
        np.testing.assert_allclose(db8.synthesize_samples(c, 256), db8.expansion(c, x), atol=1e-10)

    def test_derivative_matches_finite_difference(self, db8):
        f = db8.synthesize(CoefficientVector(3, np.random.default_rng(5).standard_normal(8)))
        x = np.linspace(0.05, 0.95, 19)
        h = 1e-5
        fd = (f(x + h) - f(x - h)) / (2 * h)
        np.testing.assert_allclose(f.derivative(x), fd, atol=5e-3 * np.max(np.abs(fd)))


class TestBesovNorm:
    def test_constant_unit(self):
        for s in (0.0, 1.0, 3.5):
            assert besov_norm(CoefficientVector.unit(4, -1, 0), s) == 1.0

    def test_single_level(self):
        assert besov_norm(CoefficientVector.unit(4, 3, 5), 2.0) == pytest.approx(64.0)

    def test_sup_attained_at_level_zero(self):
        s = 1.0
        c = CoefficientVector.zeros(6)
        vals = c.values.copy()
        for l in range(6):
            vals[flat_index(l, 0)] = 2.0 ** (-l * (s + 0.5))
        assert besov_norm(CoefficientVector(6, vals), s) == pytest.approx(1.0)

    @given(
        alpha=st.floats(-50, 50, allow_nan=False),
        s=st.floats(0, 4),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_homogeneity(self, alpha, s, seed):
        c = CoefficientVector(5, np.random.default_rng(seed).standard_normal(32))
        assert besov_norm(c.scaled(alpha), s) == pytest.approx(abs(alpha) * besov_norm(c, s), rel=1e-12, abs=1e-300)

    def test_inf1_dominates(self):
        c = CoefficientVector(5, np.random.default_rng(6).standard_normal(32))
        assert besov_inf1_norm(c, 1.0) >= abs(c[-1, 0])


class TestL2Distance:
    def test_identical(self):
        f = closed_form("sin(2*pi*x)")
        assert l2_distance(f, f) == 0.0

    def test_constant_one(self):
        assert l2_distance(lambda x: np.ones_like(x), lambda x: np.zeros_like(x)) == pytest.approx(1.0)

    def test_orthonormal_pair(self, db8):
        f = db8.synthesize(CoefficientVector.unit(3, 2, 1))
        g = db8.synthesize(CoefficientVector.unit(3, 2, 2))
        assert l2_distance(f, g) == pytest.approx(np.sqrt(2.0), abs=1e-8)


class TestProperties:
    @pytest.mark.parametrize("family", ["daubechies", "fourier"])
    def test_orthonormality(self, family):
        basis = WaveletBasis(family, max_level=6)
        x = basis.quad_grid
        Phi = basis.design_matrix(x, 5)
        gram = Phi.T @ Phi / x.size
        np.testing.assert_allclose(gram, np.eye(32), atol=1e-6)

    def test_projection_optimality(self, db8):
        rng = np.random.default_rng(7)
        f = db8.synthesize(CoefficientVector(6, rng.standard_normal(64)))
        for mp in (1, 3, 5):
            best = l2_distance(db8.project(f, mp), f)
            for _ in range(100):
                g = db8.synthesize(CoefficientVector(mp, rng.standard_normal(2**mp)))
                assert best <= l2_distance(g, f) + 1e-12

    @pytest.mark.parametrize("s", [1.0, 2.0])
    def test_approximation_decay(self, db8, s):
        rng = np.random.default_rng(int(s))
        vals = np.empty(256)
        vals[0] = rng.uniform(-1, 1)
        for j in range(1, 256):
            l, _ = level_of(j)
            vals[j] = 2.0 ** (-l * (s + 0.5)) * rng.uniform(-1, 1)
        f = db8.synthesize(CoefficientVector(8, vals))
        ms = np.arange(1, 7)
        errs = [l2_distance(db8.project(f, m), f) for m in ms]
        slope = np.polyfit(ms, np.log2(errs), 1)[0]
        assert slope <= -s + 0.1


class TestCoefficientVector:
    def test_wrong_length(self):
        with pytest.raises(ValueError):
            CoefficientVector(3, np.zeros(7))

    def test_getitem_and_level(self):
        c = CoefficientVector(3, np.arange(8.0))
        assert c[-1, 0] == 0.0
        assert c[2, 3] == 7.0
        np.testing.assert_array_equal(c.level(1), [2.0, 3.0])

    def test_resized_pads_and_truncates(self):
        c = CoefficientVector(2, [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(c.resized(3).values, [1, 2, 3, 4, 0, 0, 0, 0])
        np.testing.assert_array_equal(c.resized(1).values, [1, 2])

    @given(st.integers(0, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_json_round_trip(self, m, seed):
        c = CoefficientVector(m, np.random.default_rng(seed).standard_normal(2**m))
        back = CoefficientVector.from_json(c.to_json())
        np.testing.assert_array_equal(back.values, c.values)
        data = json.loads(c.to_json())
        assert data["m"] == m and len(data["coeffs"]) == 2**m


class TestPeriodicFunction:
    def test_periodicity(self):
        f = PeriodicFunction(lambda x: x**2)
        np.testing.assert_allclose(f(np.array([0.25, 1.25, -0.75])), 0.0625)

    def test_closed_form_derivatives(self):
        f = closed_form("sin(2*pi*x)")
        x = np.linspace(0, 1, 9)
        np.testing.assert_allclose(f.derivative(x), 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-12)
        np.testing.assert_allclose(f.derivative.derivative(x), -4 * np.pi**2 * np.sin(2 * np.pi * x), atol=1e-10)
