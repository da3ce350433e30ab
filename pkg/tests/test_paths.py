import math

import numpy as np
import pytest

from driftbench.model import DriftSpec, ModelParams, SigmaSpec
from driftbench.paths import (
    Observations,
    PathConfig,
    SamplePath,
    holder_modulus_stat,
    increments_decomposition,
    modulus,
    observe,
    simulate_path,
    simulate_short_paths,
    subsample,
)


class TestPathConfig:
    def test_regime_value(self):
        cfg = PathConfig(1024, 0.01)
        assert cfg.regime_value == pytest.approx(1024 * 1e-4 * math.log(100))
        assert cfg.in_regime()

    def test_out_of_regime(self):
        with pytest.raises(ValueError):
            PathConfig(10**6, 0.1).check_regime()

    def test_short_horizon(self):
        assert not PathConfig(10, 0.01).in_regime()

    def test_invalid(self):
        with pytest.raises(ValueError):
            PathConfig(0, 0.1)


class TestSimulate:
    def test_brownian_increment_variance(self, brownian):
        cfg = PathConfig(4, 0.05, 10, seed=1)
        paths = simulate_short_paths(brownian, cfg, 10_000)
        for span in (10, 20):
            inc = paths[:, span] - paths[:, 0]
            h = span * cfg.fine_step
            v = inc.var(ddof=1)
            se = v * math.sqrt(2.0 / (inc.size - 1))
            assert abs(v - h) <= 3 * se

    def test_deterministic_drift(self):
        model = ModelParams(DriftSpec.constant(1.0), SigmaSpec.constant(1e-6))
        cfg = PathConfig(100, 0.05, 10, seed=2)
        path = simulate_path(model, cfg)
        assert path.values[-1] - path.values[0] == pytest.approx(cfg.horizon, abs=1e-3)

    def test_ergodic_occupation(self, cos_model):
        cfg = PathConfig(20_000, 0.1, 100, seed=3)
        path = simulate_path(cos_model, cfg)
        hist, edges = np.histogram(np.mod(path.values, 1.0), bins=64, range=(0, 1), density=True)
        dens = cos_model.invariant_density()
        bin_mass = np.diff(np.interp(edges, dens.grid, dens.cdf)) * 64
        assert np.sum(np.abs(hist - bin_mass)) / 64 < 0.05

    def test_determinism(self, cos_model):
        cfg = PathConfig(256, 0.02, 20, seed=99)
        a, b = simulate_path(cos_model, cfg), simulate_path(cos_model, cfg)
        assert a.values.tobytes() == b.values.tobytes()

    def test_replications_differ(self, cos_model):
        cfg = PathConfig(16, 0.02, 5, seed=4)
        a, b = simulate_path(cos_model, cfg), simulate_path(cos_model, cfg.replicate(1))
        assert not np.array_equal(a.values, b.values)

    def test_short_paths_match_single(self, cos_model):
        cfg = PathConfig(2, 0.01, 5, seed=10)
        batch = simulate_short_paths(cos_model, cfg, 3)
        for r in range(3):
            np.testing.assert_array_equal(batch[r], simulate_path(cos_model, cfg.replicate(r)).values)

    def test_fixed_start(self, cos_model):
        path = simulate_path(cos_model, PathConfig(4, 0.01, 5, seed=1, x0=0.42))
        assert path.x0 == 0.42

    def test_weak_error(self, brownian):
        cfg = PathConfig(1, 0.02, 20, seed=5)
        paths = simulate_short_paths(brownian, cfg, 10_000)
        d = paths[:, -1] ** 2 - paths[:, 0] ** 2
        assert abs(d.mean() - cfg.Delta) <= 3 * d.std(ddof=1) / math.sqrt(d.size)

    def test_stationarity(self, cos_model):
        cfg = PathConfig(10, 0.05, 20, seed=6)
        paths = simulate_short_paths(cos_model, cfg, 10_000)
        vals = np.sin(2 * np.pi * paths[:, :: cfg.substeps])
        ref = cos_model.invariant_density().expectation(lambda x: np.sin(2 * np.pi * x))
        means = vals.mean(axis=0)
        se = vals.std(axis=0, ddof=1) / math.sqrt(vals.shape[0])
        assert np.all(np.abs(means - ref) <= 3 * se)


class TestSubsample:
    def test_identity_substeps_one(self, cos_model):
        cfg = PathConfig(50, 0.02, 1, seed=1)
        path = simulate_path(cos_model, cfg)
        np.testing.assert_array_equal(subsample(path, cfg).samples, path.values)

    def test_every_other_node(self):
        path = SamplePath(np.arange(5.0), 0.5, 2, 1.0)
        np.testing.assert_array_equal(subsample(path, PathConfig(2, 1.0, 2)).samples, [0.0, 2.0, 4.0])

    def test_length_mismatch(self):
        path = SamplePath(np.arange(5.0), 0.5, 2, 1.0)
        with pytest.raises(ValueError):
            subsample(path, PathConfig(3, 1.0, 2))

    def test_csv_byte_identical(self, cos_model, tmp_path):
        cfg = PathConfig(128, 0.02, 10, seed=7)
        observe(cos_model, cfg).to_csv(tmp_path / "a.csv")
        observe(cos_model, cfg).to_csv(tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_csv_round_trip(self, cos_model, tmp_path):
        obs = observe(cos_model, PathConfig(64, 0.02, 10, seed=8))
        obs.to_csv(tmp_path / "o.csv")
        back = Observations.from_csv(tmp_path / "o.csv")
        np.testing.assert_array_equal(back.samples, obs.samples)
        assert back.delta == pytest.approx(obs.delta, rel=1e-12)
        assert (tmp_path / "o.csv").read_text().splitlines()[0] == "k,t,x"

    def test_binary_round_trip(self, cos_model, tmp_path):
        path = simulate_path(cos_model, PathConfig(32, 0.02, 10, seed=9))
        path.save(tmp_path / "p.bin")
        back = SamplePath.load(tmp_path / "p.bin")
        np.testing.assert_array_equal(back.values, path.values)
        assert back.substeps == 10 and back.n == 32


class TestDecomposition:
    @pytest.mark.parametrize("c", [0.0, 1.7])
    def test_constant_drift_no_remainder(self, c):
        model = ModelParams(DriftSpec.constant(c))
        cfg = PathConfig(64, 0.02, 10, seed=1)
        path = simulate_path(model, cfg)
        dec = increments_decomposition(path, subsample(path, cfg), model)
        np.testing.assert_array_equal(dec.R, 0.0)

    def test_remainder_bound(self, cos_model):
        cfg = PathConfig(256, 0.02, 20, seed=2)
        path = simulate_path(cos_model, cfg)
        obs = subsample(path, cfg)
        dec = increments_decomposition(path, obs, cos_model)
        blocks = path.values[: obs.n * cfg.substeps].reshape(obs.n, cfg.substeps)
        excursion = np.max(np.abs(blocks - blocks[:, :1]), axis=1)
        assert np.all(np.abs(dec.R) <= cos_model.K0 * excursion + 1e-12)

    def test_sum_recovers_quotients(self, cos_model):
        cfg = PathConfig(64, 0.02, 10, seed=3)
        path = simulate_path(cos_model, cfg)
        obs = subsample(path, cfg)
        dec = increments_decomposition(path, obs, cos_model)
        np.testing.assert_allclose(dec.bterm + dec.Z + dec.R, obs.responses, atol=1e-10)


class TestModulus:
    def test_w_value(self):
        assert modulus(math.exp(-2), 1.0) == pytest.approx(math.exp(-1) * math.sqrt(2), rel=1e-12)
        assert modulus(math.exp(-2), 1.0) == pytest.approx(0.5203, abs=1e-4)

    def test_constant_path(self):
        model = ModelParams(DriftSpec.constant(0.0), SigmaSpec.constant(1e-9))
        path = simulate_path(model, PathConfig(100, 0.1, 10, seed=1, x0=0.0))
        assert holder_modulus_stat(path, 10.0, 0.1) == pytest.approx(0.0, abs=1e-7)

    def test_mesh_cap_limit(self, brownian):
        path = simulate_path(brownian, PathConfig(10, 0.1, 10, seed=1))
        with pytest.raises(ValueError):
            holder_modulus_stat(path, 1.0, 0.2)

    def test_matches_brute_force(self, brownian):
        path = simulate_path(brownian, PathConfig(5, 0.1, 20, seed=4))
        x, dt, cap = path.values, path.fine_step, 0.05
        best = 0.0
        for i in range(x.size):
            for j in range(i + 1, x.size):
                d = (j - i) * dt
                if d > cap * (1 + 1e-12):
                    break
                best = max(best, abs(x[j] - x[i]) / modulus(d, 3.0))
        assert holder_modulus_stat(path, 3.0, cap) == pytest.approx(best, rel=1e-12)

    def test_envelope_does_not_grow(self, brownian):
        q = {}
        for m in (100, 200):
            cap = math.exp(-2)
            n = int(math.ceil(m / cap))
            stats_ = [
                holder_modulus_stat(simulate_path(brownian, PathConfig(n, cap, 16, seed=1000 * m + r, x0=0.0)), m, cap)
                for r in range(200)
            ]
            q[m] = np.quantile(stats_, 0.99) / math.sqrt(math.log(m))
        assert q[200] <= q[100] * 1.1
