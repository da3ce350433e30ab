import json
import math

import numpy as np
import pytest

from driftbench.experiments import (
    ExperimentConfig,
    StudyReport,
    parse_delta_rule,
    perturbation_direction,
    rough_drift,
    run_study,
    run_tasks,
)
from driftbench.experiments.plots import PLOTTERS
from driftbench.experiments.studies import regression
from driftbench.wavelets import WaveletBasis, besov_norm


def rate_config(**kw):
    base = dict(study="rate", n_grid=[1024, 2048], reps=3, seed=1, substeps=5, params={"s": 1.0})
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_delta_rule(self):
        assert parse_delta_rule("n^(-0.6)") == 0.6
        assert parse_delta_rule("n^-0.75") == 0.75
        with pytest.raises(ValueError):
            parse_delta_rule("0.01")

    @pytest.mark.parametrize("rule", ["n^(-0.5)", "n^(-1)", "n^(-0.3)"])
    def test_exponent_bounds(self, rule):
        with pytest.raises(ValueError):
            ExperimentConfig("rate", n_grid=[1024], delta_rule=rule)

    def test_grid_increasing(self):
        with pytest.raises(ValueError):
            ExperimentConfig("rate", n_grid=[2048, 1024])

    def test_unknown_study(self):
        with pytest.raises(ValueError):
            ExperimentConfig("sensitivity")

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"study": "rate", "n_grid": [1024], "replicates": 4})

    def test_load_with_model_file(self, tmp_path):
        (tmp_path / "m.json").write_text(json.dumps({"drift": {"type": "constant", "value": 0.5}}))
        (tmp_path / "c.json").write_text(json.dumps({"study": "rate", "n_grid": [1024], "model": "m.json"}))
        cfg = ExperimentConfig.load(tmp_path / "c.json")
        assert cfg.model["drift"]["value"] == 0.5

    def test_regime_guard(self):
        # n Delta^2 log(1/Delta) is about 1.04 at n = 1024
        cfg = ExperimentConfig("rate", n_grid=[1024], L0=0.5)
        with pytest.raises(ValueError):
            cfg.check_regime(1024, cfg.delta(1024))
        ExperimentConfig("rate", n_grid=[1024], L0=0.5, allow_out_of_regime=True).check_regime(1024, cfg.delta(1024))


class TestHelpers:
    def test_regression_exact_line(self):
        x = np.log([10.0, 20.0, 40.0, 80.0])
        reg = regression(x, 2.0 - 0.4 * x)
        assert reg["slope"] == pytest.approx(-0.4)
        assert reg["intercept"] == pytest.approx(2.0)
        assert reg["slope_se"] == pytest.approx(0.0, abs=1e-12)

    def test_run_tasks_order(self):
        tasks = [(i,) for i in range(7)]
        assert run_tasks(abs, tasks, 1) == list(range(7))
        assert run_tasks(abs, tasks, 2) == list(range(7))

    def test_perturbation_direction_unit(self):
        d = perturbation_direction(WaveletBasis(max_level=8), 3, 0)
        assert d.coeffs.norm() == pytest.approx(1.0)
        assert d.coeffs.values[0] == 0.0
        x = np.linspace(0, 1, 4097)
        assert np.trapezoid(d(x) ** 2, x) == pytest.approx(1.0, rel=1e-6)

    def test_rough_drift_smoothness(self):
        basis = WaveletBasis(max_level=8)
        drift = rough_drift(basis, 2.0, 1.0, 8, 5)
        assert besov_norm(basis.analyze(drift.function, 8), 2.0) <= 1.0 + 1e-6


class TestRateStudy:
    def test_single_cell_flags(self):
        report = run_study(rate_config(n_grid=[1024]))
        assert len(report.cells) == 1
        assert "insufficient grid" in report.flags
        assert report.verdicts == []

    def test_cells_and_regression(self):
        report = run_study(rate_config())
        assert [c["n"] for c in report.cells] == [1024, 2048]
        for c in report.cells:
            assert c["horizon"] == pytest.approx(c["n"] * c["Delta"])
            assert c["q25"] <= c["median_error"] <= c["q75"]
            assert len(c["errors"]) == 3
        assert set(report.summary["regression"]) >= {"slope", "intercept", "slope_se", "ci", "target"}
        assert report.get("rate.slope") is not None

    def test_workers_identical(self):
        a = run_study(rate_config(workers=1)).to_dict()
        b = run_study(rate_config(workers=2)).to_dict()
        for d in (a, b):
            d.pop("runtime")
            d["config"].pop("workers")
        assert a == b

    def test_regime_enforced(self):
        with pytest.raises(ValueError):
            run_study(rate_config(L0=0.5))

    def test_save_and_plot(self, tmp_path):
        report = run_study(rate_config())
        path = report.save(tmp_path)
        data = json.loads(path.read_text())
        assert data["study"] == "rate" and "regression" in data["summary"]
        assert all({"criterion", "passed", "detail"} <= set(v) for v in data["verdicts"])
        svg = PLOTTERS["rate"](data, tmp_path / "rate.svg")
        assert svg.read_text().lstrip().startswith("<?xml")


class TestOtherStudies:
    def test_contraction_small(self, tmp_path):
        cfg = ExperimentConfig(
            "contraction",
            n_grid=[1024, 2048],
            reps=2,
            substeps=5,
            params={"mcmc": {"iters": 200, "burnin": 200}},
        )
        report = run_study(cfg)
        assert all(c["mass_infinite_radius"] == 1.0 for c in report.cells)
        assert all(0.0 <= c["mass"] <= 1.0 for c in report.cells)
        assert report.summary["M"] > 0
        names = {v.criterion for v in report.verdicts}
        assert names == {"contraction.mass_nondecreasing", "contraction.error_decreasing", "contraction.terminal_mass"}
        PLOTTERS["contraction"](report.to_dict(), tmp_path / "c.svg")

    def test_klcheck_null_row(self, tmp_path):
        cfg = ExperimentConfig("klcheck", reps=3, substeps=5, params={"n": 128, "short_reps": 500})
        report = run_study(cfg)
        assert report.cells[0]["kl_invariant"] == 0.0
        assert report.passed("klcheck.null_row")
        assert report.passed("klcheck.kl_nonnegative")
        PLOTTERS["klcheck"](report.to_dict(), tmp_path / "k.svg")

    def test_smallball(self):
        cfg = ExperimentConfig("smallball", params={"support_draws": 200, "ball_draws": 20000})
        report = run_study(cfg)
        assert report.passed("smallball.prior_support")
        assert {v.criterion for v in report.verdicts} == {"smallball.prior_support", "smallball.mass"}

    def test_holder_small(self, tmp_path):
        cfg = ExperimentConfig("holder", reps=10, params={"m_values": [10, 20], "lag_points": 8})
        report = run_study(cfg)
        assert report.passed("holder.finite")
        PLOTTERS["holder"](report.to_dict(), tmp_path / "h.svg")

    def test_report_round_trip_nonfinite(self, tmp_path):
        report = StudyReport("rate", summary={"x": math.inf, "y": np.float64(1.5)})
        data = json.loads(report.save(tmp_path).read_text())
        assert data["summary"] == {"x": "inf", "y": 1.5}
