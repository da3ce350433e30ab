import json
import subprocess
import sys

import pytest

import driftbench.bayes
from driftbench.bayes import MCMCError
from driftbench.cli import main

MODEL = {"drift": {"type": "closed_form", "expr": "pi*cos(2*pi*x)"}, "sigma": {"type": "constant", "value": 1.0}}
PRIOR = {"kind": "sieve", "B": 3.0, "q_kind": "uniform", "Lbar": 4, "basis": {"max_level": 6}}


@pytest.fixture
def files(tmp_path):
    (tmp_path / "model.json").write_text(json.dumps(MODEL))
    (tmp_path / "prior.json").write_text(json.dumps(PRIOR))
    return tmp_path


def simulate(files, name="obs.csv", *extra):
    args = ["simulate", "--config", str(files / "model.json"), "--n", "1024", "--delta", "0.01", "--seed", "7"]
    return main(args + ["--out", str(files / name), *extra])


class TestSimulate:
    def test_output_shape(self, files):
        assert simulate(files) == 0
        lines = (files / "obs.csv").read_text().splitlines()
        assert len(lines) == 1026
        assert lines[0] == "k,t,x"

    def test_byte_identical(self, files):
        simulate(files, "a.csv")
        simulate(files, "b.csv")
        assert (files / "a.csv").read_bytes() == (files / "b.csv").read_bytes()

    def test_fine_path_and_plot(self, files):
        assert simulate(files, "obs.csv", "--fine-out", str(files / "fine.bin"), "--plot", str(files / "d.svg")) == 0
        assert (files / "fine.bin").exists() and (files / "d.svg").exists()

    def test_out_of_regime(self, files):
        args = ["simulate", "--config", str(files / "model.json"), "--n", "1024", "--delta", "0.2", "--L0", "1"]
        assert main(args + ["--out", str(files / "x.csv")]) == 1
        assert main(args + ["--out", str(files / "x.csv"), "--allow-out-of-regime", "--substeps", "5"]) == 0

    def test_missing_config(self, files):
        args = ["simulate", "--config", str(files / "nope.json"), "--n", "10", "--delta", "0.1"]
        assert main(args + ["--out", str(files / "x.csv")]) == 1


class TestEstimatePosterior:
    def test_estimate(self, files):
        simulate(files)
        out = files / "fit.json"
        assert main(["estimate", "--data", str(files / "obs.csv"), "--config", str(files / "model.json"), "--s", "1", "--out", str(out)]) == 0
        fit = json.loads(out.read_text())
        assert len(fit["coeffs"]) == 2 ** fit["metadata"]["l_n"]

    def test_estimate_needs_rule(self, files):
        simulate(files)
        args = ["estimate", "--data", str(files / "obs.csv"), "--K0", "5", "--out", str(files / "f.json")]
        assert main(args) == 1

    def test_posterior(self, files):
        simulate(files)
        args = ["posterior", "--data", str(files / "obs.csv"), "--prior", str(files / "prior.json")]
        args += ["--iters", "100", "--burnin", "100", "--out", str(files / "c.jsonl"), "--summary", str(files / "s.json")]
        assert main(args + ["--plot", str(files / "t.svg")]) == 0
        assert len((files / "c.jsonl").read_text().splitlines()) == 100
        assert "acceptance" in json.loads((files / "s.json").read_text())

    def test_numerical_failure(self, files, monkeypatch):
        simulate(files)

        def boom(*args, **kwargs):
            raise MCMCError("no accepted proposals")

        monkeypatch.setattr(driftbench.bayes, "run_mcmc", boom)
        args = ["posterior", "--data", str(files / "obs.csv"), "--prior", str(files / "prior.json"), "--out", str(files / "c.jsonl")]
        assert main(args) == 2


class TestStudy:
    def test_rate(self, files, capsys):
        cfg = {"study": "rate", "n_grid": [1024, 2048], "reps": 2, "substeps": 5, "params": {"s": 1.0}}
        (files / "rate.json").write_text(json.dumps(cfg))
        out = files / "results"
        assert main(["study", "rate", "--config", str(files / "rate.json"), "--out", str(out), "--plots"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert isinstance(report["summary"]["regression"]["slope"], float)
        assert (out / "rate.svg").exists()
        assert "rate.slope" in capsys.readouterr().out

    def test_study_name_mismatch(self, files):
        (files / "c.json").write_text(json.dumps({"study": "holder"}))
        assert main(["study", "rate", "--config", str(files / "c.json")]) == 1


class TestUsage:
    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--bogus"])
        assert exc.value.code == 1

    def test_no_command(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "driftbench.cli", "--help"], capture_output=True, text=True)
        assert res.returncode == 0 and "simulate" in res.stdout
