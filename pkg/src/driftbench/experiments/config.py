"""Study configuration and report containers."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

STUDIES = ("rate", "contraction", "klcheck", "holder", "smallball")

_RULE = re.compile(r"^\s*n\s*\^\s*\(?\s*-\s*([0-9.]+)\s*\)?\s*$")

DEFAULT_MODEL = {"drift": {"type": "closed_form", "expr": "pi*cos(2*pi*x)"}, "sigma": {"type": "constant", "value": 1.0}}


def parse_delta_rule(rule: str) -> float:
    """Exponent ``a`` of a rule ``"n^(-a)"``."""
    match = _RULE.match(rule)
    if not match:
        raise ValueError(f"cannot parse delta rule {rule!r}; expected 'n^(-a)'")
    return float(match.group(1))


@dataclass
class ExperimentConfig:
    """A Monte-Carlo study description.

    ``model`` is the model JSON (inline); ``params`` holds study-specific
    options documented with each study runner.
    """

    study: str
    model: dict = field(default_factory=lambda: dict(DEFAULT_MODEL))
    n_grid: list = field(default_factory=list)
    delta_rule: str = "n^(-0.6)"
    reps: int = 20
    seed: int = 0
    output: str = "results"
    substeps: int = 20
    L0: float = 10.0
    allow_out_of_regime: bool = False
    workers: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}; choose from {', '.join(STUDIES)}")
        a = self.delta_exponent
        if not 0.5 < a < 1:
            raise ValueError("delta rule exponent must lie in (1/2, 1)")
        if any(b <= a_ for a_, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be increasing")
        if self.reps < 1:
            raise ValueError("reps must be positive")

    @property
    def delta_exponent(self) -> float:
        return parse_delta_rule(self.delta_rule)

    def delta(self, n: int) -> float:
        return float(n) ** (-self.delta_exponent)

    def check_regime(self, n: int, Delta: float):
        """Reject designs with ``n Delta^2 log(1/Delta) > L0`` unless explicitly allowed."""
        value = n * Delta**2 * math.log(1.0 / Delta)
        if value > self.L0 and not self.allow_out_of_regime:
            raise ValueError(
                f"n={n}, Delta={Delta:g}: n Delta^2 log(1/Delta) = {value:.3g} exceeds L0 = {self.L0}; "
                "pass allow_out_of_regime to override"
            )

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        model = data.get("model", DEFAULT_MODEL)
        if isinstance(model, str):
            path = Path(model)
            if base is not None and not path.is_absolute():
                path = base / path
            model = json.loads(path.read_text())
        data["model"] = model
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base=path.parent)

    def to_dict(self) -> dict:
        return asdict(self)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class Verdict:
    criterion: str
    passed: bool
    detail: str = ""


@dataclass
class StudyReport:
    """Per-cell summaries, fitted constants and named pass/fail verdicts."""

    study: str
    cells: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    runtime: float = 0.0
    config: dict = field(default_factory=dict)

    def verdict(self, criterion: str, passed: bool, detail: str = ""):
        self.verdicts.append(Verdict(criterion, bool(passed), detail))

    def passed(self, criterion: str | None = None) -> bool:
        pool = [v for v in self.verdicts if criterion is None or v.criterion == criterion]
        return bool(pool) and all(v.passed for v in pool)

    def get(self, criterion: str) -> Verdict:
        for v in self.verdicts:
            if v.criterion == criterion:
                return v
        raise KeyError(criterion)

    def to_dict(self) -> dict:
        out = asdict(self)
        return _jsonable(out)

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2))
        return path
