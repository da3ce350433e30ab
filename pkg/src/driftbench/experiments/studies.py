"""Monte-Carlo studies: estimator rate, posterior contraction, divergences, prior mass, path modulus.

Each study returns a :class:`StudyReport` whose verdicts carry the names of
the acceptance criteria they test.  Existential constants are calibrated on
the first cell and frozen for the remaining cells.  Replication ``r`` of cell
``i`` uses the seed ``seed + 10000 i + r``; tasks are merged in submission
order, so reports do not depend on the number of workers.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np
from scipy import stats

from ..bayes import (
    MCMCConfig,
    MCMCError,
    PriorSpec,
    chain_distances,
    kl_checks,
    prior_support_check,
    run_mcmc,
    small_ball_mass,
)
from ..estimator import EstimatorConfig, RateSchedule, epsilon_n, fit_minimum_contrast
from ..model import DriftSpec, ModelParams
from ..paths import PathConfig, holder_modulus_stat, observe, simulate_path
from ..wavelets import CoefficientVector, PeriodicFunction, WaveletBasis, l2_distance
from .config import ExperimentConfig, StudyReport

CELL_STRIDE = 10_000


def run_tasks(fn, tasks: list[tuple], workers: int = 1) -> list:
    """Apply ``fn`` to argument tuples, in order; a process pool is used when ``workers > 1``."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


@lru_cache(maxsize=16)
def _model(model_json: str) -> ModelParams:
    return ModelParams.from_dict(json.loads(model_json))


@lru_cache(maxsize=8)
def _basis(family: str, order: int, max_level: int) -> WaveletBasis:
    return WaveletBasis(family, order, max_level)


def basis_from(params: dict) -> WaveletBasis:
    return _basis(params.get("family", "daubechies"), int(params.get("order", 8)), int(params.get("max_level", 8)))


def rough_drift(basis: WaveletBasis, s: float, B: float, levels: int, seed: int) -> DriftSpec:
    """Drift with coefficients ``2^{-l(s+1/2)} (+-B)`` on levels ``0..levels-1`` and random signs."""
    rng = np.random.Generator(np.random.Philox(seed))
    c = np.zeros(2**levels)
    for l in range(levels):
        c[2**l : 2 ** (l + 1)] = 2.0 ** (-l * (s + 0.5)) * B * rng.choice([-1.0, 1.0], 2**l)
    return DriftSpec.from_coefficients(basis, CoefficientVector(levels, c))


def median_se(x) -> float:
    """Large-sample standard error of the median, ``1.2533 sd / sqrt(N)``."""
    x = np.asarray(x, dtype=float)
    return float(1.2533 * x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")


def regression(x, y) -> dict:
    """Least-squares slope of ``y`` on ``x`` with a 95% confidence interval."""
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.975, len(x) - 2) if len(x) > 2 else float("nan")
    return {
        "slope": float(fit.slope),
        "intercept": float(fit.intercept),
        "slope_se": float(fit.stderr),
        "ci": [float(fit.slope - t * fit.stderr), float(fit.slope + t * fit.stderr)],
    }


# ---------------------------------------------------------------------------
# estimator rate
# ---------------------------------------------------------------------------


def _rate_task(model_json: str, est: dict, n: int, Delta: float, substeps: int, seed: int) -> dict:
    model = _model(model_json)
    basis = basis_from(est)
    if est.get("level") is not None:
        cfg = EstimatorConfig(basis, model.K0, level=int(est["level"]))
    else:
        cfg = EstimatorConfig(basis, model.K0, schedule=RateSchedule(est["s"], est["L1"], est["L2"]))
    obs = observe(model, PathConfig(n, Delta, substeps, seed))
    fit = fit_minimum_contrast(obs, cfg)
    err = l2_distance(basis.synthesize(fit.coeffs), model.drift.function)
    return {"error": err, "level": fit.level, "constraint_active": fit.constraint_active, **fit.flags}


def rate_truth(config: ExperimentConfig) -> ModelParams:
    """The true drift of a rate study (model drift, rough variant, or its projection for the control)."""
    p = config.params
    s = float(p.get("s", 2.0))
    basis = basis_from(p)
    model = ModelParams.from_dict(config.model)
    if p.get("drift") == "rough":
        drift = rough_drift(basis, s, float(p.get("roughness_B", 1.0)), int(p.get("rough_levels", 8)), int(p.get("rough_seed", 0)))
        model = ModelParams(drift, model.sigma)
    if p.get("control"):
        level = int(p.get("control_level", 2))
        coeffs = basis.analyze(model.drift.function, level)
        model = ModelParams(DriftSpec.from_coefficients(basis, coeffs), model.sigma)
    return model


def run_rate_study(config: ExperimentConfig) -> StudyReport:
    """Median ``L^2`` error of the minimum-contrast estimator across ``n_grid``.

    ``params``: ``s`` (2), ``L1`` (0.5), ``L2`` (1.0), basis options, ``drift``
    (``"model"`` or ``"rough"`` with ``roughness_B``, ``rough_levels``,
    ``rough_seed``), ``control`` (fixed level ``control_level`` on the
    projected drift, target slope -1/2), ``tolerance`` (0.12).
    """
    start = time.perf_counter()
    p = config.params
    s = float(p.get("s", 2.0))
    control = bool(p.get("control", False))
    target = -0.5 if control else -s / (1 + 2 * s)
    tol = float(p.get("tolerance", 0.12))
    truth = rate_truth(config)
    model_json = json.dumps(truth.to_dict(), sort_keys=True)
    est = {k: p[k] for k in ("family", "order", "max_level") if k in p}
    if control:
        est["level"] = int(p.get("control_level", 2))
    else:
        est.update(s=s, L1=float(p.get("L1", 0.5)), L2=float(p.get("L2", 1.0)))

    report = StudyReport("rate", config=config.to_dict())
    tasks, cells = [], []
    for i, n in enumerate(config.n_grid):
        Delta = config.delta(n)
        config.check_regime(n, Delta)
        cells.append({"n": n, "Delta": Delta, "horizon": n * Delta})
        tasks += [(model_json, est, n, Delta, config.substeps, config.seed + CELL_STRIDE * i + r) for r in range(config.reps)]
    results = run_tasks(_rate_task, tasks, config.workers)
    for i, cell in enumerate(cells):
        chunk = results[i * config.reps : (i + 1) * config.reps]
        errs = np.array([c["error"] for c in chunk])
        cell.update(
            level=int(np.bincount([c["level"] for c in chunk]).argmax()),
            median_error=float(np.median(errs)),
            median_error_se=median_se(errs),
            mean_error=float(errs.mean()),
            mean_error_se=float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else float("nan"),
            q25=float(np.quantile(errs, 0.25)),
            q75=float(np.quantile(errs, 0.75)),
            constraint_active=int(sum(c["constraint_active"] for c in chunk)),
            clamped=bool(any(c["clamped"] for c in chunk)),
            errors=errs.tolist(),
        )
        report.cells.append(cell)
    if len(cells) < 2:
        report.flags.append("insufficient grid")
    else:
        reg = regression(np.log([c["horizon"] for c in cells]), np.log([c["median_error"] for c in cells]))
        reg["target"] = target
        report.summary["regression"] = reg
        name = "rate.control_slope" if control else "rate.slope"
        report.verdict(
            name, abs(reg["slope"] - target) <= tol, f"slope {reg['slope']:.3f}, target {target:.3f} +- {tol}"
        )
    report.summary["K0"] = truth.K0
    report.runtime = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# posterior contraction
# ---------------------------------------------------------------------------


def _contraction_task(model_json: str, prior_dict: dict, mcmc: dict, n: int, Delta: float, substeps: int, seed: int) -> dict:
    model = _model(model_json)
    prior = PriorSpec.from_dict(prior_dict, sigma=model.sigma)
    obs = observe(model, PathConfig(n, Delta, substeps, seed))
    try:
        chain = run_mcmc(prior, obs, MCMCConfig(seed=seed, **mcmc))
    except MCMCError as exc:
        return {"failed": str(exc)}
    dists = chain_distances(chain, model.drift, prior.basis, prior)
    mean_err = l2_distance(prior.drift_function(chain.mean()), model.drift.function)
    return {"distances": dists, "mean_error": mean_err, **chain.summary()}


def run_contraction_study(config: ExperimentConfig) -> StudyReport:
    """Posterior mass of ``L^2`` balls of radius ``M eps_n`` and posterior-mean error across ``n_grid``.

    ``params``: ``prior`` (prior JSON; sieve with ``B = 3`` by default),
    ``mcmc`` (``iters``, ``burnin``), ``s`` (1, sets ``eps_n``),
    ``calibration_mass`` (0.5), ``terminal_mass`` (0.9), ``monotone_tolerance`` (0.05).
    ``M`` is chosen so that the average mass at the smallest ``n`` equals the
    calibration mass and is then frozen.
    """
    start = time.perf_counter()
    p = config.params
    s = float(p.get("s", 1.0))
    prior_dict = p.get("prior", {"kind": "sieve", "B": 3.0, "q_kind": "uniform", "Lbar": 6, "basis": {"max_level": 8}})
    mcmc = dict(p.get("mcmc", {"iters": 4000, "burnin": 2000}))
    calib = float(p.get("calibration_mass", 0.5))
    tol = float(p.get("monotone_tolerance", 0.05))
    model = ModelParams.from_dict(config.model)
    model_json = json.dumps(model.to_dict(), sort_keys=True)

    report = StudyReport("contraction", config=config.to_dict())
    tasks, cells = [], []
    for i, n in enumerate(config.n_grid):
        Delta = config.delta(n)
        config.check_regime(n, Delta)
        cells.append({"n": n, "Delta": Delta, "horizon": n * Delta, "eps_n": epsilon_n(n * Delta, s)})
        tasks += [
            (model_json, prior_dict, mcmc, n, Delta, config.substeps, config.seed + CELL_STRIDE * i + r)
            for r in range(config.reps)
        ]
    results = run_tasks(_contraction_task, tasks, config.workers)
    per_cell = [results[i * config.reps : (i + 1) * config.reps] for i in range(len(cells))]

    ok0 = [r for r in per_cell[0] if "failed" not in r]
    if not ok0:
        report.flags.append("calibration cell failed")
        report.runtime = time.perf_counter() - start
        return report
    # M: the average ball mass over the first cell's datasets equals `calib`
    d0 = [r["distances"] for r in ok0]
    grid = np.sort(np.concatenate(d0))
    grid = grid[:: max(1, grid.size // 2000)]
    masses = np.array([np.mean([np.mean(d <= g) for d in d0]) for g in grid])
    radius0 = grid[min(int(np.searchsorted(masses, calib)), grid.size - 1)]
    M = float(radius0 / cells[0]["eps_n"])
    report.summary["M"] = M

    for cell, chunk in zip(cells, per_cell):
        ok = [r for r in chunk if "failed" not in r]
        cell["failed"] = len(chunk) - len(ok)
        if not ok:
            cell["flag"] = "mcmc failed"
            continue
        radius = M * cell["eps_n"]
        mass = np.array([np.mean(r["distances"] <= radius) for r in ok])
        errs = np.array([r["mean_error"] for r in ok])
        cell.update(
            radius=radius,
            mass=float(mass.mean()),
            mass_se=float(mass.std(ddof=1) / math.sqrt(mass.size)) if mass.size > 1 else float("nan"),
            mass_infinite_radius=1.0,
            mean_error=float(errs.mean()),
            mean_error_se=float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else float("nan"),
            acceptance=float(np.mean([r["acceptance"].get("within", float("nan")) for r in ok])),
            levels=_merge_freq([r["levels"] for r in ok]),
        )
        report.cells.append(cell)
    good = [c for c in cells if "mass" in c]
    if len(good) == len(cells) and len(cells) > 1:
        m = [c["mass"] for c in good]
        report.verdict(
            "contraction.mass_nondecreasing",
            all(b >= a - tol for a, b in zip(m, m[1:])),
            f"masses {', '.join(f'{v:.3f}' for v in m)}",
        )
        e = [(c["mean_error"], c["mean_error_se"]) for c in good]
        report.verdict(
            "contraction.error_decreasing",
            all(b[0] <= a[0] + 2 * math.hypot(a[1], b[1]) for a, b in zip(e, e[1:])),
            f"errors {', '.join(f'{v[0]:.3f}' for v in e)}",
        )
        final = float(p.get("terminal_mass", 0.9))
        report.verdict("contraction.terminal_mass", m[-1] >= final, f"terminal mass {m[-1]:.3f} (need {final})")
    else:
        report.flags.append("insufficient grid" if len(cells) < 2 else "failed cells")
    report.runtime = time.perf_counter() - start
    return report


def _merge_freq(items: list[dict]) -> dict:
    out: dict = {}
    for d in items:
        for k, v in d.items():
            out[int(k)] = out.get(int(k), 0.0) + v / len(items)
    return out


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------


def perturbation_direction(basis: WaveletBasis, level: int, seed: int):
    """A unit-``L^2`` direction in ``S_level`` with zero mean, drawn from Gaussian coefficients."""
    rng = np.random.Generator(np.random.Philox(seed))
    c = rng.standard_normal(2**level)
    c[0] = 0.0
    c /= np.linalg.norm(c)
    return basis.synthesize(CoefficientVector(level, c))


def _perturbed(model: ModelParams, direction, radius: float) -> ModelParams:
    b0 = model.drift.function
    d0 = model.drift.derivative
    dd = direction.derivative
    fn = PeriodicFunction(lambda x: b0(x) + radius * direction(x), derivative=lambda x: d0(x) + radius * dd(x))
    return ModelParams(DriftSpec(fn), model.sigma)


def _kl_task(model_json: str, params: dict, radius: float, reps: int, substeps: int, seed: int) -> dict:
    model = _model(model_json)
    basis = basis_from(params)
    direction = perturbation_direction(basis, int(params.get("direction_level", 3)), int(params.get("direction_seed", 0)))
    other = _perturbed(model, direction, radius)
    report = kl_checks(
        model,
        other,
        int(params.get("n", 512)),
        float(params.get("Delta", 0.005)),
        reps,
        substeps=substeps,
        seed=seed,
        short_reps=int(params.get("short_reps", 20000)),
    )
    report["radius"] = radius
    return report


def run_klcheck_study(config: ExperimentConfig) -> StudyReport:
    """Divergences between ``b0`` and ``b0 + r g`` for a fixed unit direction ``g``.

    ``params``: ``n`` (512), ``Delta`` (0.005), ``distances`` ([0.05, 0.1, 0.2]),
    ``short_reps`` (20000 one-interval paths for the Girsanov moments),
    ``direction_level`` (3), ``direction_seed`` (0), ``slack`` (1.5).
    ``config.reps`` datasets of length ``n`` feed the variance checks.
    """
    start = time.perf_counter()
    p = config.params
    distances = [float(r) for r in p.get("distances", [0.05, 0.1, 0.2])]
    slack = float(p.get("slack", 1.5))
    n, Delta = int(p.get("n", 512)), float(p.get("Delta", 0.005))
    config.check_regime(n, Delta)
    model = ModelParams.from_dict(config.model)
    model_json = json.dumps(model.to_dict(), sort_keys=True)
    radii = [0.0] + distances
    tasks = [(model_json, p, r, config.reps, config.substeps, config.seed + CELL_STRIDE * i) for i, r in enumerate(radii)]
    rows = run_tasks(_kl_task, tasks, config.workers)
    report = StudyReport("klcheck", config=config.to_dict())
    for row in rows:
        report.cells.append(row)

    null = rows[0]
    g = null["girsanov"]
    dec = null["decomposition"]
    report.verdict(
        "klcheck.null_row",
        abs(g["mean_cv"]) <= 3 * max(g["mean_cv_se"], 1e-300)
        and abs(dec["mean_total"]) <= 3 * max(dec["mean_total_se"], 1e-300)
        and null["kl_invariant"] <= 1e-12,
        "b = b0 gives zero divergences",
    )
    pert = rows[1:]
    ratios = [r["kl_over_delta_l2sq"] for r in pert]
    report.summary["kl_ratios"] = ratios
    report.verdict(
        "klcheck.kl_scaling",
        max(ratios) / min(ratios) <= slack,
        f"KL/(Delta r^2) = {', '.join(f'{v:.4g}' for v in ratios)}",
    )
    for r in pert:
        gm = r["girsanov"]
        r["girsanov_mean_z"] = (gm["mean_cv"] - gm["mean_reference"]) / gm["mean_cv_se"]
    report.verdict(
        "klcheck.girsanov_mean",
        all(abs(r["girsanov_mean_z"]) <= 3 for r in pert),
        "Girsanov means within 3 SE of (Delta/2)||f||^2",
    )
    # invariant-density KL against C' ||b - b0||^2, C' fitted at the smallest distance
    C_prime = slack * pert[0]["kl_invariant"] / pert[0]["l2_distance"] ** 2
    report.summary["C_prime"] = C_prime
    report.verdict(
        "klcheck.invariant_kl_bound",
        all(r["kl_invariant"] <= C_prime * r["l2_distance"] ** 2 for r in pert[1:]),
        f"C' = {C_prime:.4g}",
    )
    report.verdict(
        "klcheck.kl_nonnegative",
        all(r["kl_transition"] >= -3 * r["kl_transition_se"] for r in rows),
        "continuous-path KL estimates >= -3 SE",
    )
    report.verdict(
        "klcheck.tensorization",
        all(r["tensorization"]["holds"] for r in pert),
        "; ".join(
            f"r={r['radius']}: {r['tensorization']['var_total']:.4g} <= {r['tensorization']['bound']:.4g}" for r in pert
        ),
    )
    report.runtime = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# prior mass
# ---------------------------------------------------------------------------


def run_smallball_study(config: ExperimentConfig) -> StudyReport:
    """Prior support in ``Theta(K0)`` and small-ball prior mass around ``pi_m b0``.

    ``params``: ``prior`` (prior JSON), ``support_draws`` (10000), ``ball_draws``
    (200000), ``m`` (2), ``eps`` (0.5).
    """
    start = time.perf_counter()
    p = config.params
    model = ModelParams.from_dict(config.model)
    prior_dict = p.get("prior", {"kind": "sieve", "B": 3.0, "q_kind": "uniform", "Lbar": 6, "basis": {"max_level": 8}})
    prior = PriorSpec.from_dict(prior_dict, sigma=model.sigma)
    rng = np.random.Generator(np.random.Philox(config.seed))
    support = prior_support_check(prior, int(p.get("support_draws", 10000)), rng)
    ball = small_ball_mass(prior, model.drift, int(p.get("m", 2)), float(p.get("eps", 0.5)), int(p.get("ball_draws", 200000)), rng)
    report = StudyReport("smallball", config=config.to_dict())
    report.cells = [{"support": support}, {"small_ball": ball}]
    report.verdict(
        "smallball.prior_support",
        support["passed"] == support["draws"],
        f"{support['passed']}/{support['draws']} draws in Theta(K0={support['K0']:.4g})",
    )
    report.verdict(
        "smallball.mass",
        ball["passes"],
        f"mass {ball['mass']:.3g} +- {ball['se']:.2g} vs bound {ball['bound']:.3g}",
    )
    report.runtime = time.perf_counter() - start
    return report


def run_smallball_and_kl(config: ExperimentConfig) -> StudyReport:
    """Both prior-mass and divergence checks in one report."""
    kl = run_klcheck_study(ExperimentConfig(**{**config.to_dict(), "study": "klcheck"}))
    sb = run_smallball_study(ExperimentConfig(**{**config.to_dict(), "study": "smallball"}))
    merged = StudyReport("smallball", config=config.to_dict())
    merged.cells = kl.cells + sb.cells
    merged.verdicts = kl.verdicts + sb.verdicts
    merged.summary = {**kl.summary, **sb.summary}
    merged.runtime = kl.runtime + sb.runtime
    return merged


# ---------------------------------------------------------------------------
# path modulus
# ---------------------------------------------------------------------------


def _scaled_sigma(sigma: dict, factor: float) -> dict:
    if sigma.get("type") == "constant":
        return {"type": "constant", "value": factor * float(sigma["value"])}
    return {"type": "closed_form", "expr": f"{factor}*({sigma['expr']})"}


def _holder_task(model_json: str, m: float, mesh_cap: float, lag_points: int, seed: int) -> float:
    model = _model(model_json)
    n = int(math.ceil(m / mesh_cap))
    path = simulate_path(model, PathConfig(n, mesh_cap, lag_points, seed, x0=0.0))
    return holder_modulus_stat(path, m, mesh_cap)


def bootstrap_quantile_se(x, q: float, rng: np.random.Generator, draws: int = 400) -> float:
    x = np.asarray(x)
    idx = rng.integers(0, x.size, (draws, x.size))
    return float(np.quantile(x[idx], q, axis=1).std(ddof=1))


def run_holder_study(config: ExperimentConfig) -> StudyReport:
    """Quantiles of the path modulus statistic across horizons ``m``.

    ``params``: ``m_values`` ([25, 100, 400]), ``mesh_cap`` (exp(-2)),
    ``lag_points`` (32 fine steps per ``mesh_cap``), ``quantile`` (0.99),
    ``band`` (0.25), ``sigma_scales`` ([1, 2]).  ``config.reps`` paths per cell.
    The envelope is flat when every normalized quantile lies within ``band``
    of the mean of the normalized quantiles.
    """
    start = time.perf_counter()
    p = config.params
    m_values = [float(v) for v in p.get("m_values", [25, 100, 400])]
    mesh_cap = float(p.get("mesh_cap", math.exp(-2)))
    lag_points = int(p.get("lag_points", 32))
    qlev = float(p.get("quantile", 0.99))
    band = float(p.get("band", 0.25))
    scales = [float(v) for v in p.get("sigma_scales", [1.0, 2.0])]
    rng = np.random.Generator(np.random.Philox(config.seed + 7))
    report = StudyReport("holder", config=config.to_dict())
    envelopes: dict[float, list] = {}
    for si, scale in enumerate(scales):
        mdict = dict(config.model)
        mdict["sigma"] = _scaled_sigma(mdict.get("sigma", {"type": "constant", "value": 1.0}), scale)
        model_json = json.dumps(mdict, sort_keys=True)
        tasks = [
            (model_json, m, mesh_cap, lag_points, config.seed + CELL_STRIDE * i + r)
            for i, m in enumerate(m_values)
            for r in range(config.reps)
        ]
        stats_ = run_tasks(_holder_task, tasks, config.workers)
        env = []
        for i, m in enumerate(m_values):
            vals = np.array(stats_[i * config.reps : (i + 1) * config.reps])
            qv = float(np.quantile(vals, qlev))
            se = bootstrap_quantile_se(vals, qlev, rng)
            norm = math.sqrt(math.log(m))
            report.cells.append(
                {"sigma_scale": scale, "m": m, "quantile": qv, "quantile_se": se, "normalized": qv / norm, "normalized_se": se / norm}
            )
            env.append(qv / norm)
        envelopes[scale] = env
    base = envelopes[scales[0]]
    mean = float(np.mean(base))
    report.summary["envelope"] = base
    report.summary["envelope_deviation"] = [v / mean - 1 for v in base]
    report.verdict(
        "holder.finite",
        all(0 < c["quantile"] < math.inf for c in report.cells),
        "quantiles positive and finite",
    )
    report.verdict(
        "holder.flat_envelope",
        all(abs(v / mean - 1) <= band for v in base),
        f"normalized quantiles {', '.join(f'{v:.3f}' for v in base)}",
    )
    if len(scales) > 1:
        ratios = [e2 / e1 for e1, e2 in zip(base, envelopes[scales[1]])]
        want = scales[1] / scales[0]
        se1 = [c["normalized_se"] for c in report.cells if c["sigma_scale"] == scales[0]]
        se2 = [c["normalized_se"] for c in report.cells if c["sigma_scale"] == scales[1]]
        report.summary["sigma_ratios"] = ratios
        report.verdict(
            "holder.sigma_scaling",
            all(
                abs(e2 - want * e1) <= 3 * math.hypot(s2, want * s1) + 1e-12
                for e1, e2, s1, s2 in zip(base, envelopes[scales[1]], se1, se2)
            ),
            f"envelope ratios {', '.join(f'{v:.3f}' for v in ratios)} (expect {want:g})",
        )
    report.runtime = time.perf_counter() - start
    return report


STUDY_RUNNERS = {
    "rate": run_rate_study,
    "contraction": run_contraction_study,
    "klcheck": run_klcheck_study,
    "holder": run_holder_study,
    "smallball": run_smallball_study,
}


def run_study(config: ExperimentConfig) -> StudyReport:
    return STUDY_RUNNERS[config.study](config)
