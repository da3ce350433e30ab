"""Posterior summaries and Monte-Carlo checks of the divergence identities."""

from __future__ import annotations

import math

import numpy as np

from ..model import DriftSpec, ModelParams, kl_invariant
from ..paths import PathConfig, simulate_path, simulate_short_paths, subsample
from ..wavelets import WaveletBasis
from .likelihood import euler_log_transitions, girsanov_loglik_ratio
from .mcmc import PosteriorChain
from .priors import INVARIANT_DENSITY, PriorSpec


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def var_se(x) -> tuple[float, float]:
    """Sample variance and its large-sample standard error ``sqrt((m4 - v^2) / N)``."""
    x = np.asarray(x, dtype=float)
    c = x - x.mean()
    v = float(np.mean(c**2) * x.size / (x.size - 1))
    m4 = float(np.mean(c**4))
    return v, float(math.sqrt(max(m4 - v**2, 0.0) / x.size))


# ---------------------------------------------------------------------------
# posterior summaries
# ---------------------------------------------------------------------------


def chain_distances(chain: PosteriorChain, b0, basis: WaveletBasis, prior: PriorSpec | None = None) -> np.ndarray:
    """``||b - b0||_2`` for every draw.

    Drift-series draws use Parseval against the coefficients of ``b0`` plus its
    tail energy; log-density draws are evaluated on the quadrature grid.
    """
    f0 = b0.function if isinstance(b0, DriftSpec) else b0
    x = basis.quad_grid
    v0 = np.asarray(f0(x), dtype=float)
    if prior is not None and prior.kind == INVARIANT_DENSITY:
        out = np.empty(len(chain))
        for i in range(len(chain)):
            d = prior.drift_function(chain.draw(i))(x) - v0
            out[i] = math.sqrt(float(np.mean(d * d)))
        return out
    m = max(chain.levels)
    a = basis.analyze_samples(v0, m).values
    tail = max(float(np.mean(v0 * v0)) - float(a @ a), 0.0)
    diff = chain.padded(m) - a[None, :]
    return np.sqrt(np.sum(diff**2, axis=1) + tail)


def posterior_ball_mass(
    chain: PosteriorChain, b0, radius: float, basis: WaveletBasis, prior: PriorSpec | None = None
) -> float:
    """Fraction of draws with ``||b - b0||_2 <= radius``."""
    if math.isinf(radius):
        return 1.0
    return float(np.mean(chain_distances(chain, b0, basis, prior) <= radius))


def prior_support_check(prior: PriorSpec, draws: int, rng: np.random.Generator, m: int | None = None) -> dict:
    """Share of prior draws inside ``Theta(K0)`` for the prior's implied ``K0``."""
    K0 = prior.implied_K0(m)
    passed = 0
    worst = 0.0
    grid = np.arange(4096) / 4096
    for _ in range(draws):
        c = prior.sample(rng, m)
        fn = prior.drift_function(c)
        if prior.kind == INVARIANT_DENSITY:
            val = float(np.max(np.abs(fn(grid))) + np.max(np.abs(fn.derivative(grid))))
        else:
            val = float(
                np.max(np.abs(prior.basis.synthesize_samples(c, 4096)))
                + np.max(np.abs(prior.basis.synthesize_samples(c, 4096, deriv=1)))
            )
        worst = max(worst, val)
        passed += val <= K0
    return {"draws": draws, "passed": passed, "K0": K0, "max_theta_norm": worst}


def small_ball_mass(
    prior: PriorSpec, b0, m: int, eps: float, draws: int, rng: np.random.Generator
) -> dict:
    """Monte-Carlo ``Pi_m(||b - pi_m b0||_2 <= eps)`` against ``(eps zeta / 2)^{D_m}``."""
    f0 = b0.function if isinstance(b0, DriftSpec) else b0
    target = prior.basis.analyze(f0, m).values
    tau = prior.tau_vector(m)
    u = prior.q.sample(rng, (draws, 2**m))
    dist = np.sqrt(np.sum((u * tau[None, :] - target[None, :]) ** 2, axis=1))
    hits = (dist <= eps).astype(float)
    mass, se = mean_se(hits)
    bound = (eps * prior.zeta / 2.0) ** (2**m)
    return {"mass": mass, "se": se, "bound": bound, "m": m, "eps": eps, "passes": mass >= bound - 3 * se}


# ---------------------------------------------------------------------------
# divergence identities
# ---------------------------------------------------------------------------


def _weighted_norm2(model0: ModelParams, f, power: int = 2) -> float:
    return model0.invariant_density().expectation(lambda x: np.abs(f(x)) ** power)


def girsanov_moments(model0: ModelParams, b, Delta: float, reps: int, substeps: int = 50, seed: int = 0) -> dict:
    """Monte-Carlo moments of the log-ratio over one interval ``[0, Delta]`` under ``P_{b0}``.

    The control-variate estimate of the mean subtracts the martingale part
    ``sum f (dX - b0 dt)`` with ``f = (b0 - b) / sigma^2``, which has mean zero.
    """
    sigma = model0.sigma
    b0f = model0.drift.function
    bf = b.function if isinstance(b, DriftSpec) else b
    cfg = PathConfig(1, Delta, substeps, seed)
    paths = simulate_short_paths(model0, cfg, reps)
    lr = girsanov_loglik_ratio(b0f, bf, sigma, paths, cfg.fine_step)
    left = np.mod(paths[:, :-1], 1.0)
    g = (b0f(left) - bf(left)) / sigma.function(left) ** 2
    mart = np.sum(g * (np.diff(paths, axis=1) - b0f(left) * cfg.fine_step), axis=1)
    f = lambda x: (b0f(x) - bf(x)) / sigma.function(x)
    norm2 = _weighted_norm2(model0, f)
    norm4 = _weighted_norm2(model0, f, 4)
    mean, mean_err = mean_se(lr)
    cv, cv_err = mean_se(lr - mart)
    second, second_err = mean_se(lr**2)
    return {
        "Delta": Delta,
        "reps": reps,
        "mean": mean,
        "mean_se": mean_err,
        "mean_cv": cv,
        "mean_cv_se": cv_err,
        "mean_reference": 0.5 * Delta * norm2,
        "second_moment": second,
        "second_moment_se": second_err,
        "second_moment_reference": Delta * norm2 + 0.25 * Delta**2 * norm4,
        "f_norm2_mu0": norm2,
        "f_norm4_mu0": norm4,
    }


def kl_checks(
    model0: ModelParams,
    model: ModelParams,
    n: int,
    Delta: float,
    reps: int,
    substeps: int = 20,
    seed: int = 0,
    short_reps: int | None = None,
) -> dict:
    """Monte-Carlo report on the divergence identities between ``b0`` and ``b``.

    Returns estimates with standard errors of

    * the per-interval continuous-path KL (Girsanov mean) and its quadrature reference,
    * the decomposition ``E log(p0^n / p_b^n) = K(pi_0, pi_b) + n KL`` for the Euler pseudo-densities,
    * the variance tensorization ``Var(total) <= 3 [Var log(pi_0/pi_b) + n Var(single)]``,
    * the ratio ``KL / (Delta ||b0 - b||_2^2)``.
    """
    sigma = model0.sigma
    b0f, bf = model0.drift.function, model.drift.function
    gm = girsanov_moments(model0, model.drift, Delta, short_reps or reps, substeps, seed)
    p0, p1 = model0.invariant_density(), model.invariant_density()
    totals = np.empty(reps)
    pi_terms = np.empty(reps)
    singles = []
    for r in range(reps):
        cfg = PathConfig(n, Delta, substeps, seed + 1_000_003 + r)
        x = subsample(simulate_path(model0, cfg), cfg).samples
        step = euler_log_transitions(b0f, sigma, x[:-1], x[1:], Delta) - euler_log_transitions(
            bf, sigma, x[:-1], x[1:], Delta
        )
        pi_terms[r] = p0.log(x[0]) - p1.log(x[0])
        totals[r] = pi_terms[r] + step.sum()
        singles.append(step)
    singles = np.concatenate(singles)
    kl_pi = kl_invariant(model0, model)
    l2 = math.sqrt(float(np.mean((b0f(np.arange(2**14) / 2**14) - bf(np.arange(2**14) / 2**14)) ** 2)))
    mean_total, mean_total_se = mean_se(totals)
    single_mean, single_mean_se = mean_se(singles)
    var_total, var_total_se = var_se(totals)
    var_pi, var_pi_se = var_se(pi_terms)
    var_single, var_single_se = var_se(singles)
    bound = 3.0 * (var_pi + n * var_single)
    kl_ratio = gm["mean_cv"] / (Delta * l2**2) if l2 > 0 else float("nan")
    return {
        "n": n,
        "Delta": Delta,
        "reps": reps,
        "l2_distance": l2,
        "girsanov": gm,
        "kl_transition": gm["mean_cv"],
        "kl_transition_se": gm["mean_cv_se"],
        "kl_invariant": kl_pi,
        "decomposition": {
            "mean_total": mean_total,
            "mean_total_se": mean_total_se,
            "predicted": kl_pi + n * single_mean,
            "residual": mean_total - (kl_pi + n * single_mean),
            "residual_se": math.hypot(mean_total_se, n * single_mean_se),
        },
        "tensorization": {
            "var_total": var_total,
            "var_total_se": var_total_se,
            "var_pi": var_pi,
            "var_pi_se": var_pi_se,
            "var_single": var_single,
            "var_single_se": var_single_se,
            "bound": bound,
            "slack": bound - var_total,
            "holds": bool(var_total <= bound + 3 * var_total_se),
        },
        "kl_over_delta_l2sq": kl_ratio,
        "kl_over_delta_l2sq_se": gm["mean_cv_se"] / (Delta * l2**2) if l2 > 0 else float("nan"),
    }
