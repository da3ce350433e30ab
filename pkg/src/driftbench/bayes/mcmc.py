"""Metropolis-Hastings posterior sampling for wavelet-series priors.

Within a resolution the chain runs a random-walk Metropolis step on the
standardized coefficients ``u`` with independent Gaussian coordinates,
reflected into the support of ``q``.  Coordinate scales come from the
diagonal of the Gaussian approximation to the posterior; a global factor is
adapted towards a target acceptance rate during burn-in and frozen after it.

For the sieve prior, birth and death moves change the resolution by one:
a birth draws the new top level from ``q`` and a death removes it.  The
``q`` factors cancel, leaving ``h(m') L(m') p_rev / (h(m) L(m) p_fwd)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..paths import Observations
from ..wavelets import CoefficientVector
from .likelihood import AffineLikelihood
from .priors import SIEVE, PriorSpec


class MCMCError(RuntimeError):
    """Raised when the sampler cannot make progress."""


@dataclass(frozen=True)
class MCMCConfig:
    iters: int = 5000
    burnin: int = 2000
    step_scale: float | None = None
    seed: int = 0
    target_accept: float = 0.25
    level_move_prob: float = 0.2
    adapt_every: int = 50
    flat_likelihood: bool = False
    initial_level: int | None = None


def metropolis_accept(log_ratio: float, rng: np.random.Generator) -> bool:
    """Accept with probability ``min(1, exp(log_ratio))``."""
    if log_ratio >= 0:
        return True
    return bool(rng.random() < math.exp(log_ratio))


def metropolis_step(state, log_target, propose, rng: np.random.Generator):
    """One Metropolis step with a symmetric proposal; returns ``(state, accepted)``."""
    cand = propose(state, rng)
    if metropolis_accept(log_target(cand) - log_target(state), rng):
        return cand, True
    return state, False


def reflect(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fold ``x`` into ``[lo, hi]`` by repeated reflection at the ends."""
    width = hi - lo
    t = np.mod(x - lo, 2 * width)
    return lo + width - np.abs(t - width)


@dataclass
class PosteriorChain:
    """Post-burn-in draws ``(m, c, log posterior)`` and acceptance counters."""

    levels: list = field(default_factory=list)
    coeffs: list = field(default_factory=list)
    logpost: list = field(default_factory=list)
    accepted: dict = field(default_factory=dict)
    proposed: dict = field(default_factory=dict)
    seed: int = 0
    scale: float = 1.0

    def append(self, c: CoefficientVector, logpost: float):
        self.levels.append(c.m)
        self.coeffs.append(c.values.copy())
        self.logpost.append(float(logpost))

    def __len__(self):
        return len(self.levels)

    def draw(self, i: int) -> CoefficientVector:
        return CoefficientVector(self.levels[i], self.coeffs[i])

    def padded(self, m: int | None = None) -> np.ndarray:
        """Draws as rows of a ``(len, 2**m)`` array, zero-padded to a common resolution."""
        m = max(self.levels) if m is None else m
        out = np.zeros((len(self), 2**m))
        for i, c in enumerate(self.coeffs):
            k = min(c.size, 2**m)
            out[i, :k] = c[:k]
        return out

    def mean(self) -> CoefficientVector:
        m = max(self.levels)
        return CoefficientVector(m, self.padded(m).mean(axis=0))

    def acceptance(self) -> dict:
        return {k: (self.accepted.get(k, 0) / v if v else float("nan")) for k, v in self.proposed.items()}

    def level_frequencies(self) -> dict:
        vals, counts = np.unique(self.levels, return_counts=True)
        return {int(v): float(c) / len(self) for v, c in zip(vals, counts)}

    def to_jsonl(self, path):
        with Path(path).open("w") as fh:
            for i, (m, c, lp) in enumerate(zip(self.levels, self.coeffs, self.logpost)):
                fh.write(json.dumps({"iter": i, "m": m, "coeffs": c.tolist(), "logpost": lp}) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "PosteriorChain":
        chain = cls()
        for line in Path(path).read_text().splitlines():
            rec = json.loads(line)
            chain.append(CoefficientVector(rec["m"], rec["coeffs"]), rec["logpost"])
        return chain

    def summary(self) -> dict:
        return {
            "draws": len(self),
            "seed": self.seed,
            "scale": self.scale,
            "acceptance": self.acceptance(),
            "levels": self.level_frequencies(),
        }


class _Level:
    """Per-resolution quantities: likelihood, weights and proposal scales."""

    def __init__(self, prior: PriorSpec, obs: Observations, m: int, flat: bool):
        self.m = m
        self.tau = prior.tau_vector(m)
        lo, hi = prior.q.support
        self.lik = None if flat else AffineLikelihood(obs, prior.sigma, prior.features, m)
        # prior-scale fallback keeps the proposal proper for flat or weak directions
        width = hi - lo
        prec = np.eye(2**m) * (12.0 / width**2)
        if self.lik is not None:
            prec = prec + self.tau[:, None] * self.lik.Q * self.tau[None, :]
        self.sd = np.minimum(np.sqrt(np.diag(np.linalg.inv(prec))), width / 2)

    def loglik(self, u: np.ndarray) -> float:
        return 0.0 if self.lik is None else self.lik(self.tau * u)


def posterior_mode_start(level: _Level, prior: PriorSpec) -> np.ndarray:
    """Start at the clipped Gaussian-approximation mode (or the centre of ``q``)."""
    lo, hi = prior.q.support
    centre = np.full(2**level.m, 0.5 * (lo + hi))
    if level.lik is None:
        return centre
    Qu = level.tau[:, None] * level.lik.Q * level.tau[None, :]
    ru = level.tau * level.lik.r
    u = np.linalg.lstsq(Qu + np.eye(Qu.shape[0]) * 1e-8, ru, rcond=None)[0]
    return np.clip(u, lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo))


def run_mcmc(prior: PriorSpec, obs: Observations, config: MCMCConfig) -> PosteriorChain:
    """Sample the posterior ``prior x exp(Euler pseudo-log-likelihood)``."""
    rng = np.random.Generator(np.random.Philox(config.seed))
    flat = config.flat_likelihood
    allowed = prior.levels
    cache: dict[int, _Level] = {}

    def level(m):
        if m not in cache:
            cache[m] = _Level(prior, obs, m, flat)
        return cache[m]

    m = config.initial_level or (2 if prior.kind == SIEVE and 2 in allowed else allowed[0])
    cur = level(m)
    u = posterior_mode_start(cur, prior)
    logq = lambda v: float(np.sum(prior.q.logpdf(v)))
    lo, hi = prior.q.support
    ll = cur.loglik(u)
    lp = prior.level_logmass(m) + logq(u)
    if not np.isfinite(ll + lp):
        raise MCMCError("initial state has zero posterior density")

    move_prob = config.level_move_prob if prior.kind == SIEVE and len(allowed) > 1 else 0.0
    scale = config.step_scale or 2.38 / math.sqrt(2**m)
    log_scale = math.log(scale)
    chain = PosteriorChain(seed=config.seed)
    counts = {"within": [0, 0], "birth": [0, 0], "death": [0, 0]}
    window = [0, 0]
    burn_accepts = 0

    def p_birth(k):
        return 0.0 if k >= max(allowed) else (move_prob if k <= min(allowed) else move_prob / 2)

    def p_death(k):
        return 0.0 if k <= min(allowed) else (move_prob if k >= max(allowed) else move_prob / 2)

    total = config.burnin + config.iters
    for it in range(total):
        burning = it < config.burnin
        r = rng.random()
        if r < p_birth(m) + p_death(m):
            birth = r < p_birth(m)
            kind = "birth" if birth else "death"
            new_m = m + 1 if birth else m - 1
            nxt = level(new_m)
            if birth:
                u_new = np.concatenate([u, prior.q.sample(rng, 2**new_m - 2**m)])
            else:
                u_new = u[: 2**new_m]
            ll_new = nxt.loglik(u_new)
            fwd = p_birth(m) if birth else p_death(m)
            rev = p_death(new_m) if birth else p_birth(new_m)
            log_a = (
                prior.level_logmass(new_m) - prior.level_logmass(m) + ll_new - ll + math.log(rev) - math.log(fwd)
            )
            counts[kind][1] += 1
            if metropolis_accept(log_a, rng):
                counts[kind][0] += 1
                m, cur, u, ll = new_m, nxt, u_new, ll_new
                lp = prior.level_logmass(m) + logq(u)
        else:
            prop = reflect(u + math.exp(log_scale) * cur.sd * rng.standard_normal(u.size), lo, hi)
            ll_new = cur.loglik(prop)
            lp_new = prior.level_logmass(m) + logq(prop)
            counts["within"][1] += 1
            acc = metropolis_accept(ll_new + lp_new - ll - lp, rng)
            if acc:
                counts["within"][0] += 1
                u, ll, lp = prop, ll_new, lp_new
            if burning:
                window[0] += acc
                window[1] += 1
                burn_accepts += acc
                if window[1] == config.adapt_every:
                    rate = window[0] / window[1]
                    log_scale += (rate - config.target_accept) * 2.0 / math.sqrt(1 + it / config.adapt_every)
                    window = [0, 0]
        if it == config.burnin - 1 and config.burnin > 0 and burn_accepts == 0:
            raise MCMCError("no within-model proposal was accepted during burn-in")
        if not burning:
            chain.append(CoefficientVector(m, cur.tau * u), ll + lp)

    chain.accepted = {k: v[0] for k, v in counts.items() if v[1]}
    chain.proposed = {k: v[1] for k, v in counts.items() if v[1]}
    chain.scale = math.exp(log_scale)
    return chain
