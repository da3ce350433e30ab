"""Priors, likelihoods, posterior sampling and divergence checks."""

from .checks import (
    chain_distances,
    girsanov_moments,
    kl_checks,
    posterior_ball_mass,
    prior_support_check,
    small_ball_mass,
)
from .likelihood import (
    AffineLikelihood,
    euler_log_transitions,
    girsanov_loglik_ratio,
    log_pseudo_likelihood,
    wrap_increment,
)
from .mcmc import MCMCConfig, MCMCError, PosteriorChain, metropolis_accept, metropolis_step, reflect, run_mcmc
from .priors import (
    INVARIANT_DENSITY,
    KNOWN_SMOOTHNESS,
    SIEVE,
    CoefficientLaw,
    PriorSpec,
    drift_from_logdensity,
    sieve_level_mass,
)


def sample_prior(prior: PriorSpec, m=None, rng=None):
    """Functional form of :meth:`PriorSpec.sample`."""
    import numpy as np

    return prior.sample(rng if rng is not None else np.random.default_rng(), m)
