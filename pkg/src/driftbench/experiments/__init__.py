"""Monte-Carlo studies, their configuration and reports."""

from .config import STUDIES, ExperimentConfig, StudyReport, Verdict, parse_delta_rule
from .studies import (
    STUDY_RUNNERS,
    perturbation_direction,
    rough_drift,
    run_contraction_study,
    run_holder_study,
    run_klcheck_study,
    run_rate_study,
    run_smallball_and_kl,
    run_smallball_study,
    run_study,
    run_tasks,
)
