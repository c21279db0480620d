"""Sparse precision matrix estimation under the horseshoe-like prior-penalty dual."""

__version__ = "0.1.0"

from .core import (
    DomainError,
    GhslError,
    InputError,
    NumericalError,
    RngSeed,
    SampleStats,
    extract_blocks,
    is_positive_definite,
    sample_covariance,
    sample_mvn,
)
from .ecm import EcmConfig, EcmFit, ecm_fit, select_edges_map
from .global_scale import ScaleSolveSpec, shrinkage_expectation, solve_global_scale
from .mcmc import McmcConfig, McmcResult, PosteriorSummary, run_mcmc, select_edges
from .metrics import classification_metrics, evaluate, fnorm_diff, steins_loss
from .penalty import (
    expected_nu,
    hs_like_density,
    log_posterior,
    penalty,
    penalty_grad,
    penalty_hess,
    prior_tail_mass,
)
from .structures import TruthSpec, gen_cliques, gen_hubs, gen_random, generate_replicates
