"""Estimators of Hawkes models from event records."""

from .branching import branching_ratio_estimate
from .em import fit_em_nonparametric, fit_em_parametric
from .families import ExponentialFamily, ParametricFamily, PowerLawFamily, make_family
from .gof import goodness_of_fit
from .likelihood import LikelihoodEvaluation, compensator_increments, evaluate_likelihood, log_likelihood
from .mle import fit_mle
from .moments import CountMoments, fit_moments, fit_moments_from_statistics, model_count_moments
from .nonparametric import estimate_conditional_intensity, fit_contrast, fit_wiener_hopf
from .results import (
    BranchingRatioEstimate,
    ComponentFit,
    ConditionalIntensityEstimate,
    EstimationResult,
    GoodnessOfFit,
)

__all__ = [
    "BranchingRatioEstimate",
    "ComponentFit",
    "ConditionalIntensityEstimate",
    "CountMoments",
    "EstimationResult",
    "ExponentialFamily",
    "GoodnessOfFit",
    "LikelihoodEvaluation",
    "ParametricFamily",
    "PowerLawFamily",
    "branching_ratio_estimate",
    "compensator_increments",
    "estimate_conditional_intensity",
    "evaluate_likelihood",
    "fit_contrast",
    "fit_em_nonparametric",
    "fit_em_parametric",
    "fit_mle",
    "fit_moments",
    "fit_moments_from_statistics",
    "goodness_of_fit",
    "log_likelihood",
    "make_family",
    "model_count_moments",
]
