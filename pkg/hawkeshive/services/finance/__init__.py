"""Price construction, signature and Epps curves, reflexivity and meta-order impact."""

from .impact import ImpactCurve, him_impact_curve
from .price import PricePath, path_from_events, price_from_events
from .reflexivity import ReflexivityMethod, ReflexivityReport, ReflexivityRow, reflexivity_report
from .signature import (
    EppsCurve,
    SignatureCurve,
    epps_covariation,
    price_diffusion_covariance,
    price_diffusion_variance,
    signature_from_model,
    signature_plot,
)

__all__ = [
    "EppsCurve",
    "ImpactCurve",
    "PricePath",
    "ReflexivityMethod",
    "ReflexivityReport",
    "ReflexivityRow",
    "SignatureCurve",
    "epps_covariation",
    "him_impact_curve",
    "path_from_events",
    "price_diffusion_covariance",
    "price_diffusion_variance",
    "price_from_events",
    "reflexivity_report",
    "signature_from_model",
    "signature_plot",
]
