"""Domain value types: kernels, models, event streams and run configurations."""

from .events import EventSequence, Genealogy
from .kernels import (
    ExponentialKernel,
    Kernel,
    KernelFactory,
    KernelFamily,
    KernelMatrix,
    PiecewiseConstantKernel,
    PowerLawKernel,
    StabilityReport,
    SumExponentialKernel,
    ZeroKernel,
    stability,
)
from .model import HawkesModel, MarkImpact, MarkLaw, Transfer

__all__ = [
    "EventSequence",
    "ExponentialKernel",
    "Genealogy",
    "HawkesModel",
    "Kernel",
    "KernelFactory",
    "KernelFamily",
    "KernelMatrix",
    "MarkImpact",
    "MarkLaw",
    "PiecewiseConstantKernel",
    "PowerLawKernel",
    "StabilityReport",
    "SumExponentialKernel",
    "Transfer",
    "ZeroKernel",
    "stability",
]
