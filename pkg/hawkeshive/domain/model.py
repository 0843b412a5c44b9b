"""
Hawkes model definition: baseline rates, kernel matrix, transfer function and marks.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..core.errors import ModelSpecException
from .kernels import ExponentialKernel, Kernel, KernelMatrix, StabilityReport, ZeroKernel, stability


class Transfer(str, Enum):
    """Transfer function h applied to the linear intensity."""

    IDENTITY = "identity"
    POSITIVE_PART = "positive_part"


class MarkLawKind(str, Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"


class MarkImpactKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    POWER = "power"


@dataclass(frozen=True)
class MarkLaw:
    """I.i.d. mark distribution.

    Parameters per kind: constant ``value``; exponential ``mean``;
    gamma ``shape`` and ``scale``; lognormal ``sigma`` and ``scale``.
    """

    kind: MarkLawKind
    params: Tuple[Tuple[str, float], ...] = ()

    @classmethod
    def create(cls, kind: str, **params: float) -> "MarkLaw":
        law = cls(MarkLawKind(kind), tuple(sorted((k, float(v)) for k, v in params.items())))
        law.distribution()
        return law

    @property
    def param_dict(self) -> Dict[str, float]:
        return dict(self.params)

    def distribution(self) -> Optional[Any]:
        """Frozen scipy distribution, or None for a constant mark."""
        p = self.param_dict
        try:
            if self.kind is MarkLawKind.CONSTANT:
                if p["value"] < 0:
                    raise ModelSpecException("constant mark must be non-negative", p)
                return None
            if self.kind is MarkLawKind.EXPONENTIAL:
                return stats.expon(scale=p["mean"])
            if self.kind is MarkLawKind.GAMMA:
                return stats.gamma(p["shape"], scale=p["scale"])
            return stats.lognorm(p["sigma"], scale=p["scale"])
        except KeyError as exc:
            raise ModelSpecException(f"missing parameter {exc} for {self.kind.value} mark law", p) from exc

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        dist = self.distribution()
        if dist is None:
            return np.full(n, self.param_dict["value"])
        return np.asarray(dist.rvs(size=n, random_state=rng), dtype=float)

    def expect(self, func: Callable[[float], float]) -> float:
        dist = self.distribution()
        if dist is None:
            return float(func(self.param_dict["value"]))
        return float(dist.expect(func))


@dataclass(frozen=True)
class MarkImpact:
    """Multiplicative boost χ(ξ) applied to the kernel of a marked event."""

    kind: MarkImpactKind = MarkImpactKind.CONSTANT
    exponent: float = 1.0

    def __call__(self, xi: Any) -> Any:
        xi = np.asarray(xi, dtype=float)
        if self.kind is MarkImpactKind.CONSTANT:
            return np.ones_like(xi)
        if self.kind is MarkImpactKind.LINEAR:
            return xi
        return np.power(xi, self.exponent)

    def describe(self) -> str:
        return f"power {self.exponent!r}" if self.kind is MarkImpactKind.POWER else self.kind.value

    @classmethod
    def parse(cls, text: str) -> "MarkImpact":
        parts = text.split()
        try:
            kind = MarkImpactKind(parts[0])
            if kind is MarkImpactKind.POWER:
                return cls(kind, float(parts[1]))
            return cls(kind)
        except (IndexError, ValueError) as exc:
            raise ModelSpecException(f"invalid mark impact: {text!r}") from exc


@dataclass(frozen=True)
class HawkesModel:
    """Baseline vector μ plus kernel matrix Φ, with optional transfer and marks."""

    mu: Tuple[float, ...]
    kernels: KernelMatrix
    transfer: Transfer = Transfer.IDENTITY
    mark_law: Optional[MarkLaw] = None
    mark_impact: Optional[Tuple[Tuple[MarkImpact, ...], ...]] = None
    _baseline: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or mu.size != self.kernels.dimension:
            raise ModelSpecException(
                "baseline length must match kernel dimension",
                {"mu": len(self.mu), "dimension": self.kernels.dimension},
            )
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ModelSpecException("baseline rates must be finite and non-negative", {"mu": list(self.mu)})
        if self.transfer is Transfer.IDENTITY and not self.kernels.is_non_negative:
            raise ModelSpecException("identity transfer requires non-negative kernels")
        if self.mark_impact is not None:
            d = self.kernels.dimension
            if len(self.mark_impact) != d or any(len(row) != d for row in self.mark_impact):
                raise ModelSpecException("mark impact matrix must match kernel dimension")
            if self.mark_law is None:
                raise ModelSpecException("mark impact given without a mark law")
        mu.setflags(write=False)
        object.__setattr__(self, "_baseline", mu)

    @classmethod
    def create(
        cls,
        mu: Sequence[float],
        kernels: Sequence[Sequence[Kernel]],
        transfer: Transfer = Transfer.IDENTITY,
        mark_law: Optional[MarkLaw] = None,
        mark_impact: Optional[Sequence[Sequence[MarkImpact]]] = None,
    ) -> "HawkesModel":
        impact = tuple(tuple(row) for row in mark_impact) if mark_impact is not None else None
        return cls(tuple(float(m) for m in mu), KernelMatrix.from_nested(kernels), Transfer(transfer), mark_law, impact)

    @classmethod
    def poisson(cls, mu: Sequence[float]) -> "HawkesModel":
        return cls(tuple(float(m) for m in mu), KernelMatrix.zeros(len(mu)))

    @classmethod
    def exponential_1d(cls, mu: float, alpha: float, beta: float) -> "HawkesModel":
        kernel: Kernel = ExponentialKernel(alpha, beta) if alpha > 0 else ZeroKernel()
        return cls((float(mu),), KernelMatrix.single(kernel))

    @classmethod
    def symmetric_bivariate(cls, mu0: float, self_kernel: Kernel, cross_kernel: Kernel) -> "HawkesModel":
        """Two components with shared self kernel on the diagonal and cross kernel off it."""
        return cls.create([mu0, mu0], [[self_kernel, cross_kernel], [cross_kernel, self_kernel]])

    @property
    def dimension(self) -> int:
        return self.kernels.dimension

    @property
    def baseline(self) -> np.ndarray:
        return self._baseline

    @property
    def is_marked(self) -> bool:
        return self.mark_law is not None

    def impact_matrix(self) -> Tuple[Tuple[MarkImpact, ...], ...]:
        if self.mark_impact is not None:
            return self.mark_impact
        d = self.dimension
        return tuple(tuple(MarkImpact() for _ in range(d)) for _ in range(d))

    def mean_impact(self) -> np.ndarray:
        """E[χ^{ij}(ξ)] per entry; all ones for unmarked models."""
        d = self.dimension
        if self.mark_law is None:
            return np.ones((d, d))
        law = self.mark_law
        return np.array([[law.expect(lambda x, f=f: float(f(x))) for f in row] for row in self.impact_matrix()])

    def effective_norm_matrix(self) -> np.ndarray:
        """Mean offspring matrix ||Φ^{ij}||·E[χ^{ij}]."""
        return self.kernels.norm_matrix() * self.mean_impact()

    def stability(self) -> StabilityReport:
        return stability(self.kernels)

    def with_baseline(self, mu: Sequence[float]) -> "HawkesModel":
        return HawkesModel(tuple(float(m) for m in mu), self.kernels, self.transfer, self.mark_law, self.mark_impact)

    def with_kernels(self, kernels: KernelMatrix) -> "HawkesModel":
        return HawkesModel(self.mu, kernels, self.transfer, self.mark_law, self.mark_impact)
