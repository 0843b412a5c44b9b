"""
Kernel families, kernel matrices and stability analysis.

A kernel is a causal, L1-integrable response function φ(t). Every family knows
its exact L1 norm, its primitive, its Laplace transform f̂(z) = ∫ f(t) e^{zt} dt,
an effective support (time after which the remaining tail mass is negligible),
a non-increasing envelope used as a thinning bound and, for non-negative
kernels, a sampler for lags distributed as φ/||φ||.

Kernel values are immutable after construction; every method is pure.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar, Dict, Iterator, List, Sequence, Tuple, Type, Union

import numpy as np
from scipy import special

from ..core.errors import (
    DomainException,
    ModelSpecException,
    NonIntegrableKernelException,
)
from ..core.observability import get_logger
from ..core.settings import settings

logger = get_logger(__name__)

ArrayLike = Union[float, complex, np.ndarray, Sequence[float]]

# Gauss-Legendre rule reused by every panel quadrature
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_PANELS_PER_DECADE = 6
_LAPLACE_CHUNK = 1024


class KernelFamily(str, Enum):
    """Available kernel families."""

    EXPONENTIAL = "exponential"
    SUM_EXPONENTIAL = "sum_exponential"
    POWER_LAW = "power_law"
    PIECEWISE = "piecewise"
    ZERO = "zero"


def log_panel_rule(upper: float, lower: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, upper] with log-spaced panels."""
    upper = max(upper, lower * 10.0)
    n_panels = max(int(np.ceil(np.log10(upper / lower) * _PANELS_PER_DECADE)), 1)
    edges = np.concatenate([[0.0], np.geomspace(lower, upper, n_panels + 1)])
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class Kernel(ABC):
    """Abstract causal kernel."""

    family: ClassVar[KernelFamily]

    def __call__(self, t: ArrayLike) -> np.ndarray:
        return self.value(t)

    def value(self, t: ArrayLike) -> np.ndarray:
        """Evaluate φ(t); exactly 0 for t < 0."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        mask = t >= 0
        if np.any(mask):
            out[mask] = self._value(t[mask])
        return out

    @abstractmethod
    def _value(self, t: np.ndarray) -> np.ndarray:
        """Evaluate on non-negative times."""

    @abstractmethod
    def l1_norm(self) -> float:
        """Exact ∫|φ|."""

    def signed_integral(self) -> float:
        """Exact ∫φ; equals the L1 norm for non-negative kernels."""
        return self.l1_norm()

    @abstractmethod
    def integral(self, t: ArrayLike) -> np.ndarray:
        """Primitive ∫₀ᵗ φ(u) du, zero for t <= 0."""

    @abstractmethod
    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        """Laplace transform f̂(z) = ∫ φ(t) e^{zt} dt."""

    @abstractmethod
    def support(self, tol: float = 0.0) -> float:
        """Time beyond which the tail mass is below ``tol`` of the norm."""

    def envelope(self, t: ArrayLike) -> np.ndarray:
        """Non-increasing upper bound of max(φ, 0) on [t, ∞)."""
        return np.maximum(self.value(t), 0.0)

    @abstractmethod
    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` lags from the density φ/||φ|| (non-negative kernels only)."""

    @abstractmethod
    def scaled(self, factor: float) -> "Kernel":
        """Return factor·φ."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Parameters as written in a model spec."""

    @property
    def is_non_negative(self) -> bool:
        return True

    @property
    def is_monotone(self) -> bool:
        """True when φ is non-increasing on [0, ∞)."""
        return True

    def effective_support(self) -> float:
        return self.support(settings.support_tolerance)

    @staticmethod
    def _as_complex(z: ArrayLike) -> Tuple[np.ndarray, bool]:
        arr = np.asarray(z, dtype=complex)
        return np.atleast_1d(arr), arr.ndim == 0

    @staticmethod
    def _finish(values: np.ndarray, scalar: bool) -> Union[complex, np.ndarray]:
        return complex(values[0]) if scalar else values


@dataclass(frozen=True)
class ZeroKernel(Kernel):
    """The identically zero kernel."""

    family: ClassVar[KernelFamily] = KernelFamily.ZERO

    def _value(self, t: np.ndarray) -> np.ndarray:
        return np.zeros_like(t)

    def l1_norm(self) -> float:
        return 0.0

    def integral(self, t: ArrayLike) -> np.ndarray:
        return np.zeros_like(np.asarray(t, dtype=float))

    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        zz, scalar = self._as_complex(z)
        return self._finish(np.zeros_like(zz), scalar)

    def support(self, tol: float = 0.0) -> float:
        return 0.0

    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.empty(0)

    def scaled(self, factor: float) -> "Kernel":
        return self

    def params(self) -> Dict[str, Any]:
        return {}


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """φ(t) = α β e^{-βt}; α is dimensionless, β in 1/time."""

    alpha: float
    beta: float
    family: ClassVar[KernelFamily] = KernelFamily.EXPONENTIAL

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ModelSpecException(
                "exponential kernel parameters must be strictly positive",
                {"alpha": self.alpha, "beta": self.beta},
            )

    def _value(self, t: np.ndarray) -> np.ndarray:
        return self.alpha * self.beta * np.exp(-self.beta * t)

    def l1_norm(self) -> float:
        return float(self.alpha)

    def integral(self, t: ArrayLike) -> np.ndarray:
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return -self.alpha * np.expm1(-self.beta * t)

    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        zz, scalar = self._as_complex(z)
        if np.any(zz.real >= self.beta):
            raise DomainException(
                "exponential Laplace transform diverges for Re(z) >= beta", {"beta": self.beta}
            )
        return self._finish(self.alpha / (1.0 - zz / self.beta), scalar)

    def support(self, tol: float = 0.0) -> float:
        tol = tol or settings.support_tolerance
        return float(np.log(1.0 / tol) / self.beta)

    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(1.0 / self.beta, size=n)

    def scaled(self, factor: float) -> "Kernel":
        return ExponentialKernel(self.alpha * factor, self.beta) if factor > 0 else ZeroKernel()

    def params(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class SumExponentialKernel(Kernel):
    """φ(t) = Σ_k α_k β_k e^{-β_k t}."""

    components: Tuple[Tuple[float, float], ...]
    family: ClassVar[KernelFamily] = KernelFamily.SUM_EXPONENTIAL

    def __post_init__(self) -> None:
        if not self.components:
            raise ModelSpecException("sum_exponential kernel needs at least one component")
        for alpha, beta in self.components:
            if not (alpha > 0 and beta > 0):
                raise ModelSpecException(
                    "sum_exponential parameters must be strictly positive",
                    {"alpha": alpha, "beta": beta},
                )

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.components])

    @property
    def betas(self) -> np.ndarray:
        return np.array([b for _, b in self.components])

    def _value(self, t: np.ndarray) -> np.ndarray:
        a, b = self.alphas, self.betas
        return np.sum(a * b * np.exp(-np.multiply.outer(t, b)), axis=-1)

    def l1_norm(self) -> float:
        return float(np.sum(self.alphas))

    def integral(self, t: ArrayLike) -> np.ndarray:
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return np.sum(-self.alphas * np.expm1(-np.multiply.outer(t, self.betas)), axis=-1)

    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        zz, scalar = self._as_complex(z)
        if np.any(zz.real >= self.betas.min()):
            raise DomainException("sum_exponential Laplace transform diverges for Re(z) >= min beta")
        values = np.sum(self.alphas / (1.0 - np.divide.outer(zz, self.betas)), axis=-1)
        return self._finish(values, scalar)

    def support(self, tol: float = 0.0) -> float:
        tol = tol or settings.support_tolerance
        return float(np.log(1.0 / tol) / self.betas.min())

    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        weights = self.alphas / self.alphas.sum()
        which = rng.choice(len(self.components), size=n, p=weights)
        return rng.exponential(1.0, size=n) / self.betas[which]

    def scaled(self, factor: float) -> "Kernel":
        if factor <= 0:
            return ZeroKernel()
        return SumExponentialKernel(tuple((a * factor, b) for a, b in self.components))

    def params(self) -> Dict[str, Any]:
        return {"alpha": [a for a, _ in self.components], "beta": [b for _, b in self.components]}


@dataclass(frozen=True)
class PowerLawKernel(Kernel):
    """Regularized power law φ(t) = α β / (1 + βt)^{1+γ}."""

    alpha: float
    beta: float
    gamma: float
    family: ClassVar[KernelFamily] = KernelFamily.POWER_LAW

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ModelSpecException(
                "power_law alpha and beta must be strictly positive",
                {"alpha": self.alpha, "beta": self.beta},
            )

    def _require_integrable(self) -> None:
        if self.gamma <= 0:
            raise NonIntegrableKernelException(
                "power_law kernel with gamma <= 0 is not integrable", {"gamma": self.gamma}
            )

    def _value(self, t: np.ndarray) -> np.ndarray:
        return self.alpha * self.beta * (1.0 + self.beta * t) ** (-1.0 - self.gamma)

    def l1_norm(self) -> float:
        self._require_integrable()
        return float(self.alpha / self.gamma)

    def integral(self, t: ArrayLike) -> np.ndarray:
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        if self.gamma == 0:
            return self.alpha * np.log1p(self.beta * t)
        return -(self.alpha / self.gamma) * np.expm1(-self.gamma * np.log1p(self.beta * t))

    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        """Quadrature along the rotated ray where e^{zt} decays monotonically.

        For s = z/β with Re(s) <= 0, the contour [0, ∞) is rotated onto the ray of
        direction d = -conj(s)/|s|, along which e^{su} = e^{-|s|t}. The branch point
        of (1+u)^{-1-γ} at u = -1 is never crossed because Re(d) >= 0.
        """
        self._require_integrable()
        zz, scalar = self._as_complex(z)
        s = zz / self.beta
        if np.any(s.real > 0):
            raise DomainException("power_law Laplace transform requires Re(z) <= 0")
        out = np.empty_like(s)
        at_zero = s == 0
        out[at_zero] = self.alpha / self.gamma
        rest = np.flatnonzero(~at_zero)
        if rest.size:
            r = np.abs(s[rest])
            nodes, weights = log_panel_rule(40.0 / r.min())
            for start in range(0, rest.size, _LAPLACE_CHUNK):
                idx = rest[start : start + _LAPLACE_CHUNK]
                r_chunk = np.abs(s[idx])
                d = -np.conj(s[idx]) / r_chunk
                base = 1.0 + np.multiply.outer(d, nodes)
                integrand = base ** (-1.0 - self.gamma) * np.exp(-np.multiply.outer(r_chunk, nodes))
                out[idx] = self.alpha * d * (integrand @ weights)
        return self._finish(out, scalar)

    def support(self, tol: float = 0.0) -> float:
        self._require_integrable()
        tol = tol or settings.support_tolerance
        return float(np.expm1(np.log(1.0 / tol) / self.gamma) / self.beta)

    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        self._require_integrable()
        u = 1.0 - rng.random(n)
        return np.expm1(-np.log(u) / self.gamma) / self.beta

    def scaled(self, factor: float) -> "Kernel":
        return PowerLawKernel(self.alpha * factor, self.beta, self.gamma) if factor > 0 else ZeroKernel()

    def params(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True)
class PiecewiseConstantKernel(Kernel):
    """φ(t) = level_k on [b_k, b_{k+1}); zero outside [b_0, b_n).

    Levels may be negative; such kernels are only meaningful with the
    positive-part transfer function.
    """

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]
    family: ClassVar[KernelFamily] = KernelFamily.PIECEWISE

    def __post_init__(self) -> None:
        b = np.asarray(self.breakpoints, dtype=float)
        if len(self.levels) < 1 or b.size != len(self.levels) + 1:
            raise ModelSpecException(
                "piecewise kernel needs len(breakpoints) == len(levels) + 1",
                {"breakpoints": len(self.breakpoints), "levels": len(self.levels)},
            )
        if b[0] < 0 or np.any(np.diff(b) <= 0):
            raise ModelSpecException("piecewise breakpoints must be non-negative and strictly increasing")

    @property
    def edges(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    @property
    def heights(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def _value(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.edges, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.levels))
        out = np.zeros_like(t)
        out[inside] = self.heights[idx[inside]]
        return out

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.heights) * self.widths))

    def signed_integral(self) -> float:
        return float(np.sum(self.heights * self.widths))

    def integral(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        covered = np.clip(np.subtract.outer(t, self.edges[:-1]), 0.0, self.widths)
        return covered @ self.heights

    def laplace(self, z: ArrayLike) -> Union[complex, np.ndarray]:
        zz, scalar = self._as_complex(z)
        out = np.empty_like(zz)
        small = np.abs(zz) == 0
        out[small] = self.signed_integral()
        if np.any(~small):
            zs = zz[~small]
            lo = self.edges[:-1]
            seg = np.exp(np.multiply.outer(zs, lo)) * np.expm1(np.multiply.outer(zs, self.widths))
            out[~small] = (seg @ self.heights) / zs
        return self._finish(out, scalar)

    def support(self, tol: float = 0.0) -> float:
        return float(self.edges[-1])

    def envelope(self, t: ArrayLike) -> np.ndarray:
        positive = np.maximum(self.heights, 0.0)
        tail_max = np.maximum.accumulate(positive[::-1])[::-1]
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        idx = np.clip(idx, 0, None)
        out = np.zeros_like(t)
        inside = idx < len(self.levels)
        out[inside] = tail_max[idx[inside]]
        return out

    def sample_lags(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if not self.is_non_negative:
            raise ModelSpecException("cannot sample lags from a kernel with negative levels")
        mass = self.heights * self.widths
        which = rng.choice(len(self.levels), size=n, p=mass / mass.sum())
        return self.edges[which] + rng.random(n) * self.widths[which]

    def scaled(self, factor: float) -> "Kernel":
        if factor == 0:
            return ZeroKernel()
        return PiecewiseConstantKernel(self.breakpoints, tuple(h * factor for h in self.levels))

    def params(self) -> Dict[str, Any]:
        return {"breakpoints": list(self.breakpoints), "levels": list(self.levels)}

    @property
    def is_non_negative(self) -> bool:
        return bool(np.all(self.heights >= 0))

    @property
    def is_monotone(self) -> bool:
        return bool(self.edges[0] == 0 and self.is_non_negative and np.all(np.diff(self.heights) <= 0))


class KernelFactory:
    """Factory for creating kernels from a family tag and parameters."""

    _families: Dict[KernelFamily, Type[Kernel]] = {
        KernelFamily.EXPONENTIAL: ExponentialKernel,
        KernelFamily.SUM_EXPONENTIAL: SumExponentialKernel,
        KernelFamily.POWER_LAW: PowerLawKernel,
        KernelFamily.PIECEWISE: PiecewiseConstantKernel,
        KernelFamily.ZERO: ZeroKernel,
    }

    @classmethod
    def create(cls, family: Union[str, KernelFamily], **params: Any) -> Kernel:
        """Create a kernel instance."""
        try:
            tag = KernelFamily(family)
        except ValueError:
            raise ModelSpecException(f"Unsupported kernel family: {family}") from None
        kernel_class = cls._families[tag]
        try:
            if tag is KernelFamily.SUM_EXPONENTIAL:
                pairs = tuple(zip(map(float, params["alpha"]), map(float, params["beta"])))
                return SumExponentialKernel(pairs)
            if tag is KernelFamily.PIECEWISE:
                return PiecewiseConstantKernel(
                    tuple(map(float, params["breakpoints"])), tuple(map(float, params["levels"]))
                )
            return kernel_class(**{k: float(v) for k, v in params.items()})
        except (KeyError, TypeError) as exc:
            raise ModelSpecException(
                f"invalid parameters for {tag.value} kernel", {"params": params, "error": str(exc)}
            ) from exc


@dataclass(frozen=True)
class StabilityReport:
    """Norm matrix, spectral radius and stationarity flag of a kernel matrix."""

    norm_matrix: np.ndarray
    spectral_radius: float
    stable: bool
    method: str


@dataclass(frozen=True)
class KernelMatrix:
    """D×D grid of kernels; entry (i, j) is the response of component i to events of j."""

    entries: Tuple[Tuple[Kernel, ...], ...]
    _flat: Tuple[Kernel, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = len(self.entries)
        if d == 0 or any(len(row) != d for row in self.entries):
            raise ModelSpecException("kernel matrix must be square and non-empty")
        object.__setattr__(self, "_flat", tuple(k for row in self.entries for k in row))

    @classmethod
    def from_nested(cls, rows: Sequence[Sequence[Kernel]]) -> "KernelMatrix":
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def zeros(cls, dimension: int) -> "KernelMatrix":
        return cls(tuple(tuple(ZeroKernel() for _ in range(dimension)) for _ in range(dimension)))

    @classmethod
    def single(cls, kernel: Kernel) -> "KernelMatrix":
        return cls(((kernel,),))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: Tuple[int, int]) -> Kernel:
        i, j = index
        return self.entries[i][j]

    def __iter__(self) -> Iterator[Tuple[int, int, Kernel]]:
        d = self.dimension
        for n, kernel in enumerate(self._flat):
            yield n // d, n % d, kernel

    def value(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dimension, self.dimension))
        for i, j, kernel in self:
            out[..., i, j] = kernel.value(t)
        return out

    def laplace(self, z: ArrayLike) -> np.ndarray:
        zz = np.asarray(z, dtype=complex)
        out = np.zeros(zz.shape + (self.dimension, self.dimension), dtype=complex)
        for i, j, kernel in self:
            out[..., i, j] = kernel.laplace(zz)
        return out

    def norm_matrix(self) -> np.ndarray:
        return np.array([[k.l1_norm() for k in row] for row in self.entries])

    def signed_norm_matrix(self) -> np.ndarray:
        return np.array([[k.signed_integral() for k in row] for row in self.entries])

    def support(self) -> float:
        return max((k.effective_support() for k in self._flat), default=0.0)

    def scaled(self, factor: float) -> "KernelMatrix":
        return KernelMatrix(tuple(tuple(k.scaled(factor) for k in row) for row in self.entries))

    @property
    def is_non_negative(self) -> bool:
        return all(k.is_non_negative for k in self._flat)

    @property
    def is_monotone(self) -> bool:
        return all(k.is_monotone for k in self._flat)

    @property
    def is_exponential(self) -> bool:
        """True when every entry is exponential, a sum of exponentials or zero."""
        allowed = (ExponentialKernel, SumExponentialKernel, ZeroKernel)
        return all(isinstance(k, allowed) for k in self._flat)

    def exponential_components(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flatten exponential entries into (target, source, alpha, beta) arrays."""
        rows: List[int] = []
        cols: List[int] = []
        alphas: List[float] = []
        betas: List[float] = []
        for i, j, kernel in self:
            if isinstance(kernel, ExponentialKernel):
                pairs: Sequence[Tuple[float, float]] = ((kernel.alpha, kernel.beta),)
            elif isinstance(kernel, SumExponentialKernel):
                pairs = kernel.components
            elif isinstance(kernel, ZeroKernel):
                continue
            else:
                raise ModelSpecException(f"entry ({i},{j}) is not exponential: {kernel.family.value}")
            for alpha, beta in pairs:
                rows.append(i)
                cols.append(j)
                alphas.append(alpha)
                betas.append(beta)
        return (
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(alphas, dtype=float),
            np.asarray(betas, dtype=float),
        )


# Operations


def eval_kernel(kernel: Kernel, t: ArrayLike) -> np.ndarray:
    return kernel.value(t)


def l1_norm(kernel: Kernel) -> float:
    return kernel.l1_norm()


def laplace(kernel: Kernel, z: ArrayLike) -> Union[complex, np.ndarray]:
    return kernel.laplace(z)


def spectral_radius(matrix: np.ndarray) -> Tuple[float, str]:
    """Spectral radius of a non-negative matrix.

    Power iteration from the all-ones vector; the iteration stops once the
    eigen-residual ||Av - rv||∞ drops below the tolerance. Periodic or
    reducible matrices that do not converge fall back to a dense eigensolver.
    """
    a = np.asarray(matrix, dtype=float)
    v = np.ones(a.shape[0])
    tol = settings.power_iteration_tol
    for _ in range(settings.power_iteration_max_iter):
        w = a @ v
        r = float(np.max(np.abs(w)))
        if r == 0.0:
            return 0.0, "power_iteration"
        if np.max(np.abs(w - r * v)) <= tol * max(r, 1.0):
            return r, "power_iteration"
        v = w / r
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    logger.warning("power iteration did not converge; used dense eigensolver", radius=radius)
    return radius, "eigvals"


def stability(km: KernelMatrix) -> StabilityReport:
    """Stationarity analysis: stable iff the spectral radius of ||Φ|| is below 1."""
    norms = km.norm_matrix()
    radius, method = spectral_radius(norms)
    return StabilityReport(norm_matrix=norms, spectral_radius=radius, stable=radius < 1.0, method=method)


def critical_crossover_time(kernel: PowerLawKernel) -> float:
    """Time scale below which a near-critical 1D power-law process looks critical.

    For βt ≪ (Γ(1−γ)/(γ/α − 1))^{1/γ} the resolvent behaves as if ||φ|| = 1;
    only defined for 0 < γ < 1 and α < γ.
    """
    if not (0 < kernel.gamma < 1) or kernel.alpha >= kernel.gamma:
        return float("nan")
    ratio = special.gamma(1.0 - kernel.gamma) / (kernel.gamma / kernel.alpha - 1.0)
    return float(ratio ** (1.0 / kernel.gamma) / kernel.beta)
