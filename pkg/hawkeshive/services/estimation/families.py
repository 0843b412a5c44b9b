"""
Parametric kernel families used by the likelihood and moment estimators.

A family maps a flat vector of strictly positive parameters to a HawkesModel
and back. Optimizers work on the logarithm of that vector.
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Type

import numpy as np

from ...core.errors import UnsupportedFamilyException
from ...core.settings import settings
from ...domain.events import EventSequence
from ...domain.kernels import ExponentialKernel, Kernel, PowerLawKernel, ZeroKernel
from ...domain.model import HawkesModel


class ParametricFamily(ABC):
    """Base class for parametric Hawkes families."""

    name: str = ""

    def __init__(self, dimension: int):
        self.dimension = dimension

    @property
    def n_params(self) -> int:
        return len(self.parameter_names())

    @abstractmethod
    def parameter_names(self) -> List[str]:
        """Names aligned with the flat parameter vector."""

    @abstractmethod
    def to_model(self, theta: np.ndarray) -> HawkesModel:
        """Build a model from positive parameters."""

    @abstractmethod
    def from_model(self, model: HawkesModel) -> np.ndarray:
        """Extract the flat parameter vector of a model of this family."""

    @abstractmethod
    def initial(self, events: EventSequence) -> np.ndarray:
        """Data-driven starting point."""

    def mu(self, theta: np.ndarray) -> np.ndarray:
        return theta[: self.dimension]

    def support(self, theta: np.ndarray) -> float:
        """Largest effective support among the kernels of ``theta``."""
        return self.to_model(theta).kernels.support()

    def describe(self, theta: np.ndarray) -> Dict[str, float]:
        return dict(zip(self.parameter_names(), map(float, theta)))

    def _entry_names(self, prefix: str) -> List[str]:
        d = self.dimension
        return [f"{prefix}.{i}.{j}" for i in range(d) for j in range(d)]

    def _initial_mu(self, events: EventSequence) -> np.ndarray:
        rates = events.counts() / max(events.horizon, np.finfo(float).tiny)
        return np.maximum(0.5 * rates, 1e-6)

    @staticmethod
    def _mean_gap(events: EventSequence) -> float:
        return events.horizon / max(len(events), 1)


def _exponential_entry(alpha: float, beta: float) -> Kernel:
    # EM can drive an excitation exactly to zero
    return ExponentialKernel(float(alpha), float(beta)) if alpha > 0 else ZeroKernel()


class ExponentialFamily(ParametricFamily):
    """φ^{ij}(t) = α_ij β_ij e^{-β_ij t}; with ``shared_beta`` every entry has the same β."""

    name = "exponential"

    def __init__(self, dimension: int, shared_beta: bool = False):
        super().__init__(dimension)
        self.shared_beta = shared_beta

    def parameter_names(self) -> List[str]:
        d = self.dimension
        names = [f"mu.{i}" for i in range(d)] + self._entry_names("alpha")
        return names + (["beta"] if self.shared_beta else self._entry_names("beta"))

    def split(self, theta: np.ndarray):
        d = self.dimension
        mu = theta[:d]
        alpha = theta[d : d + d * d].reshape(d, d)
        tail = theta[d + d * d :]
        beta = np.full((d, d), tail[0]) if self.shared_beta else tail.reshape(d, d)
        return mu, alpha, beta

    def join(self, mu: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        beta_part = np.array([beta.flat[0]]) if self.shared_beta else beta.ravel()
        return np.concatenate([mu, alpha.ravel(), beta_part])

    def to_model(self, theta: np.ndarray) -> HawkesModel:
        mu, alpha, beta = self.split(theta)
        d = self.dimension
        kernels = [[_exponential_entry(alpha[i, j], beta[i, j]) for j in range(d)] for i in range(d)]
        return HawkesModel.create(mu, kernels)

    def from_model(self, model: HawkesModel) -> np.ndarray:
        d = self.dimension
        alpha = np.zeros((d, d))
        beta = np.ones((d, d))
        for i, j, kernel in model.kernels:
            if isinstance(kernel, ZeroKernel):
                continue
            if not isinstance(kernel, ExponentialKernel):
                raise UnsupportedFamilyException(f"entry ({i},{j}) is not exponential")
            alpha[i, j], beta[i, j] = kernel.alpha, kernel.beta
        return self.join(model.baseline.copy(), alpha, beta)

    def initial(self, events: EventSequence) -> np.ndarray:
        d = self.dimension
        alpha = np.full((d, d), 0.3 / d)
        beta = np.full((d, d), 1.0 / self._mean_gap(events))
        return self.join(self._initial_mu(events), alpha, beta)


class PowerLawFamily(ParametricFamily):
    """φ^{ij}(t) = α_ij β_ij (1 + β_ij t)^{-1-γ_ij}."""

    name = "power_law"

    def parameter_names(self) -> List[str]:
        d = self.dimension
        return (
            [f"mu.{i}" for i in range(d)]
            + self._entry_names("alpha")
            + self._entry_names("beta")
            + self._entry_names("gamma")
        )

    def split(self, theta: np.ndarray):
        d = self.dimension
        n = d * d
        mu = theta[:d]
        alpha = theta[d : d + n].reshape(d, d)
        beta = theta[d + n : d + 2 * n].reshape(d, d)
        gamma = theta[d + 2 * n :].reshape(d, d)
        return mu, alpha, beta, gamma

    def to_model(self, theta: np.ndarray) -> HawkesModel:
        mu, alpha, beta, gamma = self.split(theta)
        d = self.dimension
        kernels = [
            [PowerLawKernel(float(alpha[i, j]), float(beta[i, j]), float(gamma[i, j])) for j in range(d)]
            for i in range(d)
        ]
        return HawkesModel.create(mu, kernels)

    def from_model(self, model: HawkesModel) -> np.ndarray:
        d = self.dimension
        parts = np.ones((3, d, d))
        for i, j, kernel in model.kernels:
            if not isinstance(kernel, PowerLawKernel):
                raise UnsupportedFamilyException(f"entry ({i},{j}) is not power_law")
            parts[:, i, j] = kernel.alpha, kernel.beta, kernel.gamma
        return np.concatenate([model.baseline.copy(), parts.reshape(-1)])

    def initial(self, events: EventSequence) -> np.ndarray:
        d = self.dimension
        alpha = np.full(d * d, 0.3 / d)
        beta = np.full(d * d, 1.0 / self._mean_gap(events))
        gamma = np.ones(d * d)
        return np.concatenate([self._initial_mu(events), alpha, beta, gamma])


_FAMILIES: Dict[str, Type[ParametricFamily]] = {
    ExponentialFamily.name: ExponentialFamily,
    PowerLawFamily.name: PowerLawFamily,
}


def make_family(name: str, dimension: int, shared_beta: bool = False) -> ParametricFamily:
    """Create a family by name."""
    if name not in _FAMILIES:
        raise UnsupportedFamilyException(f"Unsupported parametric family: {name}", {"available": sorted(_FAMILIES)})
    if name == ExponentialFamily.name:
        return ExponentialFamily(dimension, shared_beta)
    return _FAMILIES[name](dimension)


def edge_start(events: EventSequence, support: float) -> float:
    """Start of the likelihood window: one kernel support into the record.

    Events before it only feed the history of later intensities. The window is
    capped at ``settings.edge_window_fraction`` of the horizon.
    """
    return float(min(max(support, 0.0), settings.edge_window_fraction * events.horizon))
