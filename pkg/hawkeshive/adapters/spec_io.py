"""
Model specification text format.

A model spec is a UTF-8 document of ``key = value`` lines; ``#`` starts a
comment. Keys:

    dimension = 2
    mu = 1.0, 1.0
    transfer = identity
    kernel.0.0 = exponential alpha=0.2 beta=1.0
    kernel.0.1 = power_law alpha=0.1 beta=1.0 gamma=0.5
    kernel.1.0 = piecewise breakpoints=0.0,1.0,2.0 levels=0.3,-0.1
    kernel.1.1 = zero
    mark.law = gamma shape=2.0 scale=0.5
    mark.impact.0.0 = power 0.5

Missing kernel entries are zero. Floats are written with ``repr`` so that
parse followed by serialize reproduces a file exactly.
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

from ..core.errors import ModelSpecException
from ..core.observability import get_logger
from ..domain.kernels import Kernel, KernelFactory, KernelFamily, ZeroKernel
from ..domain.model import HawkesModel, MarkImpact, MarkLaw, Transfer

logger = get_logger(__name__)

_LIST_PARAMS = {"breakpoints", "levels"}


def _format_float(value: float) -> str:
    return repr(float(value))


def _format_value(value: Union[float, List[float]]) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_float(v) for v in value)
    return _format_float(value)


def format_kernel(kernel: Kernel) -> str:
    """One-line text of a kernel: family tag followed by ``name=value`` pairs."""
    params = kernel.params()
    parts = [kernel.family.value] + [f"{name}={_format_value(value)}" for name, value in params.items()]
    return " ".join(parts)


def parse_kernel(text: str) -> Kernel:
    """Inverse of ``format_kernel``."""
    tokens = text.split()
    if not tokens:
        raise ModelSpecException("empty kernel description")
    family = tokens[0]
    params: Dict[str, Union[float, List[float]]] = {}
    for token in tokens[1:]:
        name, sep, raw = token.partition("=")
        if not sep:
            raise ModelSpecException(f"expected name=value in kernel description, got {token!r}")
        try:
            values = [float(v) for v in raw.split(",")]
        except ValueError as exc:
            raise ModelSpecException(f"invalid number in {token!r}") from exc
        is_list = name in _LIST_PARAMS or (family == KernelFamily.SUM_EXPONENTIAL.value)
        params[name] = values if is_list else values[0]
    return KernelFactory.create(family, **params)


def format_mark_law(law: MarkLaw) -> str:
    return " ".join([law.kind.value] + [f"{k}={_format_float(v)}" for k, v in law.params])


def parse_mark_law(text: str) -> MarkLaw:
    tokens = text.split()
    params = {}
    for token in tokens[1:]:
        name, _, raw = token.partition("=")
        params[name] = float(raw)
    try:
        return MarkLaw.create(tokens[0], **params)
    except (IndexError, ValueError) as exc:
        raise ModelSpecException(f"invalid mark law: {text!r}") from exc


def serialize_model(model: HawkesModel) -> str:
    """Model spec text of a HawkesModel."""
    d = model.dimension
    lines = [
        f"dimension = {d}",
        "mu = " + ", ".join(_format_float(m) for m in model.mu),
        f"transfer = {model.transfer.value}",
    ]
    for i, j, kernel in model.kernels:
        if not isinstance(kernel, ZeroKernel):
            lines.append(f"kernel.{i}.{j} = {format_kernel(kernel)}")
    if model.mark_law is not None:
        lines.append(f"mark.law = {format_mark_law(model.mark_law)}")
        for i, row in enumerate(model.impact_matrix()):
            for j, impact in enumerate(row):
                lines.append(f"mark.impact.{i}.{j} = {impact.describe()}")
    return "\n".join(lines) + "\n"


def _index_pair(key: str, prefix: str, d: int) -> tuple:
    try:
        i, j = (int(p) for p in key[len(prefix) :].split("."))
    except ValueError as exc:
        raise ModelSpecException(f"invalid entry key {key!r}") from exc
    if not (0 <= i < d and 0 <= j < d):
        raise ModelSpecException(f"entry {key!r} outside dimension {d}")
    return i, j


def parse_model(text: str) -> HawkesModel:
    """Parse model spec text.

    Raises:
        ModelSpecException: On unknown keys, duplicate keys, malformed values or
            an inconsistent model
    """
    entries: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ModelSpecException(f"line {number}: expected 'key = value'", {"line": number})
        key = key.strip()
        if key in entries:
            raise ModelSpecException(f"line {number}: duplicate key {key!r}", {"line": number})
        entries[key] = value.strip()

    try:
        d = int(entries.pop("dimension"))
        mu = [float(v) for v in entries.pop("mu").split(",")]
    except KeyError as exc:
        raise ModelSpecException(f"missing required key {exc}") from exc
    except ValueError as exc:
        raise ModelSpecException("invalid dimension or baseline") from exc
    if d < 1 or len(mu) != d:
        raise ModelSpecException("baseline length must equal dimension", {"dimension": d, "mu": len(mu)})

    try:
        transfer = Transfer(entries.pop("transfer", Transfer.IDENTITY.value))
    except ValueError as exc:
        raise ModelSpecException("unknown transfer function") from exc
    kernels: List[List[Kernel]] = [[ZeroKernel() for _ in range(d)] for _ in range(d)]
    law: Optional[MarkLaw] = None
    impacts: Optional[List[List[MarkImpact]]] = None
    for key, value in entries.items():
        if key.startswith("kernel."):
            i, j = _index_pair(key, "kernel.", d)
            kernels[i][j] = parse_kernel(value)
        elif key == "mark.law":
            law = parse_mark_law(value)
        elif key.startswith("mark.impact."):
            i, j = _index_pair(key, "mark.impact.", d)
            impacts = impacts or [[MarkImpact() for _ in range(d)] for _ in range(d)]
            impacts[i][j] = MarkImpact.parse(value)
        else:
            raise ModelSpecException(f"unknown key {key!r}")
    if law is not None and impacts is None:
        impacts = [[MarkImpact() for _ in range(d)] for _ in range(d)]
    return HawkesModel.create(mu, kernels, transfer, law, impacts)


def read_model(path: Union[str, Path]) -> HawkesModel:
    model = parse_model(Path(path).read_text(encoding="utf-8"))
    logger.debug("model spec read", path=str(path), dimension=model.dimension)
    return model


def write_model(model: HawkesModel, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_model(model), encoding="utf-8")
