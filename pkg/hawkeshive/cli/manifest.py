"""
Run manifests.

A manifest records what a command was asked to do: its normalized options,
their hash, the seed, the library version, a digest of the input files and
the outputs it wrote. It carries no clock time, so identical runs write
identical manifests.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Union

import orjson

from .. import __version__
from ..core.observability import get_logger
from ..domain.schemas import RunManifest

logger = get_logger(__name__)

_DUMP_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def _normalize(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if hasattr(value, "value") and not isinstance(value, (int, float, str)):
        return value.value
    return value


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a command configuration."""
    return hashlib.sha256(orjson.dumps(_normalize(config), option=orjson.OPT_SORT_KEYS)).hexdigest()


def input_digest(paths: Iterable[Union[str, Path]]) -> Optional[str]:
    """SHA-256 over the contents of the input files, in the given order."""
    digest = hashlib.sha256()
    seen = False
    for path in paths:
        digest.update(Path(path).read_bytes())
        seen = True
    return digest.hexdigest() if seen else None


def build_manifest(
    command: str,
    config: Dict[str, Any],
    inputs: Sequence[Union[str, Path]] = (),
    outputs: Sequence[Union[str, Path]] = (),
    seed: Optional[int] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        config_hash=config_hash(config),
        seed=seed,
        library_version=__version__,
        input_digest=input_digest(inputs),
        outputs=[Path(p).name for p in outputs],
    )


def write_manifest(manifest: RunManifest, path: Union[str, Path], config: Optional[Dict[str, Any]] = None) -> Path:
    """Write a manifest, with the normalized configuration it was hashed from."""
    payload = manifest.model_dump()
    if config is not None:
        payload["config"] = _normalize(config)
    target = Path(path)
    target.write_bytes(orjson.dumps(payload, option=_DUMP_OPTIONS) + b"\n")
    logger.info("manifest written", path=str(target), command=manifest.command, config_hash=manifest.config_hash)
    return target
