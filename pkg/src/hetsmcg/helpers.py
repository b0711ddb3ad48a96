"""Helpers for deterministic json output, fingerprints and seed derivation."""

import hashlib
import json
from pathlib import Path


def dumps(data) -> str:
    """Serializes data to json with sorted keys, so equal data gives equal bytes."""
    return json.dumps(data, sort_keys=True, indent=2)


def write_json(path, data) -> None:
    """Writes data as deterministic json, creating parent directories.

    Args:
        path (Path | str): The target file.
        data: Anything json can serialize.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data) + "\n", encoding="utf-8")


def fingerprint(data) -> str:
    """The SHA-256 hex digest of the compact sorted json form of data."""
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def derive_seed(base: int, *offsets: int) -> int:
    """Derives an independent seed from a base seed and integer offsets.

    Example:
        derive_seed(0, 3) is the seed of fold 3 for base seed 0.
    """
    return int(base) * 1_000_003 + sum((i + 1) * 7919 * int(o) for i, o in enumerate(offsets))
