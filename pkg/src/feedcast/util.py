"""Small shared helpers: seeded RNG derivation and CSV-friendly formatting."""

from __future__ import annotations

import hashlib

import numpy as np


def _key_to_int(key: str | int) -> int:
    if isinstance(key, int):
        return key & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(seed: int, *keys: str | int) -> np.random.Generator:
    """Deterministic child generator for (seed, entity keys).

    All randomness in the pipeline flows through this helper so results are
    independent of scheduling: a (seed, user, scorer) triple always yields the
    same stream no matter which worker runs it.
    """
    entropy = [seed & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def fmt(value: float | int | str | None) -> str:
    """Stable text form for CSV cells; floats round-trip exactly via repr."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
