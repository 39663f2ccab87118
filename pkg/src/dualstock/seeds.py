"""Stable derivation of child seeds from a master seed.

Child seeds are 64-bit values hashed from the master seed and a label naming
the consumer (analysis, pair, run, forecast origin).  Labels keep seed streams
from colliding across modules and across runs of a grid.
"""

from __future__ import annotations

import hashlib

__all__ = ["child_seed"]

_MASK64 = (1 << 64) - 1


def child_seed(master: int, label: str) -> int:
    """Deterministic 64-bit seed for (master seed, label)."""
    digest = hashlib.sha256(f"{master & _MASK64}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
