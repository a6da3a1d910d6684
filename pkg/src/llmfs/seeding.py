"""Stable seed derivation.

Python's ``hash`` is salted per process, so sub-seeds go through SHA-256.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def as_seed(seed: int) -> int:
    """Map any integer (negative included) onto an unsigned 64-bit seed."""
    return int(seed) & _MASK64


def derive_seed(seed: int, *parts: object) -> int:
    """64-bit sub-seed from a master seed and any labels (method, classifier, index...)."""
    h = hashlib.sha256(str(as_seed(seed)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "little")
