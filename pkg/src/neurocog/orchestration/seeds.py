"""Per-trial seed derivation from a master seed (SplitMix64 stream)."""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, ordinal: int) -> int:
    """Element ``ordinal`` of the SplitMix64 stream started at ``master_seed``.

    Distinct ordinals below 2**64 give distinct states, and the finalizer is a
    bijection, so derived seeds never collide within one plan.
    """
    if ordinal < 0:
        raise ValueError("ordinal must be nonnegative")
    return mix64(master_seed + (ordinal + 1) * GAMMA)
