"""Small shared helpers."""

from __future__ import annotations

_MIX = 1_000_003
_MOD = 2**63


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for parallel or recursive work units.

    Same derivation everywhere (hierarchy recursion, null-model replicates),
    so results never depend on scheduling or chunking.
    """
    return (seed * _MIX + index + 1) % _MOD
