"""Seeded random number streams and deterministic seed derivation.

All randomness in the package flows through :func:`make_generator`, a
PCG64-backed ``numpy.random.Generator``.  Independent streams (one per
simulated process, per Monte Carlo replication, per cross-validation split)
are derived from a single master seed with :func:`derive_seed`, a SplitMix64
avalanche mixer.  Derivation is index-based, so the set of streams does not
depend on the order in which work items are executed.

Bit-exact reproducibility holds for a fixed package/numpy version on any
platform; reproducibility across different generator implementations is a
non-goal.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea & Flood 2014).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One SplitMix64 finalization step: 64-bit avalanche mix of ``x``."""
    x = (x + _GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a 64-bit stream seed from a master seed and an index path.

    Each index (replication number, grid position, subsystem tag, ...) is
    folded in with a SplitMix64 step, so nearby (master_seed, indices)
    tuples map to statistically unrelated seeds.

    Parameters
    ----------
    master_seed : int
        Top-level experiment seed.
    *indices : int
        Nonnegative integers identifying the stream (order matters).

    Returns
    -------
    int
        Derived seed in ``[0, 2**64)``.
    """
    s = splitmix64(master_seed & _MASK64)
    for ix in indices:
        s = splitmix64(s ^ ((int(ix) & _MASK64) * _GAMMA & _MASK64))
    return s


def make_generator(seed: int) -> np.random.Generator:
    """Return the project-wide PCG64 generator seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
