"""Reproducible randomness helpers.

Two kinds of streams are used:

* ordinary ``numpy`` generators, derived per pipeline stage from one master
  seed (``stage_seeds``), for draws whose order is fixed anyway;
* a counter-based splitmix64 stream (``keyed_uniform``) for per-event
  retention draws, keyed by (seed, event id). The draw for an event does not
  depend on stream position, so thinning decisions survive re-ordering and
  chunked evaluation.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF


def _finalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def keyed_uniform(seed: int, index: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) draw per index, independent of array order.

    index must be an unsigned-integer array of stable event identifiers.
    """
    key = np.uint64(seed & _U64_MASK)
    with np.errstate(over="ignore"):
        state = (index.astype(np.uint64) + np.uint64(1)) * _GOLDEN + _finalize(
            np.array([key], dtype=np.uint64)
        )[0]
        bits = _finalize(state)
    # 53 high bits -> double in [0, 1)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def stage_seeds(master_seed: int, n: int) -> list[int]:
    """Derive n independent stage seeds from one master seed."""
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n, np.uint64)]
