"""Counter-based deterministic sampling streams.

Monte Carlo draws are organized in fixed blocks generated from a Philox
counter stream advanced to a per-block offset, so block b depends only on
(seed, b).  Any worker layout that assembles blocks in index order then
reproduces the single-worker stream bit for bit, which is what makes the
parallel samplers in this package deterministic.
"""
from __future__ import annotations

import numpy as np

BLOCK_SAMPLES = 4096
# counter words reserved per sample; generously above actual consumption so
# neighbouring blocks never share stream positions
_WORDS_PER_SAMPLE = 8


def block_generator(seed: int, block_index: int) -> np.random.Generator:
    """Generator positioned at the start of the given sample block."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    if block_index < 0:
        raise ValueError("block_index must be nonnegative")
    bits = np.random.Philox(key=int(seed))
    bits.advance(int(block_index) * BLOCK_SAMPLES * _WORDS_PER_SAMPLE)
    return np.random.Generator(bits)


def block_ranges(total: int):
    """Yield (block_index, start, stop) covering range(total) in block order."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    block = 0
    start = 0
    while start < total:
        stop = min(start + BLOCK_SAMPLES, total)
        yield block, start, stop
        block += 1
        start = stop
