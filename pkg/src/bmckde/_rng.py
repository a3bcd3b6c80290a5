"""Counter-based random streams keyed by (seed, stream, node index).

Each node owns one Philox counter block (four doubles), so any contiguous
range of nodes can be generated independently by advancing the counter.
Output does not depend on chunking or on the order in which ranges are
produced.
"""

from __future__ import annotations

import numpy as np

DRAWS_PER_NODE = 4

# stream identifiers; keep stable, they are part of the reproducibility contract
STREAM_TREE = 1
STREAM_TAGGED = 2
STREAM_TRANSITION = 3


def _key(seed: int, stream: int) -> np.ndarray:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.array([seed & 0xFFFFFFFFFFFFFFFF, int(stream) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)


def node_uniforms(seed: int, stream: int, start: int, stop: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(stop - start, 4)`` for nodes ``start..stop-1``."""
    if stop < start:
        raise ValueError("stop < start")
    bg = np.random.Philox(key=_key(seed, stream))
    if start:
        bg.advance(start)
    out = np.random.Generator(bg).random((stop - start) * DRAWS_PER_NODE)
    return out.reshape(stop - start, DRAWS_PER_NODE)


def generator(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """A sequential generator for bulk draws that need no per-node layout."""
    bg = np.random.Philox(key=_key(seed, stream))
    if index:
        bg.advance(index)
    return np.random.Generator(bg)


def open_unit(u: np.ndarray) -> np.ndarray:
    """Map [0, 1) to (0, 1) so inverse CDFs and logs stay finite."""
    return np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
