"""Binary-tree index arithmetic and flat (heap-ordered) sample storage.

Nodes of the regular binary tree are stored breadth first: the root has
index 0 and the children of ``u`` are ``2u + 1`` and ``2u + 2``. Generation
``m`` therefore occupies the contiguous slice ``[2**m - 1, 2**(m+1) - 1)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

MAX_DEPTH = 40


def tree_size(n: int) -> int:
    """Number of nodes in the first ``n + 1`` generations, ``2**(n+1) - 1``."""
    n = int(n)
    if n < 0:
        raise ValueError(f"depth must be non-negative, got {n}")
    if n > MAX_DEPTH:
        raise OverflowError(f"depth {n} exceeds the supported maximum {MAX_DEPTH}")
    return (1 << (n + 1)) - 1


def generation_of(index):
    """Generation of a node index (vectorised): ``floor(log2(index + 1))``."""
    if np.ndim(index) == 0:
        i = int(index)
        if i < 0:
            raise ValueError("node index must be non-negative")
        return (i + 1).bit_length() - 1
    idx = np.asarray(index, dtype=np.int64)
    if np.any(idx < 0):
        raise ValueError("node index must be non-negative")
    # frexp is exact for integers below 2**53
    _, e = np.frexp((idx + 1).astype(np.float64))
    return (e - 1).astype(np.int64)


def children_of(index):
    return 2 * index + 1, 2 * index + 2


def parent_of(index):
    if np.ndim(index) == 0 and int(index) == 0:
        raise ValueError("the root has no parent")
    return (index - 1) // 2


def generation_slice(m: int) -> slice:
    """Slice of the flat storage holding generation ``m``."""
    return slice((1 << m) - 1, (1 << (m + 1)) - 1)


def depth_from_size(size: int) -> int:
    """Inverse of :func:`tree_size`; raises if ``size`` is not ``2**(n+1) - 1``."""
    n = (int(size) + 1).bit_length() - 2
    if n < 0 or tree_size(n) != size:
        raise ValueError(f"{size} is not the size of a full binary tree")
    return n


@dataclass(frozen=True)
class TreeSample:
    """Observations ``X_u`` for every node of the first ``depth + 1`` generations.

    ``values`` has shape ``(tree_size(depth), dim)`` in heap order.
    """

    depth: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError("values must have shape (nodes, dim)")
        if values.shape[0] != tree_size(self.depth):
            raise ValueError(
                f"depth {self.depth} requires {tree_size(self.depth)} nodes, "
                f"got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.size

    def generation(self, m: int) -> np.ndarray:
        if not 0 <= m <= self.depth:
            raise IndexError(f"generation {m} outside 0..{self.depth}")
        return self.values[generation_slice(m)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node_index", "generation"] + [f"x{j + 1}" for j in range(self.dim)])
        gens = generation_of(np.arange(self.size))
        for i, (g, row) in enumerate(zip(gens, self.values)):
            writer.writerow([i, int(g)] + [repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TreeSample":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty tree CSV")
        header = rows[0]
        if header[:2] != ["node_index", "generation"] or len(header) < 3:
            raise ValueError("tree CSV header must start with node_index,generation,x1")
        body = rows[1:]
        index = np.array([int(r[0]) for r in body], dtype=np.int64)
        if not np.array_equal(index, np.arange(len(body))):
            raise ValueError("tree CSV rows must be sorted by node_index starting at 0")
        values = np.array([[float(v) for v in r[2:]] for r in body], dtype=np.float64)
        return cls(depth_from_size(len(body)), values.reshape(len(body), len(header) - 2))
