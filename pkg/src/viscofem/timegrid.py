from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PartitionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TimePartition:
    """Nodes 0 = t_0 < t_1 < ... < t_N."""

    nodes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float).copy()
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)
        if t.ndim != 1 or len(t) < 2:
            raise PartitionError("need at least one slab")
        if t[0] != 0.0:
            raise PartitionError("partition must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise PartitionError("nodes must be strictly increasing")

    @classmethod
    def uniform(cls, T, n):
        return cls(np.linspace(0.0, T, n + 1))

    @property
    def N(self):
        return len(self.nodes) - 1

    @property
    def T(self):
        return float(self.nodes[-1])

    @property
    def k(self):
        return np.diff(self.nodes)

    def slab(self, n):
        """Slab I_n = (t_{n-1}, t_n], n = 1..N."""
        return float(self.nodes[n - 1]), float(self.nodes[n])

    def slabs(self):
        return [self.slab(n) for n in range(1, self.N + 1)]

    def halved(self, times=1):
        t = self.nodes
        for _ in range(times):
            mid = 0.5 * (t[1:] + t[:-1])
            t = np.insert(t, np.arange(1, len(t)), mid)
        return TimePartition(t)

    def reversed(self):
        return TimePartition(self.T - self.nodes[::-1])

    def locate(self, t):
        """Index n of the slab containing t (left slab at interior nodes)."""
        n = int(np.searchsorted(self.nodes, t, side="left"))
        return min(max(n, 1), self.N)

    def __eq__(self, other):
        return isinstance(other, TimePartition) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())
