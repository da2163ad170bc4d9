"""Social graphs, opinion graphs, profiles and time-varying graph schedules.

A schedule is a pure function of (t, seed): evaluating the same schedule at
the same step always yields the same edge set, so whole runs replay
bit-identically. Dynamic graphs are never mutated in place.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import ConfigurationError
from .model import ModelParams, OpinionState
from .norms import cross_distances, rowwise_norm


class EdgeSet:
    """Canonical undirected edge set: sorted (i, j) pairs with i < j.

    Immutable by convention; hashable; no self-loops or duplicates.  Backed
    by either a tuple of pairs or an (m, 2) array; each representation is
    materialized from the other on first use.
    """

    __slots__ = ("_pairs", "_array")

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        canon = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            if i == j:
                raise ConfigurationError(f"self-loop edge ({i}, {j})")
            if i < 0 or j < 0:
                raise ConfigurationError(f"negative vertex in edge ({i}, {j})")
            canon.add((i, j) if i < j else (j, i))
        self._pairs: Optional[tuple[tuple[int, int], ...]] = tuple(sorted(canon))
        self._array: Optional[np.ndarray] = None

    @classmethod
    def _from_sorted_array(cls, arr: np.ndarray) -> "EdgeSet":
        """Trusted fast path: rows already canonical (i < j, lex-sorted, unique)."""
        obj = cls.__new__(cls)
        obj._pairs = None
        obj._array = arr
        return obj

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        if self._pairs is None:
            self._pairs = tuple((int(i), int(j)) for i, j in self._array.tolist())
        return self._pairs

    @property
    def array(self) -> np.ndarray:
        """Edges as an (m, 2) int array (cached)."""
        if self._array is None:
            if self._pairs:
                self._array = np.array(self._pairs, dtype=np.intp)
            else:
                self._array = np.empty((0, 2), dtype=np.intp)
        return self._array

    def __len__(self) -> int:
        if self._pairs is not None:
            return len(self._pairs)
        return self._array.shape[0]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __contains__(self, edge: tuple[int, int]) -> bool:
        i, j = edge
        e = (i, j) if i < j else (j, i)
        # pairs are sorted; binary search
        lo = bisect_right(self.pairs, e) - 1
        return lo >= 0 and self.pairs[lo] == e

    def __eq__(self, other) -> bool:
        return isinstance(other, EdgeSet) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"EdgeSet({list(self.pairs)!r})"

    def intersection(self, other: "EdgeSet") -> "EdgeSet":
        a, b = set(self.pairs), set(other.pairs)
        return EdgeSet(a & b)


@lru_cache(maxsize=None)
def _all_pairs_array(n: int) -> np.ndarray:
    """(m, 2) array of all i < j pairs in lexicographic order; shared, read-only."""
    iu = np.triu_indices(n, k=1)
    arr = np.column_stack(iu).astype(np.intp)
    arr.flags.writeable = False
    return arr


def complete_edges(n: int) -> EdgeSet:
    """All pairs over vertices [0, n)."""
    return EdgeSet(combinations(range(n), 2))


def path_edges(n: int) -> EdgeSet:
    """Path 0-1-...-(n-1)."""
    return EdgeSet((i, i + 1) for i in range(n - 1))


ALL_PAIRS = "all_pairs"


# ---------------------------------------------------------------------------
# Opinion graph, profile, connectivity
# ---------------------------------------------------------------------------

def opinion_graph(state: OpinionState, params: ModelParams) -> EdgeSet:
    """Pairs whose opinions are within epsilon (exact <= comparison)."""
    x = state.opinions
    n = x.shape[0]
    pairs = _all_pairs_array(n)
    d = cross_distances(x, x, params.norm)
    mask = d[pairs[:, 0], pairs[:, 1]] <= params.epsilon
    return EdgeSet._from_sorted_array(pairs[mask])


def profile(social: EdgeSet, opinion: EdgeSet) -> EdgeSet:
    """Edges both socially present and within the confidence threshold."""
    return social.intersection(opinion)


def connected_components(edges: EdgeSet, n: int) -> list[list[int]]:
    """Partition of [0, n) into components (union-find); singletons included."""
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        if i >= n or j >= n:
            raise ConfigurationError(f"edge ({i}, {j}) out of range for n={n}")
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def is_connected(edges: EdgeSet, n: int) -> bool:
    return n <= 1 or len(connected_components(edges, n)) == 1


def is_delta_trivial(state: OpinionState, pairs, delta: float, norm: str = "euclidean") -> bool:
    """True iff every listed pair (or all pairs) is within distance delta."""
    if not (delta > 0):
        raise ConfigurationError(f"delta must be positive, got {delta}")
    x = state.opinions
    if pairs == ALL_PAIRS:
        if x.shape[0] < 2:
            return True
        d = cross_distances(x, x, norm)
        iu = np.triu_indices(x.shape[0], k=1)
        return bool(np.all(d[iu] <= delta))
    arr = pairs.array
    if arr.shape[0] == 0:
        return True
    diffs = x[arr[:, 0]] - x[arr[:, 1]]
    return bool(np.all(rowwise_norm(diffs, norm) <= delta))


# ---------------------------------------------------------------------------
# Graph schedules
# ---------------------------------------------------------------------------

class GraphSchedule:
    """Time-indexed social edge sets E(t)."""

    n: int

    def edges_at(self, t: int) -> EdgeSet:
        raise NotImplementedError

    @property
    def connected_infinitely_often(self) -> bool:
        """True when the schedule guarantees connectivity at infinitely many steps."""
        raise NotImplementedError

    def reseeded(self, seed: int) -> "GraphSchedule":
        """Copy bound to a fresh seed; identity for deterministic schedules."""
        return self


@dataclass(frozen=True)
class ConstantGraph(GraphSchedule):
    n: int
    edges: EdgeSet

    def __post_init__(self):
        _check_edges_range(self.edges, self.n)

    def edges_at(self, t):
        return self.edges

    @property
    def connected_infinitely_often(self):
        return is_connected(self.edges, self.n)


@dataclass(frozen=True)
class CyclicGraph(GraphSchedule):
    """Cycles through a fixed list of edge sets: E(t) = members[t mod period]."""

    n: int
    members: tuple[EdgeSet, ...]

    def __post_init__(self):
        if not self.members:
            raise ConfigurationError("cyclic schedule needs at least one member")
        for m in self.members:
            _check_edges_range(m, self.n)

    @property
    def period(self) -> int:
        return len(self.members)

    def edges_at(self, t):
        return self.members[t % self.period]

    @property
    def connected_infinitely_often(self):
        return any(is_connected(m, self.n) for m in self.members)


class ErdosRenyiGraph(GraphSchedule):
    """Fresh G(n, p) sample each step, addressable by (seed, t) for replay.

    Step t belongs to block t // 256; each block's masks come from one
    counter-mode generator keyed by (seed, block), so edges_at is a pure
    function of (seed, t) with random access, while sequential sweeps pay
    one generator construction per block.
    """

    _BLOCK = 256

    def __init__(self, n: int, p: float, seed: int = 0):
        if n < 1:
            raise ConfigurationError(f"need n >= 1, got {n}")
        if not (0.0 <= p <= 1.0):
            raise ConfigurationError(f"p must lie in [0, 1], got {p}")
        self.n = n
        self.p = float(p)
        self.seed = int(seed)
        self._block_index: Optional[int] = None
        self._block_masks: Optional[np.ndarray] = None

    def edges_at(self, t):
        block, offset = divmod(t, self._BLOCK)
        if block != self._block_index:
            rng = np.random.Generator(
                np.random.Philox(key=self.seed, counter=[0, 0, 0, block]))
            m = _all_pairs_array(self.n).shape[0]
            self._block_masks = rng.random((self._BLOCK, m)) < self.p
            self._block_index = block
        pairs = _all_pairs_array(self.n)
        return EdgeSet._from_sorted_array(pairs[self._block_masks[offset]])

    @property
    def connected_infinitely_often(self):
        # p > 0 gives the complete graph (hence connectivity) infinitely often a.s.
        return self.n <= 1 or self.p > 0

    def reseeded(self, seed):
        return ErdosRenyiGraph(self.n, self.p, int(seed))

    def __eq__(self, other):
        return (isinstance(other, ErdosRenyiGraph)
                and (self.n, self.p, self.seed) == (other.n, other.p, other.seed))

    def __hash__(self):
        return hash((self.n, self.p, self.seed))

    def __repr__(self):
        return f"ErdosRenyiGraph(n={self.n}, p={self.p}, seed={self.seed})"

    def __getstate__(self):
        return {"n": self.n, "p": self.p, "seed": self.seed}

    def __setstate__(self, state):
        self.__init__(state["n"], state["p"], state["seed"])


@dataclass(frozen=True)
class PiecewiseGraph(GraphSchedule):
    """Explicit step -> edge-set map; the last defined entry persists.

    Built from files; connectivity beyond the horizon is unknowable, so the
    connected-infinitely-often flag is never set.
    """

    n: int
    entries: tuple[tuple[int, EdgeSet], ...]

    def __post_init__(self):
        steps = tuple(s for s, _ in self.entries)
        if not steps or steps[0] != 0:
            raise ConfigurationError("piecewise schedule must define step 0")
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ConfigurationError("piecewise schedule steps must be strictly increasing")
        for _, e in self.entries:
            _check_edges_range(e, self.n)
        object.__setattr__(self, "_steps", steps)

    def edges_at(self, t):
        k = bisect_right(self._steps, t) - 1
        return self.entries[k][1]

    @property
    def connected_infinitely_often(self):
        return False


def _check_edges_range(edges: EdgeSet, n: int) -> None:
    for i, j in edges:
        if j >= n:
            raise ConfigurationError(f"edge ({i}, {j}) out of range for n={n}")


def evaluate_schedule(schedule: GraphSchedule, t: int) -> EdgeSet:
    """Edge set at step t (thin wrapper over the schedule's own lookup)."""
    if t < 0:
        raise ConfigurationError(f"t must be >= 0, got {t}")
    return schedule.edges_at(t)
