"""Spatial data containers, contiguity graphs and the pair-coding procedure.

The coding procedure selects neighbor pairs that are mutually separated by a
buffer of excluded units, so that the disturbances of distinct pairs can be
treated as independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction input."""


class CodingError(ValueError):
    """A valid pair coding cannot be produced (e.g. the graph has no edges)."""


class InvalidCodingError(ValueError):
    """A coding refers to units that do not exist in the dataset."""


@dataclass(frozen=True)
class NeighborGraph:
    """Symmetric, irreflexive adjacency over ``n`` spatial units.

    ``adjacency[i]`` is the sorted tuple of neighbors of unit ``i``.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("graph must contain at least one unit")
        if len(self.adjacency) != self.n:
            raise GraphError("adjacency list length must equal n")
        for i, nbrs in enumerate(self.adjacency):
            for l in nbrs:
                if not 0 <= l < self.n:
                    raise GraphError(f"neighbor index {l} out of range")
                if l == i:
                    raise GraphError(f"unit {i} is its own neighbor")
                if i not in self.adjacency[l]:
                    raise GraphError(f"asymmetric edge ({i}, {l})")

    @property
    def neighbor_sets(self) -> list[set[int]]:
        return [set(nbrs) for nbrs in self.adjacency]

    @property
    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edge list with i < l."""
        return [(i, l) for i in range(self.n) for l in self.adjacency[i] if i < l]

    @classmethod
    def from_edges(cls, n: int, edges) -> "NeighborGraph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for i, l in edges:
            if not (0 <= i < n and 0 <= l < n):
                raise GraphError(f"edge ({i}, {l}) out of range for n={n}")
            if i == l:
                raise GraphError(f"self-loop at unit {i}")
            adj[i].add(l)
            adj[l].add(i)
        return cls(n=n, adjacency=tuple(tuple(sorted(s)) for s in adj))


def build_lattice_graph(rows: int, cols: int, scheme: str = "rook") -> NeighborGraph:
    """Contiguity graph of a rows-by-cols regular grid.

    ``rook`` connects horizontal/vertical neighbors (4-neighborhood), ``queen``
    adds diagonals (8-neighborhood); both are truncated at the grid edges.
    Units are numbered row-major.
    """
    if rows < 1 or cols < 1:
        raise GraphError("rows and cols must be at least 1")
    if scheme not in ("rook", "queen"):
        raise GraphError(f"unknown contiguity scheme {scheme!r}")
    if scheme == "rook":
        offsets = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        offsets = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)
                   if (dr, dc) != (0, 0)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    l = rr * cols + cc
                    if i < l:
                        edges.append((i, l))
    return NeighborGraph.from_edges(rows * cols, edges)


def read_edge_list(path) -> NeighborGraph:
    """Parse an edge-list text file: one ``i l`` pair per line, 0-based."""
    edges = []
    max_idx = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected two indices, got {line!r}")
            try:
                i, l = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer index in {line!r}")
            if i < 0 or l < 0:
                raise GraphError(f"{path}:{lineno}: negative index")
            edges.append((i, l))
            max_idx = max(max_idx, i, l)
    if max_idx < 0:
        raise GraphError(f"{path}: no edges found")
    return NeighborGraph.from_edges(max_idx + 1, edges)


@dataclass(frozen=True)
class SpatialDataset:
    """Response vector, predictor matrix and contiguity graph over n units."""

    y: np.ndarray
    X: np.ndarray
    graph: NeighborGraph
    centered: bool = False
    y_mean: float = 0.0
    x_means: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if y.ndim != 1 or y.shape[0] != self.graph.n:
            raise ValueError("y must be a length-n vector")
        if X.shape[0] != self.graph.n:
            raise ValueError("X must have n rows")
        if self.centered:
            if abs(y.mean()) > 1e-9 or np.any(np.abs(X.mean(axis=0)) > 1e-9):
                raise ValueError("centered flag set but data are not mean-zero")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def k(self) -> int:
        return self.X.shape[1]


def center_dataset(dataset: SpatialDataset) -> SpatialDataset:
    """Subtract column means from y and X, recording them on the result."""
    y_mean = float(dataset.y.mean())
    x_means = dataset.X.mean(axis=0)
    return SpatialDataset(
        y=dataset.y - y_mean,
        X=dataset.X - x_means,
        graph=dataset.graph,
        centered=True,
        y_mean=y_mean,
        x_means=x_means,
    )


@dataclass(frozen=True)
class PairCoding:
    """Ordered list of coded neighbor pairs (i, l) with buffer independence."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def q(self) -> int:
        return len(self.pairs)

    def coded_units(self) -> set[int]:
        return {u for pair in self.pairs for u in pair}

    def coding_rate(self, n: int) -> float:
        return 2 * self.q / n

    def validate(self, graph: NeighborGraph) -> None:
        """Assert pair membership, disjointness and buffer independence.

        Buffer independence is checked by direct set intersection: for any two
        distinct pairs, the members of one must avoid the joint neighborhood
        of the other.
        """
        nbr = graph.neighbor_sets
        seen: set[int] = set()
        for i, l in self.pairs:
            if l not in nbr[i]:
                raise CodingError(f"({i}, {l}) is not an edge")
            for u in (i, l):
                if u in seen:
                    raise CodingError(f"unit {u} appears in more than one pair")
                seen.add(u)
        joint = [nbr[i] | nbr[l] for i, l in self.pairs]
        for a in range(len(self.pairs)):
            for b in range(len(self.pairs)):
                if a == b:
                    continue
                j, k = self.pairs[b]
                if j in joint[a] or k in joint[a]:
                    raise CodingError(
                        f"pair {self.pairs[b]} intrudes on the buffer of {self.pairs[a]}"
                    )


def code_pairs(
    graph: NeighborGraph,
    seed: int | np.random.SeedSequence,
    mode: str = "exhaustive",
    q: int | None = None,
) -> PairCoding:
    """Select buffer-independent neighbor pairs from the graph.

    Units are visited in a randomized order; each still-available unit is
    paired with a uniformly chosen available neighbor and the joint
    neighborhood of the new pair is blocked from further pairing.  In
    ``exhaustive`` mode pairs are added greedily until no admissible pair
    remains; ``subsample`` mode stops after ``q`` pairs.  Units that cannot be
    paired are left uncoded.
    """
    if mode not in ("exhaustive", "subsample"):
        raise ValueError(f"unknown coding mode {mode!r}")
    if mode == "subsample":
        if q is None or q < 1:
            raise ValueError("subsample mode requires q >= 1")
    if graph.n_edges == 0:
        raise CodingError("graph has no edges; no pair can be coded")

    rng = np.random.default_rng(seed)
    nbr = graph.neighbor_sets
    # 0 = available, 1 = paired, 2 = blocked (in some pair's buffer)
    status = np.zeros(graph.n, dtype=np.int8)
    pairs: list[tuple[int, int]] = []
    for i in rng.permutation(graph.n):
        i = int(i)
        if status[i] != 0:
            continue
        candidates = [l for l in graph.adjacency[i] if status[l] == 0]
        if not candidates:
            continue
        l = int(candidates[rng.integers(len(candidates))])
        pairs.append((i, l))
        status[i] = status[l] = 1
        for m in (nbr[i] | nbr[l]) - {i, l}:
            if status[m] == 0:
                status[m] = 2
        if mode == "subsample" and len(pairs) == q:
            break
    return PairCoding(pairs=tuple(pairs))


def enumerate_codings(
    graph: NeighborGraph,
    count: int,
    seed: int | np.random.SeedSequence,
    mode: str = "exhaustive",
    q: int | None = None,
) -> list[PairCoding]:
    """Produce ``count`` codings from distinct RNG streams.

    Stream b is seeded with ``seed + b`` (distinct initial states after seed
    scrambling), so a single-coding enumeration reproduces ``code_pairs`` with
    the same seed.  Codings are valid individually but need not be distinct as
    sets; the coding scheme is non-unique by construction.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if isinstance(seed, np.random.SeedSequence):
        streams = seed.spawn(count)
    else:
        streams = [seed + b for b in range(count)]
    return [code_pairs(graph, s, mode=mode, q=q) for s in streams]


@dataclass(frozen=True)
class PairSample:
    """Pair-indexed view of the data: row j holds the two members of pair j."""

    y1: np.ndarray
    y2: np.ndarray
    X1: np.ndarray
    X2: np.ndarray

    def __post_init__(self):
        y1 = np.asarray(self.y1, dtype=float)
        y2 = np.asarray(self.y2, dtype=float)
        X1 = np.asarray(self.X1, dtype=float)
        X2 = np.asarray(self.X2, dtype=float)
        if X1.ndim == 1:
            X1 = X1[:, None]
        if X2.ndim == 1:
            X2 = X2[:, None]
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "y2", y2)
        object.__setattr__(self, "X1", X1)
        object.__setattr__(self, "X2", X2)
        q = y1.shape[0]
        if y2.shape[0] != q or X1.shape[0] != q or X2.shape[0] != q:
            raise ValueError("pair containers disagree on q")
        if X1.shape[1] != X2.shape[1]:
            raise ValueError("X1 and X2 disagree on k")

    @property
    def q(self) -> int:
        return self.y1.shape[0]

    @property
    def k(self) -> int:
        return self.X1.shape[1]


def extract_pair_sample(dataset: SpatialDataset, coding: PairCoding) -> PairSample:
    """Materialize the coded pairs as aligned (y1, X1) / (y2, X2) rows."""
    for i, l in coding.pairs:
        if not (0 <= i < dataset.n and 0 <= l < dataset.n):
            raise InvalidCodingError(f"pair ({i}, {l}) out of range for n={dataset.n}")
    first = np.array([p[0] for p in coding.pairs], dtype=int)
    second = np.array([p[1] for p in coding.pairs], dtype=int)
    return PairSample(
        y1=dataset.y[first],
        y2=dataset.y[second],
        X1=dataset.X[first, :],
        X2=dataset.X[second, :],
    )
