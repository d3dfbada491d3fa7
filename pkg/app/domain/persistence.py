"""Vietoris-Rips filtrations and their 0- and 1-dimensional persistence.

Coefficients are in the field with two elements throughout, so a boundary
column is the set of its faces and column addition is symmetric difference.
"""
import functools
import itertools
import logging
import math
from collections import abc
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from app.lib.exceptions import OracleRefusal, ParameterError

from .embedding import PointCloud

__all__ = [
    "DistanceMatrix",
    "ORACLE_MAX_VERTICES",
    "PersistenceDiagram",
    "PersistencePair",
    "RipsFiltration",
    "Simplex",
    "build_rips",
    "compute_persistence",
    "diagram_records",
    "distance_matrix",
    "oracle_persistence",
]

logger = logging.getLogger(__name__)

ORACLE_MAX_VERTICES = 10


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances with a zero diagonal."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterError(f"distance matrix must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise ParameterError("distances must be finite and nonnegative")
        if not np.array_equal(entries, entries.T) or np.any(np.diag(entries) != 0):
            raise ParameterError("distance matrix must be symmetric with a zero diagonal")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def scaled(self, factor: float) -> "DistanceMatrix":
        return DistanceMatrix(self.entries * factor)


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    value: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    def sort_key(self) -> tuple[float, int, tuple[int, ...]]:
        return self.value, len(self.vertices), self.vertices

    def faces(self) -> list[tuple[int, ...]]:
        """Codimension one faces, empty for a vertex."""
        if len(self.vertices) == 1:
            return []
        return list(itertools.combinations(self.vertices, len(self.vertices) - 1))


@dataclass(frozen=True)
class RipsFiltration:
    """Simplices of dimension at most 2 in filtration order.

    Ordered by value, then dimension, then vertex tuple, so every face comes
    before its cofaces and ties are resolved the same way on every run.
    """

    simplices: tuple[Simplex, ...]
    n_vertices: int
    threshold: float

    def __len__(self) -> int:
        return len(self.simplices)

    def of_dimension(self, k: int) -> list[Simplex]:
        return [s for s in self.simplices if s.dimension == k]


class PersistencePair(NamedTuple):
    dimension: int
    birth: float
    death: float

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Pairs with positive persistence, sorted by dimension, birth and death.

    Essential classes carry `death = inf`.
    """

    pairs: tuple[PersistencePair, ...] = ()
    date: pd.Timestamp | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    def dimension(self, k: int) -> list[PersistencePair]:
        return [pair for pair in self.pairs if pair.dimension == k]

    def finite(self, k: int) -> np.ndarray:
        """`(birth, death)` rows of the finite pairs of dimension `k`."""
        rows = [(pair.birth, pair.death) for pair in self.pairs if pair.dimension == k and not pair.essential]
        return np.array(rows, dtype=float).reshape(-1, 2)


def distance_matrix(cloud: PointCloud | np.ndarray) -> DistanceMatrix:
    """Euclidean distances between the points of a cloud."""
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if points.ndim != 2 or not len(points):
        raise ParameterError("point cloud must be a nonempty 2-d array")
    if len(points) == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(points, metric="euclidean")))


@functools.lru_cache(maxsize=64)
def _triangles(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp).reshape(-1, 3)


def build_rips(dm: DistanceMatrix, max_dim: int = 2, threshold: float | None = None) -> RipsFiltration:
    """Flag filtration of a distance matrix.

    Args:
        dm: Pairwise distances.
        max_dim: Largest simplex dimension, 1 or 2.
        threshold: Largest filtration value kept. Defaults to the enclosing
            value, the largest pairwise distance.

    Returns:
        Vertices at 0, edges at their length, triangles at their longest edge.
    """
    if max_dim not in (1, 2):
        raise ParameterError(f"max_dim must be 1 or 2, got {max_dim}")
    entries = dm.entries
    n = dm.n
    if threshold is None:
        threshold = float(entries.max()) if n else 0.0
    if threshold < 0:
        raise ParameterError(f"threshold must be nonnegative, got {threshold}")

    simplices = [Simplex((i,), 0.0) for i in range(n)]
    rows, cols = np.triu_indices(n, k=1)
    lengths = entries[rows, cols]
    kept = lengths <= threshold
    simplices.extend(
        Simplex((int(i), int(j)), float(v)) for i, j, v in zip(rows[kept], cols[kept], lengths[kept])
    )
    if max_dim == 2 and n >= 3:
        tri = _triangles(n)
        values = np.maximum.reduce(
            [entries[tri[:, 0], tri[:, 1]], entries[tri[:, 0], tri[:, 2]], entries[tri[:, 1], tri[:, 2]]]
        )
        kept = values <= threshold
        simplices.extend(Simplex(tuple(int(v) for v in t), float(v)) for t, v in zip(tri[kept], values[kept]))
    simplices.sort(key=Simplex.sort_key)
    return RipsFiltration(tuple(simplices), n, float(threshold))


def _index_faces(filtration: RipsFiltration) -> dict[tuple[int, ...], int]:
    index_of: dict[tuple[int, ...], int] = {}
    for position, simplex in enumerate(filtration.simplices):
        for face in simplex.faces():
            if face not in index_of:
                raise ParameterError(f"simplex {simplex.vertices} appears before its face {face}")
        index_of[simplex.vertices] = position
    return index_of


def _finish(pairs: abc.Iterable[PersistencePair]) -> tuple[PersistencePair, ...]:
    return tuple(pair for pair in pairs if pair.birth < pair.death)


def compute_persistence(filtration: RipsFiltration, date: pd.Timestamp | None = None) -> PersistenceDiagram:
    """Persistence pairs of dimension 0 and 1.

    Components are tracked with union-find, the younger component dying when
    two merge. Edges that merge nothing create loops; their classes are found
    by reducing the triangle columns restricted to those edges, since rows of
    edges that already paired with a vertex can never become a pivot. The
    reduction stops as soon as every loop is paired.

    Args:
        filtration: Face-ordered filtration.
        date: Date stamped on the diagram.

    Returns:
        The persistence diagram, zero-length pairs dropped.
    """
    index_of = _index_faces(filtration)
    simplices = filtration.simplices
    parent: dict[int, int] = {}
    birth: dict[int, float] = {}
    pairs: list[PersistencePair] = []

    def find(v: int) -> int:
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    loops: dict[int, float] = {}
    triangles: list[int] = []
    for position, simplex in enumerate(simplices):
        match simplex.dimension:
            case 0:
                (v,) = simplex.vertices
                parent[v] = v
                birth[v] = simplex.value
            case 1:
                a, b = (find(v) for v in simplex.vertices)
                if a == b:
                    loops[position] = simplex.value
                    continue
                elder, younger = sorted((a, b), key=lambda r: (birth[r], r))
                pairs.append(PersistencePair(0, birth[younger], simplex.value))
                parent[younger] = elder
            case _:
                triangles.append(position)

    reduced: dict[int, set[int]] = {}
    unpaired = set(loops)
    for position in triangles:
        if not unpaired:
            break
        column = {index_of[face] for face in simplices[position].faces()} & loops.keys()
        while column:
            pivot = max(column)
            if pivot not in reduced:
                break
            column ^= reduced[pivot]
        if column:
            reduced[pivot] = column
            unpaired.discard(pivot)
            pairs.append(PersistencePair(1, loops[pivot], simplices[position].value))

    pairs.extend(PersistencePair(0, birth[v], math.inf) for v in parent if parent[v] == v)
    pairs.extend(PersistencePair(1, loops[position], math.inf) for position in unpaired)
    return PersistenceDiagram(_finish(pairs), date)


def oracle_persistence(filtration: RipsFiltration, date: pd.Timestamp | None = None) -> PersistenceDiagram:
    """Textbook left-to-right reduction of the full dense boundary matrix.

    For checking [`compute_persistence`][app.domain.persistence.compute_persistence]
    on small clouds only.

    Raises:
        OracleRefusal: If the filtration has more than `ORACLE_MAX_VERTICES` vertices.
    """
    if filtration.n_vertices > ORACLE_MAX_VERTICES:
        raise OracleRefusal(
            f"oracle reduction is limited to {ORACLE_MAX_VERTICES} vertices, got {filtration.n_vertices}"
        )
    simplices = filtration.simplices
    m = len(simplices)
    if not m:
        return PersistenceDiagram((), date)
    index_of = _index_faces(filtration)
    boundary = np.zeros((m, m), dtype=np.uint8)
    for j, simplex in enumerate(simplices):
        for face in simplex.faces():
            boundary[index_of[face], j] = 1

    def low(j: int) -> int:
        nonzero = np.flatnonzero(boundary[:, j])
        return int(nonzero[-1]) if len(nonzero) else -1

    column_with_low: dict[int, int] = {}
    for j in range(m):
        pivot = low(j)
        while pivot != -1 and pivot in column_with_low:
            boundary[:, j] ^= boundary[:, column_with_low[pivot]]
            pivot = low(j)
        if pivot != -1:
            column_with_low[pivot] = j

    pairs: list[PersistencePair] = []
    killed = set(column_with_low)
    killers = set(column_with_low.values())
    for i, j in column_with_low.items():
        if simplices[i].dimension <= 1:
            pairs.append(PersistencePair(simplices[i].dimension, simplices[i].value, simplices[j].value))
    for i, simplex in enumerate(simplices):
        if simplex.dimension <= 1 and i not in killed and i not in killers:
            pairs.append(PersistencePair(simplex.dimension, simplex.value, math.inf))
    return PersistenceDiagram(_finish(pairs), date)


def diagram_records(symbol: str, diagram: PersistenceDiagram) -> list[dict[str, object]]:
    """Rows of the diagram dump, `symbol,date,dim,birth,death`."""
    return [
        {"symbol": symbol, "date": diagram.date, "dim": pair.dimension, "birth": pair.birth, "death": pair.death}
        for pair in diagram.pairs
    ]
