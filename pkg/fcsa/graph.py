"""Bipartite computation graphs and the random ensembles they are drawn from."""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property
import logging
from typing import NamedTuple

import numpy as np

from .const import RESAMPLE_LIMIT
from .exceptions import EmptyGraph, InvalidDegree, InvalidParams
from .model import Edge

_LOGGER = logging.getLogger(__name__)


def make_rng(seed: int | np.random.Generator, *stream: int) -> np.random.Generator:
    """Return a generator for seed, optionally derived for a sub-stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng([int(seed), *stream])


@dataclass(frozen=True)
class ComputationGraph:
    """Class to represent the computation list S as a bipartite graph.

    Left vertices 1..L_A stand for the A matrices, right vertices 1..L_B for
    the B matrices; an edge (i, j) asks for the product A_i B_j. The origin
    tuples map every vertex back to its index before pruning.
    """

    left_count: int
    right_count: int
    edges: frozenset[Edge]
    origin_left: tuple[int, ...] = field(default=(), compare=False)
    origin_right: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:  # noqa: D105
        if self.left_count < 1 or self.right_count < 1:
            raise InvalidParams("a computation graph needs at least one vertex per side")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (1 <= i <= self.left_count and 1 <= j <= self.right_count):
                raise InvalidParams(
                    f"edge ({i}, {j}) is outside {self.left_count}x{self.right_count}"
                )
        object.__setattr__(self, "edges", edges)
        if not self.origin_left:
            object.__setattr__(self, "origin_left", tuple(range(1, self.left_count + 1)))
        if not self.origin_right:
            object.__setattr__(self, "origin_right", tuple(range(1, self.right_count + 1)))

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Edge],
        left_count: int | None = None,
        right_count: int | None = None,
    ) -> ComputationGraph:
        """Build a graph, inferring the side sizes from the edges when omitted."""
        edge_set = frozenset((int(i), int(j)) for i, j in edges)
        if not edge_set and (left_count is None or right_count is None):
            raise EmptyGraph("cannot infer graph size from an empty edge list")
        return cls(
            left_count=left_count or max(i for i, _ in edge_set),
            right_count=right_count or max(j for _, j in edge_set),
            edges=edge_set,
        )

    @property
    def size(self) -> int:
        """Return |S|."""
        return len(self.edges)

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def left_degrees(self) -> tuple[int, ...]:
        degrees = [0] * self.left_count
        for i, _ in self.edges:
            degrees[i - 1] += 1
        return tuple(degrees)

    @cached_property
    def right_degrees(self) -> tuple[int, ...]:
        degrees = [0] * self.right_count
        for _, j in self.edges:
            degrees[j - 1] += 1
        return tuple(degrees)

    def neighbors_left(self, i: int) -> tuple[int, ...]:
        """Return the right neighbours of left vertex i."""
        return tuple(j for a, j in self.sorted_edges if a == i)

    def neighbors_right(self, j: int) -> tuple[int, ...]:
        """Return the left neighbours of right vertex j."""
        return tuple(sorted(i for i, b in self.edges if b == j))

    def has_isolated(self) -> bool:
        return 0 in self.left_degrees or 0 in self.right_degrees


class BaselineThresholds(NamedTuple):
    """Recovery thresholds of the schemes FCSA is compared against."""

    polynomial: int
    batch: int
    combined: int


def prune_isolated(graph: ComputationGraph) -> ComputationGraph:
    """Drop degree-0 vertices and renumber the rest, keeping the origin mapping."""
    if not graph.edges:
        raise EmptyGraph("computation graph has no edges")
    keep_left = [i for i in range(1, graph.left_count + 1) if graph.left_degrees[i - 1]]
    keep_right = [j for j in range(1, graph.right_count + 1) if graph.right_degrees[j - 1]]
    left_index = {old: new for new, old in enumerate(keep_left, start=1)}
    right_index = {old: new for new, old in enumerate(keep_right, start=1)}
    pruned = ComputationGraph(
        left_count=len(keep_left),
        right_count=len(keep_right),
        edges=frozenset((left_index[i], right_index[j]) for i, j in graph.edges),
        origin_left=tuple(graph.origin_left[i - 1] for i in keep_left),
        origin_right=tuple(graph.origin_right[j - 1] for j in keep_right),
    )
    if pruned.left_count != graph.left_count or pruned.right_count != graph.right_count:
        _LOGGER.debug(
            "pruned graph from %sx%s to %sx%s",
            graph.left_count,
            graph.right_count,
            pruned.left_count,
            pruned.right_count,
        )
    return pruned


def sample_erdos_renyi(
    left_count: int,
    right_count: int,
    edge_probability: float,
    rng: np.random.Generator | int,
) -> ComputationGraph:
    """Draw a graph from G_lambda(L_A, L_B) and prune isolated vertices."""
    if not 0 < edge_probability < 1:
        raise InvalidParams(f"edge probability {edge_probability} must lie in (0, 1)")
    if left_count < 1 or right_count < 1:
        raise InvalidParams("both sides need at least one vertex")
    rng = make_rng(rng)
    for attempt in range(RESAMPLE_LIMIT):
        mask = rng.random((left_count, right_count)) < edge_probability
        if mask.any():
            rows, cols = np.nonzero(mask)
            graph = ComputationGraph(
                left_count=left_count,
                right_count=right_count,
                edges=frozenset((int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)),
            )
            return prune_isolated(graph)
        _LOGGER.warning("sampled an empty graph (attempt %s), resampling", attempt + 1)
    raise EmptyGraph(f"no edges after {RESAMPLE_LIMIT} draws at lambda={edge_probability}")


def sample_bounded_degree(
    left_count: int,
    right_count: int,
    max_degree: int,
    rng: np.random.Generator | int,
) -> ComputationGraph:
    """Draw a graph from V_k(L_A, L_B): each left vertex picks 1..k distinct neighbours."""
    if left_count < 1 or right_count < 1:
        raise InvalidParams("both sides need at least one vertex")
    if not 1 <= max_degree <= right_count:
        raise InvalidDegree(f"degree bound {max_degree} not in [1, {right_count}]")
    rng = make_rng(rng)
    edges: set[Edge] = set()
    for i in range(1, left_count + 1):
        degree = int(rng.integers(1, max_degree + 1))
        for j in rng.choice(right_count, size=degree, replace=False):
            edges.add((i, int(j) + 1))
    graph = ComputationGraph(left_count=left_count, right_count=right_count, edges=frozenset(edges))
    return prune_isolated(graph)


def baseline_thresholds(graph: ComputationGraph) -> BaselineThresholds:
    """Return the polynomial-code, batch-code and combined baseline thresholds."""
    if not graph.edges:
        raise EmptyGraph("computation graph has no edges")
    polynomial = graph.left_count * graph.right_count
    batch = 2 * graph.size - 1
    return BaselineThresholds(polynomial, batch, min(polynomial, batch))


def lower_bound(graph: ComputationGraph, m: int = 1, n: int = 1) -> int:
    """Return the cut-set lower bound m*n*|S| on any recovery threshold."""
    return m * n * graph.size
