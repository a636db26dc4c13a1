"""Task groups, power assignments and the recovery thresholds they achieve."""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property
import itertools
import logging
import math
from typing import NamedTuple

import numpy as np

from .const import DEFAULT_RESTARTS, DEFAULT_SEARCH_BUDGET, DEFAULT_SEED, Side, Violation
from .exceptions import EmptyGraph, InvalidAssignment, InvalidParams, InvalidRho
from .graph import BaselineThresholds, ComputationGraph, baseline_thresholds, lower_bound, make_rng
from .model import Edge

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class TaskGroup:
    """Class to represent one task group (L^q_A, L^q_B)."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self) -> None:  # noqa: D105
        object.__setattr__(self, "left", tuple(sorted(int(i) for i in self.left)))
        object.__setattr__(self, "right", tuple(sorted(int(j) for j in self.right)))

    @property
    def size(self) -> int:
        """Return L^q_A * L^q_B, the pole order budget of the group."""
        return len(self.left) * len(self.right)

    def covers(self, edge: Edge) -> bool:
        return edge[0] in self.left and edge[1] in self.right

    def pairs(self) -> Iterator[Edge]:
        return itertools.product(self.left, self.right)


@dataclass(frozen=True)
class TaskAssignment:
    """Class to represent the task assignment Q, kept in canonical group order."""

    groups: tuple[TaskGroup, ...]

    def __post_init__(self) -> None:  # noqa: D105
        object.__setattr__(self, "groups", tuple(sorted(self.groups)))

    @classmethod
    def from_sets(cls, groups: Iterable[tuple[Iterable[int], Iterable[int]]]) -> TaskAssignment:
        return cls(tuple(TaskGroup(tuple(left), tuple(right)) for left, right in groups))

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self) -> Iterator[TaskGroup]:
        return iter(self.groups)

    @property
    def total_size(self) -> int:
        """Return sum over groups of L^q_A * L^q_B."""
        return sum(group.size for group in self.groups)


@dataclass(frozen=True)
class PowerAssignment:
    """Class to represent the power assignment P.

    left_powers[q][i-1] is P^{A,q}_i and right_powers[q][j-1] is P^{B,q}_j.
    """

    left_powers: tuple[tuple[int, ...], ...]
    right_powers: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:  # noqa: D105
        for name in ("left_powers", "right_powers"):
            rows = getattr(self, name)
            object.__setattr__(self, name, tuple(tuple(int(v) for v in row) for row in rows))

    @cached_property
    def left_totals(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.sum(np.asarray(self.left_powers, dtype=np.int64), axis=0))

    @cached_property
    def right_totals(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.sum(np.asarray(self.right_powers, dtype=np.int64), axis=0))

    @property
    def objective(self) -> int:
        """Return min_i sum_q P^{A,q}_i + min_j sum_q P^{B,q}_j."""
        return min(self.left_totals) + min(self.right_totals)

    def pole_order(self, q: int, group: TaskGroup, edge: Edge) -> int:
        """Return P^{A,q}_i + P^{B,q}_j - L^q_A L^q_B for group index q (0-based)."""
        i, j = edge
        return self.left_powers[q][i - 1] + self.right_powers[q][j - 1] - group.size


class ValidationReport(NamedTuple):
    """Outcome of validate: the first violated condition, if any."""

    valid: bool
    violation: Violation | None = None
    group: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class FccParameters:
    """Class to hold the partition (m, p, n), batching rho and bilinear rank."""

    m: int = 1
    p: int = 1
    n: int = 1
    rho: int = 1
    rank: int = 1

    def __post_init__(self) -> None:  # noqa: D105
        for name in ("m", "p", "n", "rho", "rank"):
            if getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be a positive integer")
        if self.rank % self.rho:
            raise InvalidRho(f"rho={self.rho} does not divide bilinear rank {self.rank}")

    @property
    def phi(self) -> int:
        """Return the number of partitions R_bilinear / rho."""
        return self.rank // self.rho


BASE_PARAMETERS = FccParameters()


@dataclass(frozen=True)
class CostReport:
    """Upload, download and complexity figures of a plan, as formula evaluations."""

    upload_a: int
    upload_b: int
    download: int
    worker_ops: int
    encode_a_ops: int
    encode_b_ops: int
    decode_ops: float


@dataclass(frozen=True)
class ThresholdReport:
    """Class to summarise the recovery threshold of a task and power assignment."""

    threshold: int
    left_min: int
    right_min: int
    rational_terms: int
    polynomial_terms: int
    lower_bound: int
    baseline: BaselineThresholds
    fcc: FccParameters = field(default=BASE_PARAMETERS)
    costs: CostReport | None = None

    @property
    def gap_bound(self) -> float:
        return gap_bound(self.fcc.rank, self.fcc.rho)


class AssignmentResult(NamedTuple):
    """A task assignment, its power assignment and the resulting threshold."""

    tasks: TaskAssignment
    powers: PowerAssignment
    report: ThresholdReport


def _orientation_values(group_size: int, count: int, step: int) -> tuple[range, range]:
    high = range(group_size - count + 1, group_size + 1)
    multiples = range(step, step * (group_size // step) + 1, step)
    return high, multiples


def validate(
    graph: ComputationGraph, tasks: TaskAssignment, powers: PowerAssignment
) -> ValidationReport:
    """Check a task and power assignment, reporting the first violated condition."""
    for q, group in enumerate(tasks):
        if not group.left or not group.right:
            return ValidationReport(False, Violation.GROUP_RANGE, q, "group has an empty side")
        if group.left[0] < 1 or group.left[-1] > graph.left_count:
            return ValidationReport(False, Violation.GROUP_RANGE, q, f"left set {group.left}")
        if group.right[0] < 1 or group.right[-1] > graph.right_count:
            return ValidationReport(False, Violation.GROUP_RANGE, q, f"right set {group.right}")

    owner: dict[Edge, int] = {}
    for q, group in enumerate(tasks):
        for pair in group.pairs():
            if pair in owner:
                return ValidationReport(
                    False, Violation.GROUP_OVERLAP, q, f"pair {pair} also in group {owner[pair]}"
                )
            owner[pair] = q
    for edge in graph.sorted_edges:
        if edge not in owner:
            return ValidationReport(False, Violation.EDGE_COVERAGE, None, f"edge {edge} uncovered")

    if len(powers.left_powers) != len(tasks) or len(powers.right_powers) != len(tasks):
        return ValidationReport(False, Violation.POWER_SHAPE, None, "one power vector per group")
    for q, group in enumerate(tasks):
        left, right = powers.left_powers[q], powers.right_powers[q]
        if len(left) != graph.left_count or len(right) != graph.right_count:
            return ValidationReport(False, Violation.POWER_SHAPE, q, "power vector length")
        if any(v < 0 for v in left + right):
            return ValidationReport(False, Violation.POWER_SHAPE, q, "negative power")

        outside_left = [
            i for i in range(1, graph.left_count + 1) if i not in group.left and left[i - 1]
        ]
        outside_right = [
            j for j in range(1, graph.right_count + 1) if j not in group.right and right[j - 1]
        ]
        if outside_left or outside_right:
            return ValidationReport(
                False,
                Violation.POWER_SUPPORT,
                q,
                f"nonzero outside group: {outside_left} {outside_right}",
            )

        size, count_a, count_b = group.size, len(group.left), len(group.right)
        values_a = [left[i - 1] for i in group.left]
        values_b = [right[j - 1] for j in group.right]
        high_a, steps_a = _orientation_values(size, count_a, count_b)
        high_b, steps_b = _orientation_values(size, count_b, count_a)
        first = all(v in high_a for v in values_a) and all(v in steps_b for v in values_b)
        second = all(v in steps_a for v in values_a) and all(v in high_b for v in values_b)
        if not (first or second):
            return ValidationReport(
                False, Violation.POWER_ORIENTATION, q, f"powers {values_a} / {values_b}"
            )

        if len(set(values_a)) != count_a or len(set(values_b)) != count_b:
            return ValidationReport(
                False, Violation.POWER_DISTINCT, q, f"repeated powers {values_a} / {values_b}"
            )

        orders = sorted(a + b - size for a in values_a for b in values_b)
        if orders != list(range(1, size + 1)):
            return ValidationReport(
                False, Violation.POWER_PERMUTATION, q, f"pole orders {orders}"
            )
    return ValidationReport(True)


def gap_bound(rank: int, rho: int) -> float:
    """Return the optimality-gap factor 1 + rho / R_bilinear."""
    return 1 + rho / rank


def cost_report(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    threshold: int,
    fcc: FccParameters,
    alpha: int,
    beta: int,
    gamma: int,
    workers: int,
) -> CostReport:
    """Evaluate the upload, download and complexity formulas of a plan."""
    m, p, n, rank = fcc.m, fcc.p, fcc.n, fcc.rank
    squares = sum(group.size**2 for group in tasks)
    decode_tail = threshold * math.log2(max(threshold, 2)) ** 2 + rank * squares
    return CostReport(
        upload_a=fcc.phi * alpha * beta // (m * p),
        upload_b=fcc.phi * beta * gamma // (p * n),
        download=alpha * gamma // (m * n),
        worker_ops=fcc.phi * alpha * beta * gamma // (m * p * n),
        encode_a_ops=alpha * beta * graph.left_count * rank * (workers // (m * p) + 1),
        encode_b_ops=beta * gamma * graph.right_count * rank * (workers // (n * p) + 1),
        decode_ops=alpha * gamma * rank * graph.size + alpha * gamma / (m * n) * decode_tail,
    )


def recovery_threshold(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    powers: PowerAssignment,
    fcc: FccParameters = BASE_PARAMETERS,
) -> ThresholdReport:
    """Return the recovery threshold of (Q, P) under the given FCC parameters."""
    report = validate(graph, tasks, powers)
    if not report:
        raise InvalidAssignment(f"{report.violation} in group {report.group}: {report.detail}")
    total = tasks.total_size
    left_min, right_min = min(powers.left_totals), min(powers.right_totals)
    threshold = (fcc.rank + fcc.rho) * total - left_min - right_min + 1
    rational = fcc.rank * total
    _LOGGER.debug(
        "threshold %s for %s groups (rank=%s, rho=%s)", threshold, len(tasks), fcc.rank, fcc.rho
    )
    return ThresholdReport(
        threshold=threshold,
        left_min=left_min,
        right_min=right_min,
        rational_terms=rational,
        polynomial_terms=threshold - rational,
        lower_bound=lower_bound(graph, fcc.m, fcc.n),
        baseline=baseline_thresholds(graph),
        fcc=fcc,
    )


# power assignment search

Option = tuple[tuple[int, ...], tuple[int, ...]]


def _option_values(
    group: TaskGroup, flag: int, ranks_a: Sequence[int], ranks_b: Sequence[int]
) -> Option:
    """Return the powers of a group for orientation flag and rank permutations."""
    size, count_a, count_b = group.size, len(group.left), len(group.right)
    if flag:
        return (
            tuple(size - r + 1 for r in ranks_a),
            tuple(r * count_a for r in ranks_b),
        )
    return (
        tuple(r * count_b for r in ranks_a),
        tuple(size - r + 1 for r in ranks_b),
    )


def group_options(group: TaskGroup) -> list[Option]:
    """Return every admissible (P^A, P^B) of a group over its members, sorted."""
    options = set()
    for flag in (1, 0):
        for ranks_a in itertools.permutations(range(1, len(group.left) + 1)):
            for ranks_b in itertools.permutations(range(1, len(group.right) + 1)):
                options.add(_option_values(group, flag, ranks_a, ranks_b))
    return sorted(options)


def _group_space(group: TaskGroup) -> int:
    return 2 * math.factorial(len(group.left)) * math.factorial(len(group.right))


def search_space(tasks: TaskAssignment) -> int:
    """Return prod_q 2 * L^q_A! * L^q_B!."""
    return math.prod(_group_space(g) for g in tasks)


def powers_from_options(
    graph: ComputationGraph, tasks: TaskAssignment, chosen: Sequence[Option]
) -> PowerAssignment:
    """Expand per-group member values into full-length power vectors."""
    left_rows, right_rows = [], []
    for group, (values_a, values_b) in zip(tasks, chosen):
        left = [0] * graph.left_count
        right = [0] * graph.right_count
        for i, v in zip(group.left, values_a):
            left[i - 1] = v
        for j, v in zip(group.right, values_b):
            right[j - 1] = v
        left_rows.append(tuple(left))
        right_rows.append(tuple(right))
    return PowerAssignment(tuple(left_rows), tuple(right_rows))


def identity_powers(graph: ComputationGraph, tasks: TaskAssignment) -> PowerAssignment:
    """Return the identity-permutation P: first orientation, ranks in member order."""
    chosen = [
        _option_values(g, 1, range(1, len(g.left) + 1), range(1, len(g.right) + 1)) for g in tasks
    ]
    return powers_from_options(graph, tasks, chosen)


def _top_value_sums(count: int, other: int) -> list[int]:
    """Return the largest sum of k member powers on one side of a group, for k = 0..count."""
    size = count * other
    by_order = itertools.accumulate(range(size, size - count, -1), initial=0)
    by_rank = itertools.accumulate(range(size, 0, -other), initial=0)
    return [max(x, y) for x, y in zip(by_order, by_rank)]


def _side_bound(count: int, members: Sequence[tuple[int, ...]], tops: Sequence[list[int]]) -> int:
    """Bound min_v total_v by the best joint total of the k weakest vertices, over every k."""
    groups_of: list[list[int]] = [[] for _ in range(count)]
    for q, group_members in enumerate(members):
        for v in group_members:
            groups_of[v - 1].append(q)
    caps = [sum(tops[q][1] for q in groups_of[v]) for v in range(count)]
    taken = [0] * len(members)
    joint = 0
    bound = caps[0]
    for k, v in enumerate(sorted(range(count), key=caps.__getitem__), start=1):
        for q in groups_of[v]:
            taken[q] += 1
            joint += tops[q][taken[q]] - tops[q][taken[q] - 1]
        bound = min(bound, joint // k)
    return bound


def objective_bound(graph: ComputationGraph, tasks: TaskAssignment) -> int:
    """Return an upper bound on min_i P^A_i + min_j P^B_j over every valid P for Q."""
    left = _side_bound(
        graph.left_count,
        [g.left for g in tasks],
        [_top_value_sums(len(g.left), len(g.right)) for g in tasks],
    )
    right = _side_bound(
        graph.right_count,
        [g.right for g in tasks],
        [_top_value_sums(len(g.right), len(g.left)) for g in tasks],
    )
    return left + right


class PowerSearchResult(NamedTuple):
    """Outcome of the power assignment search."""

    powers: PowerAssignment
    objective: int
    exact: bool
    nodes: int


class _SearchDone(Exception):
    """Raised internally once the global upper bound is attained."""


class _NodeLimit(Exception):
    """Raised internally when the node budget is exhausted."""


def _add_option(
    left: list[int], right: list[int], group: TaskGroup, option: Option, sign: int
) -> None:
    for i, v in zip(group.left, option[0]):
        left[i - 1] += sign * v
    for j, v in zip(group.right, option[1]):
        right[j - 1] += sign * v


def _score(left: list[int], right: list[int]) -> tuple[int, int]:
    low_left, low_right = min(left), min(right)
    return low_left + low_right, -(left.count(low_left) + right.count(low_right))


class _BranchAndBound:
    """Class to search orientations and permutations group by group.

    Options are tried in lexicographic order and only strictly better leaves
    replace the incumbent, so the first optimum found is the lexicographically
    smallest one.
    """

    def __init__(  # noqa: D107
        self,
        graph: ComputationGraph,
        tasks: TaskAssignment,
        options: list[list[Option]],
        incumbent: int,
        node_limit: int | None,
        ceiling: int | None = None,
    ) -> None:
        self.graph = graph
        self.tasks = tasks.groups
        self.options = options
        self.best_value = incumbent
        self.best: list[Option] | None = None
        self.node_limit = node_limit
        self.nodes = 0
        self._left = [0] * graph.left_count
        self._right = [0] * graph.right_count
        self._chosen: list[Option] = []

        depth = len(self.tasks)
        self._rem_left = [[0] * graph.left_count for _ in range(depth + 1)]
        self._rem_right = [[0] * graph.right_count for _ in range(depth + 1)]
        self._rem_sum_left = [0] * (depth + 1)
        self._rem_sum_right = [0] * (depth + 1)
        for k in range(depth - 1, -1, -1):
            group = self.tasks[k]
            self._rem_left[k] = list(self._rem_left[k + 1])
            self._rem_right[k] = list(self._rem_right[k + 1])
            for i in group.left:
                self._rem_left[k][i - 1] += group.size
            for j in group.right:
                self._rem_right[k][j - 1] += group.size
            self._rem_sum_left[k] = self._rem_sum_left[k + 1] + max(sum(o[0]) for o in options[k])
            self._rem_sum_right[k] = self._rem_sum_right[k + 1] + max(sum(o[1]) for o in options[k])
        self.global_bound = self._bound(0)
        if ceiling is not None:
            self.global_bound = min(self.global_bound, ceiling)

    def _bound(self, depth: int) -> int:
        rem_left, rem_right = self._rem_left[depth], self._rem_right[depth]
        bound_left = min(
            min(v + r for v, r in zip(self._left, rem_left)),
            (sum(self._left) + self._rem_sum_left[depth]) // len(self._left),
        )
        bound_right = min(
            min(v + r for v, r in zip(self._right, rem_right)),
            (sum(self._right) + self._rem_sum_right[depth]) // len(self._right),
        )
        return bound_left + bound_right

    def run(self) -> bool:
        """Search; return True when the search space was exhausted or the bound was met."""
        try:
            self._descend(0)
        except _SearchDone:
            return True
        except _NodeLimit:
            return False
        return True

    def _descend(self, depth: int) -> None:
        if depth == len(self.tasks):
            value = min(self._left) + min(self._right)
            if value > self.best_value:
                self.best_value = value
                self.best = list(self._chosen)
                if value >= self.global_bound:
                    raise _SearchDone
            return
        group = self.tasks[depth]
        for option in self.options[depth]:
            self.nodes += 1
            if self.node_limit is not None and self.nodes > self.node_limit:
                raise _NodeLimit
            _add_option(self._left, self._right, group, option, 1)
            self._chosen.append(option)
            if self._bound(depth + 1) > self.best_value:
                self._descend(depth + 1)
            self._chosen.pop()
            _add_option(self._left, self._right, group, option, -1)


@dataclass
class _GroupState:
    flag: int
    ranks_a: list[int]
    ranks_b: list[int]

    def option(self, group: TaskGroup) -> Option:
        return _option_values(group, self.flag, self.ranks_a, self.ranks_b)

    def move(self, kind: str, u: int, v: int) -> None:
        """Apply a flip or swap; applying it twice restores the state."""
        if kind == "flip":
            self.flag ^= 1
        elif kind == "a":
            self.ranks_a[u], self.ranks_a[v] = self.ranks_a[v], self.ranks_a[u]
        else:
            self.ranks_b[u], self.ranks_b[v] = self.ranks_b[v], self.ranks_b[u]


def _ranks_by_need(
    totals: list[int], members: tuple[int, ...], low_rank_high_value: bool
) -> list[int]:
    order = sorted(range(len(members)), key=lambda u: (totals[members[u] - 1], u))
    ranks = [0] * len(members)
    for position, u in enumerate(order):
        ranks[u] = position + 1 if low_rank_high_value else len(members) - position
    return ranks


def _greedy_states(graph: ComputationGraph, tasks: TaskAssignment) -> list[_GroupState]:
    """Fill groups largest first, handing each group's largest powers to its weakest members."""
    groups = tasks.groups
    left = [0] * graph.left_count
    right = [0] * graph.right_count
    states: list[_GroupState] = [_GroupState(1, [], []) for _ in groups]
    for q in sorted(range(len(groups)), key=lambda q: (-groups[q].size, q)):
        group = groups[q]
        best: tuple[tuple[int, int], _GroupState] | None = None
        for flag in (1, 0):
            state = _GroupState(
                flag,
                _ranks_by_need(left, group.left, flag == 1),
                _ranks_by_need(right, group.right, flag == 0),
            )
            option = state.option(group)
            _add_option(left, right, group, option, 1)
            key = _score(left, right)
            _add_option(left, right, group, option, -1)
            if best is None or key > best[0]:
                best = (key, state)
        assert best is not None
        states[q] = best[1]
        _add_option(left, right, group, best[1].option(group), 1)
    return states


def _local_search(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    restarts: int,
    seed: int,
    start: Sequence[_GroupState] | None = None,
    target: int | None = None,
) -> tuple[list[Option], int]:
    """Hill-climb over orientation flips and rank swaps from several starts.

    The first climb begins at ``start`` (the identity when omitted); later
    climbs begin at random states. Restarts stop once ``target`` is reached.
    """
    groups = tasks.groups

    moves: list[tuple[int, str, int, int]] = []
    for q, group in enumerate(groups):
        if len(group.left) > 1 and len(group.right) > 1:
            moves.append((q, "flip", 0, 0))
        moves.extend((q, "a", u, v) for u, v in itertools.combinations(range(len(group.left)), 2))
        moves.extend((q, "b", u, v) for u, v in itertools.combinations(range(len(group.right)), 2))

    best_key: tuple[int, list[Option]] | None = None
    for restart in range(max(restarts, 1)):
        rng = make_rng(seed, restart)
        if restart == 0 and start is not None:
            states = [_GroupState(s.flag, list(s.ranks_a), list(s.ranks_b)) for s in start]
        elif restart == 0:
            states = [
                _GroupState(1, list(range(1, len(g.left) + 1)), list(range(1, len(g.right) + 1)))
                for g in groups
            ]
        else:
            states = [
                _GroupState(
                    int(rng.integers(0, 2)),
                    [int(r) + 1 for r in rng.permutation(len(g.left))],
                    [int(r) + 1 for r in rng.permutation(len(g.right))],
                )
                for g in groups
            ]
        chosen = [s.option(g) for g, s in zip(groups, states)]
        left = [0] * graph.left_count
        right = [0] * graph.right_count
        for group, option in zip(groups, chosen):
            _add_option(left, right, group, option, 1)
        current = _score(left, right)
        improved = True
        while improved:
            improved = False
            for index in rng.permutation(len(moves)):
                q, kind, u, v = moves[int(index)]
                group, state, old = groups[q], states[q], chosen[q]
                state.move(kind, u, v)
                new = state.option(group)
                _add_option(left, right, group, old, -1)
                _add_option(left, right, group, new, 1)
                candidate = _score(left, right)
                if candidate > current:
                    current = candidate
                    chosen[q] = new
                    improved = True
                else:
                    state.move(kind, u, v)
                    _add_option(left, right, group, new, -1)
                    _add_option(left, right, group, old, 1)
        if (
            best_key is None
            or current[0] > best_key[0]
            or (current[0] == best_key[0] and chosen < best_key[1])
        ):
            best_key = (current[0], list(chosen))
        if target is not None and best_key[0] >= target:
            break
    assert best_key is not None
    return best_key[1], best_key[0]


def search_power(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    budget: int = DEFAULT_SEARCH_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> PowerSearchResult:
    """Maximise min_i sum_q P^{A,q}_i + min_j sum_q P^{B,q}_j over valid P.

    When the space fits the budget the branch and bound is exhaustive and
    returns the lexicographically smallest optimum. Otherwise a greedy start
    is refined by local search; it is proven optimal when it meets
    ``objective_bound``, and is otherwise handed to a node-limited branch and
    bound as the incumbent, which keeps whichever of the two is better.
    """
    if budget < 1:
        raise InvalidParams("search budget must be positive")
    space = search_space(tasks)
    bound = objective_bound(graph, tasks)
    _LOGGER.debug("search_power called for %s groups, space %s, bound %s", len(tasks), space, bound)
    start = _greedy_states(graph, tasks)

    if space <= budget:
        _, seed_value = _local_search(graph, tasks, 1, seed, start, bound)
        search = _BranchAndBound(
            graph, tasks, [group_options(g) for g in tasks], seed_value - 1, None, bound
        )
        search.run()
        assert search.best is not None
        return PowerSearchResult(
            powers_from_options(graph, tasks, search.best), search.best_value, True, search.nodes
        )

    chosen, value = _local_search(graph, tasks, restarts, seed, start, bound)
    if value >= bound:
        _LOGGER.debug("local search met the objective bound %s", bound)
        return PowerSearchResult(powers_from_options(graph, tasks, chosen), value, True, 0)

    exact, nodes = False, 0
    if max(_group_space(g) for g in tasks) <= budget:
        search = _BranchAndBound(
            graph, tasks, [group_options(g) for g in tasks], value, budget, bound
        )
        exact = search.run()
        nodes = search.nodes
        if search.best is not None:
            chosen, value = search.best, search.best_value
    if not exact:
        _LOGGER.warning(
            "exact power search exceeded budget %s (space %s), keeping the best of local "
            "search and %s branch and bound nodes: %s",
            budget,
            space,
            nodes,
            value,
        )
    return PowerSearchResult(powers_from_options(graph, tasks, chosen), value, exact, nodes)


def optimize_power(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    budget: int = DEFAULT_SEARCH_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> PowerAssignment:
    """Return the best valid power assignment found for Q."""
    return search_power(graph, tasks, budget, restarts, seed).powers


# constructions


def t1_assignment(
    graph: ComputationGraph, fcc: FccParameters = BASE_PARAMETERS
) -> AssignmentResult:
    """Return the Type-1 plan: one singleton group per edge, every power 1."""
    if not graph.edges:
        raise EmptyGraph("computation graph has no edges")
    tasks = TaskAssignment(tuple(TaskGroup((i,), (j,)) for i, j in graph.sorted_edges))
    chosen = [((1,), (1,)) for _ in tasks]
    powers = powers_from_options(graph, tasks, chosen)
    return AssignmentResult(tasks, powers, recovery_threshold(graph, tasks, powers, fcc))


def _t2_tasks(graph: ComputationGraph, side: Side) -> TaskAssignment:
    if side is Side.LEFT:
        groups = [TaskGroup((i,), graph.neighbors_left(i)) for i in range(1, graph.left_count + 1)]
    else:
        groups = [
            TaskGroup(graph.neighbors_right(j), (j,)) for j in range(1, graph.right_count + 1)
        ]
    return TaskAssignment(tuple(groups))


def _t2_side(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    fcc: FccParameters,
    budget: int,
    restarts: int,
    seed: int,
) -> AssignmentResult:
    powers = optimize_power(graph, tasks, budget, restarts, seed)
    return AssignmentResult(tasks, powers, recovery_threshold(graph, tasks, powers, fcc))


def t2_assignment(
    graph: ComputationGraph,
    side: Side = Side.BEST,
    fcc: FccParameters = BASE_PARAMETERS,
    budget: int = DEFAULT_SEARCH_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> AssignmentResult:
    """Return the Type-2 plan: one group per vertex of the chosen side and its neighbourhood.

    Both sides cover every edge once, so their thresholds differ only by the
    objective; the right side is skipped when its bound cannot beat the left.
    """
    if not graph.edges:
        raise EmptyGraph("computation graph has no edges")
    side = Side(side)
    if side is not Side.BEST:
        return _t2_side(graph, _t2_tasks(graph, side), fcc, budget, restarts, seed)
    left = _t2_side(graph, _t2_tasks(graph, Side.LEFT), fcc, budget, restarts, seed)
    right_tasks = _t2_tasks(graph, Side.RIGHT)
    if objective_bound(graph, right_tasks) <= left.report.left_min + left.report.right_min:
        _LOGGER.debug("type-2 right side cannot beat threshold %s", left.report.threshold)
        return left
    right = _t2_side(graph, right_tasks, fcc, budget, restarts, seed)
    _LOGGER.debug(
        "type-2 thresholds: left %s, right %s", left.report.threshold, right.report.threshold
    )
    return right if right.report.threshold < left.report.threshold else left


def single_group_assignment(
    graph: ComputationGraph,
    fcc: FccParameters = BASE_PARAMETERS,
    budget: int = DEFAULT_SEARCH_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> AssignmentResult:
    """Return the plan with one group covering every left and right matrix."""
    if not graph.edges:
        raise EmptyGraph("computation graph has no edges")
    tasks = TaskAssignment(
        (TaskGroup(tuple(range(1, graph.left_count + 1)), tuple(range(1, graph.right_count + 1))),)
    )
    powers = optimize_power(graph, tasks, budget, restarts, seed)
    return AssignmentResult(tasks, powers, recovery_threshold(graph, tasks, powers, fcc))


def custom_assignment(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    powers: PowerAssignment | None = None,
    fcc: FccParameters = BASE_PARAMETERS,
    budget: int = DEFAULT_SEARCH_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> AssignmentResult:
    """Return a plan for user-supplied groups, optimising the powers when none are given."""
    if powers is None:
        powers = optimize_power(graph, tasks, budget, restarts, seed)
    return AssignmentResult(tasks, powers, recovery_threshold(graph, tasks, powers, fcc))
