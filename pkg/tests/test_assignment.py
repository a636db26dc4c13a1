"""Tests for task/power assignments, thresholds and the power search."""
from __future__ import annotations

import itertools
import logging

import numpy as np
import pytest

from fcsa.assignment import (
    FccParameters,
    PowerAssignment,
    TaskAssignment,
    TaskGroup,
    _BranchAndBound,
    custom_assignment,
    gap_bound,
    group_options,
    identity_powers,
    objective_bound,
    optimize_power,
    recovery_threshold,
    search_power,
    search_space,
    single_group_assignment,
    t1_assignment,
    t2_assignment,
    validate,
)
from fcsa.codec import decode, direct_products, encode, make_plan, products_equal, worker_compute
from fcsa.const import SWEEP_RESTARTS, SWEEP_SEARCH_BUDGET, Side, Violation
from fcsa.exceptions import InvalidAssignment, InvalidRho
from fcsa.graph import ComputationGraph, sample_erdos_renyi

from tests.conftest import random_inputs


def _brute_force_objective(graph: ComputationGraph, tasks: TaskAssignment) -> int:
    """Enumerate every orientation bit and permutation pair of every group."""
    per_group = []
    for group in tasks:
        a, b, size = len(group.left), len(group.right), group.size
        choices = []
        for flag in (0, 1):
            for perm_a in itertools.permutations(range(1, a + 1)):
                for perm_b in itertools.permutations(range(1, b + 1)):
                    if flag:
                        choices.append(([size - x + 1 for x in perm_a], [y * a for y in perm_b]))
                    else:
                        choices.append(([y * b for y in perm_a], [size - x + 1 for x in perm_b]))
        per_group.append(choices)
    best = 0
    for combination in itertools.product(*per_group):
        left = [0] * graph.left_count
        right = [0] * graph.right_count
        for group, (values_a, values_b) in zip(tasks, combination):
            for i, v in zip(group.left, values_a):
                left[i - 1] += v
            for j, v in zip(group.right, values_b):
                right[j - 1] += v
        best = max(best, min(left) + min(right))
    return best


def _small_graphs():
    for left_count in (1, 2, 3):
        for right_count in (1, 2, 3):
            cells = list(itertools.product(range(1, left_count + 1), range(1, right_count + 1)))
            for mask in range(1, 2 ** len(cells)):
                edges = frozenset(cell for bit, cell in enumerate(cells) if mask >> bit & 1)
                graph = ComputationGraph(left_count, right_count, edges)
                if not graph.has_isolated():
                    yield graph


def _t2_tasks(graph: ComputationGraph, side: Side) -> TaskAssignment:
    if side is Side.LEFT:
        return TaskAssignment(
            tuple(TaskGroup((i,), graph.neighbors_left(i)) for i in range(1, graph.left_count + 1))
        )
    return TaskAssignment(
        tuple(TaskGroup(graph.neighbors_right(j), (j,)) for j in range(1, graph.right_count + 1))
    )


def test_worked_example_is_valid(worked_graph, worked_tasks, worked_powers):
    assert validate(worked_graph, worked_tasks, worked_powers)


def test_duplicate_power_violates_distinctness(worked_graph, worked_tasks):
    powers = PowerAssignment(((2, 0), (0, 2)), ((2, 2, 0), (0, 1, 2)))
    report = validate(worked_graph, worked_tasks, powers)
    assert not report
    assert report.violation is Violation.POWER_DISTINCT
    assert report.group == 0


def test_overlapping_groups(worked_graph):
    tasks = TaskAssignment.from_sets([((1,), (1, 2)), ((1, 2), (2, 3))])
    powers = PowerAssignment(((2, 0), (1, 1)), ((2, 1, 0), (0, 1, 2)))
    assert validate(worked_graph, tasks, powers).violation is Violation.GROUP_OVERLAP


def test_uncovered_edge(worked_graph):
    tasks = TaskAssignment.from_sets([((1,), (1, 2))])
    powers = PowerAssignment(((2, 0),), ((2, 1, 0),))
    assert validate(worked_graph, tasks, powers).violation is Violation.EDGE_COVERAGE


def test_power_outside_group(worked_graph, worked_tasks):
    powers = PowerAssignment(((2, 1), (0, 2)), ((2, 1, 0), (0, 1, 2)))
    assert validate(worked_graph, worked_tasks, powers).violation is Violation.POWER_SUPPORT


def test_power_of_wrong_form():
    graph = ComputationGraph.from_edges([(1, 1), (1, 2), (2, 1), (2, 2)])
    tasks = TaskAssignment.from_sets([((1, 2), (1, 2))])
    powers = PowerAssignment(((4, 1),), ((2, 4),))
    assert validate(graph, tasks, powers).violation is Violation.POWER_ORIENTATION


def test_pole_orders_form_a_permutation(rng):
    for _ in range(50):
        graph = sample_erdos_renyi(4, 4, 0.5, rng)
        for result in (t1_assignment(graph), t2_assignment(graph)):
            for q, group in enumerate(result.tasks):
                orders = sorted(result.powers.pole_order(q, group, pair) for pair in group.pairs())
                assert orders == list(range(1, group.size + 1))


def test_worked_threshold(worked_graph, worked_tasks, worked_powers):
    report = recovery_threshold(worked_graph, worked_tasks, worked_powers)
    assert report.threshold == 5
    assert (report.left_min, report.right_min) == (2, 2)
    assert report.lower_bound == 4
    assert report.baseline.combined == 6
    assert (report.rational_terms, report.polynomial_terms) == (4, 1)


def test_single_edge_threshold():
    graph = ComputationGraph.from_edges([(1, 1)])
    tasks = TaskAssignment.from_sets([((1,), (1,))])
    report = recovery_threshold(graph, tasks, PowerAssignment(((1,),), ((1,),)))
    assert report.threshold == 1


def test_threshold_rejects_invalid_plan(worked_graph, worked_tasks):
    with pytest.raises(InvalidAssignment):
        recovery_threshold(
            worked_graph, worked_tasks, PowerAssignment(((2, 0), (0, 2)), ((2, 2, 0), (0, 1, 2)))
        )


def test_rho_must_divide_rank():
    with pytest.raises(InvalidRho):
        FccParameters(rho=2, rank=3)
    assert FccParameters(m=2, n=2, rho=2, rank=4).phi == 2


def test_fcc_threshold(worked_graph, worked_tasks, worked_powers):
    fcc = FccParameters(m=2, p=2, n=2, rho=1, rank=7)
    report = recovery_threshold(worked_graph, worked_tasks, worked_powers, fcc)
    assert report.threshold == (7 + 1) * 4 - 2 - 2 + 1
    assert report.lower_bound == 16
    assert report.gap_bound == pytest.approx(1 + 1 / 7)
    assert gap_bound(4, 2) == 1.5


def test_t1_thresholds(worked_graph):
    assert t1_assignment(worked_graph).report.threshold == 6
    assert t1_assignment(ComputationGraph.from_edges([(1, 1)])).report.threshold == 1
    all_degree_one = ComputationGraph.from_edges([(1, 1), (2, 2), (3, 1)])
    assert t1_assignment(all_degree_one).report.threshold == 2 * 3 - 1


def test_t2_reproduces_worked_plan(worked_graph, worked_tasks, worked_powers):
    result = t2_assignment(worked_graph)
    assert result.report.threshold == 5
    assert result.tasks == worked_tasks
    assert result.powers == worked_powers


def test_t2_single_edge():
    assert t2_assignment(ComputationGraph.from_edges([(1, 1)])).report.threshold == 1


def test_t2_beats_baseline_on_nine_edges(prime_field, nine_edge_graph, rng):
    result = t2_assignment(nine_edge_graph)
    assert result.report.threshold == 14
    assert (result.report.left_min, result.report.right_min) == (1, 4)
    assert result.report.baseline.combined == 16
    assert t2_assignment(nine_edge_graph, Side.LEFT) == result
    assert t2_assignment(nine_edge_graph, Side.RIGHT).report.threshold >= 14

    plan = make_plan(nine_edge_graph, result.tasks, result.powers, prime_field=prime_field)
    a_list, b_list = random_inputs(prime_field, nine_edge_graph, (2, 3, 2), rng)
    results = [worker_compute(share) for share in encode(plan, a_list, b_list)]
    decoded = decode(plan, results[-plan.threshold :])
    assert products_equal(direct_products(nine_edge_graph, a_list, b_list), decoded)


def test_t2_side_best_is_minimum(rng):
    for _ in range(20):
        graph = sample_erdos_renyi(4, 3, 0.5, rng)
        best = t2_assignment(graph).report.threshold
        left = t2_assignment(graph, Side.LEFT).report.threshold
        right = t2_assignment(graph, Side.RIGHT).report.threshold
        assert best == min(left, right)


def test_threshold_orderings(rng):
    for _ in range(200):
        graph = sample_erdos_renyi(5, 5, 0.4, rng)
        t1 = t1_assignment(graph)
        t2 = t2_assignment(graph, budget=SWEEP_SEARCH_BUDGET, restarts=SWEEP_RESTARTS)
        assert validate(graph, t2.tasks, t2.powers)
        assert graph.size <= t2.report.threshold <= t1.report.threshold <= 2 * graph.size - 1


def test_optimize_worked_example(worked_graph, worked_tasks):
    powers = optimize_power(worked_graph, worked_tasks)
    assert powers.objective == 4
    assert recovery_threshold(worked_graph, worked_tasks, powers).threshold == 5


def test_optimize_singleton_group():
    graph = ComputationGraph.from_edges([(1, 1)])
    tasks = TaskAssignment.from_sets([((1,), (1,))])
    powers = optimize_power(graph, tasks)
    assert powers == PowerAssignment(((1,),), ((1,),))
    assert powers.objective == 2


@pytest.mark.slow
def test_search_matches_exhaustive_oracle():
    for graph in _small_graphs():
        for side in (Side.LEFT, Side.RIGHT):
            tasks = _t2_tasks(graph, side)
            result = search_power(graph, tasks)
            assert result.exact
            assert result.objective == _brute_force_objective(graph, tasks)
            assert result.objective <= objective_bound(graph, tasks)
            assert validate(graph, tasks, result.powers)


def test_single_group_matches_polynomial_codes():
    for left_count in (1, 2, 3):
        for right_count in (1, 2, 3):
            complete = ComputationGraph.from_edges(
                itertools.product(range(1, left_count + 1), range(1, right_count + 1))
            )
            result = single_group_assignment(complete)
            assert result.report.threshold == left_count * right_count
            group = result.tasks.groups[0]
            oracle = _brute_force_objective(complete, result.tasks)
            assert 2 * group.size - oracle + 1 == left_count * right_count


def test_search_never_below_identity(rng):
    for _ in range(30):
        graph = sample_erdos_renyi(4, 4, 0.6, rng)
        tasks = _t2_tasks(graph, Side.LEFT)
        assert optimize_power(graph, tasks).objective >= identity_powers(graph, tasks).objective


def test_search_is_deterministic(rng):
    graph = sample_erdos_renyi(5, 5, 0.5, rng)
    tasks = _t2_tasks(graph, Side.LEFT)
    assert optimize_power(graph, tasks) == optimize_power(graph, tasks)


def test_local_search_fallback(caplog):
    # the bound 6 is loose here: both orientations reach only 5
    graph = ComputationGraph.from_edges([(1, 1), (1, 2), (2, 1), (2, 2)])
    tasks = TaskAssignment.from_sets([((1, 2), (1, 2))])
    assert objective_bound(graph, tasks) == 6
    with caplog.at_level(logging.WARNING, logger="fcsa.assignment"):
        result = search_power(graph, tasks, budget=1, restarts=5)
    assert not result.exact
    assert "local search" in caplog.text
    assert validate(graph, tasks, result.powers)
    assert result.objective == search_power(graph, tasks).objective == 5


def test_budget_limited_search_on_random_graphs(rng):
    for _ in range(10):
        graph = sample_erdos_renyi(5, 5, 0.6, rng)
        tasks = _t2_tasks(graph, Side.LEFT)
        result = search_power(graph, tasks, budget=1, restarts=5)
        assert validate(graph, tasks, result.powers)
        assert result.objective >= identity_powers(graph, tasks).objective
        optimum = search_power(graph, tasks)
        assert result.objective <= optimum.objective <= objective_bound(graph, tasks)
        if result.exact:
            assert result.objective == optimum.objective


def test_node_limit_keeps_branch_and_bound_incumbent(rng):
    for budget in (200, 1_000):
        for _ in range(10):
            graph = sample_erdos_renyi(4, 4, 0.6, rng)
            tasks = _t2_tasks(graph, Side.LEFT)
            if search_space(tasks) <= budget:
                continue
            limited = _BranchAndBound(graph, tasks, [group_options(g) for g in tasks], -1, budget)
            limited.run()
            result = search_power(graph, tasks, budget=budget, restarts=1)
            assert result.objective >= limited.best_value
            assert validate(graph, tasks, result.powers)


def test_objective_bound_on_fixed_graphs(worked_graph, worked_tasks, nine_edge_graph):
    assert objective_bound(worked_graph, worked_tasks) == 4
    assert objective_bound(nine_edge_graph, _t2_tasks(nine_edge_graph, Side.LEFT)) == 5
    assert objective_bound(nine_edge_graph, _t2_tasks(nine_edge_graph, Side.RIGHT)) == 5


def test_custom_assignment_optimizes_missing_powers(
    worked_graph, worked_tasks, worked_powers
):
    result = custom_assignment(worked_graph, worked_tasks)
    assert result.powers == worked_powers
    assert result.report.threshold == 5


def test_identity_powers_are_valid(rng):
    for _ in range(20):
        graph = sample_erdos_renyi(4, 5, 0.5, rng)
        tasks = TaskAssignment.from_sets(
            [(range(1, graph.left_count + 1), range(1, graph.right_count + 1))]
        )
        assert validate(graph, tasks, identity_powers(graph, tasks))


def test_power_totals(worked_graph, worked_powers):
    assert worked_powers.left_totals == (2, 2)
    assert worked_powers.right_totals == (2, 2, 2)
    assert np.sum(worked_powers.left_powers) == 4
