"""Shared fixtures: the two-by-three worked example and small helpers."""
from __future__ import annotations

import json

import numpy as np
import pytest

from fcsa.assignment import PowerAssignment, TaskAssignment
from fcsa.codec import make_plan
from fcsa.field import PrimeField
from fcsa.graph import ComputationGraph

WORKED_EDGES = ((1, 1), (1, 2), (2, 2), (2, 3))

# rows: {1,2,3}, {2,3,4}, {1,4}, {1}; polynomial baseline 16, batch baseline 17
NINE_EDGES = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 1), (3, 4), (4, 1))


@pytest.fixture
def prime_field() -> PrimeField:
    return PrimeField()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def worked_graph() -> ComputationGraph:
    return ComputationGraph.from_edges(WORKED_EDGES)


@pytest.fixture
def worked_tasks() -> TaskAssignment:
    return TaskAssignment.from_sets([((1,), (1, 2)), ((2,), (2, 3))])


@pytest.fixture
def worked_powers() -> PowerAssignment:
    return PowerAssignment(
        left_powers=((2, 0), (0, 2)),
        right_powers=((2, 1, 0), (0, 1, 2)),
    )


@pytest.fixture
def worked_plan(prime_field, worked_graph, worked_tasks, worked_powers):
    return make_plan(worked_graph, worked_tasks, worked_powers, workers=7, prime_field=prime_field)


@pytest.fixture
def nine_edge_graph() -> ComputationGraph:
    return ComputationGraph.from_edges(NINE_EDGES)


def random_inputs(prime_field, graph, shape, rng):
    """Return random A and B matrices for graph with (alpha, beta, gamma) = shape."""
    alpha, beta, gamma = shape
    a_list = [prime_field.random_matrix(alpha, beta, rng) for _ in range(graph.left_count)]
    b_list = [prime_field.random_matrix(beta, gamma, rng) for _ in range(graph.right_count)]
    return a_list, b_list


@pytest.fixture
def write_instance(tmp_path):
    """Write an instance document and return its path."""

    def _write(edges, left_count, right_count, shape=(1, 1, 1), name="instance.json", **extra):
        document = {
            "field_modulus": 2**31 - 1,
            "alpha": shape[0],
            "beta": shape[1],
            "gamma": shape[2],
            "L_A": left_count,
            "L_B": right_count,
            "edges": [list(edge) for edge in edges],
            **extra,
        }
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path

    return _write
