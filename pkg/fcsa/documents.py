"""JSON documents for instances, plans, worker shares and worker results."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Any

import galois
import voluptuous as vol

from .assignment import PowerAssignment, TaskAssignment, TaskGroup
from .codec import CodingPlan, MatrixShape, WorkerResult, WorkerShare, make_plan
from .const import (
    CONF_ALPHA,
    CONF_BETA,
    CONF_EDGES,
    CONF_EVAL_POINTS,
    CONF_FIELD_MODULUS,
    CONF_GAMMA,
    CONF_GROUP_LEFT,
    CONF_GROUP_RIGHT,
    CONF_GROUPS,
    CONF_LEFT_COUNT,
    CONF_M,
    CONF_MATRICES_A,
    CONF_MATRICES_B,
    CONF_N,
    CONF_P,
    CONF_POWERS_A,
    CONF_POWERS_B,
    CONF_RESULT_C,
    CONF_RHO,
    CONF_RIGHT_COUNT,
    CONF_ROOTS,
    CONF_SHARE_A,
    CONF_SHARE_B,
    CONF_TENSOR,
    CONF_THRESHOLD,
    CONF_WORKER,
    DEFAULT_MODULUS,
    MAX_MODULUS,
    TensorKind,
)
from .exceptions import FcsaError, InvalidDocument
from .field import PrimeField, to_int_rows
from .graph import ComputationGraph, prune_isolated
from .model import InstanceDocument, PlanDocument, ResultDocument, ShareDocument
from .tensor import builtin_tensor

_LOGGER = logging.getLogger(__name__)

POSITIVE = vol.All(int, vol.Range(min=1))
NON_NEGATIVE = vol.All(int, vol.Range(min=0))
INT_MATRIX = [[int]]

INSTANCE_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_FIELD_MODULUS, default=DEFAULT_MODULUS): vol.All(
            int, vol.Range(min=2, max=MAX_MODULUS)
        ),
        vol.Required(CONF_ALPHA): POSITIVE,
        vol.Required(CONF_BETA): POSITIVE,
        vol.Required(CONF_GAMMA): POSITIVE,
        vol.Required(CONF_LEFT_COUNT): POSITIVE,
        vol.Required(CONF_RIGHT_COUNT): POSITIVE,
        vol.Required(CONF_EDGES): vol.All(
            [vol.ExactSequence([POSITIVE, POSITIVE])], vol.Length(min=1)
        ),
        vol.Optional(CONF_MATRICES_A): [INT_MATRIX],
        vol.Optional(CONF_MATRICES_B): [INT_MATRIX],
    }
)

PLAN_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_GROUPS): vol.All(
            [
                {
                    vol.Required(CONF_GROUP_LEFT): [POSITIVE],
                    vol.Required(CONF_GROUP_RIGHT): [POSITIVE],
                }
            ],
            vol.Length(min=1),
        ),
        vol.Optional(CONF_POWERS_A): [[NON_NEGATIVE]],
        vol.Optional(CONF_POWERS_B): [[NON_NEGATIVE]],
        vol.Optional(CONF_ROOTS): [int],
        vol.Optional(CONF_EVAL_POINTS): [int],
        vol.Optional(CONF_M, default=1): POSITIVE,
        vol.Optional(CONF_P, default=1): POSITIVE,
        vol.Optional(CONF_N, default=1): POSITIVE,
        vol.Optional(CONF_RHO, default=1): POSITIVE,
        vol.Optional(CONF_TENSOR, default=TensorKind.NAIVE.value): vol.In(
            [k.value for k in TensorKind]
        ),
        vol.Optional(CONF_THRESHOLD): POSITIVE,
    }
)

RESULT_SCHEMA = vol.Schema(
    {vol.Required(CONF_WORKER): POSITIVE, vol.Required(CONF_RESULT_C): INT_MATRIX}
)


@dataclass(frozen=True)
class Instance:
    """Class to represent a loaded instance: the graph plus optional inputs."""

    prime_field: PrimeField
    graph: ComputationGraph
    shape: MatrixShape
    matrices_a: tuple[galois.FieldArray, ...] | None = None
    matrices_b: tuple[galois.FieldArray, ...] | None = None


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as err:
        raise InvalidDocument(f"{path} is not valid JSON: {err}") from err


def write_json(path: str | Path, document: Any) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _validated(schema: vol.Schema, document: Any, what: str) -> dict:
    try:
        return schema(document)
    except vol.Invalid as err:
        raise InvalidDocument(f"invalid {what} document: {err}") from err


def instance_from_document(document: Any) -> Instance:
    """Validate and load an instance document, pruning isolated vertices."""
    data = _validated(INSTANCE_SCHEMA, document, "instance")
    try:
        prime_field = PrimeField(data[CONF_FIELD_MODULUS])
        graph = ComputationGraph(
            left_count=data[CONF_LEFT_COUNT],
            right_count=data[CONF_RIGHT_COUNT],
            edges=frozenset(tuple(edge) for edge in data[CONF_EDGES]),
        )
    except FcsaError as err:
        raise InvalidDocument(str(err)) from err
    if len(graph.edges) != len(data[CONF_EDGES]):
        raise InvalidDocument("instance lists duplicate edges")
    if graph.has_isolated():
        _LOGGER.warning("instance has isolated vertices, pruning them")
        graph = prune_isolated(graph)
    shape = MatrixShape(data[CONF_ALPHA], data[CONF_BETA], data[CONF_GAMMA])

    matrices_a = matrices_b = None
    if CONF_MATRICES_A in data or CONF_MATRICES_B in data:
        if CONF_MATRICES_A not in data or CONF_MATRICES_B not in data:
            raise InvalidDocument("matrices_A and matrices_B must be given together")
        raw_a, raw_b = data[CONF_MATRICES_A], data[CONF_MATRICES_B]
        if len(raw_a) != data[CONF_LEFT_COUNT] or len(raw_b) != data[CONF_RIGHT_COUNT]:
            raise InvalidDocument("matrix counts must equal L_A and L_B")
        try:
            matrices_a = tuple(prime_field.matrix(raw_a[i - 1]) for i in graph.origin_left)
            matrices_b = tuple(prime_field.matrix(raw_b[j - 1]) for j in graph.origin_right)
        except (FcsaError, ValueError) as err:
            raise InvalidDocument(f"malformed matrix: {err}") from err
        if any(m.shape != (shape.alpha, shape.beta) for m in matrices_a) or any(
            m.shape != (shape.beta, shape.gamma) for m in matrices_b
        ):
            raise InvalidDocument(f"matrix shapes do not match {shape}")
    return Instance(prime_field, graph, shape, matrices_a, matrices_b)


def instance_to_document(instance: Instance) -> InstanceDocument:
    document: InstanceDocument = {
        CONF_FIELD_MODULUS: instance.prime_field.modulus,
        CONF_ALPHA: instance.shape.alpha,
        CONF_BETA: instance.shape.beta,
        CONF_GAMMA: instance.shape.gamma,
        CONF_LEFT_COUNT: instance.graph.left_count,
        CONF_RIGHT_COUNT: instance.graph.right_count,
        CONF_EDGES: [list(edge) for edge in instance.graph.sorted_edges],
    }
    if instance.matrices_a is not None and instance.matrices_b is not None:
        document[CONF_MATRICES_A] = [to_int_rows(m) for m in instance.matrices_a]
        document[CONF_MATRICES_B] = [to_int_rows(m) for m in instance.matrices_b]
    return document


def load_instance(path: str | Path) -> Instance:
    return instance_from_document(read_json(path))


def dump_instance(instance: Instance, path: str | Path) -> None:
    write_json(path, instance_to_document(instance))


def plan_to_document(plan: CodingPlan) -> PlanDocument:
    """Return the JSON form of a plan."""
    return {
        CONF_GROUPS: [
            {CONF_GROUP_LEFT: list(group.left), CONF_GROUP_RIGHT: list(group.right)}
            for group in plan.tasks
        ],
        CONF_POWERS_A: [list(row) for row in plan.powers.left_powers],
        CONF_POWERS_B: [list(row) for row in plan.powers.right_powers],
        CONF_ROOTS: list(plan.roots),
        CONF_EVAL_POINTS: list(plan.eval_points),
        CONF_M: plan.tensor.m,
        CONF_P: plan.tensor.p,
        CONF_N: plan.tensor.n,
        CONF_RHO: plan.rho,
        CONF_TENSOR: str(plan.tensor.kind),
        CONF_THRESHOLD: plan.threshold,
    }


def tasks_from_document(document: Any) -> tuple[TaskAssignment, PowerAssignment | None]:
    """Read the groups and, when present, the powers of a plan document."""
    data = _validated(PLAN_SCHEMA, document, "plan")
    groups = [
        TaskGroup(tuple(g[CONF_GROUP_LEFT]), tuple(g[CONF_GROUP_RIGHT])) for g in data[CONF_GROUPS]
    ]
    if [(g.left, g.right) for g in groups] != sorted((g.left, g.right) for g in groups):
        raise InvalidDocument("plan groups must be in canonical order")
    tasks = TaskAssignment(tuple(groups))
    if (CONF_POWERS_A in data) != (CONF_POWERS_B in data):
        raise InvalidDocument("P_A and P_B must be given together")
    powers = None
    if CONF_POWERS_A in data:
        powers = PowerAssignment(
            tuple(tuple(row) for row in data[CONF_POWERS_A]),
            tuple(tuple(row) for row in data[CONF_POWERS_B]),
        )
    return tasks, powers


def plan_from_document(document: Any, instance: Instance, workers: int | None = None) -> CodingPlan:
    """Rebuild a plan against an instance and check its recorded layout."""
    data = _validated(PLAN_SCHEMA, document, "plan")
    tasks, powers = tasks_from_document(document)
    if powers is None:
        raise InvalidDocument("a plan document used for coding must carry P_A and P_B")
    recorded_points = data.get(CONF_EVAL_POINTS)
    if workers is None and recorded_points is not None:
        workers = len(recorded_points)
    tensor = builtin_tensor(
        data[CONF_TENSOR],
        data[CONF_M],
        data[CONF_P],
        data[CONF_N],
        prime_field=instance.prime_field,
    )
    plan = make_plan(
        instance.graph,
        tasks,
        powers,
        workers=workers,
        tensor=tensor,
        rho=data[CONF_RHO],
        prime_field=instance.prime_field,
        shape=instance.shape,
    )
    if CONF_THRESHOLD in data and data[CONF_THRESHOLD] != plan.threshold:
        raise InvalidDocument(f"plan records R={data[CONF_THRESHOLD]}, recomputed {plan.threshold}")
    if CONF_ROOTS in data and tuple(data[CONF_ROOTS]) != plan.roots:
        raise InvalidDocument("plan roots differ from the deterministic layout")
    if (
        recorded_points is not None
        and len(recorded_points) == plan.workers
        and tuple(recorded_points) != plan.eval_points
    ):
        raise InvalidDocument("plan evaluation points differ from the deterministic layout")
    return plan


def load_plan(path: str | Path, instance: Instance, workers: int | None = None) -> CodingPlan:
    return plan_from_document(read_json(path), instance, workers)


def dump_plan(plan: CodingPlan, path: str | Path) -> None:
    write_json(path, plan_to_document(plan))


def dump_shares(shares: Sequence[WorkerShare], path: str | Path) -> None:
    """Write worker shares as worker index plus row-major integer arrays."""
    documents: list[ShareDocument] = [
        {CONF_WORKER: s.worker, CONF_SHARE_A: to_int_rows(s.a), CONF_SHARE_B: to_int_rows(s.b)}
        for s in shares
    ]
    write_json(path, documents)


def results_to_documents(results: Sequence[WorkerResult]) -> list[ResultDocument]:
    return [{CONF_WORKER: r.worker, CONF_RESULT_C: to_int_rows(r.c)} for r in results]


def dump_results(results: Sequence[WorkerResult], path: str | Path) -> None:
    write_json(path, results_to_documents(results))


def load_results(path: str | Path, prime_field: PrimeField) -> list[WorkerResult]:
    """Read worker results written by dump_results."""
    documents = read_json(path)
    if not isinstance(documents, list):
        raise InvalidDocument("a results document is a list of worker results")
    results = []
    for document in documents:
        data = _validated(RESULT_SCHEMA, document, "result")
        try:
            results.append(WorkerResult(data[CONF_WORKER], prime_field.matrix(data[CONF_RESULT_C])))
        except (FcsaError, ValueError) as err:
            raise InvalidDocument(f"malformed result matrix: {err}") from err
    return results
