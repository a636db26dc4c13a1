"""Encode, multiply, interpolate and decode with FCSA and FCSA+FCC codes.

Roots are laid out instance by instance: bilinear instance r (0-based) and
group q (0-based) own the root r*|Q| + q + 1. Worker k (1-based) evaluates at
R_bilinear*|Q| + k. Instances h*rho .. (h+1)*rho - 1 share partition h, which
has its own Theta_h and its own block of the concatenated worker inputs.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
import logging
from typing import NamedTuple

import galois
import numpy as np

from .assignment import (
    FccParameters,
    PowerAssignment,
    TaskAssignment,
    ThresholdReport,
    cost_report,
    recovery_threshold,
)
from .exceptions import (
    CoefficientAuditFailed,
    DivisibilityViolation,
    FieldTooSmall,
    InvalidParams,
    ShapeMismatch,
    TooFewResults,
    TooFewWorkers,
)
from .field import (
    PrimeField,
    coefficients_ascending,
    ff_inv,
    mat_mul,
    poly_eval,
    poly_product_expand,
    solve_linear,
)
from .graph import ComputationGraph
from .model import Edge
from .tensor import (
    BilinearTensor,
    assemble_blocks,
    bilinear_parts,
    builtin_tensor,
    recombine,
    split_blocks,
)

_LOGGER = logging.getLogger(__name__)


class MatrixShape(NamedTuple):
    """Input dimensions: A_i is alpha x beta and B_j is beta x gamma."""

    alpha: int
    beta: int
    gamma: int


@dataclass(frozen=True)
class CodingPlan:
    """Class to hold everything the encoder and decoder agree on."""

    prime_field: PrimeField
    graph: ComputationGraph
    tasks: TaskAssignment
    powers: PowerAssignment
    tensor: BilinearTensor
    rho: int
    workers: int
    report: ThresholdReport
    roots: tuple[int, ...]
    eval_points: tuple[int, ...]
    shape: MatrixShape | None = field(default=None)

    @property
    def threshold(self) -> int:
        return self.report.threshold

    @property
    def fcc(self) -> FccParameters:
        return self.report.fcc

    @property
    def partitions(self) -> int:
        return self.tensor.rank // self.rho

    def root(self, instance: int, q: int) -> int:
        """Return the root owned by bilinear instance and group (both 0-based)."""
        return self.roots[instance * len(self.tasks) + q]

    def instances(self, partition: int) -> range:
        return range(partition * self.rho, (partition + 1) * self.rho)

    @cached_property
    def owner(self) -> dict[Edge, int]:
        """Map every pair of every group's product set to its group index."""
        return {pair: q for q, group in enumerate(self.tasks) for pair in group.pairs()}


class WorkerShare(NamedTuple):
    """Encoded inputs of one worker."""

    worker: int
    a: galois.FieldArray
    b: galois.FieldArray


class WorkerResult(NamedTuple):
    """Product returned by one worker."""

    worker: int
    c: galois.FieldArray


class RationalCoefficients(NamedTuple):
    """Partial-fraction coefficients recovered by interpolation.

    poles[(instance, q)][s - 1] is the coefficient of 1/(z - f)^s at that root.
    """

    workers: tuple[int, ...]
    poles: dict[tuple[int, int], list[galois.FieldArray]]
    polynomial: list[galois.FieldArray]


def make_plan(
    graph: ComputationGraph,
    tasks: TaskAssignment,
    powers: PowerAssignment,
    workers: int | None = None,
    tensor: BilinearTensor | None = None,
    rho: int = 1,
    prime_field: PrimeField | None = None,
    shape: MatrixShape | None = None,
) -> CodingPlan:
    """Fix roots and evaluation points and compute the recovery threshold."""
    prime_field = prime_field or PrimeField()
    tensor = tensor or builtin_tensor(prime_field=prime_field)
    fcc = FccParameters(tensor.m, tensor.p, tensor.n, rho, tensor.rank)
    report = recovery_threshold(graph, tasks, powers, fcc)
    workers = report.threshold if workers is None else workers
    _LOGGER.debug("make_plan called for %s groups, %s workers", len(tasks), workers)

    if workers < report.threshold:
        raise TooFewWorkers(f"{workers} workers cannot reach threshold {report.threshold}")
    root_count = tensor.rank * len(tasks)
    if prime_field.modulus <= root_count + workers:
        raise FieldTooSmall(
            f"field of order {prime_field.modulus} needs more than {root_count + workers} elements"
        )
    if shape is not None:
        _check_divisible(shape, tensor)
        report = replace(
            report, costs=cost_report(graph, tasks, report.threshold, fcc, *shape, workers)
        )
    return CodingPlan(
        prime_field=prime_field,
        graph=graph,
        tasks=tasks,
        powers=powers,
        tensor=tensor,
        rho=rho,
        workers=workers,
        report=report,
        roots=tuple(range(1, root_count + 1)),
        eval_points=tuple(root_count + k for k in range(1, workers + 1)),
        shape=shape,
    )


def _check_divisible(shape: MatrixShape, tensor: BilinearTensor) -> None:
    for name, size, parts in (
        ("alpha", shape.alpha, tensor.m),
        ("beta", shape.beta, tensor.p),
        ("gamma", shape.gamma, tensor.n),
    ):
        if size % parts:
            raise DivisibilityViolation(f"{name}={size} is not divisible by {parts}")


def theta_polynomial(plan: CodingPlan, partition: int = 0) -> galois.Poly:
    """Return Theta_h = prod over the partition's roots of (z - f)^(L^q_A L^q_B)."""
    return poly_product_expand(
        plan.prime_field,
        [
            (plan.root(r, q), group.size)
            for r in plan.instances(partition)
            for q, group in enumerate(plan.tasks)
        ],
    )


def _side_polynomial(
    plan: CodingPlan, instance: int, powers: Sequence[Sequence[int]], index: int
) -> galois.Poly:
    return poly_product_expand(
        plan.prime_field,
        [(plan.root(instance, q), powers[q][index - 1]) for q in range(len(plan.tasks))],
    )


def _input_shape(
    plan: CodingPlan, a_list: Sequence[galois.FieldArray], b_list: Sequence[galois.FieldArray]
) -> MatrixShape:
    graph = plan.graph
    if len(a_list) != graph.left_count or len(b_list) != graph.right_count:
        raise ShapeMismatch(
            f"expected {graph.left_count} A and {graph.right_count} B matrices, "
            f"got {len(a_list)} and {len(b_list)}"
        )
    alpha, beta = a_list[0].shape
    gamma = b_list[0].shape[1]
    shape = MatrixShape(alpha, beta, gamma)
    if any(m.shape != (alpha, beta) for m in a_list) or any(
        m.shape != (beta, gamma) for m in b_list
    ):
        raise ShapeMismatch("all A_i must be alpha x beta and all B_j beta x gamma")
    if plan.shape is not None and plan.shape != shape:
        raise ShapeMismatch(f"inputs are {shape}, plan expects {plan.shape}")
    gf = plan.prime_field.gf
    if any(type(m) is not gf for m in (*a_list, *b_list)):
        raise ShapeMismatch("inputs must live in the plan's field")
    _check_divisible(shape, plan.tensor)
    return shape


def encode(
    plan: CodingPlan, a_list: Sequence[galois.FieldArray], b_list: Sequence[galois.FieldArray]
) -> list[WorkerShare]:
    """Return the encoded inputs of every worker."""
    shape = _input_shape(plan, a_list, b_list)
    graph, tensor, prime_field = plan.graph, plan.tensor, plan.prime_field
    if shape.beta < max(graph.left_count * shape.alpha, graph.right_count * shape.gamma):
        _LOGGER.warning(
            "beta=%s is below max(L_A*alpha, L_B*gamma); the lower bound may not be tight",
            shape.beta,
        )
    _LOGGER.debug("encode called for %s workers, shape %s", plan.workers, shape)

    a_parts = [
        bilinear_parts(prime_field, tensor.a, split_blocks(a, tensor.m, tensor.p)) for a in a_list
    ]
    b_parts = [
        bilinear_parts(prime_field, tensor.b, split_blocks(b, tensor.p, tensor.n)) for b in b_list
    ]
    thetas = [theta_polynomial(plan, h) for h in range(plan.partitions)]
    a_polys = {
        (r, i): _side_polynomial(plan, r, plan.powers.left_powers, i)
        for r in range(tensor.rank)
        for i in range(1, graph.left_count + 1)
    }
    b_polys = {
        (r, j): _side_polynomial(plan, r, plan.powers.right_powers, j)
        for r in range(tensor.rank)
        for j in range(1, graph.right_count + 1)
    }

    rows, inner, cols = shape.alpha // tensor.m, shape.beta // tensor.p, shape.gamma // tensor.n
    gf = prime_field.gf
    shares = []
    for worker, point in enumerate(plan.eval_points, start=1):
        share_a = gf.Zeros((rows, inner * plan.partitions))
        share_b = gf.Zeros((inner * plan.partitions, cols))
        for h, theta in enumerate(thetas):
            theta_at = poly_eval(theta, point)
            block_a = gf.Zeros((rows, inner))
            block_b = gf.Zeros((inner, cols))
            for r in plan.instances(h):
                for i in range(1, graph.left_count + 1):
                    weight = theta_at * ff_inv(prime_field, poly_eval(a_polys[(r, i)], point))
                    block_a = block_a + weight * a_parts[i - 1][r]
                for j in range(1, graph.right_count + 1):
                    weight = ff_inv(prime_field, poly_eval(b_polys[(r, j)], point))
                    block_b = block_b + weight * b_parts[j - 1][r]
            share_a[:, h * inner : (h + 1) * inner] = block_a
            share_b[h * inner : (h + 1) * inner, :] = block_b
        shares.append(WorkerShare(worker, share_a, share_b))
    return shares


def worker_compute(share: WorkerShare) -> WorkerResult:
    """Multiply the two encoded inputs."""
    return WorkerResult(share.worker, mat_mul(share.a, share.b))


def _select_results(plan: CodingPlan, results: Sequence[WorkerResult]) -> list[WorkerResult]:
    unique: dict[int, WorkerResult] = {}
    for result in results:
        if not 1 <= result.worker <= plan.workers:
            raise InvalidParams(f"worker index {result.worker} outside 1..{plan.workers}")
        unique.setdefault(result.worker, result)
    if len(unique) < plan.threshold:
        raise TooFewResults(f"{len(unique)} distinct results, threshold is {plan.threshold}")
    return [unique[k] for k in sorted(unique)][: plan.threshold]


def interpolate_rational(plan: CodingPlan, results: Sequence[WorkerResult]) -> RationalCoefficients:
    """Recover every partial-fraction coefficient of the workers' common rational function."""
    chosen = _select_results(plan, results)
    gf = plan.prime_field.gf
    threshold = plan.threshold
    points = gf([plan.eval_points[r.worker - 1] for r in chosen])

    columns: list[galois.FieldArray] = []
    blocks: list[tuple[int, int, int]] = []
    for r in range(plan.tensor.rank):
        for q, group in enumerate(plan.tasks):
            reciprocal = np.reciprocal(points - gf(plan.root(r, q)))
            power = gf.Ones(threshold)
            for _ in range(group.size):
                power = power * reciprocal
                columns.append(power)
            blocks.append((r, q, group.size))
    rational = len(columns)
    polynomial = threshold - rational
    report = plan.report
    if (
        rational != report.rational_terms
        or polynomial != report.polynomial_terms
        or polynomial < 0
    ):
        raise CoefficientAuditFailed(
            f"coefficient audit failed: {rational} rational + {polynomial} polynomial"
            f" != {threshold}"
        )
    power = gf.Ones(threshold)
    for _ in range(polynomial):
        columns.append(power)
        power = power * points

    system = gf.Zeros((threshold, threshold))
    for index, column in enumerate(columns):
        system[:, index] = column
    out_shape = chosen[0].c.shape
    rhs = gf.Zeros((threshold, out_shape[0] * out_shape[1]))
    for index, result in enumerate(chosen):
        if result.c.shape != out_shape:
            raise ShapeMismatch("worker results differ in shape")
        rhs[index, :] = result.c.reshape(-1)

    solution = solve_linear(system, rhs)
    _LOGGER.debug("interpolated %s rational and %s polynomial terms", rational, polynomial)

    poles: dict[tuple[int, int], list[galois.FieldArray]] = {}
    offset = 0
    for r, q, size in blocks:
        poles[(r, q)] = [solution[offset + s].reshape(out_shape) for s in range(size)]
        offset += size
    tail = [solution[offset + t].reshape(out_shape) for t in range(polynomial)]
    return RationalCoefficients(tuple(r.worker for r in chosen), poles, tail)


def delta_coefficients(plan: CodingPlan, q: int, pair: Edge, instance: int = 0) -> list[int]:
    """Return the coefficients, constant term first, of the cofactor of pair at its pole.

    q is the 0-based group index and instance the 0-based bilinear instance.
    """
    if plan.owner.get(pair) != q:
        raise InvalidParams(f"pair {pair} is not in group {q}")
    i, j = pair
    root = plan.root(instance, q)
    partition = instance // plan.rho
    left_powers, right_powers = plan.powers.left_powers, plan.powers.right_powers
    factors = []
    for other in plan.instances(partition):
        for other_q, group in enumerate(plan.tasks):
            if (other, other_q) == (instance, q):
                continue
            exponent = group.size
            if other == instance:
                exponent -= left_powers[other_q][i - 1] + right_powers[other_q][j - 1]
            factors.append((plan.root(other, other_q) - root, exponent))
    return coefficients_ascending(poly_product_expand(plan.prime_field, factors))


def decode(plan: CodingPlan, results: Sequence[WorkerResult]) -> dict[Edge, galois.FieldArray]:
    """Return A_i B_j for every (i, j) in the computation list."""
    coefficients = interpolate_rational(plan, results)
    prime_field = plan.prime_field
    gf = prime_field.gf
    products: list[dict[Edge, galois.FieldArray]] = []
    for r in range(plan.tensor.rank):
        instance_products: dict[Edge, galois.FieldArray] = {}
        for q, group in enumerate(plan.tasks):
            by_order = {plan.powers.pole_order(q, group, pair): pair for pair in group.pairs()}
            zetas = {pair: gf(delta_coefficients(plan, q, pair, r)) for pair in group.pairs()}
            poles = coefficients.poles[(r, q)]
            for order in range(group.size, 0, -1):
                pair = by_order[order]
                acc = poles[order - 1]
                for higher in range(order + 1, group.size + 1):
                    known = by_order[higher]
                    zeta = zetas[known]
                    if higher - order < len(zeta):
                        acc = acc - zeta[higher - order] * instance_products[known]
                instance_products[pair] = acc * ff_inv(prime_field, zetas[pair][0])
        products.append(instance_products)

    decoded = {}
    for edge in plan.graph.sorted_edges:
        parts = [products[r][edge] for r in range(plan.tensor.rank)]
        blocks = recombine(prime_field, plan.tensor.c, parts)
        decoded[edge] = assemble_blocks(blocks)
    _LOGGER.debug("decoded %s products from workers %s", len(decoded), coefficients.workers)
    return decoded


def direct_products(
    graph: ComputationGraph,
    a_list: Sequence[galois.FieldArray],
    b_list: Sequence[galois.FieldArray],
) -> dict[Edge, galois.FieldArray]:
    """Return the uncoded products A_i B_j for every edge."""
    return {(i, j): mat_mul(a_list[i - 1], b_list[j - 1]) for i, j in graph.sorted_edges}


def products_equal(
    expected: Mapping[Edge, galois.FieldArray], actual: Mapping[Edge, galois.FieldArray]
) -> bool:
    return expected.keys() == actual.keys() and all(
        np.array_equal(expected[edge], actual[edge]) for edge in expected
    )
