"""Straggler trials, subset verification and Monte Carlo threshold sweeps."""
from __future__ import annotations

import asyncio
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
import itertools
import logging
import math
from typing import NamedTuple

import galois
import numpy as np
import pandas as pd

from .assignment import t1_assignment, t2_assignment
from .codec import (
    CodingPlan,
    WorkerResult,
    WorkerShare,
    decode,
    direct_products,
    encode,
    make_plan,
    products_equal,
    worker_compute,
)
from .const import (
    CSV_HEADER,
    DEFAULT_SEED,
    SPOT_CHECK_EVERY,
    SPOT_CHECK_SHAPE,
    SUBSET_LIMIT,
    SWEEP_RESTARTS,
    SWEEP_SEARCH_BUDGET,
    Ensemble,
    Scheme,
    StragglerKind,
)
from .exceptions import FcsaError, InvalidParams, SubsetBudgetExceeded
from .field import PrimeField
from .graph import (
    ComputationGraph,
    baseline_thresholds,
    make_rng,
    sample_bounded_degree,
    sample_erdos_renyi,
)
from .model import Edge

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class StragglerModel:
    """Class to describe which workers fail to respond."""

    kind: StragglerKind = StragglerKind.ERASURE
    stragglers: int = 0
    failure_rate: float = 0.0

    def __post_init__(self) -> None:  # noqa: D105
        object.__setattr__(self, "kind", StragglerKind(self.kind))
        if self.stragglers < 0:
            raise InvalidParams("straggler count must be non-negative")
        if not 0 <= self.failure_rate < 1:
            raise InvalidParams(f"failure rate {self.failure_rate} must lie in [0, 1)")

    def survivors(self, workers: int, rng: np.random.Generator) -> tuple[int, ...]:
        """Draw the 1-based indices of the workers that respond."""
        if self.kind is StragglerKind.ERASURE:
            if self.stragglers > workers:
                raise InvalidParams(f"{self.stragglers} stragglers exceed {workers} workers")
            alive = rng.choice(workers, size=workers - self.stragglers, replace=False)
            return tuple(sorted(int(k) + 1 for k in alive))
        mask = rng.random(workers) >= self.failure_rate
        return tuple(int(k) + 1 for k in np.nonzero(mask)[0])

    def success_probability(self, workers: int, threshold: int) -> float:
        """Return P[at least threshold workers respond]."""
        if self.kind is StragglerKind.ERASURE:
            return float(workers - self.stragglers >= threshold)
        keep = 1 - self.failure_rate
        return sum(
            math.comb(workers, s) * keep**s * self.failure_rate ** (workers - s)
            for s in range(threshold, workers + 1)
        )

    def erasure_patterns(self, workers: int) -> Iterator[tuple[int, ...]]:
        """Return every set of failed workers, 1-based, in lexicographic order."""
        if self.kind is not StragglerKind.ERASURE:
            raise InvalidParams("erasure patterns need the erasure straggler model")
        if self.stragglers > workers:
            raise InvalidParams(f"{self.stragglers} stragglers exceed {workers} workers")
        total = math.comb(workers, self.stragglers)
        if total > SUBSET_LIMIT:
            raise SubsetBudgetExceeded(
                f"{total} erasure patterns exceed the limit of {SUBSET_LIMIT}"
            )
        return itertools.combinations(range(1, workers + 1), self.stragglers)


class TrialOutcome(NamedTuple):
    """Result of one straggler trial."""

    success: bool
    decoded: bool
    survivors: tuple[int, ...]


class SubsetReport(NamedTuple):
    """Result of decoding from many R-subsets."""

    passed: bool
    checked: int
    first_failure: tuple[int, ...] | None = None


class ErasureReport(NamedTuple):
    """Result of decoding after every erasure pattern."""

    passed: bool
    checked: int
    worst_erasure: tuple[int, ...] | None = None


class FusionNode:
    """Class to collect worker results until the recovery threshold is reached."""

    def __init__(self, plan: CodingPlan) -> None:  # noqa: D107
        self.plan = plan
        self._results: dict[int, WorkerResult] = {}

    @property
    def ready(self) -> bool:
        return len(self._results) >= self.plan.threshold

    @property
    def results(self) -> list[WorkerResult]:
        return list(self._results.values())

    def add_result(self, result: WorkerResult) -> None:
        """Store a result unless the worker already reported."""
        if result.worker not in self._results:
            _LOGGER.debug("result from worker %s", result.worker)
            self._results[result.worker] = result

    async def async_collect(
        self, shares: Sequence[WorkerShare], survivors: Iterable[int], threads: int = 4
    ) -> bool:
        """Run the surviving workers concurrently and stop once enough results arrived."""
        semaphore = asyncio.Semaphore(max(threads, 1))

        async def _run(share: WorkerShare) -> WorkerResult:
            async with semaphore:
                return await asyncio.to_thread(worker_compute, share)

        tasks = [asyncio.create_task(_run(shares[k - 1])) for k in survivors]
        try:
            for next_done in asyncio.as_completed(tasks):
                self.add_result(await next_done)
                if self.ready:
                    break
        finally:
            for task in tasks:
                task.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)
        return self.ready

    def decode(self) -> dict[Edge, galois.FieldArray]:
        return decode(self.plan, self.results)


def run_trial(
    plan: CodingPlan,
    a_list: Sequence[galois.FieldArray],
    b_list: Sequence[galois.FieldArray],
    model: StragglerModel,
    seed: int | np.random.Generator = DEFAULT_SEED,
    threads: int = 4,
) -> TrialOutcome:
    """Drop stragglers, decode from the rest and compare against direct products."""
    rng = make_rng(seed)
    survivors = model.survivors(plan.workers, rng)
    if len(survivors) < plan.threshold:
        _LOGGER.debug("%s survivors, threshold %s: not decoding", len(survivors), plan.threshold)
        return TrialOutcome(False, False, survivors)
    shares = encode(plan, a_list, b_list)
    node = FusionNode(plan)
    asyncio.run(node.async_collect(shares, survivors, threads))
    success = products_equal(direct_products(plan.graph, a_list, b_list), node.decode())
    return TrialOutcome(success, True, survivors)


def verify_all_subsets(
    plan: CodingPlan,
    a_list: Sequence[galois.FieldArray],
    b_list: Sequence[galois.FieldArray],
    results: Sequence[WorkerResult] | None = None,
    samples: int | None = None,
    seed: int = DEFAULT_SEED,
) -> SubsetReport:
    """Decode from every R-subset of worker results, or from a random sample of them."""
    expected = direct_products(plan.graph, a_list, b_list)
    if results is None:
        results = [worker_compute(share) for share in encode(plan, a_list, b_list)]
    by_worker = {result.worker: result for result in results}
    workers = sorted(by_worker)
    total = math.comb(len(workers), plan.threshold)

    if samples is None:
        if total > SUBSET_LIMIT:
            raise SubsetBudgetExceeded(f"{total} subsets exceed the limit of {SUBSET_LIMIT}")
        subsets: Iterable[tuple[int, ...]] = itertools.combinations(workers, plan.threshold)
    else:
        rng = make_rng(seed)
        subsets = (
            tuple(sorted(int(k) for k in rng.choice(workers, size=plan.threshold, replace=False)))
            for _ in range(samples)
        )

    checked = 0
    for subset in subsets:
        checked += 1
        decoded = decode(plan, [by_worker[k] for k in subset])
        if not products_equal(expected, decoded):
            _LOGGER.debug("decode from workers %s disagrees with direct products", subset)
            return SubsetReport(False, checked, subset)
    return SubsetReport(True, checked)


def verify_erasure_patterns(
    plan: CodingPlan,
    a_list: Sequence[galois.FieldArray],
    b_list: Sequence[galois.FieldArray],
    model: StragglerModel,
    results: Sequence[WorkerResult] | None = None,
) -> ErasureReport:
    """Erase each choice of failed workers in turn and decode from the rest."""
    patterns = model.erasure_patterns(plan.workers)
    expected = direct_products(plan.graph, a_list, b_list)
    if results is None:
        results = [worker_compute(share) for share in encode(plan, a_list, b_list)]
    by_worker = {result.worker: result for result in results}

    checked = 0
    for erased in patterns:
        checked += 1
        alive = [by_worker[k] for k in sorted(by_worker) if k not in erased]
        if len(alive) < plan.threshold:
            _LOGGER.debug("erasing workers %s leaves %s results", erased, len(alive))
            return ErasureReport(False, checked, erased)
        if not products_equal(expected, decode(plan, alive)):
            _LOGGER.debug("decode after erasing workers %s disagrees", erased)
            return ErasureReport(False, checked, erased)
    return ErasureReport(True, checked)


@dataclass(frozen=True)
class EnsembleSpec:
    """Class to name one grid point of a random ensemble."""

    ensemble: Ensemble
    left_count: int
    right_count: int
    param: float

    def __post_init__(self) -> None:  # noqa: D105
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))

    @property
    def expected_size(self) -> float:
        """Return the analytic E[|S|] of the ensemble."""
        if self.ensemble is Ensemble.ERDOS_RENYI:
            return self.left_count * self.right_count * self.param
        return self.left_count * (1 + self.param) / 2

    def sample(self, rng: np.random.Generator) -> ComputationGraph:
        if self.ensemble is Ensemble.ERDOS_RENYI:
            return sample_erdos_renyi(self.left_count, self.right_count, self.param, rng)
        return sample_bounded_degree(self.left_count, self.right_count, int(self.param), rng)


@dataclass(frozen=True)
class SweepRecord:
    """Class to hold one aggregated row of a sweep."""

    ensemble: Ensemble
    left_count: int
    right_count: int
    param: float
    trials: int
    mean_size: float
    mean_t1: float
    mean_t2: float
    baseline: float
    ratio_t1: float
    ratio_t2: float
    baseline_ratio: float
    se_t1: float
    se_t2: float
    spot_check_failures: int = 0

    def as_row(self) -> tuple:
        return (
            str(self.ensemble),
            self.left_count,
            self.right_count,
            self.param,
            self.trials,
            self.mean_size,
            self.mean_t1,
            self.mean_t2,
            self.baseline,
            self.ratio_t1,
            self.ratio_t2,
            self.baseline_ratio,
            self.se_t1,
            self.se_t2,
            self.spot_check_failures,
        )


def _spot_check(graph: ComputationGraph, rng: np.random.Generator) -> bool:
    """Run the full pipeline once on a Type-2 plan with small random inputs."""
    prime_field = PrimeField()
    result = t2_assignment(graph, budget=SWEEP_SEARCH_BUDGET, restarts=SWEEP_RESTARTS)
    plan = make_plan(graph, result.tasks, result.powers, prime_field=prime_field)
    alpha, beta, gamma = SPOT_CHECK_SHAPE
    a_list = [prime_field.random_matrix(alpha, beta, rng) for _ in range(graph.left_count)]
    b_list = [prime_field.random_matrix(beta, gamma, rng) for _ in range(graph.right_count)]
    results = [worker_compute(share) for share in encode(plan, a_list, b_list)]
    return products_equal(direct_products(graph, a_list, b_list), decode(plan, results))


def _trial_thresholds(
    spec: EnsembleSpec,
    schemes: frozenset[Scheme],
    seed: int,
    point: int,
    trial: int,
    with_codec: bool,
) -> tuple[int, float, float, int, bool]:
    rng = make_rng(seed, point, trial)
    graph = spec.sample(rng)
    t1 = float(t1_assignment(graph).report.threshold) if Scheme.T1 in schemes else math.nan
    t2 = math.nan
    if Scheme.T2 in schemes:
        t2 = float(
            t2_assignment(
                graph, budget=SWEEP_SEARCH_BUDGET, restarts=SWEEP_RESTARTS, seed=seed
            ).report.threshold
        )
    checked = True
    if with_codec and trial % SPOT_CHECK_EVERY == 0:
        checked = _spot_check(graph, rng)
        if not checked:
            _LOGGER.error("spot check failed for %s trial %s", spec, trial)
    return graph.size, t1, t2, baseline_thresholds(graph).combined, checked


async def async_sweep(
    specs: Iterable[EnsembleSpec],
    schemes: Iterable[Scheme | str] = (Scheme.T1, Scheme.T2),
    trials: int = 1,
    seed: int = DEFAULT_SEED,
    threads: int = 4,
    with_codec: bool = False,
) -> list[SweepRecord]:
    """Sample every grid point trials times and aggregate the thresholds."""
    if trials < 1:
        raise InvalidParams("a sweep needs at least one trial")
    scheme_set = frozenset(Scheme(s) for s in schemes)
    semaphore = asyncio.Semaphore(max(threads, 1))

    async def _run(spec: EnsembleSpec, point: int, trial: int):
        async with semaphore:
            return await asyncio.to_thread(
                _trial_thresholds, spec, scheme_set, seed, point, trial, with_codec
            )

    records = []
    for point, spec in enumerate(specs):
        _LOGGER.debug("sweep point %s: %s", point, spec)
        rows = await asyncio.gather(*(_run(spec, point, t) for t in range(trials)))
        frame = pd.DataFrame(rows, columns=["size", "t1", "t2", "baseline", "checked"])
        expected = spec.expected_size
        sem = frame[["t1", "t2"]].sem() if trials > 1 else pd.Series({"t1": 0.0, "t2": 0.0})
        records.append(
            SweepRecord(
                ensemble=spec.ensemble,
                left_count=spec.left_count,
                right_count=spec.right_count,
                param=spec.param,
                trials=trials,
                mean_size=float(frame["size"].mean()),
                mean_t1=float(frame["t1"].mean()),
                mean_t2=float(frame["t2"].mean()),
                baseline=float(frame["baseline"].mean()),
                ratio_t1=float(frame["t1"].mean()) / expected,
                ratio_t2=float(frame["t2"].mean()) / expected,
                baseline_ratio=2 - 1 / expected,
                se_t1=float(sem["t1"]) / expected,
                se_t2=float(sem["t2"]) / expected,
                spot_check_failures=int((~frame["checked"]).sum()),
            )
        )
    return records


def sweep(
    specs: Iterable[EnsembleSpec],
    schemes: Iterable[Scheme | str] = (Scheme.T1, Scheme.T2),
    trials: int = 1,
    seed: int = DEFAULT_SEED,
    threads: int = 4,
    with_codec: bool = False,
) -> list[SweepRecord]:
    """Synchronous wrapper around async_sweep."""
    return asyncio.run(async_sweep(specs, schemes, trials, seed, threads, with_codec))


def records_to_frame(records: Iterable[SweepRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.as_row() for record in records], columns=list(CSV_HEADER))


def write_csv(records: Iterable[SweepRecord], path: str) -> None:
    """Write sweep records with the fixed CSV header."""
    try:
        records_to_frame(records).to_csv(path, index=False)
    except OSError as err:
        raise FcsaError(f"cannot write {path}: {err}") from err
