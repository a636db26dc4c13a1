"""Tests for straggler trials, subset verification and sweeps."""
from __future__ import annotations

import asyncio
import math
import time

import numpy as np
import pytest

from fcsa.codec import WorkerResult, decode, encode, make_plan, worker_compute
from fcsa.const import CSV_HEADER, Ensemble, Scheme, StragglerKind
from fcsa.exceptions import InvalidParams, SubsetBudgetExceeded
from fcsa.simulator import (
    EnsembleSpec,
    FusionNode,
    StragglerModel,
    records_to_frame,
    run_trial,
    sweep,
    verify_all_subsets,
    verify_erasure_patterns,
    write_csv,
)

from tests.conftest import random_inputs


@pytest.fixture
def worked_inputs(prime_field, worked_graph, rng):
    return random_inputs(prime_field, worked_graph, (2, 4, 2), rng)


def test_all_subsets_decode(worked_plan, worked_inputs):
    report = verify_all_subsets(worked_plan, *worked_inputs)
    assert report.passed
    assert report.checked == math.comb(7, 5) == 21


def test_subsets_decode_identically(worked_plan, worked_inputs):
    results = [worker_compute(s) for s in encode(worked_plan, *worked_inputs)]
    first = decode(worked_plan, results[:5])
    last = decode(worked_plan, results[2:])
    for edge in first:
        assert np.array_equal(first[edge], last[edge])


def test_single_subset_when_k_equals_r(
    prime_field, worked_graph, worked_tasks, worked_powers, worked_inputs
):
    plan = make_plan(worked_graph, worked_tasks, worked_powers, prime_field=prime_field)
    report = verify_all_subsets(plan, *worked_inputs)
    assert report.passed and report.checked == 1


def test_corrupted_result_is_caught(prime_field, worked_plan, worked_inputs):
    results = [worker_compute(s) for s in encode(worked_plan, *worked_inputs)]
    bad = results[3]
    results[3] = WorkerResult(bad.worker, bad.c + prime_field.gf.Ones(bad.c.shape))
    report = verify_all_subsets(worked_plan, *worked_inputs, results=results)
    assert not report.passed
    assert 4 in report.first_failure


def test_sampled_subsets(worked_plan, worked_inputs):
    report = verify_all_subsets(worked_plan, *worked_inputs, samples=5, seed=3)
    assert report.passed and report.checked == 5


def test_subset_budget(prime_field, worked_graph, worked_tasks, worked_powers, worked_inputs):
    plan = make_plan(worked_graph, worked_tasks, worked_powers, workers=60, prime_field=prime_field)
    fake = [WorkerResult(k, prime_field.zeros(2, 2)) for k in range(1, 61)]
    with pytest.raises(SubsetBudgetExceeded):
        verify_all_subsets(plan, *worked_inputs, results=fake)


def test_erasures_up_to_slack(worked_plan, worked_inputs):
    model = StragglerModel(StragglerKind.ERASURE, stragglers=2)
    for seed in range(5):
        outcome = run_trial(worked_plan, *worked_inputs, model, seed)
        assert outcome.success and outcome.decoded
        assert len(outcome.survivors) == 5


def test_too_many_erasures(worked_plan, worked_inputs):
    model = StragglerModel(StragglerKind.ERASURE, stragglers=3)
    outcome = run_trial(worked_plan, *worked_inputs, model, 0)
    assert not outcome.success
    assert not outcome.decoded


def test_iid_survivors_follow_binomial_tail():
    model = StragglerModel(StragglerKind.IID, failure_rate=0.1)
    rng = np.random.default_rng(11)
    trials = 10_000
    hits = sum(len(model.survivors(7, rng)) >= 5 for _ in range(trials))
    expected = model.success_probability(7, 5)
    sigma = math.sqrt(expected * (1 - expected) / trials)
    assert abs(hits / trials - expected) < 3 * sigma


def test_iid_trials_decode_when_enough_survive(worked_plan, worked_inputs):
    model = StragglerModel(StragglerKind.IID, failure_rate=0.3)
    for seed in range(10):
        outcome = run_trial(worked_plan, *worked_inputs, model, seed)
        assert outcome.success == (len(outcome.survivors) >= worked_plan.threshold)


def test_model_validation():
    with pytest.raises(InvalidParams):
        StragglerModel(StragglerKind.IID, failure_rate=1.0)
    with pytest.raises(InvalidParams):
        StragglerModel(StragglerKind.ERASURE, stragglers=-1)
    assert StragglerModel(StragglerKind.ERASURE, stragglers=2).success_probability(7, 5) == 1.0


def test_every_erasure_pattern_decodes(worked_plan, worked_inputs):
    model = StragglerModel(StragglerKind.ERASURE, stragglers=2)
    report = verify_erasure_patterns(worked_plan, *worked_inputs, model)
    assert report.passed
    assert report.checked == math.comb(7, 2)
    assert report.worst_erasure is None


def test_erasure_patterns_find_the_breaking_one(prime_field, worked_plan, worked_inputs):
    results = [worker_compute(s) for s in encode(worked_plan, *worked_inputs)]
    bad = results[0]
    results[0] = WorkerResult(bad.worker, bad.c + prime_field.gf.Ones(bad.c.shape))
    model = StragglerModel(StragglerKind.ERASURE, stragglers=2)
    report = verify_erasure_patterns(worked_plan, *worked_inputs, model, results=results)
    # the six patterns erasing worker 1 hide the corruption
    assert not report.passed
    assert report.checked == 7
    assert report.worst_erasure == (2, 3)


def test_erasure_patterns_beyond_slack(worked_plan, worked_inputs):
    model = StragglerModel(StragglerKind.ERASURE, stragglers=3)
    report = verify_erasure_patterns(worked_plan, *worked_inputs, model)
    assert not report.passed
    assert report.worst_erasure == (1, 2, 3)


def test_erasure_pattern_limits():
    patterns = StragglerModel(StragglerKind.ERASURE, stragglers=1).erasure_patterns(3)
    assert list(patterns) == [(1,), (2,), (3,)]
    with pytest.raises(InvalidParams):
        StragglerModel(StragglerKind.IID, failure_rate=0.1).erasure_patterns(7)
    with pytest.raises(InvalidParams):
        StragglerModel(StragglerKind.ERASURE, stragglers=8).erasure_patterns(7)
    with pytest.raises(SubsetBudgetExceeded):
        StragglerModel(StragglerKind.ERASURE, stragglers=30).erasure_patterns(60)


def test_fusion_node_stops_at_threshold(worked_plan, worked_inputs):
    shares = encode(worked_plan, *worked_inputs)
    node = FusionNode(worked_plan)
    assert asyncio.run(node.async_collect(shares, range(1, 8), threads=2))
    assert len(node.results) >= worked_plan.threshold
    decoded = node.decode()
    assert sorted(decoded) == sorted(worked_plan.graph.edges)


def test_degree_one_ratio():
    single = sweep([EnsembleSpec(Ensemble.BOUNDED_DEGREE, 1, 5, 1)], [Scheme.T1], trials=20)[0]
    assert single.ratio_t1 == 1.0
    records = sweep([EnsembleSpec(Ensemble.BOUNDED_DEGREE, 5, 5, 1)], [Scheme.T1], trials=50)
    assert records[0].mean_size == 5
    assert records[0].ratio_t1 <= (2 * 5 - 1) / 5


def test_baseline_ratio_is_analytic():
    record = sweep([EnsembleSpec(Ensemble.ERDOS_RENYI, 5, 5, 0.4)], trials=3, seed=2)[0]
    assert record.baseline_ratio == 2 - 1 / (5 * 5 * 0.4)


@pytest.mark.slow
def test_sweep_orderings():
    record = sweep([EnsembleSpec(Ensemble.ERDOS_RENYI, 5, 5, 0.4)], trials=200, seed=4)[0]
    assert 1 <= record.ratio_t2 <= record.ratio_t1
    assert record.ratio_t1 <= record.baseline_ratio + 3 * record.se_t1


@pytest.mark.slow
def test_sweep_is_deterministic():
    specs = [
        EnsembleSpec(Ensemble.ERDOS_RENYI, 4, 5, 0.3),
        EnsembleSpec(Ensemble.BOUNDED_DEGREE, 4, 5, 2),
    ]
    sequential = sweep(specs, trials=12, seed=9, threads=1)
    parallel = sweep(specs, trials=12, seed=9, threads=4)
    assert sequential == parallel


def test_sweep_spot_check():
    record = sweep([EnsembleSpec(Ensemble.ERDOS_RENYI, 3, 3, 0.5)], trials=2, with_codec=True)[0]
    assert record.spot_check_failures == 0


def test_sweep_needs_trials():
    with pytest.raises(InvalidParams):
        sweep([EnsembleSpec(Ensemble.ERDOS_RENYI, 3, 3, 0.5)], trials=0)


def test_csv_output(tmp_path):
    specs = [EnsembleSpec(Ensemble.ERDOS_RENYI, 5, 5, 0.2)]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(sweep(specs, trials=4, seed=1), first)
    write_csv(sweep(specs, trials=4, seed=1), second)
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert list(records_to_frame(sweep(specs, trials=1)).columns) == list(CSV_HEADER)
    assert first.read_text().splitlines()[1].endswith(",0")


def test_spot_check_failures_column():
    specs = [EnsembleSpec(Ensemble.ERDOS_RENYI, 3, 3, 0.5)]
    frame = records_to_frame(sweep(specs, trials=2, with_codec=True))
    assert frame["spot_check_failures"].tolist() == [0]


@pytest.mark.slow
def test_threshold_trends_over_the_grid():
    specs = [EnsembleSpec(Ensemble.ERDOS_RENYI, 5, 5, lam) for lam in (0.2, 0.3, 0.4, 0.5)]
    specs += [
        EnsembleSpec(Ensemble.BOUNDED_DEGREE, left_count, 5, k)
        for left_count in (5, 10, 15)
        for k in (2, 3, 4)
    ]
    started = time.perf_counter()
    records = sweep(specs, trials=2000, seed=0)
    assert time.perf_counter() - started < 300
    for record in records:
        assert record.ratio_t2 <= record.ratio_t1
        assert record.ratio_t1 <= record.baseline_ratio + 3 * record.se_t1
    assert min(record.ratio_t2 for record in records) <= 1.80
