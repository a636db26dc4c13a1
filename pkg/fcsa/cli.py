"""Command line interface: gen, plan, verify, simulate, sweep and bound."""
from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
import logging
import sys

import voluptuous as vol

from .assignment import (
    AssignmentResult,
    FccParameters,
    custom_assignment,
    single_group_assignment,
    t1_assignment,
    t2_assignment,
)
from .codec import CodingPlan, MatrixShape, encode, make_plan, worker_compute
from .const import (
    DEFAULT_K_GRID,
    DEFAULT_LAMBDA_GRID,
    DEFAULT_MODULUS,
    DEFAULT_RESTARTS,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_SEED,
    EXIT_INVALID_INPUT,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    MAX_MODULUS,
    Ensemble,
    Scheme,
    Side,
    StragglerKind,
    SubsetMode,
    TensorKind,
)
from .documents import (
    Instance,
    dump_instance,
    dump_plan,
    dump_results,
    load_instance,
    load_plan,
    read_json,
    tasks_from_document,
)
from .exceptions import FcsaError, InvalidParams
from .field import PrimeField
from .graph import make_rng, sample_bounded_degree, sample_erdos_renyi
from .simulator import (
    EnsembleSpec,
    StragglerModel,
    records_to_frame,
    run_trial,
    sweep,
    verify_all_subsets,
    verify_erasure_patterns,
    write_csv,
)
from .tensor import builtin_tensor

_LOGGER = logging.getLogger(__name__)

POSITIVE = vol.All(int, vol.Range(min=1))
PROBABILITY = vol.All(float, vol.Range(min=0, max=1, min_included=False, max_included=False))

CLI_SCHEMA = vol.Schema(
    {
        vol.Optional("seed"): vol.All(int, vol.Range(min=0)),
        vol.Optional("modulus"): vol.All(int, vol.Range(min=2, max=MAX_MODULUS)),
        vol.Optional("LA"): vol.Any(POSITIVE, [POSITIVE]),
        vol.Optional("LB"): POSITIVE,
        vol.Optional("lam"): vol.Any(None, PROBABILITY),
        vol.Optional("lambdas"): [PROBABILITY],
        vol.Optional("k"): vol.Any(None, POSITIVE),
        vol.Optional("ks"): [POSITIVE],
        vol.Optional("alpha"): vol.Any(None, POSITIVE),
        vol.Optional("beta"): vol.Any(None, POSITIVE),
        vol.Optional("gamma"): vol.Any(None, POSITIVE),
        vol.Optional("m"): POSITIVE,
        vol.Optional("p"): POSITIVE,
        vol.Optional("n"): POSITIVE,
        vol.Optional("rho"): POSITIVE,
        vol.Optional("workers"): vol.Any(None, POSITIVE),
        vol.Optional("trials"): POSITIVE,
        vol.Optional("threads"): POSITIVE,
        vol.Optional("samples"): POSITIVE,
        vol.Optional("budget"): POSITIVE,
        vol.Optional("restarts"): POSITIVE,
        vol.Optional("stragglers"): vol.All(int, vol.Range(min=0)),
        vol.Optional("failure_rate"): vol.All(float, vol.Range(min=0, max=1, max_included=False)),
    },
    extra=vol.ALLOW_EXTRA,
)


def _fcc_tensor(args: argparse.Namespace, prime_field: PrimeField):
    return builtin_tensor(args.tensor, args.m, args.p, args.n, prime_field=prime_field)


def _assignment(
    args: argparse.Namespace, instance: Instance, fcc: FccParameters
) -> AssignmentResult:
    graph = instance.graph
    search = {"budget": args.budget, "restarts": args.restarts, "seed": args.seed}
    scheme = Scheme(args.scheme)
    if scheme is Scheme.T1:
        return t1_assignment(graph, fcc)
    if scheme is Scheme.T2:
        return t2_assignment(graph, Side(args.side), fcc, **search)
    if scheme is Scheme.SINGLE:
        return single_group_assignment(graph, fcc, **search)
    if args.groups is None:
        raise InvalidParams("scheme custom needs --groups")
    tasks, powers = tasks_from_document(read_json(args.groups))
    return custom_assignment(graph, tasks, powers, fcc, **search)


def _inputs(instance: Instance, seed: int):
    if instance.matrices_a is not None and instance.matrices_b is not None:
        return list(instance.matrices_a), list(instance.matrices_b)
    rng = make_rng(seed, 1)
    prime_field, graph = instance.prime_field, instance.graph
    alpha, beta, gamma = instance.shape
    a_list = [prime_field.random_matrix(alpha, beta, rng) for _ in range(graph.left_count)]
    b_list = [prime_field.random_matrix(beta, gamma, rng) for _ in range(graph.right_count)]
    return a_list, b_list


def cmd_gen(args: argparse.Namespace) -> int:
    """Sample a computation graph and write it as an instance document."""
    ensemble = Ensemble(args.ensemble)
    rng = make_rng(args.seed)
    if ensemble is Ensemble.ERDOS_RENYI:
        if args.lam is None:
            raise InvalidParams("ensemble er needs --lambda")
        graph = sample_erdos_renyi(args.LA, args.LB, args.lam, rng)
    else:
        if args.k is None:
            raise InvalidParams("ensemble deg needs --k")
        graph = sample_bounded_degree(args.LA, args.LB, args.k, rng)
    prime_field = PrimeField(args.modulus)
    shape = MatrixShape(args.alpha or 1, args.beta or 1, args.gamma or 1)
    instance = Instance(prime_field, graph, shape)
    if args.with_matrices:
        a_list, b_list = _inputs(instance, args.seed)
        instance = Instance(prime_field, graph, shape, tuple(a_list), tuple(b_list))
    dump_instance(instance, args.out)
    print(
        f"wrote {graph.left_count}x{graph.right_count} instance with |S|={graph.size} to {args.out}"
    )
    return EXIT_OK


def _report_lines(plan: CodingPlan) -> list[str]:
    report = plan.report
    lines = [
        f"R={report.threshold}, lower={report.lower_bound}, baseline={report.baseline.combined}"
    ]
    lines.append(
        f"min_A={report.left_min} min_B={report.right_min} "
        f"rational={report.rational_terms} polynomial={report.polynomial_terms} "
        f"workers={plan.workers}"
    )
    if report.costs is not None:
        costs = report.costs
        lines.append(
            f"U_A={costs.upload_a} U_B={costs.upload_b} D_C={costs.download} "
            f"C_w={costs.worker_ops} C_A={costs.encode_a_ops} C_B={costs.encode_b_ops} "
            f"C_d={costs.decode_ops:.1f}"
        )
    return lines


def cmd_plan(args: argparse.Namespace) -> int:
    """Build a plan for an instance and print its threshold report."""
    instance = load_instance(args.instance)
    tensor = _fcc_tensor(args, instance.prime_field)
    fcc = FccParameters(tensor.m, tensor.p, tensor.n, args.rho, tensor.rank)
    result = _assignment(args, instance, fcc)
    plan = make_plan(
        instance.graph,
        result.tasks,
        result.powers,
        workers=args.workers,
        tensor=tensor,
        rho=args.rho,
        prime_field=instance.prime_field,
        shape=instance.shape,
    )
    if args.out:
        dump_plan(plan, args.out)
    print("\n".join(_report_lines(plan)))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Decode from every (or a sample of) R-subset and compare with direct products."""
    instance = load_instance(args.instance)
    plan = load_plan(args.plan, instance, args.workers)
    a_list, b_list = _inputs(instance, args.seed)
    results = [worker_compute(share) for share in encode(plan, a_list, b_list)]
    if args.dump_results:
        dump_results(results, args.dump_results)
    samples = args.samples if SubsetMode(args.subsets) is SubsetMode.SAMPLED else None
    report = verify_all_subsets(plan, a_list, b_list, results, samples=samples, seed=args.seed)
    if not report.passed:
        print(f"FAILED: decoding from workers {list(report.first_failure)} disagrees")
        return EXIT_VERIFY_FAILED
    print(f"verified {report.checked} subsets of {plan.threshold} out of {plan.workers} workers")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run straggler trials against a plan."""
    instance = load_instance(args.instance)
    plan = load_plan(args.plan, instance, args.workers)
    a_list, b_list = _inputs(instance, args.seed)
    model = StragglerModel(StragglerKind(args.model), args.stragglers, args.failure_rate)
    if args.all_patterns:
        report = verify_erasure_patterns(plan, a_list, b_list, model)
        if not report.passed:
            print(f"FAILED: erasing workers {list(report.worst_erasure)} breaks decoding")
            return EXIT_VERIFY_FAILED
        print(f"decoded after all {report.checked} erasures of {args.stragglers} workers")
        return EXIT_OK
    successes = decoded = survivors = 0
    for trial in range(args.trials):
        outcome = run_trial(plan, a_list, b_list, model, make_rng(args.seed, trial), args.threads)
        successes += outcome.success
        decoded += outcome.decoded
        survivors += len(outcome.survivors)
        if outcome.decoded and not outcome.success:
            _LOGGER.error("trial %s decoded wrong products", trial)
    print(
        f"success={successes / args.trials:.4f} decoded={decoded} "
        f"mean_survivors={survivors / args.trials:.2f} "
        f"predicted={model.success_probability(plan.workers, plan.threshold):.4f}"
    )
    return EXIT_OK if decoded == successes else EXIT_VERIFY_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    """Monte Carlo sweep of T1/T2 thresholds over an ensemble grid."""
    ensemble = Ensemble(args.ensemble)
    params = args.lambdas if ensemble is Ensemble.ERDOS_RENYI else args.ks
    specs = [EnsembleSpec(ensemble, la, args.LB, param) for la in args.LA for param in params]
    if ensemble is Ensemble.BOUNDED_DEGREE and any(k > args.LB for k in params):
        raise InvalidParams(f"every k must be at most L_B={args.LB}")
    records = sweep(specs, args.schemes, args.trials, args.seed, args.threads, args.with_codec)
    if args.out:
        write_csv(records, args.out)
    print(records_to_frame(records).to_string(index=False))
    failures = sum(record.spot_check_failures for record in records)
    return EXIT_VERIFY_FAILED if failures else EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    """Print thresholds, bounds and gap ratios for an instance."""
    instance = load_instance(args.instance)
    graph = instance.graph
    tensor = _fcc_tensor(args, instance.prime_field)
    fcc = FccParameters(tensor.m, tensor.p, tensor.n, args.rho, tensor.rank)
    t1 = t1_assignment(graph, fcc).report
    t2 = t2_assignment(graph, Side.BEST, fcc, args.budget, args.restarts, args.seed).report
    lower = t1.lower_bound
    print(f"|S|={graph.size} min_dA={min(graph.left_degrees)} min_dB={min(graph.right_degrees)}")
    print(
        f"lower={lower} baseline_poly={t1.baseline.polynomial} baseline_batch={t1.baseline.batch}"
    )
    print(
        f"R_T1={t1.threshold} ({t1.threshold / lower:.3f}x) "
        f"R_T2={t2.threshold} ({t2.threshold / lower:.3f}x)"
    )
    print(f"gap_bound={t1.gap_bound:.3f}")
    if fcc.p == 1:
        limit = 2 * fcc.m * fcc.n * graph.size
        status = "ok" if max(t1.threshold, t2.threshold) <= limit else "violated"
        print(f"factor_two={status} (<= {limit})")
    return EXIT_OK


def _add_search(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    parser.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)


def _add_fcc(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--p", type=int, default=1)
    parser.add_argument("--n", type=int, default=1)
    parser.add_argument("--rho", type=int, default=1)
    parser.add_argument(
        "--tensor", choices=[k.value for k in TensorKind], default=TensorKind.NAIVE.value
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level to stderr")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    parser = argparse.ArgumentParser(
        prog="fcsa", description="FCSA codes for batch matrix multiplication"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="sample a random instance")
    gen.add_argument("--ensemble", choices=[e.value for e in Ensemble], required=True)
    gen.add_argument("--LA", type=int, required=True)
    gen.add_argument("--LB", type=int, required=True)
    gen.add_argument("--lambda", dest="lam", type=float)
    gen.add_argument("--k", type=int)
    gen.add_argument("--alpha", type=int)
    gen.add_argument("--beta", type=int)
    gen.add_argument("--gamma", type=int)
    gen.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    gen.add_argument("--with-matrices", action="store_true")
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gen)

    plan = commands.add_parser("plan", parents=[common], help="build a coding plan")
    plan.add_argument("--instance", required=True)
    plan.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.T2.value)
    plan.add_argument("--side", choices=[s.value for s in Side], default=Side.BEST.value)
    plan.add_argument("--groups", help="plan document with the groups for scheme custom")
    plan.add_argument("--workers", type=int)
    plan.add_argument("--out")
    _add_fcc(plan)
    _add_search(plan)
    plan.set_defaults(handler=cmd_plan)

    verify = commands.add_parser("verify", parents=[common], help="check decoding from R-subsets")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--plan", required=True)
    verify.add_argument("--workers", type=int)
    verify.add_argument(
        "--subsets", choices=[s.value for s in SubsetMode], default=SubsetMode.ALL.value
    )
    verify.add_argument("--samples", type=int, default=100)
    verify.add_argument("--dump-results")
    verify.set_defaults(handler=cmd_verify)

    simulate = commands.add_parser("simulate", parents=[common], help="run straggler trials")
    simulate.add_argument("--instance", required=True)
    simulate.add_argument("--plan", required=True)
    simulate.add_argument("--workers", type=int)
    simulate.add_argument(
        "--model",
        choices=[k.value for k in StragglerKind],
        default=StragglerKind.ERASURE.value,
    )
    simulate.add_argument("--stragglers", type=int, default=0)
    simulate.add_argument("--failure-rate", type=float, default=0.0)
    simulate.add_argument("--trials", type=int, default=100)
    simulate.add_argument("--threads", type=int, default=4)
    simulate.add_argument(
        "--all-patterns",
        action="store_true",
        help="erase every choice of --stragglers workers instead of sampling",
    )
    simulate.set_defaults(handler=cmd_simulate)

    sweep_parser = commands.add_parser(
        "sweep", parents=[common], help="Monte Carlo threshold sweep"
    )
    sweep_parser.add_argument("--ensemble", choices=[e.value for e in Ensemble], required=True)
    sweep_parser.add_argument("--LA", type=int, nargs="+", default=[5])
    sweep_parser.add_argument("--LB", type=int, default=5)
    sweep_parser.add_argument("--lambdas", type=float, nargs="+", default=list(DEFAULT_LAMBDA_GRID))
    sweep_parser.add_argument("--ks", type=int, nargs="+", default=list(DEFAULT_K_GRID))
    sweep_parser.add_argument(
        "--schemes",
        nargs="+",
        choices=[Scheme.T1.value, Scheme.T2.value],
        default=[Scheme.T1.value, Scheme.T2.value],
    )
    sweep_parser.add_argument("--trials", type=int, default=100)
    sweep_parser.add_argument("--threads", type=int, default=4)
    sweep_parser.add_argument("--with-codec", action="store_true")
    sweep_parser.add_argument("--out")
    sweep_parser.set_defaults(handler=cmd_sweep)

    bound = commands.add_parser("bound", parents=[common], help="report bounds and thresholds")
    bound.add_argument("--instance", required=True)
    _add_fcc(bound)
    _add_search(bound)
    bound.set_defaults(handler=cmd_bound)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the fcsa command."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        CLI_SCHEMA({k: v for k, v in vars(args).items() if k != "handler"})
        return handler(args)
    except vol.Invalid as err:
        print(f"invalid arguments: {err}", file=sys.stderr)
    except FcsaError as err:
        print(f"error: {err}", file=sys.stderr)
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
    return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
