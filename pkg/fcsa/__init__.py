"""FCSA codes for coded distributed batch matrix multiplication."""
from __future__ import annotations

from .assignment import (
    FccParameters,
    PowerAssignment,
    TaskAssignment,
    TaskGroup,
    optimize_power,
    recovery_threshold,
    single_group_assignment,
    t1_assignment,
    t2_assignment,
    validate,
)
from .codec import CodingPlan, MatrixShape, decode, encode, make_plan, worker_compute
from .field import PrimeField
from .graph import ComputationGraph, baseline_thresholds, lower_bound
from .tensor import builtin_tensor

__version__ = "0.1.0"

__all__ = [
    "CodingPlan",
    "ComputationGraph",
    "FccParameters",
    "MatrixShape",
    "PowerAssignment",
    "PrimeField",
    "TaskAssignment",
    "TaskGroup",
    "baseline_thresholds",
    "builtin_tensor",
    "decode",
    "encode",
    "lower_bound",
    "make_plan",
    "optimize_power",
    "recovery_threshold",
    "single_group_assignment",
    "t1_assignment",
    "t2_assignment",
    "validate",
    "worker_compute",
]
