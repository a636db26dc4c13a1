"""Type definitions for the FCSA documents."""
from __future__ import annotations

from typing import TypedDict

IntMatrix = list[list[int]]
Edge = tuple[int, int]


class _InstanceDocument(TypedDict):
    """Mandatory attributes of an instance document."""

    field_modulus: int
    alpha: int
    beta: int
    gamma: int
    L_A: int
    L_B: int
    edges: list[list[int]]


class InstanceDocument(_InstanceDocument, total=False):
    """Instance document: the computation list plus optional input matrices."""

    matrices_A: list[IntMatrix]
    matrices_B: list[IntMatrix]


class GroupDocument(TypedDict):
    """One task group of a plan document."""

    A: list[int]
    B: list[int]


PlanDocument = TypedDict(
    "PlanDocument",
    {
        "groups": list[GroupDocument],
        "P_A": list[list[int]],
        "P_B": list[list[int]],
        "roots": list[int],
        "eval_points": list[int],
        "m": int,
        "p": int,
        "n": int,
        "rho": int,
        "tensor": str,
        "R": int,
    },
)


class ShareDocument(TypedDict):
    """Encoded inputs sent to one worker."""

    worker: int
    A: IntMatrix
    B: IntMatrix


class ResultDocument(TypedDict):
    """Product returned by one worker."""

    worker: int
    C: IntMatrix
