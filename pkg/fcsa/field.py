"""Exact prime-field arithmetic shared by the encoder and decoder."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
import logging

import galois
import numpy as np

from .const import DEFAULT_MODULUS, MAX_MODULUS
from .exceptions import InvalidParams, ShapeMismatch, SingularMatrix, ZeroInverse

_LOGGER = logging.getLogger(__name__)


class PrimeField:
    """Class to represent the prime field GF(p) every coded symbol lives in."""

    def __init__(self, modulus: int = DEFAULT_MODULUS) -> None:  # noqa: D107
        if modulus > MAX_MODULUS:
            raise InvalidParams(f"field modulus {modulus} exceeds {MAX_MODULUS}")
        if modulus < 2 or not galois.is_prime(modulus):
            raise InvalidParams(f"field modulus {modulus} is not prime")
        self.modulus = modulus
        self.gf = galois.GF(modulus)
        _LOGGER.debug("created prime field of order %s", modulus)

    def __repr__(self) -> str:
        return f"PrimeField({self.modulus})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(self.modulus)

    def element(self, value: int) -> galois.FieldArray:
        """Return the field element congruent to an integer."""
        return self.gf(int(value) % self.modulus)

    def vector(self, values: Iterable[int]) -> galois.FieldArray:
        """Return a 1-D field array, reducing every entry modulo p."""
        return self.gf(np.asarray([int(v) % self.modulus for v in values], dtype=np.int64))

    def matrix(self, rows: Sequence[Sequence[int]]) -> galois.FieldArray:
        """Return a 2-D field array from nested integers."""
        raw = np.asarray(rows, dtype=object)
        if raw.ndim != 2:
            raise ShapeMismatch(f"expected a 2-D matrix, got {raw.ndim} dimensions")
        return self.gf((raw % self.modulus).astype(np.int64))

    def zeros(self, rows: int, cols: int) -> galois.FieldArray:
        """Return an all-zero matrix."""
        return self.gf.Zeros((rows, cols))

    def identity(self, size: int) -> galois.FieldArray:
        """Return the identity matrix."""
        return self.gf.Identity(size)

    def random_matrix(self, rows: int, cols: int, rng: np.random.Generator) -> galois.FieldArray:
        """Return a uniformly random matrix drawn from rng."""
        return self.gf(rng.integers(0, self.modulus, size=(rows, cols), dtype=np.int64))


def ff_inv(field: PrimeField, value: int | galois.FieldArray) -> galois.FieldArray:
    """Return the multiplicative inverse of value in field."""
    element = field.element(int(value))
    if int(element) == 0:
        raise ZeroInverse("0 has no multiplicative inverse")
    return np.reciprocal(element)


def poly_product_expand(
    field: PrimeField, factors: Iterable[tuple[int, int]]
) -> galois.Poly:
    """Expand the product of (z - root)^multiplicity over all factors."""
    result = galois.Poly.One(field=field.gf)
    for root, multiplicity in factors:
        if multiplicity < 0:
            raise InvalidParams(f"negative multiplicity {multiplicity}")
        if multiplicity == 0:
            continue
        linear = galois.Poly(field.vector([1, -int(root)]))
        result = result * linear**multiplicity
    return result


def poly_eval(poly: galois.Poly, point: int | galois.FieldArray) -> galois.FieldArray:
    """Evaluate poly at a field point."""
    order = poly.field.order
    return poly(poly.field(int(point) % order))


def coefficients_ascending(poly: galois.Poly) -> list[int]:
    """Return the coefficients of poly, constant term first."""
    return [int(c) for c in poly.coeffs[::-1]]


def mat_mul(left: galois.FieldArray, right: galois.FieldArray) -> galois.FieldArray:
    """Multiply two field matrices."""
    if left.ndim != 2 or right.ndim != 2 or left.shape[1] != right.shape[0]:
        raise ShapeMismatch(f"cannot multiply {left.shape} by {right.shape}")
    if type(left) is not type(right):
        raise ShapeMismatch("operands belong to different fields")
    return left @ right


def solve_linear(matrix: galois.FieldArray, rhs: galois.FieldArray) -> galois.FieldArray:
    """Solve matrix @ x = rhs for x; rhs may carry several right-hand sides as columns."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatch(f"system matrix must be square, got {matrix.shape}")
    if rhs.ndim not in (1, 2) or rhs.shape[0] != matrix.shape[0]:
        raise ShapeMismatch(f"right-hand side {rhs.shape} does not match {matrix.shape}")
    try:
        return np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularMatrix(f"singular {matrix.shape[0]}x{matrix.shape[0]} system") from err


def to_int_rows(matrix: galois.FieldArray) -> list[list[int]]:
    """Return the canonical integer representatives of a field matrix."""
    return [[int(v) for v in row] for row in matrix.view(np.ndarray)]
